"""Seeded random scenarios for property tests and ``--seed``."""

from __future__ import annotations

import random
from typing import Optional

from .model import (
    ModuleSpec,
    PipelineSpec,
    PlatformSpec,
    RPSpec,
    SINK,
    SOURCE,
    ScheduleParams,
    format_for,
)
from .scenario import Scenario
from .simulator import MODES


def random_pipeline(
    rng: random.Random,
    pid: str,
    n_stages: int,
    pool: Optional[list[ModuleSpec]] = None,
    fork_prob: float = 0.35,
) -> PipelineSpec:
    """A linear chain, or for four or more stages possibly a fork/join DAG:
    entry -> branches -> join -> (rest of chain)."""
    pool = pool or []

    def plain(tag: str) -> ModuleSpec:
        if pool and rng.random() < 0.5:
            return rng.choice(pool)
        m = ModuleSpec(
            f"{pid}_{tag}",
            buffer_lines=rng.randint(0, 20),
            initiation_interval=rng.choice((1, 1, 1, 2, 4)),
        )
        pool.append(m)
        return m

    if n_stages < 4 or rng.random() >= fork_prob:
        used: set[str] = set()
        mods = []
        for j in range(n_stages):
            m = plain(f"m{j + 1}")
            while m.id in used:  # a module instance runs once per pipeline
                m = ModuleSpec(f"{pid}_m{j + 1}", buffer_lines=m.buffer_lines, initiation_interval=m.initiation_interval)
            used.add(m.id)
            mods.append(m)
        return PipelineSpec.linear(pid, mods)

    branches = rng.randint(2, min(3, n_stages - 2))
    inner = n_stages - 2
    sizes = [1] * branches
    for _ in range(inner - branches):
        sizes[rng.randrange(branches)] += 1
    # leftover stages after the join (none here: all inner stages sit on branches)
    fork = ModuleSpec(f"{pid}_fork", buffer_lines=rng.randint(0, 8), out_ports=branches)
    join = ModuleSpec(f"{pid}_join", buffer_lines=rng.randint(0, 8), in_ports=branches)
    stages = {"fork": fork}
    edges = [(SOURCE, "fork")]
    for b, size in enumerate(sizes):
        prev = "fork"
        for j in range(size):
            sid = f"b{b + 1}_{j + 1}"
            stages[sid] = ModuleSpec(
                f"{pid}_{sid}",
                buffer_lines=rng.randint(0, 20),
                initiation_interval=rng.choice((1, 1, 2)),
            )
            edges.append((prev, sid))
            prev = sid
        edges.append((prev, "join"))
    stages["join"] = join
    edges.append(("join", SINK))
    return PipelineSpec(pid, stages, tuple(edges))


def random_platform(rng: random.Random, n_rps: int, dma_engines: int = 5, max_dram_streams: int = 5) -> PlatformSpec:
    sizes = (150_000, 300_000, 300_000, 600_000, 1_100_000)
    parts = tuple(RPSpec(f"RP{i + 1}", rng.choice(sizes)) for i in range(n_rps))
    return PlatformSpec(partitions=parts, dma_engines=dma_engines, max_dram_streams=max_dram_streams)


def random_scenario(seed: int, mode: Optional[str] = None) -> Scenario:
    """Small random scenario; the same seed always gives the same scenario."""
    rng = random.Random(seed)
    n_rps = rng.randint(3, 6)
    n_pipes = rng.randint(1, 3)
    pool: list[ModuleSpec] = []
    pipes = [
        random_pipeline(rng, f"P{i + 1}", rng.randint(1, n_rps), pool) for i in range(n_pipes)
    ]
    mode = mode or rng.choice(MODES)
    # staggered plans may decouple every inner link, so give them DMA headroom
    extra = 8 if mode == "staggered" else 5
    platform = random_platform(rng, n_rps, dma_engines=extra, max_dram_streams=extra)
    modules = {m.id: m for p in pipes for m in p.stages.values()}
    return Scenario(
        name=f"random-{seed}",
        platform=platform,
        format=format_for(rng.choice(("720p", "1080p"))),
        modules=modules,
        pipelines=pipes,
        schedule=ScheduleParams(rng.randint(1, 3), rng.randint(1, 4)),
        mode=mode,
        rounds=3,
        fifo_frames=4.0 if mode == "staggered" else 1.0,
        description="generated",
    )
