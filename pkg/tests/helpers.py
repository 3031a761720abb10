"""Shared builders for tests."""

import random

from dprshare.assignment import FabricState
from dprshare.model import HD_720, ModuleSpec, PipelineSpec, PlatformSpec, ResourceVector, RPSpec, zc706


def chain(pid, n, lines=10, ii=1, prefix=None):
    prefix = prefix or pid.lower()
    return PipelineSpec.linear(
        pid, [ModuleSpec(f"{prefix}{i + 1}", buffer_lines=lines, initiation_interval=ii) for i in range(n)]
    )


def small_platform(n=6, **kw):
    return zc706(n_small=n, n_large=0, **kw)


FMT720 = HD_720


def random_instance(rng: random.Random):
    """A random single transition on at most six RPs with mixed capacities,
    bitstream sizes and preloaded modules."""
    n_rps = rng.randint(1, 6)
    caps = [ResourceVector(rng.choice((100, 200, 400)), rng.choice((2, 4)), 0) for _ in range(n_rps)]
    pool = [
        ModuleSpec(f"m{i}", demand=ResourceVector(rng.choice((50, 100, 200, 300)), rng.choice((1, 2, 4)), 0))
        for i in range(8)
    ]
    parts = tuple(
        RPSpec(f"R{j}", rng.choice((150e3, 300e3, 1.1e6)), caps[j], rng.choice([None] + [m.id for m in pool]))
        for j in range(n_rps)
    )
    platform = PlatformSpec(partitions=parts)
    n_st = rng.randint(0, n_rps)
    pipe = PipelineSpec.linear("P", rng.sample(pool, n_st))
    state = FabricState.from_platform(platform)
    return state, pipe, platform
