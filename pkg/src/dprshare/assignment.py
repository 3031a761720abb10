"""Stage-to-partition assignment and crossbar routing across pipeline switches.

Reconfiguring an RP costs milliseconds while rewriting crossbar routes costs
well under a microsecond per link, so the planner reuses whatever modules
are already resident, wherever they sit, and only reconfigures the rest.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .model import (
    RESERVED_DMA,
    ModelError,
    PipelineSpec,
    PlatformSpec,
    RPSpec,
    SINK,
    SOURCE,
    VideoFormat,
)
from .perf import ZERO, reconfig_time
from .units import Quantity

log = logging.getLogger(__name__)

CAMERA_IN = "camera-in"
DISPLAY_OUT = "display-out"
RP_IN = "rp-in"
RP_OUT = "rp-out"
DMA_IN = "dma-in"
DMA_OUT = "dma-out"

DIRECT = "direct"
THRU_DRAM = "thru-dram"

_SOURCE_KINDS = {CAMERA_IN, RP_OUT, DMA_OUT}
_SINK_KINDS = {DISPLAY_OUT, RP_IN, DMA_IN}

# exhaustive plan_round limits
MAX_EXACT_RPS = 6
MAX_EXACT_PIPELINES = 4
# search nodes before the exact planner settles for its best plan so far
EXACT_NODE_BUDGET = 40_000


class PlanningError(ModelError):
    pass


class InsufficientRPsError(PlanningError):
    pass


class ModuleFitError(PlanningError):
    pass


class InstanceTooLargeError(PlanningError):
    pass


# -- routes ------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class Endpoint:
    kind: str
    owner: str = ""
    port: int = 0

    def __str__(self) -> str:
        if self.kind in (RP_IN, RP_OUT):
            return f"{self.owner}.{'in' if self.kind == RP_IN else 'out'}{self.port}"
        return self.kind if not self.owner else f"{self.kind}:{self.owner}"


@dataclass(frozen=True, order=True)
class Route:
    source: Endpoint
    sink: Endpoint
    kind: str = DIRECT

    @property
    def reserved(self) -> bool:
        """Camera/display double-buffer streams use the reserved DMA engines."""
        return self.source.kind == CAMERA_IN or self.sink.kind == DISPLAY_OUT

    def __str__(self) -> str:
        arrow = "=>" if self.kind == THRU_DRAM else "->"
        return f"{self.source}{arrow}{self.sink}"


@dataclass(frozen=True)
class Violation:
    kind: str
    endpoints: tuple[str, ...]
    message: str


def validate_topology(
    routes: Iterable[Route], platform: PlatformSpec, fmt: Optional[VideoFormat] = None
) -> list[Violation]:
    """Check one timeslice's interconnect settings.

    Returns an empty list when the routes are realizable.  The camera and
    display double-buffers always hold two DRAM streams and two DMA engines,
    whether or not their routes are listed.
    """
    routes = list(routes)
    out: list[Violation] = []
    known = {rp.id for rp in platform.partitions}

    for r in routes:
        if r.source.kind not in _SOURCE_KINDS or r.sink.kind not in _SINK_KINDS:
            out.append(Violation("bad-endpoint", (str(r.source), str(r.sink)), f"route {r} has a misdirected endpoint"))
        for ep in (r.source, r.sink):
            if ep.kind in (RP_IN, RP_OUT) and ep.owner not in known:
                out.append(Violation("unknown-rp", (str(ep),), f"route {r} names unknown RP {ep.owner!r}"))
        if r.kind not in (DIRECT, THRU_DRAM):
            out.append(Violation("bad-kind", (str(r),), f"unknown route kind {r.kind!r}"))

    drivers: dict[Endpoint, list[Route]] = {}
    for r in routes:
        drivers.setdefault(r.sink, []).append(r)
    for sink, rs in sorted(drivers.items()):
        if len(rs) > 1:
            srcs = tuple(sorted(str(r.source) for r in rs))
            out.append(Violation("multiple-drivers", (str(sink), *srcs), f"{len(rs)} sources drive {sink}"))

    decoupling = [r for r in routes if r.kind == THRU_DRAM and not r.reserved]
    budget = platform.dma_engines - RESERVED_DMA
    if len(decoupling) > budget:
        out.append(
            Violation(
                "dma-budget",
                tuple(str(r) for r in decoupling),
                f"{len(decoupling)} decoupling FIFOs requested, {budget} DMA engines free",
            )
        )
    streams = RESERVED_DMA + len(decoupling)
    if streams > platform.max_dram_streams:
        out.append(
            Violation(
                "dram-streams",
                tuple(str(r) for r in decoupling),
                f"{streams} concurrent DRAM streams exceed the ceiling of {platform.max_dram_streams}",
            )
        )
    if fmt is not None and streams * platform.per_stream_bandwidth(fmt) > platform.dram_bandwidth:
        out.append(
            Violation(
                "dram-bandwidth",
                tuple(str(r) for r in decoupling),
                f"{streams} streams at {fmt.name} exceed DRAM bandwidth",
            )
        )
    return out


def build_routes(
    pipeline: PipelineSpec,
    assignment: Mapping[str, str],
    decoupled: Iterable[str] = (),
) -> tuple[Route, ...]:
    """Routes realizing ``pipeline`` on the assigned RPs.

    Ports are numbered per stage in edge declaration order.  Links into a
    stage listed in ``decoupled`` go through a DRAM FIFO.
    """
    decoupled = set(decoupled)
    in_port: dict[str, int] = {}
    out_port: dict[str, int] = {}
    routes = []
    for u, v in pipeline.edges:
        if u == SOURCE:
            src = Endpoint(CAMERA_IN)
        else:
            src = Endpoint(RP_OUT, assignment[u], out_port.get(u, 0))
            out_port[u] = out_port.get(u, 0) + 1
        if v == SINK:
            dst = Endpoint(DISPLAY_OUT)
        else:
            dst = Endpoint(RP_IN, assignment[v], in_port.get(v, 0))
            in_port[v] = in_port.get(v, 0) + 1
        if src.kind == CAMERA_IN or dst.kind == DISPLAY_OUT:
            kind = THRU_DRAM
        elif v in decoupled:
            kind = THRU_DRAM
        else:
            kind = DIRECT
        routes.append(Route(src, dst, kind))
    return tuple(routes)


def routes_to_edges(routes: Iterable[Route], assignment: Mapping[str, str]) -> set[tuple[str, str]]:
    """Inverse of :func:`build_routes` on stage connectivity."""
    by_rp = {rp: s for s, rp in assignment.items()}

    def name(ep: Endpoint) -> str:
        if ep.kind == CAMERA_IN:
            return SOURCE
        if ep.kind == DISPLAY_OUT:
            return SINK
        return by_rp[ep.owner]

    return {(name(r.source), name(r.sink)) for r in routes}


# -- fabric state and plans ------------------------------------------------------


@dataclass(frozen=True)
class FabricState:
    loaded: Mapping[str, Optional[str]]
    last_used: Mapping[str, int] = field(default_factory=dict)
    routes: tuple[Route, ...] = ()
    step: int = 0

    @classmethod
    def from_platform(cls, platform: PlatformSpec) -> "FabricState":
        return cls({rp.id: rp.loaded for rp in platform.partitions})

    @classmethod
    def empty(cls, platform: PlatformSpec) -> "FabricState":
        return cls({rp.id: None for rp in platform.partitions})

    def apply(self, plan: "TransitionPlan") -> "FabricState":
        loaded = dict(self.loaded)
        for rp_id, mod in plan.reconfigure:
            loaded[rp_id] = mod
        used = dict(self.last_used)
        for rp_id in plan.assignment.values():
            used[rp_id] = self.step + 1
        return FabricState(loaded, used, plan.routes, self.step + 1)

    def key(self) -> tuple:
        return tuple(sorted(self.loaded.items(), key=lambda kv: kv[0]))


@dataclass(frozen=True)
class TransitionPlan:
    pipeline: str
    assignment: Mapping[str, str]  # stage -> RP
    reconfigure: tuple[tuple[str, str], ...]  # (RP, module), in stage order
    routes: tuple[Route, ...]
    reconfig_time_total: Quantity
    route_config_time: Quantity

    @property
    def n_reconfig(self) -> int:
        return len(self.reconfigure)

    def reconfigured_stages(self) -> dict[str, str]:
        rps = {rp for rp, _ in self.reconfigure}
        return {s: rp for s, rp in self.assignment.items() if rp in rps}

    @property
    def decoupling_routes(self) -> tuple[Route, ...]:
        return tuple(r for r in self.routes if r.kind == THRU_DRAM and not r.reserved)


def _check_instance(pipeline: PipelineSpec, platform: PlatformSpec) -> list[str]:
    order = pipeline.topo_order()
    if len(order) > len(platform.partitions):
        raise InsufficientRPsError(
            f"pipeline {pipeline.id} has {len(order)} stages but only "
            f"{len(platform.partitions)} RPs exist"
        )
    for s in order:
        mod = pipeline.stages[s]
        if not any(mod.fits(rp) for rp in platform.partitions):
            raise ModuleFitError(f"module {mod.id} (stage {s}) fits no RP")
    return order


def make_plan(
    state: FabricState,
    pipeline: PipelineSpec,
    platform: PlatformSpec,
    assignment: Mapping[str, str],
    decouple: bool = False,
) -> TransitionPlan:
    """Derive the reconfiguration set and routes of a given assignment."""
    order = pipeline.topo_order()
    reconf = []
    total = ZERO
    stages_reconf = []
    for s in order:
        rp_id = assignment[s]
        mod = pipeline.stages[s].id
        if state.loaded.get(rp_id) != mod:
            reconf.append((rp_id, mod))
            stages_reconf.append(s)
            total = total + reconfig_time(platform.rp(rp_id), platform)
    decoupled = [s for s in stages_reconf if s != pipeline.entry] if decouple else []
    routes = build_routes(pipeline, assignment, decoupled)
    return TransitionPlan(
        pipeline=pipeline.id,
        assignment={s: assignment[s] for s in order},
        reconfigure=tuple(reconf),
        routes=routes,
        reconfig_time_total=total,
        route_config_time=len(routes) * platform.route_link_time,
    )


def _lru_rank(state: FabricState, platform: PlatformSpec) -> dict[str, int]:
    """Eviction preference: empty RPs first, then least recently used."""
    idx = {rp.id: i for i, rp in enumerate(platform.partitions)}

    def key(rp: RPSpec):
        if state.loaded.get(rp.id) is None:
            return (0, 0, idx[rp.id])
        return (1, state.last_used.get(rp.id, -1), idx[rp.id])

    ranked = sorted(platform.partitions, key=key)
    return {rp.id: i for i, rp in enumerate(ranked)}


def plan_transition(
    state: FabricState,
    next_pipeline: PipelineSpec,
    platform: PlatformSpec,
    decouple: bool = False,
) -> TransitionPlan:
    """Assign ``next_pipeline``'s stages to RPs with the fewest reconfigurations.

    Ties go to the smaller total reconfiguration time, then to evicting the
    least recently used modules.  Solved as a min-cost bipartite matching
    with integer lexicographic weights.
    """
    order = _check_instance(next_pipeline, platform)
    if not order:
        return make_plan(state, next_pipeline, platform, {}, decouple)
    rps = platform.partitions
    n, m = len(order), len(rps)
    rank = _lru_rank(state, platform)
    times_ns = [int(round(float(reconfig_time(rp, platform)) * 1e9)) for rp in rps]
    k_time = n * m + 1
    per_stage_max = max(times_ns) * k_time + m
    big = (n + 1) * per_stage_max + 1
    infeasible = (n + 1) * big

    cost = np.zeros((n, m), dtype=np.float64)
    for i, s in enumerate(order):
        mod = next_pipeline.stages[s]
        for j, rp in enumerate(rps):
            if not mod.fits(rp):
                cost[i, j] = infeasible
            elif state.loaded.get(rp.id) == mod.id:
                cost[i, j] = 0
            else:
                cost[i, j] = big + times_ns[j] * k_time + rank[rp.id]
    rows, cols = linear_sum_assignment(cost)
    if any(cost[r, c] >= infeasible for r, c in zip(rows, cols)):
        raise ModuleFitError(f"pipeline {next_pipeline.id}: no RP assignment satisfies capacities")
    assignment = {order[r]: rps[c].id for r, c in zip(rows, cols)}
    return make_plan(state, next_pipeline, platform, assignment, decouple)


def brute_force_min_reconfigs(
    state: FabricState, next_pipeline: PipelineSpec, platform: PlatformSpec
) -> int:
    """Exact minimum reconfiguration count by enumerating every injective,
    capacity-respecting stage-to-RP assignment."""
    order = _check_instance(next_pipeline, platform)
    rps = platform.partitions
    if len(rps) > 8 or len(order) > 8:
        raise InstanceTooLargeError("brute force is limited to 8 RPs and 8 stages")
    mods = [next_pipeline.stages[s] for s in order]
    best = None
    for perm in itertools.permutations(range(len(rps)), len(order)):
        if not all(mods[i].fits(rps[j]) for i, j in enumerate(perm)):
            continue
        n = sum(state.loaded.get(rps[j].id) != mods[i].id for i, j in enumerate(perm))
        if best is None or n < best:
            best = n
    if best is None:
        raise ModuleFitError(f"pipeline {next_pipeline.id}: no RP assignment satisfies capacities")
    return best


# -- whole rounds --------------------------------------------------------------------


@dataclass(frozen=True)
class RoundPlan:
    """``warmup`` configures the fabric from the initial state through one
    lap; ``steady`` repeats every round afterwards, ``steady[0]`` being the
    wrap-around switch from the last pipeline to the first."""

    warmup: tuple[TransitionPlan, ...]
    steady: tuple[TransitionPlan, ...]
    start_state: FabricState  # fabric state at the start of a steady round
    exact: bool

    @property
    def reconfigs_per_round(self) -> int:
        return sum(p.n_reconfig for p in self.steady)

    @property
    def reconfig_time_per_round(self) -> Quantity:
        return sum((p.reconfig_time_total for p in self.steady), ZERO)


def _laps(initial, sequence, platform, assignments, decouple):
    state = initial
    warm = []
    for pipe, asg in zip(sequence, assignments):
        plan = make_plan(state, pipe, platform, asg, decouple)
        warm.append(plan)
        state = state.apply(plan)
    start = state
    steady = []
    for pipe, asg in zip(sequence, assignments):
        plan = make_plan(state, pipe, platform, asg, decouple)
        steady.append(plan)
        state = state.apply(plan)
    return tuple(warm), tuple(steady), start


def plan_round(
    initial: FabricState,
    sequence: Sequence[PipelineSpec],
    platform: PlatformSpec,
    decouple: bool = False,
) -> RoundPlan:
    """Plan a repeating round-robin cycle through ``sequence``.

    Small instances (at most 6 RPs and 4 pipelines) are solved exactly for
    the minimum steady-state reconfiguration time per round, counting the
    wrap-around switch.  Larger ones iterate :func:`plan_transition` until
    the round reaches a fixed point, which can miss the optimum.
    """
    sequence = list(sequence)
    for p in sequence:
        _check_instance(p, platform)
    if not sequence:
        return RoundPlan((), (), initial, True)
    if len(platform.partitions) <= MAX_EXACT_RPS and len(sequence) <= MAX_EXACT_PIPELINES:
        seed = _greedy_round(initial, sequence, platform, decouple)
        assignments, exact = _exact_cycle(sequence, platform, [dict(p.assignment) for p in seed.steady])
        warm, steady, start = _laps(initial, sequence, platform, assignments, decouple)
        return RoundPlan(warm, steady, start, exact)
    return _greedy_round(initial, sequence, platform, decouple)


def _greedy_round(initial, sequence, platform, decouple) -> RoundPlan:
    state = initial
    warm = []
    for p in sequence:
        plan = plan_transition(state, p, platform, decouple)
        warm.append(plan)
        state = state.apply(plan)
    seen = {}
    laps = [tuple(warm)]
    for _ in range(4 * len(sequence) + 4):
        key = state.key()
        start = state
        lap = []
        for p in sequence:
            plan = plan_transition(state, p, platform, decouple)
            lap.append(plan)
            state = state.apply(plan)
        if key in seen and state.key() == key:
            return RoundPlan(tuple(warm), tuple(lap), start, False)
        seen[key] = True
        laps.append(tuple(lap))
    log.warning("greedy round plan did not reach a fixed point; using the last lap")
    return RoundPlan(tuple(warm), tuple(lap), start, False)


def _unmatched(modules, residents) -> int:
    """Modules that can find neither a matching resident nor a blank RP
    among ``residents``, hence must pay a reconfiguration now."""
    avail: dict = {}
    for r in residents:
        avail[r] = avail.get(r, 0) + 1
    blank = avail.pop(None, 0)
    short = 0
    for x in modules:
        if avail.get(x.id, 0) > 0:
            avail[x.id] -= 1
        else:
            short += 1
    return max(0, short - blank)


def _cyclic_cost(sequence, assignments, platform) -> tuple[int, int]:
    """Steady-state (ns, count) of repeating ``assignments`` forever: an RP
    is reconfigured whenever its module differs from the one it ran last."""
    per_rp: dict[str, list[str]] = {}
    for pipe, asg in zip(sequence, assignments):
        for s in pipe.topo_order():
            per_rp.setdefault(asg[s], []).append(pipe.stages[s].id)
    t = c = 0
    for rp_id, mods in per_rp.items():
        ns = int(round(float(reconfig_time(platform.rp(rp_id), platform)) * 1e9))
        changes = sum(1 for i, mod in enumerate(mods) if mods[i - 1] != mod)
        t += ns * changes
        c += changes
    return t, c


def _exact_cycle(sequence, platform, incumbent=None, budget=EXACT_NODE_BUDGET):
    """Solve the round in whichever rotation or reflection puts the longest
    pipeline last; the cyclic cost is the same for all of them."""
    n = len(sequence)
    orders = []
    for r in range(n):
        rot = [(r + i) % n for i in range(n)]
        orders += [rot, rot[::-1]]
    size = [len(p.stages) for p in sequence]
    order = min(orders, key=lambda o: (-size[o[-1]], size[o[0]], o))
    seq = [sequence[i] for i in order]
    inc = [incumbent[i] for i in order] if incumbent is not None else None
    asg, exact = _exact_round(seq, platform, inc, budget)
    out: list[dict[str, str]] = [{}] * n
    for pos, i in enumerate(order):
        out[i] = asg[pos]
    return out, exact


def _exact_round(
    sequence: list[PipelineSpec],
    platform: PlatformSpec,
    incumbent: Optional[list[dict[str, str]]] = None,
    budget: Optional[int] = None,
) -> tuple[list[dict[str, str]], bool]:
    """Branch-and-bound over per-RP cyclic module sequences.

    For each RP only the first and the most recent module matter: a switch
    reconfigures an RP whose previous module differs, and the wrap-around
    compares the last module with the first.  RPs of equal size and history
    are interchangeable, which prunes symmetric branches.  Returns the
    assignments and whether the search completed within ``budget`` nodes.
    """
    rps = platform.partitions
    m = len(rps)
    times = [int(round(float(reconfig_time(rp, platform)) * 1e9)) for rp in rps]
    orders = [p.topo_order() for p in sequence]
    mods = [[p.stages[s] for s in o] for p, o in zip(sequence, orders)]
    n_pipes = len(sequence)

    # Lower bound for the switch into P_i: modules of P_i absent from P_{i-1}
    # can only be found resident in the RPs P_{i-1} leaves unused.
    counts = []
    for ms in mods:
        d: dict[str, int] = {}
        for x in ms:
            d[x.id] = d.get(x.id, 0) + 1
        counts.append(d)
    min_time = min(times) if times else 0
    lb = []
    for i in range(n_pipes):
        prev, cur = counts[i - 1], counts[i]
        missing = sum(max(0, c - prev.get(k, 0)) for k, c in cur.items())
        spare = m - sum(prev.values())
        lb.append(max(0, missing - spare) if n_pipes > 1 else 0)
    # lb_after[i]: reconfigurations forced in the switches into P_{i+1}..P_{n-1}
    # plus the wrap into P_0
    lb_after = [0] * n_pipes
    acc = lb[0]
    for i in range(n_pipes - 1, -1, -1):
        lb_after[i] = acc
        acc += lb[i]

    first: list[Optional[str]] = [None] * m
    last: list[Optional[str]] = [None] * m
    best_cost = [(float("inf"), float("inf"))]
    best_asg: list[Optional[list[dict[str, str]]]] = [None]
    if incumbent is not None:
        best_cost[0] = _cyclic_cost(sequence, incumbent, platform)
        best_asg[0] = [dict(a) for a in incumbent]
    # best partial cost seen per boundary state, up to interchangeable RPs
    classes = {c: i for i, c in enumerate(dict.fromkeys(rp.size_class for rp in rps))}
    rp_class = [classes[rp.size_class] for rp in rps]
    memo: dict[tuple, tuple[int, int]] = {}
    current: list[dict[str, str]] = []

    def wrap_cost():
        t = c = 0
        for j in range(m):
            if first[j] is not None and first[j] != last[j]:
                t += times[j]
                c += 1
        return t, c

    nodes = [0]

    def place_pipeline(i, k, used, asg, cost_t, cost_c):
        nodes[0] += 1
        if budget is not None and nodes[0] > budget:
            return
        if k == len(orders[i]):
            current.append(dict(asg))
            descend(i + 1, cost_t, cost_c)
            current.pop()
            return
        mod = mods[i][k]
        tried = set()
        # zero-cost placements first for a strong early incumbent
        cands = sorted(range(m), key=lambda j: (last[j] != mod.id, last[j] is not None, j))
        for j in cands:
            if used[j] or not mod.fits(rps[j]):
                continue
            sym = (rps[j].size_class, first[j], last[j])
            if sym in tried:
                continue
            tried.add(sym)
            changed = last[j] is not None and last[j] != mod.id
            t = cost_t + (times[j] if changed else 0)
            c = cost_c + (1 if changed else 0)
            rest = _unmatched(mods[i][k + 1:], [last[x] for x in range(m) if not used[x] and x != j])
            owed = rest + lb_after[i]
            if (t + owed * min_time, c + owed) >= best_cost[0]:
                continue
            saved = (first[j], last[j])
            if first[j] is None:
                first[j] = mod.id
            last[j] = mod.id
            used[j] = True
            asg[orders[i][k]] = rps[j].id
            place_pipeline(i, k + 1, used, asg, t, c)
            del asg[orders[i][k]]
            used[j] = False
            first[j], last[j] = saved

    def descend(i, cost_t, cost_c):
        if 0 < i < n_pipes:
            key = (i, tuple(sorted((rp_class[j], first[j] or "", last[j] or "") for j in range(m))))
            seen = memo.get(key)
            if seen is not None and seen <= (cost_t, cost_c):
                return
            memo[key] = (cost_t, cost_c)
        if i == n_pipes:
            wt, wc = wrap_cost()
            total = (cost_t + wt, cost_c + wc)
            if total < best_cost[0]:
                best_cost[0] = total
                best_asg[0] = [dict(a) for a in current]
            return
        if i == n_pipes - 1:
            place_last(i, cost_t, cost_c)
            return
        place_pipeline(i, 0, [False] * m, {}, cost_t, cost_c)

    # Count weight for the lexicographic (time, count) objective; per-cell
    # count deltas lie in [-1, 2], so any K above 3m keeps time dominant.
    K = 3 * m + 1

    def place_last(i, cost_t, cost_c):
        # With every earlier pipeline placed, an RP's remaining cost depends
        # only on the module the last pipeline puts on it: its switch in plus
        # its wrap back to its first module.  That is an assignment problem.
        base_t = base_c = 0
        for j in range(m):
            if first[j] is not None and first[j] != last[j]:
                base_t += times[j]
                base_c += 1
        ms = mods[i]
        n = len(ms)
        big = float(2 ** 52)
        w = np.full((n, m), big)
        dt = np.zeros((n, m), dtype=np.int64)
        dc = np.zeros((n, m), dtype=np.int64)
        for k, mod in enumerate(ms):
            for j in range(m):
                if not mod.fits(rps[j]):
                    continue
                cin = last[j] is not None and last[j] != mod.id
                cwrap = first[j] is not None and first[j] != mod.id
                unused = first[j] is not None and first[j] != last[j]
                c = int(cin) + int(cwrap) - int(unused)
                dt[k, j] = times[j] * c
                dc[k, j] = c
                w[k, j] = float(dt[k, j]) * K + c
        rows, cols = linear_sum_assignment(w)
        if len(rows) < n or any(w[r, c] >= big for r, c in zip(rows, cols)):
            return
        total = (
            cost_t + base_t + int(dt[rows, cols].sum()),
            cost_c + base_c + int(dc[rows, cols].sum()),
        )
        if total < best_cost[0]:
            best_cost[0] = total
            best_asg[0] = [dict(a) for a in current] + [
                {orders[i][r]: rps[c].id for r, c in zip(rows, cols)}
            ]

    descend(0, 0, 0)
    assert best_asg[0] is not None
    return best_asg[0], budget is None or nodes[0] <= budget
