"""Closed-form timing model for round-robin time-sharing.

A pipeline's timeslice is its reconfiguration time plus its fill and frame
times when streaming against DRAM ("solo").  A round of slices must fit in
``g * s`` camera frame periods.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .model import (
    ModelError,
    ModuleSpec,
    PipelineSpec,
    PlatformSpec,
    RPSpec,
    SINK,
    SOURCE,
    ScheduleParams,
    VideoFormat,
    as_quantity,
    frame_period,
)
from .units import Quantity, seconds

# Shared by the feasibility check and the simulator's glitch test so both
# sides agree on boundary cases regardless of summation order.
TIME_EPS = 1e-12

ZERO = seconds(0)


class UnassignedStageError(ModelError):
    pass


def fits_within(total, budget) -> bool:
    return float(total) <= float(budget) + TIME_EPS


# -- per-stage quantities --------------------------------------------------------


def fill_time(module: ModuleSpec, fmt: VideoFormat, clock) -> Quantity:
    """Line-buffer latency of one stage: ``buffer_lines * width`` pixels."""
    clock = as_quantity(clock, "Hz", "clock")
    return module.buffer_lines * fmt.width * module.initiation_interval / clock


def stage_frame_time(module: ModuleSpec, fmt: VideoFormat, clock) -> Quantity:
    clock = as_quantity(clock, "Hz", "clock")
    return fmt.pixels * module.initiation_interval / clock


def path_fills(pipeline: PipelineSpec, fmt: VideoFormat, clock) -> dict[str, Quantity]:
    """Longest accumulated fill from the camera up to and including each stage."""
    acc: dict[str, Quantity] = {}
    for s in pipeline.topo_order():
        upstream = [acc[u] for u in pipeline.preds(s) if u != SOURCE]
        acc[s] = max(upstream, default=ZERO) + fill_time(pipeline.stages[s], fmt, clock)
    return acc


def pipeline_fill_time(pipeline: PipelineSpec, fmt: VideoFormat, clock) -> Quantity:
    if not pipeline.stages:
        return ZERO
    return path_fills(pipeline, fmt, clock)[pipeline.exit]


def pipeline_frame_time(pipeline: PipelineSpec, fmt: VideoFormat, clock) -> Quantity:
    """A pipeline streams no faster than its slowest stage."""
    return max(
        (stage_frame_time(m, fmt, clock) for m in pipeline.stages.values()),
        default=ZERO,
    )


def reconfig_time(rp: RPSpec, platform: PlatformSpec, module: Optional[str] = None) -> Quantity:
    """PCAP time to load ``rp``; zero when ``module`` is already resident."""
    if module is not None and rp.loaded == module:
        return ZERO
    return rp.bitstream_bytes / platform.pcap_throughput


def route_config_time(pipeline: PipelineSpec, platform: PlatformSpec) -> Quantity:
    return len(pipeline.edges) * platform.route_link_time


def switch_cost(pipeline: PipelineSpec, platform: PlatformSpec) -> Quantity:
    return platform.switch_overhead + route_config_time(pipeline, platform)


# -- slices ----------------------------------------------------------------------


@dataclass(frozen=True)
class StageTerm:
    stage: str
    config_done: Quantity  # latest reconfiguration end among the stage and its ancestors
    fill: Quantity
    frame: Quantity


@dataclass(frozen=True)
class SliceEstimate:
    pipeline: str
    t_config: Quantity
    t_fill: Quantity
    t_frame: Quantity
    basic_slice: Quantity
    staggered_upper: Quantity
    staggered_lower_simple: Quantity
    staggered_lower_tight: Quantity
    terms: tuple[StageTerm, ...] = field(default=(), compare=False)

    def lower_tight(self, g: int = 1) -> Quantity:
        """Tight staggered lower bound when each slice streams ``g`` frames."""
        if not self.terms:
            return self.t_config
        return max(t.config_done + t.fill + g * t.frame for t in self.terms)


def _check_assignment(pipeline: PipelineSpec, assignment: Optional[Mapping[str, str]]) -> None:
    if assignment is None:
        return
    missing = [s for s in pipeline.stages if s not in assignment]
    if missing:
        raise UnassignedStageError(f"pipeline {pipeline.id}: stages without an RP: {missing}")


def slice_basic(
    pipeline: PipelineSpec,
    reconfigured_rps: Iterable[RPSpec],
    fmt: VideoFormat,
    platform: PlatformSpec,
    assignment: Optional[Mapping[str, str]] = None,
) -> SliceEstimate:
    """Configure everything, then stream one frame.  PCAP is serial, so
    reconfiguration times add."""
    _check_assignment(pipeline, assignment)
    rate = platform.solo_pixel_rate(fmt)
    t_config = sum((reconfig_time(rp, platform) for rp in reconfigured_rps), ZERO)
    t_fill = pipeline_fill_time(pipeline, fmt, rate)
    t_frame = pipeline_frame_time(pipeline, fmt, rate)
    basic = t_config + t_fill + t_frame
    terms = tuple(
        StageTerm(
            s,
            t_config,
            fill_time(pipeline.stages[s], fmt, rate),
            stage_frame_time(pipeline.stages[s], fmt, rate),
        )
        for s in pipeline.topo_order()
    )
    last = terms[-1] if terms else None
    simple = t_config + (last.fill + last.frame if last else ZERO)
    return SliceEstimate(pipeline.id, t_config, t_fill, t_frame, basic, basic, simple, basic, terms)


def slice_staggered_bounds(
    pipeline: PipelineSpec,
    reconfig: Mapping[str, RPSpec],
    fmt: VideoFormat,
    platform: PlatformSpec,
) -> SliceEstimate:
    """Bounds on a slice when stages start as soon as they are configured and
    fed.

    ``reconfig`` maps each stage being reconfigured to its RP.  RPs are
    reconfigured one at a time in topological stage order.
    """
    unknown = [s for s in reconfig if s not in pipeline.stages]
    if unknown:
        raise UnassignedStageError(f"pipeline {pipeline.id}: unknown stages {unknown}")
    rate = platform.solo_pixel_rate(fmt)
    order = pipeline.topo_order()

    done: dict[str, Quantity] = {}
    clock = ZERO
    for s in order:
        if s in reconfig:
            clock = clock + reconfig_time(reconfig[s], platform)
            done[s] = clock
    t_config = clock

    terms = []
    for s in order:
        related = [done[a] for a in pipeline.ancestors(s) | {s} if a in done]
        terms.append(
            StageTerm(
                s,
                max(related, default=ZERO),
                fill_time(pipeline.stages[s], fmt, rate),
                stage_frame_time(pipeline.stages[s], fmt, rate),
            )
        )
    t_fill = pipeline_fill_time(pipeline, fmt, rate)
    t_frame = pipeline_frame_time(pipeline, fmt, rate)
    upper = t_config + t_fill + t_frame
    if terms:
        last = next(t for t in terms if t.stage == pipeline.exit)
        simple = t_config + last.fill + last.frame
        tight = max(t.config_done + t.fill + t.frame for t in terms)
    else:
        simple = tight = t_config
    return SliceEstimate(
        pipeline.id, t_config, t_fill, t_frame, upper, upper, simple, tight, tuple(terms)
    )


def round_quantum(fmt: VideoFormat, params: ScheduleParams) -> Quantity:
    return params.g * params.s * frame_period(fmt)


def slice_amortized(est: SliceEstimate, g: int) -> Quantity:
    if g < 1:
        raise ModelError("g must be >= 1")
    return est.t_config + est.t_fill + g * est.t_frame


# -- feasibility -------------------------------------------------------------------


@dataclass(frozen=True)
class Workload:
    """One pipeline's share of a round: which RPs it must reconfigure and
    how much switch overhead precedes its slice."""

    pipeline: PipelineSpec
    reconfigured: tuple[RPSpec, ...] = ()
    switch: Optional[Quantity] = None
    stage_rps: Optional[Mapping[str, RPSpec]] = None  # stage -> RP being reconfigured

    def estimate(self, fmt: VideoFormat, platform: PlatformSpec) -> SliceEstimate:
        if self.stage_rps is not None:
            return slice_staggered_bounds(self.pipeline, self.stage_rps, fmt, platform)
        return slice_basic(self.pipeline, self.reconfigured, fmt, platform)

    def switch_time(self, platform: PlatformSpec) -> Quantity:
        if self.switch is None:
            return switch_cost(self.pipeline, platform)
        return as_quantity(self.switch, "s", "switch")


@dataclass(frozen=True)
class FeasibilityReport:
    params: ScheduleParams
    round_quantum: Quantity
    slices: tuple[SliceEstimate, ...]
    amortized: tuple[Quantity, ...]
    switch_costs: tuple[Quantity, ...]
    total: Quantity
    feasible: bool
    slack: Quantity
    effective_fps: float
    diagnosis: str = ""


def _as_workloads(items) -> list[Workload]:
    out = []
    for it in items:
        if isinstance(it, Workload):
            out.append(it)
        else:
            pipeline, rps = it
            out.append(Workload(pipeline, tuple(rps)))
    return out


def check_feasibility(
    workloads: Sequence,
    fmt: VideoFormat,
    platform: PlatformSpec,
    params: ScheduleParams,
) -> FeasibilityReport:
    """Conservative test: the sum of amortized upper-bound slices (plus switch
    costs) must fit in the round quantum.

    ``workloads`` holds :class:`Workload` objects or ``(pipeline, rps)`` pairs.
    """
    wl = _as_workloads(workloads)
    quantum = round_quantum(fmt, params)
    slices = tuple(w.estimate(fmt, platform) for w in wl)
    amortized = tuple(slice_amortized(e, params.g) for e in slices)
    switches = tuple(w.switch_time(platform) for w in wl)
    total = sum(amortized, ZERO) + sum(switches, ZERO)
    feasible = fits_within(total, quantum)
    slack = quantum - total
    diagnosis = ""
    if not feasible:
        stream = sum((e.t_frame for e in slices), ZERO)
        if stream > params.s * frame_period(fmt):
            diagnosis = "frame processing alone exceeds s camera periods; raise s"
        else:
            diagnosis = "reconfiguration overhead does not fit; raise g or s"
    return FeasibilityReport(
        params=params,
        round_quantum=quantum,
        slices=slices,
        amortized=amortized,
        switch_costs=switches,
        total=total,
        feasible=feasible,
        slack=slack,
        effective_fps=fmt.fps / params.s if feasible else 0.0,
        diagnosis=diagnosis,
    )


def min_downsample(
    workloads: Sequence, fmt: VideoFormat, platform: PlatformSpec, g: int = 1
) -> int:
    """Smallest ``s`` for which the round is feasible at bundle size ``g``.

    Slices do not depend on ``s`` while the quantum grows linearly in it, so
    the answer always exists.
    """
    wl = _as_workloads(workloads)
    if not wl:
        return 1
    base = check_feasibility(wl, fmt, platform, ScheduleParams(g, 1))
    per_s = float(base.round_quantum)
    s = max(1, math.ceil(float(base.total) / per_s - 1e-9))
    while s > 1 and check_feasibility(wl, fmt, platform, ScheduleParams(g, s - 1)).feasible:
        s -= 1
    while not check_feasibility(wl, fmt, platform, ScheduleParams(g, s)).feasible:
        s += 1
    return s
