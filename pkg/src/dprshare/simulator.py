"""Deterministic event-level simulation of time-shared pipeline execution.

Streaming is modeled as fluid flow at frame/stage granularity: each stage
has a first-pixel-out time and a completion time per frame, never per-pixel
events.  The single PCAP channel serializes reconfigurations.

Basic mode starts every stage once the whole pipeline is configured and
streams in lockstep at the slowest stage's rate.  Staggered mode starts a
stage as soon as it is configured and its upstream produces output; links
into a stage still being reconfigured run through a DRAM FIFO.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import asdict, dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .assignment import (
    FabricState,
    RoundPlan,
    TransitionPlan,
    plan_round,
    validate_topology,
)
from .model import (
    RESERVED_DMA,
    ModelError,
    PipelineSpec,
    PlatformSpec,
    SOURCE,
    ScheduleParams,
    VideoFormat,
    frame_period,
)
from .perf import TIME_EPS, fill_time, path_fills, round_quantum, stage_frame_time

BASIC = "basic"
STAGGERED = "staggered"
MODES = (BASIC, STAGGERED)

CAMERA_FRAME_CAPTURED = "CameraFrameCaptured"
RECONFIG_START = "ReconfigStart"
RECONFIG_END = "ReconfigEnd"
STAGE_STARTED = "StageStarted"
STAGE_FIRST_PIXEL_OUT = "StageFirstPixelOut"
STAGE_FRAME_DONE = "StageFrameDone"
PIPELINE_FRAME_DONE = "PipelineFrameDone"
PIPELINE_SWITCH = "PipelineSwitch"
ROUND_END = "RoundEnd"
DEADLINE_MISS = "DeadlineMiss"

EVENT_KINDS = (
    CAMERA_FRAME_CAPTURED,
    RECONFIG_START,
    RECONFIG_END,
    STAGE_STARTED,
    STAGE_FIRST_PIXEL_OUT,
    STAGE_FRAME_DONE,
    PIPELINE_FRAME_DONE,
    PIPELINE_SWITCH,
    ROUND_END,
    DEADLINE_MISS,
)


class SimulationError(ModelError):
    pass


class TopologyError(SimulationError):
    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class FifoOverflowError(SimulationError):
    pass


@dataclass(frozen=True)
class Event:
    time: float
    kind: str
    seq: int = 0
    pipeline: Optional[str] = None
    stage: Optional[str] = None
    rp: Optional[str] = None
    module: Optional[str] = None
    frame: Optional[int] = None
    round: Optional[int] = None
    value: Optional[float] = None

    def sort_key(self) -> tuple:
        return (self.time, self.seq)

    def to_record(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}

    @classmethod
    def from_record(cls, rec: Mapping) -> "Event":
        fields = {k: v for k, v in rec.items() if k in cls.__dataclass_fields__}
        return cls(**fields)


class EventQueue:
    """Priority queue ordered by (time, insertion sequence)."""

    def __init__(self):
        self._heap: list[tuple[float, int, Event]] = []
        self._seq = itertools.count()

    def push(self, time: float, kind: str, **subject) -> Event:
        seq = next(self._seq)
        ev = Event(float(time), kind, seq, **subject)
        heapq.heappush(self._heap, (ev.time, seq, ev))
        return ev

    def __len__(self) -> int:
        return len(self._heap)

    def drain(self) -> list[Event]:
        out = []
        while self._heap:
            out.append(heapq.heappop(self._heap)[2])
        return out


@dataclass
class SimConfig:
    mode: str = BASIC
    params: ScheduleParams = field(default_factory=ScheduleParams)
    rounds: int = 4
    plans: Optional[RoundPlan] = None
    initial: Optional[FabricState] = None
    fifo_frames: float = 1.0  # decoupling FIFO capacity in frames

    def __post_init__(self):
        if self.mode not in MODES:
            raise SimulationError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.rounds < 1:
            raise SimulationError("rounds must be >= 1")


@dataclass
class PipelineStats:
    frames_processed: int = 0
    frames_on_time: int = 0
    achieved_fps: float = 0.0
    slice_durations: list[float] = field(default_factory=list)
    latency_mean: float = 0.0
    latency_max: float = 0.0


@dataclass
class RoundStats:
    index: int
    start: float
    end: float
    deadline: float

    @property
    def total(self) -> float:
        return self.end - self.start

    @property
    def missed(self) -> bool:
        return self.end > self.deadline + TIME_EPS


@dataclass
class Timeline:
    mode: str
    params: ScheduleParams
    round_quantum: float
    events: list[Event]
    per_pipeline: dict[str, PipelineStats]
    rounds: list[RoundStats]
    peak_dram_streams: int
    peak_dram_bandwidth: float
    buffer_high_water: dict[str, float]
    captured: list[int] = field(default_factory=list)
    rp_ids: list[str] = field(default_factory=list)
    pipeline_ids: list[str] = field(default_factory=list)

    @property
    def glitches(self) -> list[Event]:
        return [e for e in self.events if e.kind == DEADLINE_MISS]

    def summary(self) -> dict:
        return {
            "mode": self.mode,
            "g": self.params.g,
            "s": self.params.s,
            "round_quantum": self.round_quantum,
            "rounds": [
                {"index": r.index, "start": r.start, "end": r.end, "deadline": r.deadline}
                for r in self.rounds
            ],
            "per_pipeline": {k: asdict(v) for k, v in self.per_pipeline.items()},
            "glitches": len(self.glitches),
            "peak_dram_streams": self.peak_dram_streams,
            "peak_dram_bandwidth": self.peak_dram_bandwidth,
            "buffer_high_water": dict(self.buffer_high_water),
            "captured": list(self.captured),
            "rp_ids": list(self.rp_ids),
            "pipeline_ids": list(self.pipeline_ids),
        }


def route_key(pipeline: str, upstream: str, downstream: str) -> str:
    return f"{pipeline}:{upstream}->{downstream}"


def _interp(points: list[tuple[float, float]], t: float) -> float:
    """Piecewise-linear curve, flat before the first and after the last point."""
    if t <= points[0][0]:
        return points[0][1]
    for (t0, v0), (t1, v1) in zip(points, points[1:]):
        if t <= t1:
            if t1 <= t0:
                return v1
            return v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    return points[-1][1]


def fifo_high_water(producer: list[tuple[float, float]], consumer: list[tuple[float, float]]) -> float:
    """Peak of produced minus consumed, in the curves' units."""
    times = sorted({t for t, _ in producer} | {t for t, _ in consumer})
    peak = 0.0
    for t in times:
        p = _interp(producer, t)
        c = min(_interp(consumer, t), p)
        peak = max(peak, p - c)
    return peak


class _Run:
    def __init__(self, platform, fmt, pipelines, config, plans):
        self.platform = platform
        self.fmt = fmt
        self.pipes = list(pipelines)
        self.cfg = config
        self.plans = plans
        self.q = EventQueue()
        self.rate = float(platform.solo_pixel_rate(fmt))
        self.pcap_free = 0.0
        self.high_water: dict[str, float] = {}
        self.dram_intervals: list[tuple[float, float, float, int]] = []  # start, end, B/s, streams
        self.stats = {p.id: PipelineStats() for p in self.pipes}
        self.latencies: dict[str, list[float]] = {p.id: [] for p in self.pipes}
        self.static = [self._static_timing(p) for p in self.pipes]

    def _static_timing(self, p: PipelineSpec) -> dict:
        rate = self.platform.solo_pixel_rate(self.fmt)
        order = p.topo_order()
        fills = {s: float(fill_time(p.stages[s], self.fmt, rate)) for s in order}
        frames = {s: float(stage_frame_time(p.stages[s], self.fmt, rate)) for s in order}
        paths = {s: float(v) for s, v in path_fills(p, self.fmt, rate).items()}
        preds = {s: [u for u in p.preds(s) if u != SOURCE] for s in order}
        return {
            "order": order,
            "fill": fills,
            "frame": frames,
            "path": paths,
            "preds": preds,
            "max_frame": max(frames.values(), default=0.0),
        }

    # -- one timeslice ---------------------------------------------------------
    def slice(self, idx: int, plan: TransitionPlan, t: float, rnd: int, frames: list[int]) -> float:
        p = self.pipes[idx]
        st = self.static[idx]
        g = len(frames)
        overhead = float(self.platform.switch_overhead) + float(plan.route_config_time)
        t0 = t + overhead
        self.q.push(t0, PIPELINE_SWITCH, pipeline=p.id, round=rnd, value=overhead)

        stage_of_rp = {rp: s for s, rp in plan.assignment.items()}
        ready = {s: t0 for s in st["order"]}
        clock = max(self.pcap_free, t0)
        for rp_id, mod in plan.reconfigure:
            dur = float(self.platform.rp(rp_id).bitstream_bytes / self.platform.pcap_throughput)
            s = stage_of_rp[rp_id]
            self.q.push(clock, RECONFIG_START, pipeline=p.id, stage=s, rp=rp_id, module=mod, round=rnd)
            clock = clock + dur
            self.q.push(clock, RECONFIG_END, pipeline=p.id, stage=s, rp=rp_id, module=mod, round=rnd, value=dur)
            ready[s] = clock
        self.pcap_free = clock

        start: dict[str, float] = {}
        first: dict[str, float] = {}
        done: dict[str, list[float]] = {}
        if not st["order"]:
            end = t0
        elif self.cfg.mode == BASIC:
            t_all = max(ready.values())
            T = st["max_frame"]
            for s in st["order"]:
                start[s] = t_all
                first[s] = t_all + st["path"][s]
                done[s] = [first[s] + j * T for j in range(1, g + 1)]
        else:
            for s in st["order"]:
                ups = st["preds"][s]
                fed = max((first[u] for u in ups), default=t0)
                start[s] = max(ready[s], fed)
                first[s] = start[s] + st["fill"][s]
                done[s] = [
                    max(
                        first[s] + j * st["frame"][s],
                        max((done[u][j - 1] for u in ups), default=-1.0) + st["fill"][s],
                    )
                    for j in range(1, g + 1)
                ]

        for s in st["order"]:
            rp_id = plan.assignment[s]
            mod = p.stages[s].id
            self.q.push(start[s], STAGE_STARTED, pipeline=p.id, stage=s, rp=rp_id, module=mod, round=rnd)
            self.q.push(first[s], STAGE_FIRST_PIXEL_OUT, pipeline=p.id, stage=s, rp=rp_id, round=rnd)
            for j, fr in enumerate(frames):
                self.q.push(done[s][j], STAGE_FRAME_DONE, pipeline=p.id, stage=s, rp=rp_id, frame=fr, round=rnd)

        if st["order"]:
            exit_stage = p.exit
            for j, fr in enumerate(frames):
                self.q.push(done[exit_stage][j], PIPELINE_FRAME_DONE, pipeline=p.id, frame=fr, round=rnd)
            end = done[exit_stage][-1]
            self._dram(p, st, plan, start, first, done)
        else:
            for fr in frames:
                self.q.push(t0, PIPELINE_FRAME_DONE, pipeline=p.id, frame=fr, round=rnd)
        self.stats[p.id].slice_durations.append(end - t0)
        return end, t0

    def _dram(self, p, st, plan, start, first, done) -> None:
        fmt = self.fmt
        n = fmt.pixels
        bpp = fmt.bytes_per_pixel
        entry, exit_stage = p.entry, p.exit

        def bw(stage, mode_frame):
            return n * bpp / mode_frame if mode_frame > 0 else 0.0

        T = st["max_frame"]
        is_basic = self.cfg.mode == BASIC
        # pipeline side of the two reserved double-buffers
        self.dram_intervals.append(
            (start[entry], done[entry][-1] - st["fill"][entry], bw(entry, T if is_basic else st["frame"][entry]), 0)
        )
        self.dram_intervals.append(
            (first[exit_stage], done[exit_stage][-1], bw(exit_stage, T if is_basic else st["frame"][exit_stage]), 0)
        )
        decoupled = set()
        for r in plan.decoupling_routes:
            decoupled.add(r.sink.owner)
        stage_of_rp = {rp: s for s, rp in plan.assignment.items()}
        cap = self.cfg.fifo_frames * n * bpp
        for r in plan.decoupling_routes:
            u = stage_of_rp[r.source.owner]
            v = stage_of_rp[r.sink.owner]
            prod = [(first[u], 0.0)] + [(d, (j + 1) * n) for j, d in enumerate(done[u])]
            cons = [(start[v], 0.0)] + [
                (d - st["fill"][v], (j + 1) * n) for j, d in enumerate(done[v])
            ]
            hw = fifo_high_water(prod, cons) * bpp
            key = route_key(p.id, u, v)
            self.high_water[key] = max(self.high_water.get(key, 0.0), hw)
            if hw > cap * (1 + 1e-9):
                raise FifoOverflowError(
                    f"decoupling FIFO {key} needs {hw:.0f} B, capacity {cap:.0f} B"
                )
            rate = bw(u, st["frame"][u]) + bw(v, st["frame"][v])
            self.dram_intervals.append((first[u], cons[-1][0], rate, 1))

    # -- whole run -------------------------------------------------------------------
    def run(self) -> Timeline:
        params = self.cfg.params
        g, s = params.g, params.s
        Q = float(round_quantum(self.fmt, params))
        T_cam = float(frame_period(self.fmt))
        rounds: list[RoundStats] = []
        captured: list[int] = []
        prev_end = 0.0
        for rnd in range(1, self.cfg.rounds + 1):
            bundle = rnd - 1
            frames = [bundle * g * s + j * s for j in range(g)]
            for fr in frames:
                captured.append(fr)
                self.q.push((fr + 1) * T_cam, CAMERA_FRAME_CAPTURED, frame=fr, round=rnd)
            nominal = rnd * Q
            deadline = (rnd + 1) * Q
            t = max(nominal, prev_end)
            round_start = t
            for i, plan in enumerate(self.plans.steady):
                end, t0 = self.slice(i, plan, t, rnd, frames)
                t = end
            self.q.push(t, ROUND_END, round=rnd, value=t - round_start)
            stat = RoundStats(rnd, round_start, t, deadline)
            rounds.append(stat)
            if stat.missed:
                self.q.push(deadline, DEADLINE_MISS, round=rnd, value=t - deadline)
            prev_end = t

        events = self.q.drain()
        late_rounds = {r.index for r in rounds if r.missed}
        capture_time = {fr: (fr + 1) * T_cam for fr in captured}
        for ev in events:
            if ev.kind != PIPELINE_FRAME_DONE:
                continue
            st = self.stats[ev.pipeline]
            st.frames_processed += 1
            if ev.round not in late_rounds:
                st.frames_on_time += 1
            self.latencies[ev.pipeline].append(ev.time - capture_time[ev.frame])
        duration = self.cfg.rounds * Q
        for pid, st in self.stats.items():
            st.achieved_fps = st.frames_on_time / duration
            lat = self.latencies[pid]
            if lat:
                st.latency_mean = sum(lat) / len(lat)
                st.latency_max = max(lat)

        peak_streams, peak_bw = self._peaks()
        if peak_streams > self.platform.max_dram_streams:
            raise SimulationError(
                f"{peak_streams} concurrent DRAM streams exceed {self.platform.max_dram_streams}"
            )
        if peak_bw > float(self.platform.dram_bandwidth):
            raise SimulationError(f"peak DRAM demand {peak_bw:.3e} B/s exceeds bandwidth")
        return Timeline(
            mode=self.cfg.mode,
            params=params,
            round_quantum=Q,
            events=events,
            per_pipeline=self.stats,
            rounds=rounds,
            peak_dram_streams=peak_streams,
            peak_dram_bandwidth=peak_bw,
            buffer_high_water=dict(sorted(self.high_water.items())),
            captured=captured,
            rp_ids=[rp.id for rp in self.platform.partitions],
            pipeline_ids=[p.id for p in self.pipes],
        )

    def _peaks(self) -> tuple[int, float]:
        # camera writes and display reads run continuously at camera rate
        base_bw = float(self.platform.per_stream_bandwidth(self.fmt))
        marks = []
        for a, b, rate, n in self.dram_intervals:
            if b <= a:
                continue
            marks.append((a, 1, rate, n))
            marks.append((b, 0, rate, n))
        marks.sort(key=lambda m: (m[0], m[1]))  # ends before starts at equal times
        cur_bw, cur_n = 0.0, 0
        peak_bw, peak_n = 0.0, 0
        for _, is_start, rate, n in marks:
            if is_start:
                cur_bw += rate
                cur_n += n
            else:
                cur_bw -= rate
                cur_n -= n
            peak_bw = max(peak_bw, cur_bw)
            peak_n = max(peak_n, cur_n)
        return RESERVED_DMA + peak_n, base_bw + peak_bw


def simulate(
    platform: PlatformSpec,
    fmt: VideoFormat,
    pipelines: Sequence[PipelineSpec],
    config: Optional[SimConfig] = None,
) -> Timeline:
    """Run ``config.rounds`` steady-state rounds of the round-robin schedule.

    Round ``r`` processes the bundle of frames captured during round ``r-1``
    and must finish before round ``r+1`` begins; otherwise a DeadlineMiss is
    recorded and the next round starts late.
    """
    config = config or SimConfig()
    pipelines = list(pipelines)
    plans = config.plans
    if plans is None:
        initial = config.initial or FabricState.from_platform(platform)
        plans = plan_round(initial, pipelines, platform, decouple=config.mode == STAGGERED)
    if [p.pipeline for p in plans.steady] != [p.id for p in pipelines]:
        raise SimulationError("plans do not cover the pipeline sequence")
    for plan in plans.steady:
        problems = validate_topology(plan.routes, platform, fmt)
        if problems:
            raise TopologyError(
                f"pipeline {plan.pipeline}: " + "; ".join(v.message for v in problems), problems
            )
    return _Run(platform, fmt, pipelines, config, plans).run()


def measured_slice(timeline: Timeline, pipeline: str, round_index: int) -> float:
    """Seconds from the pipeline's switch to its last frame in that round."""
    t0 = None
    end = None
    for ev in timeline.events:
        if ev.pipeline != pipeline or ev.round != round_index:
            continue
        if ev.kind == PIPELINE_SWITCH:
            t0 = ev.time
        elif ev.kind == PIPELINE_FRAME_DONE:
            end = ev.time if end is None else max(end, ev.time)
    if t0 is None or end is None:
        raise SimulationError(f"no slice for pipeline {pipeline!r} in round {round_index}")
    return end - t0


def buffer_high_water(timeline: Timeline, route) -> float:
    """Peak occupancy in bytes of a decoupling FIFO.

    ``route`` is a key from :func:`route_key` or a (pipeline, upstream,
    downstream) triple.
    """
    key = route if isinstance(route, str) else route_key(*route)
    try:
        return timeline.buffer_high_water[key]
    except KeyError:
        raise SimulationError(f"unknown decoupling route {key!r}") from None


def reconfig_intervals(timeline: Timeline) -> list[tuple[float, float, str]]:
    starts: dict[tuple, float] = {}
    out = []
    for ev in timeline.events:
        key = (ev.pipeline, ev.rp, ev.round)
        if ev.kind == RECONFIG_START:
            starts[key] = ev.time
        elif ev.kind == RECONFIG_END:
            out.append((starts.pop(key), ev.time, ev.rp))
    return out
