"""Domain types shared by the planner, the analytical model and the simulator.

Frames are timed tokens: nothing here touches pixel data.  Pixels, lines and
cycles are plain counts; every time, size and rate is a
:class:`~dprshare.units.Quantity`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

from .units import (
    Quantity,
    UnitError,
    bytes_per_second,
    hertz,
    nbytes,
    seconds,
)

SOURCE = "camera"
SINK = "display"

_DIMS = {
    "s": (1, 0),
    "B": (0, 1),
    "Hz": (-1, 0),
    "B/s": (-1, 1),
}
_MAKERS = {"s": seconds, "B": nbytes, "Hz": hertz, "B/s": bytes_per_second}


def as_quantity(value, unit: str, name: str) -> Quantity:
    """Coerce ``value`` to ``unit``; bare numbers are taken in base units."""
    if isinstance(value, Quantity):
        if value.dim != _DIMS[unit]:
            raise UnitError(f"{name}: expected {unit}, got {value.unit}")
        return value
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise TypeError(f"{name}: expected a number, got {type(value).__name__}")
    return _MAKERS[unit](value)


class ModelError(ValueError):
    """Invalid domain object."""


class PipelineError(ModelError):
    pass


class CycleError(PipelineError):
    pass


class DanglingStageError(PipelineError):
    pass


class PortOverflowError(PipelineError):
    pass


class UnknownStageError(PipelineError):
    pass


@dataclass(frozen=True)
class VideoFormat:
    width: int
    height: int
    fps: float
    bytes_per_pixel: int = 2  # YUYV422

    def __post_init__(self):
        for name in ("width", "height", "fps", "bytes_per_pixel"):
            if not getattr(self, name) > 0:
                raise ModelError(f"VideoFormat.{name} must be > 0")

    @property
    def pixels(self) -> int:
        return self.width * self.height

    @property
    def frame_bytes(self) -> Quantity:
        return nbytes(self.pixels * self.bytes_per_pixel)

    @property
    def name(self) -> str:
        return f"{self.height}p{self.fps:g}"

    @property
    def resolution(self) -> Optional[str]:
        """Named resolution key, or None for a custom frame size."""
        for key, wh in RESOLUTIONS.items():
            if wh == (self.width, self.height):
                return key
        return None


FULL_HD = VideoFormat(1920, 1080, 60)
HD_720 = VideoFormat(1280, 720, 60)

RESOLUTIONS = {
    "720p": (1280, 720),
    "1080p": (1920, 1080),
}


def format_for(resolution: str, fps: float = 60, bytes_per_pixel: int = 2) -> VideoFormat:
    try:
        w, h = RESOLUTIONS[resolution]
    except KeyError:
        raise ModelError(f"unknown resolution {resolution!r}; known: {sorted(RESOLUTIONS)}") from None
    return VideoFormat(w, h, fps, bytes_per_pixel)


def frame_period(fmt: VideoFormat) -> Quantity:
    return seconds(1.0 / fmt.fps)


def active_stream_time(fmt: VideoFormat, clock) -> Quantity:
    """Time to stream one frame's active pixels at one pixel per cycle."""
    clock = as_quantity(clock, "Hz", "clock")
    if not clock > 0:
        raise ModelError("clock must be > 0")
    return fmt.pixels / clock


@dataclass(frozen=True, order=True)
class ResourceVector:
    lut: int = 0
    bram36: float = 0
    dsp: int = 0

    def __post_init__(self):
        if min(self.lut, self.bram36, self.dsp) < 0:
            raise ModelError("resource counts must be >= 0")

    def fits_in(self, capacity: "ResourceVector") -> bool:
        return (
            self.lut <= capacity.lut
            and self.bram36 <= capacity.bram36
            and self.dsp <= capacity.dsp
        )


@dataclass
class RPSpec:
    """A reconfigurable partition.  ``loaded`` is runtime state."""

    id: str
    bitstream_bytes: Quantity
    capacity: ResourceVector = field(default_factory=lambda: ResourceVector(10**9, 10**9, 10**9))
    loaded: Optional[str] = None

    def __post_init__(self):
        self.bitstream_bytes = as_quantity(self.bitstream_bytes, "B", "bitstream_bytes")
        if not self.bitstream_bytes > 0:
            raise ModelError(f"RP {self.id}: bitstream_bytes must be > 0")

    @property
    def size_class(self) -> tuple:
        return (float(self.bitstream_bytes), self.capacity)


@dataclass(frozen=True)
class ModuleSpec:
    """A processing-stage variant that can be loaded into an RP.

    ``initiation_interval`` is cycles per pixel; 1 is a stage that keeps
    pace with the fabric clock.
    """

    id: str
    buffer_lines: int = 0
    demand: ResourceVector = ResourceVector()
    in_ports: int = 1
    out_ports: int = 1
    initiation_interval: int = 1

    def __post_init__(self):
        if self.buffer_lines < 0:
            raise ModelError(f"module {self.id}: buffer_lines must be >= 0")
        if self.in_ports < 1 or self.out_ports < 1:
            raise ModelError(f"module {self.id}: port counts must be >= 1")
        if self.initiation_interval < 1:
            raise ModelError(f"module {self.id}: initiation_interval must be >= 1")

    def fits(self, rp: RPSpec) -> bool:
        return self.demand.fits_in(rp.capacity)


@dataclass(frozen=True)
class PipelineSpec:
    """A streaming DAG from the camera to the display.

    ``stages`` maps stage id to module; ``edges`` are (from, to) pairs where
    :data:`SOURCE` and :data:`SINK` stand for the camera and display.
    Construction validates the graph.
    """

    id: str
    stages: Mapping[str, ModuleSpec]
    edges: tuple[tuple[str, str], ...]

    def __post_init__(self):
        object.__setattr__(self, "stages", dict(self.stages))
        object.__setattr__(self, "edges", tuple(tuple(e) for e in self.edges))
        self._validate()

    @classmethod
    def linear(cls, id: str, modules: Iterable[ModuleSpec], prefix: str = "s") -> "PipelineSpec":
        mods = list(modules)
        names = [f"{prefix}{i + 1}" for i in range(len(mods))]
        chain = [SOURCE, *names, SINK] if names else []
        return cls(id, dict(zip(names, mods)), tuple(zip(chain, chain[1:])))

    # -- graph queries ---------------------------------------------------------
    def preds(self, stage: str) -> list[str]:
        return [u for u, v in self.edges if v == stage]

    def succs(self, stage: str) -> list[str]:
        return [v for u, v in self.edges if u == stage]

    @property
    def entry(self) -> Optional[str]:
        s = self.succs(SOURCE)
        return s[0] if s else None

    @property
    def exit(self) -> Optional[str]:
        p = self.preds(SINK)
        return p[0] if p else None

    def topo_order(self) -> list[str]:
        """Kahn order, ties broken by declaration order of ``stages``."""
        indeg = {s: 0 for s in self.stages}
        for u, v in self.edges:
            if v in indeg and u != SOURCE:
                indeg[v] += 1
        order: list[str] = []
        ready = [s for s in self.stages if indeg[s] == 0]
        rank = {s: i for i, s in enumerate(self.stages)}
        while ready:
            ready.sort(key=rank.__getitem__)
            s = ready.pop(0)
            order.append(s)
            for v in self.succs(s):
                if v in indeg:
                    indeg[v] -= 1
                    if indeg[v] == 0:
                        ready.append(v)
        return order

    def ancestors(self, stage: str) -> set[str]:
        seen: set[str] = set()
        todo = [u for u in self.preds(stage) if u != SOURCE]
        while todo:
            u = todo.pop()
            if u not in seen:
                seen.add(u)
                todo.extend(p for p in self.preds(u) if p != SOURCE)
        return seen

    def stage_edges(self) -> set[tuple[str, str]]:
        return set(self.edges)

    # -- validation ------------------------------------------------------------
    def _validate(self) -> None:
        names = set(self.stages)
        if SOURCE in names or SINK in names:
            raise PipelineError(f"pipeline {self.id}: stage ids {SOURCE!r}/{SINK!r} are reserved")
        for u, v in self.edges:
            if u not in names and u != SOURCE:
                raise UnknownStageError(f"pipeline {self.id}: edge references unknown stage {u!r}")
            if v not in names and v != SINK:
                raise UnknownStageError(f"pipeline {self.id}: edge references unknown stage {v!r}")
            if u == SINK or v == SOURCE:
                raise PipelineError(f"pipeline {self.id}: edge {u}->{v} runs backwards")
        if len(set(self.edges)) != len(self.edges):
            raise PipelineError(f"pipeline {self.id}: duplicate edge")
        if not names:
            if self.edges:
                raise PipelineError(f"pipeline {self.id}: edges without stages")
            return
        if len(self.succs(SOURCE)) != 1 or len(self.preds(SINK)) != 1:
            raise PipelineError(
                f"pipeline {self.id}: needs exactly one {SOURCE} edge and one {SINK} edge"
            )
        if len(self.topo_order()) != len(names):
            raise CycleError(f"pipeline {self.id}: stage graph has a cycle")
        reach_fwd = self._reach(SOURCE, self.succs)
        reach_bwd = self._reach(SINK, self.preds)
        dangling = sorted(names - (reach_fwd & reach_bwd))
        if dangling:
            raise DanglingStageError(
                f"pipeline {self.id}: stages not on a {SOURCE}->{SINK} path: {dangling}"
            )
        for s, mod in self.stages.items():
            n_in, n_out = len(self.preds(s)), len(self.succs(s))
            if n_in > mod.in_ports or n_out > mod.out_ports:
                raise PortOverflowError(
                    f"pipeline {self.id}: stage {s} ({mod.id}) has {n_in} in/{n_out} out "
                    f"edges but {mod.in_ports}/{mod.out_ports} ports"
                )

    @staticmethod
    def _reach(start: str, step) -> set[str]:
        seen: set[str] = set()
        todo = [start]
        while todo:
            for n in step(todo.pop()):
                if n not in seen and n not in (SOURCE, SINK):
                    seen.add(n)
                    todo.append(n)
        return seen


@dataclass(frozen=True)
class ScheduleParams:
    g: int = 1
    s: int = 1

    def __post_init__(self):
        for name in ("g", "s"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int) or v < 1:
                raise ModelError(f"ScheduleParams.{name} must be a positive integer, got {v!r}")


RESERVED_DMA = 2  # camera and display double-buffers


@dataclass
class PlatformSpec:
    fabric_clock: Quantity = 200e6
    pixel_clock: Quantity = 148.5e6
    pcap_throughput: Quantity = 128e6
    dram_bandwidth: Quantity = 12.8e9
    max_dram_streams: int = 5
    dma_engines: int = 5
    partitions: tuple[RPSpec, ...] = ()
    switch_overhead: Quantity = 100e-6
    route_link_time: Quantity = 100e-9

    def __post_init__(self):
        self.fabric_clock = as_quantity(self.fabric_clock, "Hz", "fabric_clock")
        self.pixel_clock = as_quantity(self.pixel_clock, "Hz", "pixel_clock")
        self.pcap_throughput = as_quantity(self.pcap_throughput, "B/s", "pcap_throughput")
        self.dram_bandwidth = as_quantity(self.dram_bandwidth, "B/s", "dram_bandwidth")
        self.switch_overhead = as_quantity(self.switch_overhead, "s", "switch_overhead")
        self.route_link_time = as_quantity(self.route_link_time, "s", "route_link_time")
        self.partitions = tuple(self.partitions)
        ids = [rp.id for rp in self.partitions]
        if len(set(ids)) != len(ids):
            raise ModelError("duplicate RP id")
        for name in ("fabric_clock", "pixel_clock", "pcap_throughput", "dram_bandwidth"):
            if not getattr(self, name) > 0:
                raise ModelError(f"PlatformSpec.{name} must be > 0")
        if self.switch_overhead < 0 or self.route_link_time < 0:
            raise ModelError("switch costs must be >= 0")
        if self.dma_engines < RESERVED_DMA:
            raise ModelError("dma_engines must be >= 2 (camera and display double-buffers)")
        if self.max_dram_streams < RESERVED_DMA:
            raise ModelError("max_dram_streams must be >= 2")

    def rp(self, rp_id: str) -> RPSpec:
        for rp in self.partitions:
            if rp.id == rp_id:
                return rp
        raise KeyError(rp_id)

    def per_stream_bandwidth(self, fmt: VideoFormat) -> Quantity:
        """Read plus write demand of one camera-rate thru-DRAM connection."""
        return 2 * fmt.frame_bytes * fmt.fps / seconds(1)

    def solo_pixel_rate(self, fmt: VideoFormat) -> Quantity:
        """Pixel rate of a pipeline streaming against DRAM.

        One pixel per fabric cycle, unless one DRAM connection's share of
        bandwidth (read and write) is lower.
        """
        share = self.dram_bandwidth / self.max_dram_streams
        dram_rate = share / nbytes(2 * fmt.bytes_per_pixel)
        return min(self.fabric_clock, dram_rate)

    @property
    def decoupling_budget(self) -> int:
        return min(self.dma_engines, self.max_dram_streams) - RESERVED_DMA

    def check(self, reference: VideoFormat = FULL_HD) -> list[str]:
        """Return violated platform invariants (empty when consistent)."""
        problems = []
        if self.max_dram_streams * self.per_stream_bandwidth(reference) > self.dram_bandwidth:
            problems.append("max_dram_streams x per-stream bandwidth exceeds dram_bandwidth")
        if self.partitions:
            fastest = min(rp.bitstream_bytes for rp in self.partitions) / self.pcap_throughput
            if self.switch_overhead >= fastest:
                problems.append("switch_overhead is not below the smallest reconfiguration time")
        return problems


SMALL_RP_BYTES = 300_000
LARGE_RP_BYTES = 1_100_000
SMALL_RP_CAPACITY = ResourceVector(8000, 24, 20)
LARGE_RP_CAPACITY = ResourceVector(18600, 54, 45)


def zc706(n_small: int = 6, n_large: int = 4, **overrides) -> PlatformSpec:
    """Prototype-like platform: six 300 KB and four 1.1 MB partitions."""
    parts = [RPSpec(f"RP{i + 1}", SMALL_RP_BYTES, SMALL_RP_CAPACITY) for i in range(n_small)]
    parts += [
        RPSpec(f"RP{n_small + i + 1}", LARGE_RP_BYTES, LARGE_RP_CAPACITY) for i in range(n_large)
    ]
    return PlatformSpec(partitions=tuple(parts), **overrides)
