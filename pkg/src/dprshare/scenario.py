"""Scenario files: JSON documents describing a platform, a video format, a
module library, the pipelines to time-share and the schedule.

Every error names the offending field by path (``pipelines[1].stages[0].module``)
or, for syntax errors, by line and column.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Any, Optional, Union

from .assignment import FabricState
from .model import (
    ModelError,
    ModuleSpec,
    PipelineSpec,
    PlatformSpec,
    RESOLUTIONS,
    ResourceVector,
    RPSpec,
    SINK,
    SOURCE,
    ScheduleParams,
    VideoFormat,
)
from .simulator import MODES

SCHEMA_VERSION = 1
FIXTURES = ("fig3", "fig4", "fig8a", "fig8b", "fig9a", "fig9b")


class ScenarioError(ValueError):
    def __init__(self, message: str, path: str = "", source: str = ""):
        where = " ".join(x for x in (source, path) if x)
        super().__init__(f"{where}: {message}" if where else message)
        self.path = path
        self.source = source


@dataclass
class Scenario:
    name: str
    platform: PlatformSpec
    format: VideoFormat
    modules: dict[str, ModuleSpec]
    pipelines: list[PipelineSpec]
    schedule: ScheduleParams = field(default_factory=ScheduleParams)
    mode: str = "basic"
    rounds: int = 4
    fifo_frames: float = 1.0
    time_shared_rps: Optional[list[str]] = None
    sweep: Optional[dict] = None
    description: str = ""

    def planning_platform(self) -> PlatformSpec:
        """The platform restricted to the RPs reserved for time-sharing."""
        if self.time_shared_rps is None:
            return self.platform
        keep = set(self.time_shared_rps)
        parts = tuple(rp for rp in self.platform.partitions if rp.id in keep)
        return replace(self.platform, partitions=parts)

    def initial_state(self) -> FabricState:
        return FabricState.from_platform(self.planning_platform())

    def with_schedule(self, g: Optional[int] = None, s: Optional[int] = None, mode: Optional[str] = None) -> "Scenario":
        sched = ScheduleParams(g or self.schedule.g, s or self.schedule.s)
        return replace(self, schedule=sched, mode=mode or self.mode)


# -- reading ---------------------------------------------------------------------------


class _Reader:
    def __init__(self, source: str):
        self.source = source

    def fail(self, path: str, message: str):
        raise ScenarioError(message, path, self.source)

    def obj(self, value, path) -> dict:
        if not isinstance(value, dict):
            self.fail(path, f"expected an object, got {type(value).__name__}")
        return value

    def lst(self, value, path) -> list:
        if not isinstance(value, list):
            self.fail(path, f"expected a list, got {type(value).__name__}")
        return value

    def get(self, d: dict, key: str, path: str, kind, default=..., allowed=None):
        p = f"{path}.{key}" if path else key
        if key not in d:
            if default is ...:
                self.fail(p, "required field missing")
            return default
        v = d[key]
        if kind is float:
            ok = isinstance(v, (int, float)) and not isinstance(v, bool)
        elif kind is int:
            ok = isinstance(v, int) and not isinstance(v, bool)
        else:
            ok = isinstance(v, kind)
        if not ok:
            name = getattr(kind, "__name__", str(kind))
            self.fail(p, f"expected {name}, got {type(v).__name__} {v!r}")
        if allowed is not None and v not in allowed:
            self.fail(p, f"must be one of {list(allowed)}, got {v!r}")
        return v

    def unknown(self, d: dict, known: set, path: str):
        extra = sorted(set(d) - known)
        if extra:
            self.fail(path or "<root>", f"unknown field(s) {extra}")


def _resources(r: _Reader, d, path) -> ResourceVector:
    if d is None:
        return ResourceVector()
    d = r.obj(d, path)
    r.unknown(d, {"lut", "bram36", "dsp"}, path)
    try:
        return ResourceVector(
            r.get(d, "lut", path, int, 0), r.get(d, "bram36", path, float, 0), r.get(d, "dsp", path, int, 0)
        )
    except ModelError as e:
        r.fail(path, str(e))


_PLATFORM_FIELDS = {
    "fabric_clock_hz": "fabric_clock",
    "pixel_clock_hz": "pixel_clock",
    "pcap_throughput_bps": "pcap_throughput",
    "dram_bandwidth_bps": "dram_bandwidth",
    "switch_overhead_s": "switch_overhead",
    "route_link_time_s": "route_link_time",
}


def _platform(r: _Reader, d, path) -> PlatformSpec:
    d = r.obj(d, path)
    r.unknown(d, set(_PLATFORM_FIELDS) | {"max_dram_streams", "dma_engines", "partitions"}, path)
    kw: dict[str, Any] = {}
    for key, attr in _PLATFORM_FIELDS.items():
        if key in d:
            kw[attr] = float(r.get(d, key, path, float))
    for key in ("max_dram_streams", "dma_engines"):
        if key in d:
            kw[key] = r.get(d, key, path, int)
    parts = []
    seen = set()
    for i, pd in enumerate(r.lst(r.get(d, "partitions", path, list), f"{path}.partitions")):
        pp = f"{path}.partitions[{i}]"
        pd = r.obj(pd, pp)
        r.unknown(pd, {"id", "bitstream_bytes", "capacity", "loaded"}, pp)
        rid = r.get(pd, "id", pp, str)
        if rid in seen:
            r.fail(f"{pp}.id", f"duplicate RP id {rid!r}")
        seen.add(rid)
        try:
            parts.append(
                RPSpec(
                    rid,
                    float(r.get(pd, "bitstream_bytes", pp, float)),
                    _resources(r, pd.get("capacity"), f"{pp}.capacity") if "capacity" in pd else RPSpec.__dataclass_fields__["capacity"].default_factory(),
                    r.get(pd, "loaded", pp, (str, type(None)), None),
                )
            )
        except ModelError as e:
            r.fail(pp, str(e))
    try:
        return PlatformSpec(partitions=tuple(parts), **kw)
    except ModelError as e:
        r.fail(path, str(e))


def _format(r: _Reader, d, path) -> VideoFormat:
    d = r.obj(d, path)
    r.unknown(d, {"width", "height", "fps", "bytes_per_pixel", "resolution"}, path)
    fps = r.get(d, "fps", path, float, 60)
    bpp = r.get(d, "bytes_per_pixel", path, int, 2)
    if "resolution" in d:
        res = r.get(d, "resolution", path, str, allowed=RESOLUTIONS)
        w, h = RESOLUTIONS[res]
    else:
        w = r.get(d, "width", path, int)
        h = r.get(d, "height", path, int)
    try:
        return VideoFormat(w, h, fps, bpp)
    except ModelError as e:
        r.fail(path, str(e))


def _modules(r: _Reader, items, path) -> dict[str, ModuleSpec]:
    out: dict[str, ModuleSpec] = {}
    for i, md in enumerate(r.lst(items, path)):
        mp = f"{path}[{i}]"
        md = r.obj(md, mp)
        r.unknown(md, {"id", "buffer_lines", "demand", "in_ports", "out_ports", "initiation_interval", "description"}, mp)
        mid = r.get(md, "id", mp, str)
        if mid in out:
            r.fail(f"{mp}.id", f"duplicate module id {mid!r}")
        try:
            out[mid] = ModuleSpec(
                mid,
                r.get(md, "buffer_lines", mp, int, 0),
                _resources(r, md.get("demand"), f"{mp}.demand"),
                r.get(md, "in_ports", mp, int, 1),
                r.get(md, "out_ports", mp, int, 1),
                r.get(md, "initiation_interval", mp, int, 1),
            )
        except ModelError as e:
            r.fail(mp, str(e))
    return out


def _pipelines(r: _Reader, items, path, modules) -> list[PipelineSpec]:
    out = []
    ids = set()
    for i, pd in enumerate(r.lst(items, path)):
        pp = f"{path}[{i}]"
        pd = r.obj(pd, pp)
        r.unknown(pd, {"id", "stages", "edges", "description"}, pp)
        pid = r.get(pd, "id", pp, str)
        if pid in ids:
            r.fail(f"{pp}.id", f"duplicate pipeline id {pid!r}")
        ids.add(pid)
        stages: dict[str, ModuleSpec] = {}
        for j, sd in enumerate(r.lst(r.get(pd, "stages", pp, list), f"{pp}.stages")):
            sp = f"{pp}.stages[{j}]"
            if isinstance(sd, str):
                sid, mid = f"s{j + 1}", sd
            else:
                sd = r.obj(sd, sp)
                r.unknown(sd, {"id", "module"}, sp)
                sid = r.get(sd, "id", sp, str)
                mid = r.get(sd, "module", sp, str)
            if mid not in modules:
                r.fail(f"{sp}.module", f"unknown module id {mid!r}")
            if sid in stages:
                r.fail(sp, f"duplicate stage id {sid!r}")
            stages[sid] = modules[mid]
        if "edges" in pd:
            edges = []
            for j, e in enumerate(r.lst(pd["edges"], f"{pp}.edges")):
                ep = f"{pp}.edges[{j}]"
                if not (isinstance(e, list) and len(e) == 2 and all(isinstance(x, str) for x in e)):
                    r.fail(ep, "expected a [from, to] pair of stage ids")
                for x in e:
                    if x not in stages and x not in (SOURCE, SINK):
                        r.fail(ep, f"unknown stage id {x!r}")
                edges.append(tuple(e))
        else:
            chain = [SOURCE, *stages, SINK] if stages else []
            edges = list(zip(chain, chain[1:]))
        try:
            out.append(PipelineSpec(pid, stages, tuple(edges)))
        except ModelError as e:
            r.fail(pp, str(e))
    return out


def parse_scenario(doc: Any, source: str = "") -> Scenario:
    r = _Reader(source)
    d = r.obj(doc, "<root>")
    r.unknown(
        d,
        {"version", "name", "description", "platform", "format", "modules", "pipelines",
         "schedule", "mode", "simulation", "time_shared_rps", "sweep"},
        "",
    )
    version = r.get(d, "version", "", int)
    if version != SCHEMA_VERSION:
        r.fail("version", f"unsupported schema version {version}; expected {SCHEMA_VERSION}")
    platform = _platform(r, r.get(d, "platform", "", dict), "platform")
    fmt = _format(r, r.get(d, "format", "", dict), "format")
    modules = _modules(r, r.get(d, "modules", "", list, []), "modules")
    pipelines = _pipelines(r, r.get(d, "pipelines", "", list, []), "pipelines", modules)

    sched = r.obj(r.get(d, "schedule", "", dict, {}), "schedule")
    r.unknown(sched, {"g", "s"}, "schedule")
    g = r.get(sched, "g", "schedule", int, 1)
    s = r.get(sched, "s", "schedule", int, 1)
    try:
        params = ScheduleParams(g, s)
    except ModelError as e:
        r.fail("schedule", str(e))
    mode = r.get(d, "mode", "", str, "basic", allowed=MODES)

    sim = r.obj(r.get(d, "simulation", "", dict, {}), "simulation")
    r.unknown(sim, {"rounds", "fifo_frames"}, "simulation")
    rounds = r.get(sim, "rounds", "simulation", int, 4)
    if rounds < 1:
        r.fail("simulation.rounds", "must be >= 1")
    fifo = float(r.get(sim, "fifo_frames", "simulation", float, 1.0))

    shared = None
    if "time_shared_rps" in d:
        v = d["time_shared_rps"]
        rp_ids = [rp.id for rp in platform.partitions]
        if isinstance(v, int) and not isinstance(v, bool):
            if not 0 <= v <= len(rp_ids):
                r.fail("time_shared_rps", f"count {v} outside 0..{len(rp_ids)}")
            shared = rp_ids[:v]
        elif isinstance(v, list):
            for j, x in enumerate(v):
                if x not in rp_ids:
                    r.fail(f"time_shared_rps[{j}]", f"unknown RP id {x!r}")
            shared = list(v)
        else:
            r.fail("time_shared_rps", "expected a count or a list of RP ids")

    sweep = None
    if "sweep" in d:
        sweep = r.obj(d["sweep"], "sweep")
        r.unknown(sweep, {"g", "s", "reconfigs", "pipelines", "resolutions", "max_cells", "min_stages"}, "sweep")
        for key in ("g", "s", "reconfigs", "pipelines"):
            if key in sweep:
                vals = r.lst(sweep[key], f"sweep.{key}")
                for j, x in enumerate(vals):
                    if not isinstance(x, int) or isinstance(x, bool) or x < (0 if key == "reconfigs" else 1):
                        r.fail(f"sweep.{key}[{j}]", f"invalid value {x!r}")
        for j, x in enumerate(sweep.get("resolutions", [])):
            if x not in RESOLUTIONS:
                r.fail(f"sweep.resolutions[{j}]", f"unknown resolution {x!r}")

    return Scenario(
        name=r.get(d, "name", "", str, Path(source).stem if source else "scenario"),
        platform=platform,
        format=fmt,
        modules=modules,
        pipelines=pipelines,
        schedule=params,
        mode=mode,
        rounds=rounds,
        fifo_frames=fifo,
        time_shared_rps=shared,
        sweep=sweep,
        description=r.get(d, "description", "", str, ""),
    )


def fixture_text(name: str) -> str:
    return resources.files("dprshare.fixtures").joinpath(f"{name}.json").read_text()


def load_scenario(path: Union[str, Path]) -> Scenario:
    """Load a scenario file, or a bundled fixture by name (``fig8a``...)."""
    p = Path(path)
    if p.exists():
        text, source = p.read_text(), str(p)
    elif str(path) in FIXTURES:
        text, source = fixture_text(str(path)), f"{path}.json"
    else:
        raise ScenarioError(f"no such scenario file or fixture: {path}")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioError(f"line {e.lineno} column {e.colno}: {e.msg}", source=source) from None
    return parse_scenario(doc, source)
