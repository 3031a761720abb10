"""Text reports: aligned tables, CSV, NDJSON, timeline export and a
character Gantt chart of a simulated timeline.

All output is deterministic: keys are sorted and floats are written with
``repr`` precision so exported timelines round-trip exactly.
"""

from __future__ import annotations

import csv
import io
import json
import math
import re
from typing import Any, Iterable, Mapping, Optional, Sequence

from .model import ScheduleParams
from .simulator import (
    DEADLINE_MISS,
    PIPELINE_FRAME_DONE,
    PIPELINE_SWITCH,
    RECONFIG_END,
    RECONFIG_START,
    STAGE_FRAME_DONE,
    STAGE_STARTED,
    Event,
    PipelineStats,
    RoundStats,
    Timeline,
)

FORMATS = ("table", "csv", "ndjson")
STYLES = ("text-gantt", "structured")
TIMELINE_SCHEMA = 1


class ReportError(ValueError):
    pass


# -- tabular output ---------------------------------------------------------------------


def _cell(v: Any) -> str:
    if v is None:
        return "-"
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, float):
        return f"{v:.3f}"
    return str(v)


def format_table(rows: Sequence[Mapping[str, Any]], columns: Optional[Sequence[str]] = None) -> str:
    """Fixed-width table; numbers right-aligned."""
    if not rows:
        return "(no rows)\n"
    columns = list(columns or rows[0].keys())
    body = [[_cell(r.get(c)) for c in columns] for r in rows]
    widths = [max(len(c), *(len(line[i]) for line in body)) for i, c in enumerate(columns)]
    numeric = [all(isinstance(r.get(c), (int, float)) and not isinstance(r.get(c), bool) for r in rows) for c in columns]

    def fmt(vals):
        return "  ".join(v.rjust(w) if num else v.ljust(w) for v, w, num in zip(vals, widths, numeric)).rstrip()

    lines = [fmt(columns), fmt(["-" * w for w in widths])]
    lines += [fmt(line) for line in body]
    return "\n".join(lines) + "\n"


def format_csv(rows: Sequence[Mapping[str, Any]], columns: Optional[Sequence[str]] = None) -> str:
    if not rows:
        return ""
    columns = list(columns or rows[0].keys())
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({c: ("" if r.get(c) is None else r.get(c)) for c in columns})
    return buf.getvalue()


def dumps_record(rec: Mapping[str, Any]) -> str:
    return json.dumps(rec, sort_keys=True, separators=(",", ":"), allow_nan=False)


def format_ndjson(rows: Iterable[Mapping[str, Any]]) -> str:
    return "".join(dumps_record(r) + "\n" for r in rows)


def format_rows(rows: Sequence[Mapping[str, Any]], fmt: str, columns: Optional[Sequence[str]] = None) -> str:
    if fmt == "table":
        return format_table(rows, columns)
    if fmt == "csv":
        return format_csv(rows, columns)
    if fmt == "ndjson":
        return format_ndjson(rows)
    raise ReportError(f"unknown format {fmt!r}; expected one of {FORMATS}")


# -- timeline export --------------------------------------------------------------------


def timeline_records(tl: Timeline) -> list[dict]:
    """One record per event in order, then one summary record."""
    out = [{"type": "event", **ev.to_record()} for ev in tl.events]
    out.append({"type": "summary", "schema": TIMELINE_SCHEMA, **tl.summary()})
    return out


def export_timeline(tl: Timeline) -> str:
    return format_ndjson(timeline_records(tl))


def import_timeline(text: str) -> Timeline:
    events: list[Event] = []
    summary = None
    for n, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as e:
            raise ReportError(f"line {n}: {e.msg}") from None
        kind = rec.pop("type", None)
        if kind == "event":
            events.append(Event.from_record(rec))
        elif kind == "summary":
            summary = rec
        else:
            raise ReportError(f"line {n}: unknown record type {kind!r}")
    if summary is None:
        raise ReportError("timeline has no summary record")
    return Timeline(
        mode=summary["mode"],
        params=ScheduleParams(summary["g"], summary["s"]),
        round_quantum=summary["round_quantum"],
        events=events,
        per_pipeline={k: PipelineStats(**v) for k, v in summary["per_pipeline"].items()},
        rounds=[RoundStats(**r) for r in summary["rounds"]],
        peak_dram_streams=summary["peak_dram_streams"],
        peak_dram_bandwidth=summary["peak_dram_bandwidth"],
        buffer_high_water=summary["buffer_high_water"],
        captured=summary["captured"],
        rp_ids=summary.get("rp_ids", []),
        pipeline_ids=summary.get("pipeline_ids", []),
    )


# -- lanes -----------------------------------------------------------------------------

RECONFIG = "reconfig"
PROCESS = "process"
SLICE = "slice"


def lane_intervals(tl: Timeline) -> dict[str, list[tuple[float, float, str, str]]]:
    """Map lane name to (start, end, activity, pipeline) intervals.

    RP lanes carry reconfiguration and stage processing; pipeline lanes
    carry the whole timeslice.
    """
    lanes: dict[str, list] = {f"rp:{r}": [] for r in tl.rp_ids}
    lanes.update({f"pipeline:{p}": [] for p in tl.pipeline_ids})
    rc_start: dict[tuple, float] = {}
    st_start: dict[tuple, tuple[float, str]] = {}
    st_end: dict[tuple, float] = {}
    sl_start: dict[tuple, float] = {}
    sl_end: dict[tuple, float] = {}
    for ev in tl.events:
        if ev.kind == RECONFIG_START:
            rc_start[(ev.rp, ev.round, ev.pipeline)] = ev.time
        elif ev.kind == RECONFIG_END:
            a = rc_start.pop((ev.rp, ev.round, ev.pipeline))
            lanes.setdefault(f"rp:{ev.rp}", []).append((a, ev.time, RECONFIG, ev.pipeline))
        elif ev.kind == STAGE_STARTED:
            st_start[(ev.pipeline, ev.stage, ev.round)] = (ev.time, ev.rp)
        elif ev.kind == STAGE_FRAME_DONE:
            key = (ev.pipeline, ev.stage, ev.round)
            st_end[key] = max(st_end.get(key, ev.time), ev.time)
        elif ev.kind == PIPELINE_SWITCH:
            sl_start[(ev.pipeline, ev.round)] = ev.time
        elif ev.kind == PIPELINE_FRAME_DONE:
            key = (ev.pipeline, ev.round)
            sl_end[key] = max(sl_end.get(key, ev.time), ev.time)
    for key, (a, rp) in st_start.items():
        lanes.setdefault(f"rp:{rp}", []).append((a, st_end.get(key, a), PROCESS, key[0]))
    for key, a in sl_start.items():
        lanes.setdefault(f"pipeline:{key[0]}", []).append((a, sl_end.get(key, a), SLICE, key[0]))
    return {k: sorted(v) for k, v in lanes.items()}


def _letters(tl: Timeline) -> dict[str, str]:
    ids = list(tl.pipeline_ids)
    for ev in tl.events:
        if ev.pipeline and ev.pipeline not in ids:
            ids.append(ev.pipeline)
    alphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"
    return {p: alphabet[i % len(alphabet)] for i, p in enumerate(ids)}


def render_gantt(tl: Timeline, width: int = 96) -> str:
    """Character chart: ``#`` reconfiguration, a pipeline's letter while it
    processes, ``.`` idle, ``|`` round boundary, ``!`` deadline miss."""
    if width < 10:
        raise ReportError("width must be >= 10")
    lanes = lane_intervals(tl)
    letters = _letters(tl)
    end = max(
        [tl.round_quantum * (len(tl.rounds) + 1)]
        + [b for iv in lanes.values() for _, b, _, _ in iv]
        + [e.time for e in tl.events]
    )
    end = end if end > 0 else 1.0
    dt = end / width

    def col(t: float) -> int:
        return min(width - 1, max(0, int(math.floor(t / dt + 1e-9))))

    def paint(row: list[str], a: float, b: float, ch: str) -> None:
        lo = col(a)
        hi = max(lo, min(width - 1, int(math.ceil(b / dt - 1e-9)) - 1))
        for c in range(lo, hi + 1):
            row[c] = ch

    label_w = max([len("rounds")] + [len(k.split(":", 1)[1]) for k in lanes]) + 2
    lines = [
        f"mode={tl.mode} g={tl.params.g} s={tl.params.s} quantum={tl.round_quantum * 1e3:.3f}ms "
        f"span=0..{end * 1e3:.3f}ms col={dt * 1e3:.3f}ms",
    ]
    marks = ["."] * width
    for r in tl.rounds:
        marks[col(r.deadline - tl.round_quantum)] = "|"
    for ev in tl.events:
        if ev.kind == DEADLINE_MISS:
            marks[col(ev.time)] = "!"
    lines.append("rounds".ljust(label_w) + "".join(marks))
    for name in sorted(lanes, key=lambda k: (not k.startswith("rp:"), _natural(k))):
        row = ["."] * width
        # processing first so reconfiguration stays visible when both share a column
        for a, b, act, pipe in lanes[name]:
            if act != RECONFIG:
                paint(row, a, b, letters.get(pipe, "?"))
        for a, b, act, _ in lanes[name]:
            if act == RECONFIG:
                paint(row, a, b, "#")
        lines.append(name.split(":", 1)[1].ljust(label_w) + "".join(row))
    key = " ".join(f"{v}={k}" for k, v in letters.items())
    lines.append(f"legend: #=reconfiguration .=idle |=round start !=deadline miss {key}".rstrip())
    return "\n".join(lines) + "\n"


def _natural(name: str) -> tuple:
    return tuple(int(t) if t.isdigit() else t for t in re.split(r"(\d+)", name))


def lane_records(tl: Timeline) -> list[dict]:
    """Structured style: every event tagged with the lane it is drawn in."""
    out = []
    for ev in tl.events:
        if ev.rp:
            lane = f"rp:{ev.rp}"
        elif ev.pipeline:
            lane = f"pipeline:{ev.pipeline}"
        else:
            lane = "rounds"
        out.append({"lane": lane, **ev.to_record()})
    return out


def events_from_lane_records(records: Iterable[Mapping[str, Any]]) -> list[Event]:
    return [Event.from_record({k: v for k, v in r.items() if k != "lane"}) for r in records]


def render_timeline(tl: Timeline, style: str = "text-gantt", width: int = 96) -> str:
    if style == "text-gantt":
        return render_gantt(tl, width)
    if style == "structured":
        return format_ndjson(lane_records(tl))
    raise ReportError(f"unknown style {style!r}; expected one of {STYLES}")
