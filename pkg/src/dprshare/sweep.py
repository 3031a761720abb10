"""Parameter sweeps over (resolution, pipeline count, reconfigured RPs, g, s).

Every cell is planned, checked analytically and simulated.  A cell whose
analytic and simulated verdicts disagree is flagged; cell errors are
recorded and the sweep carries on.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from typing import Optional, Sequence

from .model import ModelError, ModuleSpec, PipelineSpec, ScheduleParams, format_for
from .runner import evaluate
from .scenario import Scenario

DEFAULT_MAX_CELLS = 5000
MIN_STAGES = 3


class SweepError(ModelError):
    pass


@dataclass(frozen=True)
class Cell:
    resolution: str
    pipelines: int
    reconfigs: int
    g: int
    s: int


@dataclass
class SweepSpec:
    base: Scenario
    g: Sequence[int] = (1, 2, 3)
    s: Sequence[int] = (1, 2, 3, 4)
    reconfigs: Sequence[int] = (1, 2, 3, 4, 5, 6)
    pipelines: Sequence[int] = (2,)
    resolutions: Sequence[str] = ("720p",)
    max_cells: int = DEFAULT_MAX_CELLS
    min_stages: int = MIN_STAGES

    @classmethod
    def from_scenario(cls, sc: Scenario, **overrides) -> "SweepSpec":
        axes = dict(sc.sweep or {})
        kw = {k: v for k, v in axes.items() if v is not None}
        kw.update({k: v for k, v in overrides.items() if v is not None})
        if "resolutions" not in kw:
            if sc.format.resolution is None:
                raise SweepError(
                    f"{sc.format.width}x{sc.format.height} is not a named resolution; give the resolutions axis"
                )
            kw["resolutions"] = [sc.format.resolution]
        if "pipelines" not in kw:
            kw["pipelines"] = [max(1, len(sc.pipelines))]
        return cls(base=sc, **kw)

    def cells(self) -> list[Cell]:
        n = len(self.resolutions) * len(self.pipelines) * len(self.reconfigs) * len(self.g) * len(self.s)
        if n > self.max_cells:
            raise SweepError(f"sweep has {n} cells, above the cap of {self.max_cells}")
        return [
            Cell(r, p, k, g, s)
            for r, p, k, g, s in itertools.product(
                self.resolutions, self.pipelines, self.reconfigs, self.g, self.s
            )
        ]


@dataclass
class SweepRow:
    resolution: str
    pipelines: int
    reconfigs: int
    g: int
    s: int
    mode: str
    planned_reconfigs: int = 0
    feasible: Optional[bool] = None
    fps: float = 0.0
    sim_fps: float = 0.0
    total_ms: float = 0.0
    quantum_ms: float = 0.0
    slack_ms: float = 0.0
    glitches: int = 0
    agree: Optional[bool] = None
    error: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


COLUMNS = tuple(SweepRow.__dataclass_fields__)


def cell_scenario(base: Scenario, cell: Cell, min_stages: int = MIN_STAGES) -> Scenario:
    """Build ``cell.pipelines`` pipelines of ``n = max(min_stages, k)`` stages
    on exactly ``n`` RPs, consecutive pipelines sharing all but ``k`` modules,
    so every switch must reconfigure exactly ``k`` RPs."""
    k = cell.reconfigs
    n = max(min_stages, k)
    # the scenario's own time-sharing pool first, then any other partition
    shared = base.time_shared_rps or []
    pool = shared + [rp.id for rp in base.platform.partitions if rp.id not in shared]
    if len(pool) < n:
        raise SweepError(f"{n} stages need {n} RPs; the platform offers {len(pool)}")
    template = next(iter(base.modules.values()), None) or ModuleSpec("m", buffer_lines=10)

    def mod(mid: str) -> ModuleSpec:
        return replace(template, id=mid)

    pipes = []
    for p in range(cell.pipelines):
        stages = [mod(f"u{p + 1}_{j + 1}") if j < k else mod(f"c{j + 1}") for j in range(n)]
        pipes.append(PipelineSpec.linear(f"P{p + 1}", stages))
    fmt = format_for(cell.resolution, base.format.fps, base.format.bytes_per_pixel)
    return replace(
        base,
        name=f"{base.name}[{cell.resolution},P={cell.pipelines},k={k},g={cell.g},s={cell.s}]",
        format=fmt,
        modules={m.id: m for pipe in pipes for m in pipe.stages.values()},
        pipelines=pipes,
        schedule=ScheduleParams(cell.g, cell.s),
        time_shared_rps=list(pool[:n]),
        sweep=None,
    )


def run_cell(base: Scenario, cell: Cell, min_stages: int = MIN_STAGES) -> SweepRow:
    row = SweepRow(cell.resolution, cell.pipelines, cell.reconfigs, cell.g, cell.s, base.mode)
    try:
        sc = cell_scenario(base, cell, min_stages)
        v = evaluate(sc)
    except ModelError as e:
        row.error = f"{type(e).__name__}: {e}"
        return row
    rep = v.report
    row.planned_reconfigs = max((p.n_reconfig for p in v.plans.steady), default=0)
    row.feasible = rep.feasible
    row.fps = rep.effective_fps
    row.sim_fps = min((st.achieved_fps for st in v.timeline.per_pipeline.values()), default=0.0)
    row.total_ms = float(rep.total) * 1e3
    row.quantum_ms = float(rep.round_quantum) * 1e3
    row.slack_ms = float(rep.slack) * 1e3
    row.glitches = v.glitches
    row.agree = v.agree
    return row


def _run_cell_args(args) -> SweepRow:
    return run_cell(*args)


def run_sweep(spec: SweepSpec, jobs: int = 1) -> list[SweepRow]:
    """Rows come back in cell order whatever ``jobs`` is."""
    cells = spec.cells()
    args = [(spec.base, c, spec.min_stages) for c in cells]
    if jobs <= 1 or len(cells) < 2:
        return [run_cell(*a) for a in args]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_cell_args, args, chunksize=max(1, len(args) // (4 * jobs))))


def disagreements(rows: Sequence[SweepRow]) -> list[SweepRow]:
    return [r for r in rows if r.agree is False]


def min_feasible_s(rows: Sequence[SweepRow]) -> dict[tuple, Optional[int]]:
    """Smallest feasible s per (resolution, pipelines, reconfigs, g)."""
    out: dict[tuple, Optional[int]] = {}
    for r in rows:
        key = (r.resolution, r.pipelines, r.reconfigs, r.g)
        out.setdefault(key, None)
        if r.feasible and (out[key] is None or r.s < out[key]):
            out[key] = r.s
    return out
