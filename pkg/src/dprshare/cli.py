"""Command line front end.

Exit codes: 0 success, 1 execution error (a failed cell, a simulation error
or an analytic/simulated disagreement), 2 usage error, 3 scenario load error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from typing import Optional, Sequence

from .generate import random_scenario
from .model import ModelError, RESOLUTIONS, ScheduleParams
from .report import FORMATS, STYLES, export_timeline, format_rows, render_timeline
from .runner import Verdict, check_scenario, evaluate, plan_scenario
from .scenario import FIXTURES, Scenario, ScenarioError, load_scenario
from .simulator import MODES, STAGGERED
from .sweep import COLUMNS, SweepError, SweepSpec, disagreements, run_sweep

EXIT_OK = 0
EXIT_EXEC = 1
EXIT_USAGE = 2
EXIT_LOAD = 3


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _resolutions(text: str) -> list[str]:
    vals = [x.strip() for x in text.split(",") if x.strip()]
    for v in vals:
        if v not in RESOLUTIONS:
            raise argparse.ArgumentTypeError(f"unknown resolution {v!r}; known: {', '.join(RESOLUTIONS)}")
    return vals


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--scenario", metavar="PATH", help=f"scenario file or bundled fixture ({', '.join(FIXTURES)})")
    src.add_argument("--seed", type=int, metavar="N", help="generate a random scenario from this seed")
    common.add_argument("--g", type=_positive, metavar="N", help="frames per timeslice (bundle size)")
    common.add_argument("--s", type=_positive, metavar="N", help="downsampling factor")
    common.add_argument("--mode", choices=MODES)
    common.add_argument("--format", choices=FORMATS, default="table", dest="fmt")
    common.add_argument("--rounds", type=_positive, metavar="N", help="rounds to simulate")
    common.add_argument("-o", "--output", metavar="PATH", help="write the report here instead of stdout")

    p = argparse.ArgumentParser(prog="dprshare", description="Time-share video pipelines on reconfigurable partitions.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("check", parents=[common], help="analytic feasibility of the round")
    sub.add_parser("simulate", parents=[common], help="simulate the scenario and summarize")
    sub.add_parser("plan", parents=[common], help="RP assignment and transition plans")
    sw = sub.add_parser("sweep", parents=[common], help="feasibility grid over schedule and workload axes")
    sw.add_argument("--jobs", type=_positive, default=1, metavar="N")
    sw.add_argument("--g-values", type=_ints, metavar="LIST", help="comma-separated g axis")
    sw.add_argument("--s-values", type=_ints, metavar="LIST", help="comma-separated s axis")
    sw.add_argument("--reconfigs", type=_ints, metavar="LIST", help="reconfigured RPs per switch")
    sw.add_argument("--pipelines", type=_ints, metavar="LIST", help="pipeline counts")
    sw.add_argument("--resolutions", type=_resolutions, metavar="LIST")
    sw.add_argument("--max-cells", type=_positive, metavar="N")
    rd = sub.add_parser("render", parents=[common], help="render the simulated timeline")
    rd.add_argument("--style", choices=STYLES + ("ndjson",), default="text-gantt",
                    help="text-gantt chart, structured lane records, or the raw ndjson timeline export")
    rd.add_argument("--width", type=_positive, default=96)
    return p


def _scenario(args) -> Scenario:
    if args.seed is not None:
        sc = random_scenario(args.seed)
    elif args.scenario:
        sc = load_scenario(args.scenario)
    else:
        raise ScenarioError("give --scenario PATH or --seed N")
    sc = replace(sc, schedule=ScheduleParams(args.g or sc.schedule.g, args.s or sc.schedule.s))
    if args.mode:
        sc = replace(sc, mode=args.mode)
    if args.rounds:
        sc = replace(sc, rounds=args.rounds)
    return sc


def _ms(q) -> float:
    return round(float(q) * 1e3, 6)


def cmd_check(sc: Scenario, args) -> tuple[str, int]:
    rep = check_scenario(sc)
    rows = [
        {
            "pipeline": e.pipeline,
            "t_config_ms": _ms(e.t_config),
            "t_fill_ms": _ms(e.t_fill),
            "t_frame_ms": _ms(e.t_frame),
            "slice_ms": _ms(e.basic_slice),
            "amortized_ms": _ms(a),
            "switch_ms": _ms(sw),
        }
        for e, a, sw in zip(rep.slices, rep.amortized, rep.switch_costs)
    ]
    if sc.mode == STAGGERED:
        for row, e in zip(rows, rep.slices):
            row["lower_tight_ms"] = _ms(e.lower_tight(rep.params.g))
    total = {
        "scenario": sc.name,
        "mode": sc.mode,
        "g": rep.params.g,
        "s": rep.params.s,
        "quantum_ms": _ms(rep.round_quantum),
        "total_ms": _ms(rep.total),
        "slack_ms": _ms(rep.slack),
        "feasible": rep.feasible,
        "fps": rep.effective_fps,
        "diagnosis": rep.diagnosis,
    }
    if args.fmt == "table":
        return format_rows(rows, "table") + "\n" + format_rows([total], "table"), EXIT_OK
    return format_rows(rows + [total] if args.fmt == "ndjson" else [total], args.fmt), EXIT_OK


def _verdict_rows(sc: Scenario, v: Verdict) -> tuple[list[dict], dict]:
    tl = v.timeline
    rows = [
        {
            "pipeline": pid,
            "frames": st.frames_processed,
            "on_time": st.frames_on_time,
            "fps": round(st.achieved_fps, 6),
            "slice_ms": round(max(st.slice_durations, default=0.0) * 1e3, 6),
            "latency_ms": round(st.latency_max * 1e3, 6),
        }
        for pid, st in tl.per_pipeline.items()
    ]
    summary = {
        "scenario": sc.name,
        "mode": tl.mode,
        "g": tl.params.g,
        "s": tl.params.s,
        "rounds": len(tl.rounds),
        "glitches": v.glitches,
        "feasible": v.report.feasible,
        "agree": v.agree,
        "peak_dram_streams": tl.peak_dram_streams,
        "peak_dram_gbps": round(tl.peak_dram_bandwidth / 1e9, 6),
    }
    return rows, summary


def cmd_simulate(sc: Scenario, args) -> tuple[str, int]:
    v = evaluate(sc)
    rows, summary = _verdict_rows(sc, v)
    if args.fmt == "table":
        out = format_rows(rows, "table") + "\n" + format_rows([summary], "table")
    elif args.fmt == "ndjson":
        out = format_rows(rows + [summary], "ndjson")
    else:
        out = format_rows(rows, "csv")
    if not v.agree:
        print(f"DISAGREEMENT: analytic feasible={v.report.feasible} but {v.glitches} glitches", file=sys.stderr)
        return out, EXIT_EXEC
    return out, EXIT_OK


def cmd_plan(sc: Scenario, args) -> tuple[str, int]:
    plans = plan_scenario(sc)
    rows = []
    for phase, seq in (("warmup", plans.warmup), ("steady", plans.steady)):
        for p in seq:
            rows.append(
                {
                    "phase": phase,
                    "pipeline": p.pipeline,
                    "assignment": " ".join(f"{s}={rp}" for s, rp in p.assignment.items()),
                    "reconfigure": " ".join(f"{rp}<-{m}" for rp, m in p.reconfigure) or "-",
                    "n_reconfig": p.n_reconfig,
                    "reconfig_ms": _ms(p.reconfig_time_total),
                    "routes": len(p.routes),
                    "decoupled": len(p.decoupling_routes),
                    "route_us": round(float(p.route_config_time) * 1e6, 6),
                }
            )
    out = format_rows(rows, args.fmt)
    if args.fmt == "table":
        out += f"\nexact={plans.exact} reconfigs_per_round={plans.reconfigs_per_round}\n"
    return out, EXIT_OK


def cmd_sweep(sc: Scenario, args) -> tuple[str, int]:
    spec = SweepSpec.from_scenario(
        sc,
        g=args.g_values or ([args.g] if args.g else None),
        s=args.s_values or ([args.s] if args.s else None),
        reconfigs=args.reconfigs,
        pipelines=args.pipelines,
        resolutions=args.resolutions,
        max_cells=args.max_cells,
    )
    rows = run_sweep(spec, jobs=args.jobs)
    out = format_rows([r.to_dict() for r in rows], args.fmt, COLUMNS)
    code = EXIT_OK
    for r in rows:
        if r.error:
            print(f"cell error {r.resolution} P={r.pipelines} k={r.reconfigs} g={r.g} s={r.s}: {r.error}", file=sys.stderr)
            code = EXIT_EXEC
    for r in disagreements(rows):
        print(
            f"DISAGREEMENT {r.resolution} P={r.pipelines} k={r.reconfigs} g={r.g} s={r.s}: "
            f"analytic feasible={r.feasible} simulated glitches={r.glitches}",
            file=sys.stderr,
        )
        code = EXIT_EXEC
    return out, code


def cmd_render(sc: Scenario, args) -> tuple[str, int]:
    v = evaluate(sc)
    if args.style == "ndjson":
        return export_timeline(v.timeline), EXIT_OK
    return render_timeline(v.timeline, args.style, args.width), EXIT_OK


COMMANDS = {
    "check": cmd_check,
    "simulate": cmd_simulate,
    "plan": cmd_plan,
    "sweep": cmd_sweep,
    "render": cmd_render,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    try:
        sc = _scenario(args)
    except (ScenarioError, ModelError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_LOAD
    try:
        out, code = COMMANDS[args.command](sc, args)
    except SweepError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ModelError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_EXEC
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)
    return code


if __name__ == "__main__":
    sys.exit(main())
