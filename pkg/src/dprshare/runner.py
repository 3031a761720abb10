"""Glue between a Scenario and the planner, the feasibility test and the
simulator, so that the analytic and simulated sides see identical plans."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .assignment import RoundPlan, plan_round
from .perf import FeasibilityReport, Workload, check_feasibility
from .scenario import Scenario
from .simulator import STAGGERED, SimConfig, Timeline, simulate


def plan_scenario(sc: Scenario) -> RoundPlan:
    platform = sc.planning_platform()
    return plan_round(sc.initial_state(), sc.pipelines, platform, decouple=sc.mode == STAGGERED)


def plan_workloads(sc: Scenario, plans: RoundPlan) -> list[Workload]:
    """One steady-state workload per pipeline, charging exactly the switch
    cost the simulator will spend (overhead plus the plan's route writes)."""
    platform = sc.planning_platform()
    out = []
    for pipe, plan in zip(sc.pipelines, plans.steady):
        rps = tuple(platform.rp(rp) for rp, _ in plan.reconfigure)
        stage_rps = None
        if sc.mode == STAGGERED:
            stage_rps = {s: platform.rp(rp) for s, rp in plan.reconfigured_stages().items()}
        out.append(Workload(pipe, rps, platform.switch_overhead + plan.route_config_time, stage_rps))
    return out


def check_scenario(sc: Scenario, plans: Optional[RoundPlan] = None) -> FeasibilityReport:
    plans = plans or plan_scenario(sc)
    return check_feasibility(plan_workloads(sc, plans), sc.format, sc.planning_platform(), sc.schedule)


def simulate_scenario(sc: Scenario, plans: Optional[RoundPlan] = None) -> Timeline:
    plans = plans or plan_scenario(sc)
    cfg = SimConfig(
        mode=sc.mode,
        params=sc.schedule,
        rounds=sc.rounds,
        plans=plans,
        fifo_frames=sc.fifo_frames,
    )
    return simulate(sc.planning_platform(), sc.format, sc.pipelines, cfg)


@dataclass(frozen=True)
class Verdict:
    report: FeasibilityReport
    timeline: Timeline
    plans: RoundPlan

    @property
    def glitches(self) -> int:
        return len(self.timeline.glitches)

    @property
    def agree(self) -> bool:
        """Basic mode must match exactly; in staggered mode the analytic test
        is conservative, so only "feasible but glitching" is a defect."""
        ok = self.glitches == 0
        if self.timeline.mode == STAGGERED:
            return ok or not self.report.feasible
        return ok == self.report.feasible


def evaluate(sc: Scenario) -> Verdict:
    plans = plan_scenario(sc)
    return Verdict(check_scenario(sc, plans), simulate_scenario(sc, plans), plans)
