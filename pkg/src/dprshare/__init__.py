"""Model, planner and simulator for time-sharing video pipelines on
dynamically reconfigurable FPGA partitions."""

from .assignment import (
    FabricState,
    RoundPlan,
    TransitionPlan,
    brute_force_min_reconfigs,
    plan_round,
    plan_transition,
    validate_topology,
)
from .model import (
    ModuleSpec,
    PipelineSpec,
    PlatformSpec,
    RPSpec,
    ScheduleParams,
    VideoFormat,
    format_for,
    zc706,
)
from .perf import (
    check_feasibility,
    fill_time,
    min_downsample,
    round_quantum,
    slice_amortized,
    slice_basic,
    slice_staggered_bounds,
)
from .scenario import Scenario, load_scenario
from .simulator import SimConfig, Timeline, buffer_high_water, measured_slice, simulate
from .sweep import SweepSpec, run_sweep

__all__ = [
    "FabricState", "RoundPlan", "TransitionPlan", "brute_force_min_reconfigs", "plan_round",
    "plan_transition", "validate_topology", "ModuleSpec", "PipelineSpec", "PlatformSpec", "RPSpec",
    "ScheduleParams", "VideoFormat", "format_for", "zc706", "check_feasibility", "fill_time",
    "min_downsample", "round_quantum", "slice_amortized", "slice_basic", "slice_staggered_bounds",
    "Scenario", "load_scenario", "SimConfig", "Timeline", "buffer_high_water", "measured_slice",
    "simulate", "SweepSpec", "run_sweep",
]
