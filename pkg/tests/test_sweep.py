import pytest

from dprshare.model import format_for
from dprshare.report import format_rows
from dprshare.scenario import load_scenario
from dprshare.sweep import (
    COLUMNS,
    Cell,
    SweepError,
    SweepSpec,
    cell_scenario,
    disagreements,
    min_feasible_s,
    run_cell,
    run_sweep,
)


@pytest.fixture(scope="module")
def fig8a():
    return load_scenario("fig8a")


def test_cells_cover_the_cross_product(fig8a):
    spec = SweepSpec(fig8a, g=(1, 2), s=(1, 2, 3), reconfigs=(1, 4), pipelines=(2, 3), resolutions=("720p",))
    cells = spec.cells()
    assert len(cells) == 24
    assert len(set(cells)) == 24
    assert cells[0] == Cell("720p", 2, 1, 1, 1)


def test_cell_cap(fig8a):
    spec = SweepSpec(fig8a, g=range(1, 11), s=range(1, 11), reconfigs=range(1, 7), max_cells=100)
    with pytest.raises(SweepError):
        spec.cells()


def test_cell_scenario_forces_exactly_k_reconfigurations(fig8a):
    for k in range(0, 7):
        sc = cell_scenario(fig8a, Cell("720p", 2, k, 1, 4))
        assert len(sc.pipelines) == 2
        row = run_cell(fig8a, Cell("720p", 2, k, 1, 4))
        assert row.error == ""
        assert row.planned_reconfigs == (k if k else 0)


def test_single_pipeline_without_reconfiguration_is_60fps_everywhere(fig8a):
    spec = SweepSpec(fig8a, g=(1, 2, 3), s=(1,), reconfigs=(0, 1, 3), pipelines=(1,), resolutions=("720p", "1080p"))
    rows = run_sweep(spec)
    assert rows and all(r.feasible and r.fps == 60 and r.glitches == 0 for r in rows)
    assert all(r.planned_reconfigs == 0 for r in rows)


def test_three_1080p_pipelines_need_s3():
    sc = load_scenario("fig9b")
    spec = SweepSpec(sc, g=(1, 2, 3), s=(1, 2, 3), reconfigs=(1, 2, 3), pipelines=(3,), resolutions=("1080p",))
    rows = run_sweep(spec)
    assert not disagreements(rows)
    for r in rows:
        if r.s < 3:
            assert not r.feasible, r
        elif r.reconfigs <= 2:
            assert r.feasible, r
        if r.feasible:
            assert r.fps == pytest.approx(20)
            assert r.sim_fps == pytest.approx(20)


def test_min_feasible_s(fig8a):
    rows = run_sweep(SweepSpec(fig8a, g=(1,), s=(1, 2, 3, 4), reconfigs=(1, 2)))
    assert min_feasible_s(rows) == {("720p", 2, 1, 1): 1, ("720p", 2, 2, 1): 2}


def test_cell_errors_are_recorded_and_the_sweep_continues(fig8a):
    # seven stages cannot fit six RPs; the other cells still run
    rows = run_sweep(SweepSpec(fig8a, g=(1,), s=(2,), reconfigs=(1, 7)))
    assert rows[0].error == "" and rows[0].feasible
    assert "7 stages need 7 RPs" in rows[1].error
    assert rows[1].feasible is None


def test_parallel_sweep_matches_serial(fig8a):
    spec = SweepSpec(fig8a, g=(1, 2), s=(1, 2), reconfigs=(1, 2, 3))
    serial = run_sweep(spec, jobs=1)
    parallel = run_sweep(spec, jobs=3)
    assert serial == parallel
    assert format_rows([r.to_dict() for r in serial], "csv", COLUMNS) == format_rows(
        [r.to_dict() for r in parallel], "csv", COLUMNS
    )


def test_sweep_tables_are_deterministic(fig8a):
    spec = SweepSpec.from_scenario(fig8a)
    a = format_rows([r.to_dict() for r in run_sweep(spec)], "table", COLUMNS)
    b = format_rows([r.to_dict() for r in run_sweep(spec)], "table", COLUMNS)
    assert a == b


def test_from_scenario_defaults_and_overrides(fig8a):
    spec = SweepSpec.from_scenario(fig8a, g=[2])
    assert list(spec.g) == [2]
    assert list(spec.reconfigs) == fig8a.sweep["reconfigs"]
    plain = SweepSpec.from_scenario(load_scenario("fig3"))
    assert list(plain.resolutions) == ["720p"]
    assert list(plain.pipelines) == [2]


def test_custom_resolution_needs_an_explicit_axis(fig8a):
    from dataclasses import replace

    odd = replace(fig8a, format=replace(format_for("720p"), width=1000), sweep=None)
    with pytest.raises(SweepError):
        SweepSpec.from_scenario(odd)
    assert SweepSpec.from_scenario(odd, resolutions=["720p"]).cells()
