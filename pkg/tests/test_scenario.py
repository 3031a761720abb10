import copy
import json

import pytest

from dprshare.runner import evaluate
from dprshare.scenario import FIXTURES, ScenarioError, fixture_text, load_scenario, parse_scenario


def fig3_doc():
    return json.loads(fixture_text("fig3"))


@pytest.mark.parametrize("name", FIXTURES)
def test_every_fixture_loads_and_agrees(name):
    sc = load_scenario(name)
    assert sc.name == name
    assert evaluate(sc).agree


def test_fig8a_setup():
    sc = load_scenario("fig8a")
    assert sc.format.resolution == "720p"
    assert [len(p.stages) for p in sc.pipelines] == [3, 3]
    parts = sc.platform.partitions
    assert len(parts) == 6
    assert all(float(rp.bitstream_bytes) == 300e3 for rp in parts)


def test_load_from_path_matches_fixture(tmp_path):
    path = tmp_path / "mine.json"
    path.write_text(fixture_text("fig3"))
    sc = load_scenario(path)
    assert sc.pipelines == load_scenario("fig3").pipelines
    assert sc.name == "fig3"


def test_empty_pipeline_list_is_trivially_feasible():
    doc = fig3_doc()
    doc["pipelines"] = []
    v = evaluate(parse_scenario(doc))
    assert v.report.feasible
    assert v.glitches == 0


def test_unknown_module_id_is_named():
    doc = fig3_doc()
    doc["pipelines"][1]["stages"][2] = "zz9"
    with pytest.raises(ScenarioError) as err:
        parse_scenario(doc, "x.json")
    assert "zz9" in str(err.value)
    assert err.value.path == "pipelines[1].stages[2].module"


def test_json_syntax_error_reports_line_and_column(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "version": 1,\n  "name": oops\n}\n')
    with pytest.raises(ScenarioError) as err:
        load_scenario(path)
    assert "line 3 column" in str(err.value)
    assert "bad.json" in str(err.value)


@pytest.mark.parametrize(
    "mutate, path",
    [
        (lambda d: d.pop("version"), "version"),
        (lambda d: d.update(version=2), "version"),
        (lambda d: d.update(mode="turbo"), "mode"),
        (lambda d: d["schedule"].update(g=0), "schedule"),
        (lambda d: d["platform"]["partitions"][0].update(bitstream_bytes="big"), "platform.partitions[0].bitstream_bytes"),
        (lambda d: d.update(extra=1), "<root>"),
        (lambda d: d.update(time_shared_rps=["RP9"]), "time_shared_rps[0]"),
        (lambda d: d.update(sweep={"resolutions": ["8k"]}), "sweep.resolutions[0]"),
    ],
)
def test_invalid_fields_are_located(mutate, path):
    doc = fig3_doc()
    mutate(doc)
    with pytest.raises(ScenarioError) as err:
        parse_scenario(doc)
    assert err.value.path == path


def test_duplicate_module_ids_rejected():
    doc = fig3_doc()
    doc["modules"].append(copy.deepcopy(doc["modules"][0]))
    with pytest.raises(ScenarioError):
        parse_scenario(doc)


def test_missing_file_or_fixture():
    with pytest.raises(ScenarioError):
        load_scenario("no-such-thing")


def test_time_shared_rps_restricts_planning():
    sc = load_scenario("fig8a")
    assert [rp.id for rp in sc.planning_platform().partitions] == sc.time_shared_rps
    assert len(sc.platform.partitions) > len(sc.time_shared_rps)
