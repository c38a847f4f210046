import json

import pytest

from dynspec import cli
from dynspec.config import bundled


def ev(action, *args):
    return {"action": action, "args": list(args)}


# sub1 proposes sp3 without permission (utility 3 is below the threshold and the current point's),
# is sanctioned, and later tries to vote.
SANCTIONED_VOTER = [
    {"time": 0, "events": [ev("propose", "sub1", "sp3", 0)]},
    {"time": 1, "events": [ev("second", "sub2", "sp3", 0)]},
    {"time": 2, "events": [ev("object", "sub2", "sp3", 0)]},
    {"time": 3, "events": [ev("end_argumentation", "c", 1)]},
    {"time": 4, "events": [ev("vote", "sub1", "for", 1)]},
    {"time": 5, "events": [ev("vote", "sub2", "for", 1)]},
    {"time": 6, "events": [ev("declare", "c", "sp3", "carried", 1)]},
]


def write(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def minimal_args():
    return ["--config", str(bundled("minimal.json"))]


def test_points_level0_has_24_rows(capsys):
    code, out, _ = run(capsys, "points", "--level", "0")
    assert code == cli.EXIT_OK
    assert len(out.strip().splitlines()) == 25  # header plus rows
    code, out, _ = run(capsys, "points", "--level", "0", "--json")
    rows = json.loads(out)
    assert len(rows) == 24
    assert sorted(r["id"] for r in rows if not r["properties"]) == ["sp14", "sp16", "sp18"]


@pytest.mark.parametrize("a, b, expected", [("sp1", "sp1", "0"), ("sp9", "sp3", "2"),
                                            ("sp26", "sp27", "2")])
def test_distance(capsys, a, b, expected):
    code, out, _ = run(capsys, "distance", a, b)
    assert code == cli.EXIT_OK and out.strip() == expected


@pytest.mark.parametrize("argv", [
    ["distance", "sp1", "sp999"],
    ["distance", "sp1", "sp26"],
    ["points", "--level", "5"],
    ["replay", "--config", "/nonexistent.json"],
])
def test_input_errors_exit_3(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == cli.EXIT_INPUT and err.startswith("error:")


def test_bad_narrative_exit_3(capsys, tmp_path, minimal_args):
    path = write(tmp_path, "bad.json", [{"time": 0, "events": []}])
    code, _, _ = run(capsys, "replay", *minimal_args, "--narrative", path)
    assert code == cli.EXIT_INPUT


def test_sanctioned_voter_is_flagged_unpowered(capsys, tmp_path, minimal_args):
    path = write(tmp_path, "story.json", SANCTIONED_VOTER)
    code, out, _ = run(capsys, "replay", *minimal_args, "--narrative", path)
    assert code == cli.EXIT_OK
    assert "unpowered event: vote(sub1,for,1)" in out
    assert "sanctions: sub1@0" in out
    assert "point change at 6: level 0 sp1 -> sp3" in out
    # the ignored vote leaves no trace in the voting record
    step = out.split("[   4]")[1].split("[   5]")[0]
    assert "voted(sub1,1)" not in step and "votes_for(1)" not in step


def test_json_and_text_agree(capsys, tmp_path, minimal_args):
    path = write(tmp_path, "story.json", SANCTIONED_VOTER)
    _, text, _ = run(capsys, "replay", *minimal_args, "--narrative", path)
    _, raw, _ = run(capsys, "replay", *minimal_args, "--narrative", path, "--json")
    report = json.loads(raw)
    assert cli.render_report(report) == text.rstrip("\n")
    assert [s["unpowered"] for s in report["steps"]][4] == ["vote(sub1,for,1)"]
    assert report["final"]["actual_sp(0)"] == "sp3"
    assert report["final"]["sanctioned"] == ["sub1"]


def test_empty_narrative_has_no_deltas(capsys, tmp_path, minimal_args):
    path = write(tmp_path, "empty.json", [])
    code, raw, _ = run(capsys, "replay", *minimal_args, "--narrative", path, "--json")
    report = json.loads(raw)
    assert code == cli.EXIT_OK and report["steps"] == []
    assert report["initial"] == report["final"]


def test_trace_fluents_filters_changes(capsys, tmp_path, minimal_args):
    path = write(tmp_path, "story.json", SANCTIONED_VOTER)
    _, raw, _ = run(capsys, "replay", *minimal_args, "--narrative", path, "--json",
                    "--trace-fluents", "actual_sp,sanctioned")
    names = {n for s in json.loads(raw)["steps"] for n in s["changes"]}
    assert names == {"actual_sp(0)", "sanctioned(sub1)"}


def test_failed_observation_exit_2(capsys, tmp_path, minimal_args):
    story = [{"time": 0, "events": [ev("request_floor", "sub1", "c", "app_A")],
              "observe": [{"fluent": "requested", "args": ["sub1"], "value": "null"}]}]
    path = write(tmp_path, "story.json", story)
    code, _, err = run(capsys, "replay", *minimal_args, "--narrative", path)
    assert code == cli.EXIT_REPLAY and "time 0" in err


@pytest.fixture
def random_mode(tmp_path):
    doc = json.loads(bundled("minimal.json").read_text())
    doc["initial_points"] = {"0": "sp3", "1": "sp27"}
    story = [{"time": 0, "events": [ev("request_floor", "sub1", "c", "app_A")]},
             {"time": 1, "events": [ev("request_floor", "sub2", "c", "app_A")]}]
    return write(tmp_path, "cfg.json", doc), write(tmp_path, "story.json", story)


def test_ambiguity_exit_4_and_seed_resolves(capsys, random_mode):
    cfg, story = random_mode
    code, _, err = run(capsys, "replay", "--config", cfg, "--narrative", story)
    assert code == cli.EXIT_AMBIGUOUS and "best_candidate" in err
    picks = set()
    for seed in range(8):
        code, out, _ = run(capsys, "replay", "--config", cfg, "--narrative", story, "--seed",
                           str(seed), "--json")
        assert code == cli.EXIT_OK
        picks.add(json.loads(out)["final"]["best_candidate"])
    assert picks == {"sub1", "sub2"}


def test_budget_exit_5(capsys, random_mode):
    # deterministic steps close by propagation in one node; the ambiguous one needs branching
    cfg, story = random_mode
    code, _, err = run(capsys, "replay", "--config", cfg, "--narrative", story,
                       "--policy", "first-canonical", "--budget", "2")
    assert code == cli.EXIT_BUDGET and "budget" in err


def test_check_exit_codes(capsys, tmp_path):
    failing = [{"name": "never-holder", "kind": "states", "phi": "holder(S)", "psi": "false",
                "bindings": [{"S": ["sub1"]}]}]
    path = write(tmp_path, "props.json", failing)
    code, out, _ = run(capsys, "check", "--properties", path)
    assert code == cli.EXIT_PROPERTY and out.startswith("FAILS never-holder")
    code, out, _ = run(capsys, "check", "--properties", path, "--json")
    assert json.loads(out)[0]["verdict"] == "fails"
    holding = [{"name": "holder-needs-agent", "kind": "states", "phi": "holder(S)",
                "psi": "holder(S)", "bindings": [{"S": "agent"}]}]
    code, out, _ = run(capsys, "check", "--properties", write(tmp_path, "ok.json", holding))
    assert code == cli.EXIT_OK and out.startswith("HOLDS")


def test_workers_do_not_change_output(capsys):
    _, one, _ = run(capsys, "check", "--json")
    _, two, _ = run(capsys, "check", "--json", "--workers", "3")
    assert one == two
    assert [d["verdict"] for d in json.loads(one)] == ["holds"] * 5


def test_dump_description_round_trip(capsys, minimal_args):
    code, text, _ = run(capsys, "dump-description", *minimal_args)
    assert code == cli.EXIT_OK and "inertial holder;" in text
    code, ground_text, _ = run(capsys, "dump-description", *minimal_args, "--ground")
    assert code == cli.EXIT_OK
    from dynspec.grounder import ground
    from dynspec.language import parse_description
    again = ground(parse_description(ground_text))
    first = ground(parse_description(text))
    assert {str(x) for x in again.statics} == {str(x) for x in first.statics}
    assert {str(x) for x in again.dynamics} == {str(x) for x in first.dynamics}
    assert again.constants == first.constants
