import json

import pytest

from graverave.cli import main
from graverave.harness import read_csv


def test_gen_and_replay(tmp_path, capsys):
    out = tmp_path / "level.json"
    assert main(["gen", "--seed", "42", "--param", "initial_rock_density=0.3",
                 "--param", "flee_distance=2", "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert len(data["grid"]) == 15 and data["flee_distance"] == 2.0
    assert data["params"]["initial_rock_density"] == 0.3
    capsys.readouterr()
    assert main(["replay", "--level", str(out), "--persona", "r02"]) == 0
    text = capsys.readouterr().out
    steps = [ln for ln in text.splitlines() if not ln.startswith("#")]
    assert all(len(ln.split()) == 4 for ln in steps)
    assert "outcome=" in text.splitlines()[-1]


def test_gen_rejects_unknown_param(tmp_path):
    with pytest.raises(SystemExit):
        main(["gen", "--seed", "1", "--param", "bogus=1", "--out", str(tmp_path / "x")])


def test_out_of_range_param_is_an_error(tmp_path, capsys):
    assert main(["gen", "--seed", "1", "--param", "flee_distance=11", "--out", str(tmp_path / "x")]) == 2
    assert "flee_distance" in capsys.readouterr().err


def test_evolve_verify_specificity(tmp_path, capsys):
    out = tmp_path / "camp"
    assert main(["evolve", "--persona", "r01,r04", "--metric", "easy", "--population", "8",
                 "--generations", "2", "--runs", "2", "--seed", "1", "--quiet",
                 "--out", str(out)]) == 0
    assert main(["verify", "--in", str(out)]) == 0
    assert main(["specificity", "--in", str(out)]) == 0
    text = capsys.readouterr().out
    assert "reward" in text and "gen r04" in text
    assert (out / "specificity_reward.csv").exists()
    assert main(["replay", "--level", str(out / "r04" / "run_01" / "elites.json"),
                 "--elite", "1", "--persona", "r04", "--grid"]) == 0


def test_verify_missing_archive(tmp_path, capsys):
    assert main(["verify", "--in", str(tmp_path)]) == 2
    assert "config.json" in capsys.readouterr().err


def test_baseline_csv(tmp_path, capsys):
    csv_path = tmp_path / "b.csv"
    assert main(["baseline", "--levels", "4", "--seed", "2", "--csv", str(csv_path)]) == 0
    assert csv_path.read_text().startswith("# graverave summaries v1")
    rows = read_csv(csv_path)
    assert len(rows) == 16 and list(rows[0]) == ["level_id", "persona", "E", "B", "reward",
                                                 "steps", "outcome", "fitness"]
    assert "r03" in capsys.readouterr().out


def test_bad_persona_token():
    with pytest.raises(SystemExit):
        main(["replay", "--level", "x", "--persona", "r09"])
