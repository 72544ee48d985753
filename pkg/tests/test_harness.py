import json

import pytest

from graverave import harness
from graverave.harness import ExperimentSpec, campaign, derive_seed, load_level, read_csv, verify
from graverave.levelgen import GeneratorParams, generate
from graverave.personas import PersonaId


@pytest.fixture(scope="module")
def archive(tmp_path_factory):
    out = tmp_path_factory.mktemp("camp")
    spec = ExperimentSpec(personas=["r01", "r03"], metric="hardcore", out_dir=out,
                          population_size=10, generations=2, runs=2, master_seed=3)
    return campaign(spec)


def test_derive_seed_stable_and_distinct():
    assert derive_seed(0, "r01", 0) == derive_seed(0, PersonaId.R01, 0)
    seeds = {derive_seed(m, p, k) for m in (0, 1) for p in ("r01", "r02") for k in range(5)}
    assert len(seeds) == 20


def test_preset_overrides():
    spec = ExperimentSpec.from_preset("paper", personas=["r01"], metric="easy", out_dir="x",
                                      generations=None, runs=2)
    assert (spec.population_size, spec.generations, spec.runs) == (100, 30, 2)


def test_archive_layout(archive):
    cfg = json.loads((archive / "config.json").read_text())
    assert cfg["schema"] == harness.ARCHIVE_SCHEMA and cfg["runs"] == 2
    for p in ("r01", "r03"):
        first = (archive / p / "aggregate.csv").read_text().splitlines()[0]
        assert first == "# graverave aggregate v1"
        assert len(read_csv(archive / p / "aggregate.csv")) == 2
        for k in range(2):
            run = archive / p / f"run_{k:02d}"
            assert len(read_csv(run / "generations.csv")) == 2
            assert len(json.loads((run / "final_population.json").read_text())) == 10
            elites = json.loads((run / "elites.json").read_text())
            assert len(elites) == 3
            fits = [e["fitness"] for e in elites]
            assert fits == sorted(fits, reverse=True)


def test_verify_clean_and_tampered(archive, tmp_path):
    assert verify(archive) == []
    import shutil
    bad = tmp_path / "bad"
    shutil.copytree(archive, bad)
    agg = bad / "r01" / "aggregate.csv"
    lines = agg.read_text().splitlines()
    cells = lines[2].split(",")
    cells[2] = "123.0"
    lines[2] = ",".join(cells)
    agg.write_text("\n".join(lines) + "\n")
    gens = bad / "r03" / "run_01" / "generations.csv"
    gens.write_text("\n".join(gens.read_text().splitlines()[:-1]) + "\n")
    problems = verify(bad)
    assert any("mean_reward_mean" in p for p in problems)
    assert any("generation rows" in p for p in problems)


def test_specificity_from_archive(archive, tmp_path):
    m = harness.specificity([archive], tmp_path)
    assert len(m["reward"]) == 4 and len(m["reward"][0]) == 2
    rows = read_csv(tmp_path / "specificity_base_hp.csv")
    assert [r["persona"] for r in rows] == ["r01", "r02", "r03", "r04"]


def test_specificity_rejects_inconsistent(archive, tmp_path):
    other = campaign(ExperimentSpec(personas=["r02"], metric="easy", out_dir=tmp_path / "o",
                                    population_size=10, generations=2, runs=2))
    with pytest.raises(ValueError, match="inconsistent"):
        harness.collect_populations([archive, other])


def test_replay_and_level_loading(archive, tmp_path):
    level = generate(GeneratorParams.default(4))
    trace, summary = harness.replay(level, "r03")
    lines = trace.splitlines()
    assert len(lines) == summary.steps + 2
    step_line = lines[1].split()
    assert step_line[0] == "1" and step_line[1].startswith(("MOVE_", "ATTACK"))
    assert harness.replay(level, "r03") == (trace, summary)
    (tmp_path / "l.json").write_text(level.to_json())
    (tmp_path / "p.json").write_text(GeneratorParams.default(4).to_json())
    assert load_level(tmp_path / "l.json") == load_level(tmp_path / "p.json") == level
    elite = load_level(archive / "r01" / "run_00" / "elites.json", elite=2)
    assert elite is not None
    with pytest.raises(ValueError, match="out of range"):
        load_level(archive / "r01" / "run_00" / "elites.json", elite=9)


def test_baseline_rows():
    rows = []
    means = harness.baseline(["r01", "r04"], 5, 1, rows=rows)
    assert set(means) == {PersonaId.R01, PersonaId.R04}
    assert len(rows) == 10 and set(rows[0]) == set(harness.SUMMARY_FIELDS)
