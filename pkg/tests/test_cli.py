import json
from pathlib import Path

import pytest

from uclrating.cli import main
from uclrating.synthetic import bundled_dir, membership

GOLDEN = Path(__file__).parent / "golden" / "suite_synthetic.json"
DATA = Path(str(bundled_dir()))


def run(out_dir, *args, seed=None):
    head = ["--out-dir", str(out_dir)]
    if seed is not None:
        head = ["--seed", str(seed), *head]
    return main([*head, *args])


def files(root):
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(Path(root).rglob("*")) if p.is_file()}


@pytest.fixture
def membership_csv(tmp_path):
    path = tmp_path / "membership.csv"
    path.write_text("team,association\n" + "".join(f"{t},{a}\n" for t, a in sorted(membership().items())))
    return path


def test_suite_matches_golden(tmp_path):
    assert run(tmp_path, "suite", "--synthetic") == 0
    assert (tmp_path / "suite.json").read_bytes() == GOLDEN.read_bytes()


def test_golden_is_coherent():
    suites = json.loads(GOLDEN.read_text())["suites"]
    assert len(suites) == 15
    for s in suites:
        models = s["models"]
        assert models["(3)"]["log_lik_fit"] >= max(models["(1)"]["log_lik_fit"], models["(2)"]["log_lik_fit"])
        for m in models.values():
            assert m["n"] == s["n"]
            assert 0 < m["cox_snell_r2"] < m["nagelkerke_r2"] < 1


COMMANDS = {
    "suite": ["suite", "--synthetic"],
    "draw": ["draw"],
    "simulate": ["simulate", "--runs", "300"],
    "fit": ["fit", "--synthetic", "--family", "knockout", "--period", "early"],
    "rate-elo": ["rate-elo", "--matches", str(DATA / "matches.csv")],
    "ingest": ["ingest", "--matches", str(DATA / "matches.csv"), "--standings", str(DATA / "standings.csv"),
               "--coefficients", str(DATA / "coefficients.csv")],
}


@pytest.mark.parametrize("name", sorted(COMMANDS))
def test_commands_are_deterministic(tmp_path, name):
    assert run(tmp_path / "a", *COMMANDS[name], seed=99) == 0
    assert run(tmp_path / "b", *COMMANDS[name], seed=99) == 0
    first = files(tmp_path / "a")
    assert first and first == files(tmp_path / "b")


def test_seed_changes_draw(tmp_path):
    run(tmp_path / "a", "draw", seed=1)
    run(tmp_path / "b", "draw", seed=2)
    assert files(tmp_path / "a") != files(tmp_path / "b")


def test_writes_only_into_out_dir(tmp_path, monkeypatch, membership_csv):
    work = tmp_path / "work"
    work.mkdir()
    monkeypatch.chdir(work)
    out = tmp_path / "out"
    before = files(tmp_path)
    for args in [*COMMANDS.values(), ["coef", "--matches", str(DATA / "matches.csv"), "--membership", str(membership_csv)]]:
        assert run(out, *args) == 0
    after = files(tmp_path)
    new = {k for k in after if k not in before}
    assert new and all(k.startswith("out/") for k in new)
    assert not any(work.iterdir())
    assert {k for k in before if after.get(k) != before[k]} == set()


def test_coef_outputs(tmp_path, membership_csv):
    assert run(tmp_path, "coef", "--matches", str(DATA / "matches.csv"), "--membership", str(membership_csv)) == 0
    assert (tmp_path / "club_coefficients.csv").read_text().splitlines()[0] == "season,team,coefficient"
    assert (tmp_path / "coefficients.csv").read_text().splitlines()[0] == "season,team,association,uefa_points"


def test_report_renders_fit(tmp_path, capsys):
    run(tmp_path, "fit", "--synthetic", "--family", "group-ranking")
    capsys.readouterr()
    assert run(tmp_path, "report", "--input", str(tmp_path / "fit_group-ranking_all.json")) == 0
    out = capsys.readouterr().out
    assert out.startswith("group-ranking / all")
    assert (tmp_path / "report.txt").read_text() == out


def test_fit_one_outcome_class_exits_2(tmp_path, capsys):
    sample = tmp_path / "sample.csv"
    sample.write_text("y,delta_uefa,delta_elo,season\n" + "".join(f"1,{i},{2 * i + 1},2010/11\n" for i in range(10)))
    assert run(tmp_path / "out", "fit", "--sample", str(sample), "--family", "group-match") == 2
    assert "nothing to fit" in capsys.readouterr().err


def test_fit_separated_sample_exits_2(tmp_path, capsys):
    sample = tmp_path / "sample.csv"
    sample.write_text("y,delta_uefa,delta_elo,season\n"
                      + "".join(f"{int(i >= 10)},{i},{(i * 37) % 11},2010/11\n" for i in range(20)))
    assert run(tmp_path / "out", "fit", "--sample", str(sample), "--family", "group-match") == 2
    assert "separated" in capsys.readouterr().err


def test_bad_csv_exits_1(tmp_path, capsys):
    bad = tmp_path / "matches.csv"
    bad.write_text("match_id,date\n1,2010-09-01\n")
    assert run(tmp_path / "out", "ingest", "--matches", str(bad)) == 1
    assert "error" in capsys.readouterr().err


def test_infeasible_draw_exits_2(tmp_path, capsys):
    pots = tmp_path / "pots.csv"
    rows = [f"X{i},1,X" for i in range(1, 5)] + [f"Y{i},2,Y" for i in range(1, 5)] + \
           [f"Z{i},3,Z" for i in range(1, 5)]
    pots.write_text("club,pot,association\n" + "\n".join(rows) + "\n")
    assert run(tmp_path / "out", "draw", "--pots", str(pots), "--no-exception") == 2
    assert "constraint:" in capsys.readouterr().err


def test_unknown_subcommand(tmp_path):
    assert run(tmp_path, "teleport") != 0


def test_unknown_flag(tmp_path):
    assert run(tmp_path, "draw", "--fast") != 0


def test_data_source_is_required(tmp_path):
    assert run(tmp_path, "suite") != 0
    assert run(tmp_path, "suite", "--synthetic", "--data-dir", str(DATA)) != 0


def test_config_changes_elo(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text("[elo]\nk_factor = 40\n")
    run(tmp_path / "a", "rate-elo", "--matches", str(DATA / "matches.csv"))
    assert main(["--config", str(cfg), "--out-dir", str(tmp_path / "b"), "rate-elo", "--matches", str(DATA / "matches.csv")]) == 0
    assert files(tmp_path / "a") != files(tmp_path / "b")
    cfg.write_text("[elo]\nspeed = 1\n")
    assert main(["--config", str(cfg), "--out-dir", str(tmp_path / "c"), "rate-elo", "--matches", str(DATA / "matches.csv")]) == 1


def test_help_lists_schemas(capsys):
    assert main(["draw", "--help"]) == 0
    assert "club,pot,association" in capsys.readouterr().out
