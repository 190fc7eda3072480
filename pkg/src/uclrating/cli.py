"""Command line entry point: ``uclrating [--seed N] [--config F] [--out-dir D] COMMAND``.

Exit status is 0 on success, 1 for invalid input and 2 when a model cannot
be fitted or a draw is infeasible.  Every output lands in ``--out-dir``.
"""

from __future__ import annotations

import csv
import json
import sys
from datetime import date
from dataclasses import dataclass, field
from pathlib import Path

import click
import tomli

from . import __version__
from .coefficient import build_ledger, coefficient_table, load_rulebook, write_coefficient_snapshot, write_coefficients
from .data_ingest import (
    Observation,
    SampleTag,
    fingerprint,
    parse_coefficients,
    parse_matches,
    parse_standings,
    season_match_counts,
    season_start,
)
from .elo import EloParams, rate_history, season_snapshots, write_snapshots
from .errors import (
    ConfigurationError,
    DataError,
    DomainError,
    FitError,
    InfeasibleDrawError,
    OutOfRangeError,
    ParseError,
    UndefinedValueError,
)
from .evaluation import PERIODS, SuiteSpec, period_report, render_payload, run_suite, write_report
from .pipeline import build_samples, load_dataset, load_synthetic
from .rng import generator
from .simulate import (
    DEFAULT_DRAW_FACTOR,
    OutcomeModel,
    compare_seedings,
    fairness_report,
    write_fairness_json,
    write_rank_csv,
)
from .swiss_draw import DEFAULT_NODE_BUDGET, default_instance, draw, read_pots, validate, write_schedule_csv, write_schedule_json

DEFAULT_SEED = 20240
FAMILIES = [t.value for t in SampleTag]

CONFIG_HELP = """TOML file; every key is optional:

\b
[elo]          scale, k_factor, home_advantage, initial_rating
[coefficient]  rules = "path/to/rules.toml"
[draw]         node_budget
[simulate]     runs, draw_factor
"""


@dataclass
class Context:
    seed: int
    out_dir: Path
    config: dict = field(default_factory=dict)

    def section(self, name: str) -> dict:
        value = self.config.get(name, {})
        if not isinstance(value, dict):
            raise ConfigurationError(f"[{name}] must be a table")
        return value

    def elo_params(self) -> EloParams:
        raw = self.section("elo")
        allowed = {"scale", "k_factor", "home_advantage", "initial_rating"}
        unknown = set(raw) - allowed
        if unknown:
            raise ConfigurationError(f"unknown [elo] keys: {', '.join(sorted(unknown))}")
        try:
            return EloParams(**{k: float(v) for k, v in raw.items()})
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(f"[elo]: {exc}") from None

    def path(self, name: str) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        return self.out_dir / name


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _echo_written(*paths: Path) -> None:
    for p in paths:
        click.echo(f"wrote {p}")


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(__version__)
@click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True, help="Master seed for every random stream.")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), help=CONFIG_HELP)
@click.option("--out-dir", type=click.Path(file_okay=False), default="out", show_default=True,
              help="Directory receiving all outputs.")
@click.pass_context
def cli(ctx: click.Context, seed: int, config_path: str | None, out_dir: str) -> None:
    """Club ratings, prediction models, league-phase draws and simulations."""
    config = {}
    if config_path:
        try:
            config = tomli.loads(Path(config_path).read_text(encoding="utf-8"))
        except tomli.TOMLDecodeError as exc:
            raise ConfigurationError(f"{config_path}: {exc}") from None
    ctx.obj = Context(seed, Path(out_dir), config)


# ------------------------------------------------------------------ ingest


@cli.command()
@click.option("--matches", type=click.Path(exists=True, dir_okay=False),
              help="matches.csv: match_id,date,season,competition,stage,home_team,away_team,"
                   "home_goals,away_goals,neutral,closed_doors,single_leg[,advanced]")
@click.option("--standings", type=click.Path(exists=True, dir_okay=False), help="standings.csv: season,group,team,rank")
@click.option("--coefficients", type=click.Path(exists=True, dir_okay=False),
              help="coefficients.csv: season,team,association,uefa_points")
@click.pass_obj
def ingest(obj: Context, matches, standings, coefficients) -> None:
    """Validate input CSVs and write ingest.json with their fingerprints."""
    if not (matches or standings or coefficients):
        raise click.UsageError("give at least one of --matches, --standings, --coefficients")
    report = {}
    if matches:
        records = parse_matches(matches)
        report["matches"] = {**fingerprint(records), "per_season": season_match_counts(records)}
    if standings:
        report["standings"] = fingerprint(parse_standings(standings))
    if coefficients:
        table = parse_coefficients(coefficients)
        rows = [[s, t, table.membership[t], v] for (s, t), v in sorted(table.points.items())]
        report["coefficients"] = fingerprint(rows)
    out = obj.path("ingest.json")
    _write_json(out, report)
    _echo_written(out)


# ------------------------------------------------------------------ ratings


@cli.command("rate-elo")
@click.option("--matches", type=click.Path(exists=True, dir_okay=False), required=True)
@click.pass_obj
def rate_elo(obj: Context, matches) -> None:
    """Replay all matches and write June-30 snapshots to elo_snapshot.csv.

    The first season of the file has no history before it and is left out.
    """
    records = parse_matches(matches)
    timeline = rate_history(records, obj.elo_params())
    seasons = sorted(s for s in {r.season for r in records} if date(season_start(s), 6, 30) >= timeline.start)
    out = obj.path("elo_snapshot.csv")
    write_snapshots(season_snapshots(timeline, seasons), out)
    _echo_written(out)


@cli.command()
@click.option("--matches", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--membership", type=click.Path(exists=True, dir_okay=False), required=True,
              help="CSV team,association")
@click.option("--rules", type=click.Path(exists=True, dir_okay=False),
              help="Points rules TOML (defaults to [coefficient] rules, then the bundled table).")
@click.pass_obj
def coef(obj: Context, matches, membership, rules) -> None:
    """Season-start club coefficients: club_coefficients.csv, plus coefficients.csv for suite input."""
    records = parse_matches(matches)
    member = _read_membership(membership)
    rulebook = load_rulebook(rules or obj.section("coefficient").get("rules"))
    ledger = build_ledger(records, member, rulebook)
    seasons = sorted({r.season for r in records})
    teams = sorted({t for t, _ in ledger.club_points})
    table = coefficient_table(ledger, seasons, teams)
    out, snapshot = obj.path("club_coefficients.csv"), obj.path("coefficients.csv")
    write_coefficients(table, out)
    write_coefficient_snapshot(table, member, snapshot)
    _echo_written(out, snapshot)


def _read_membership(path) -> dict[str, str]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["team", "association"]:
            raise ParseError("header must be team,association", 1)
        out = {}
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise ParseError(f"expected 2 fields, got {len(row)}", line)
            out[row[0].strip()] = row[1].strip()
    return out


# ------------------------------------------------------------------ models


def _samples(obj: Context, data_dir, synthetic: bool):
    if bool(data_dir) == bool(synthetic):
        raise click.UsageError("give exactly one of --data-dir and --synthetic")
    dataset = load_synthetic() if synthetic else load_dataset(data_dir)
    return build_samples(dataset, obj.elo_params())


def _read_sample(path, family: SampleTag) -> list[Observation]:
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or set(reader.fieldnames) < {"y", "delta_uefa", "delta_elo", "season"}:
            raise ParseError("header must hold y,delta_uefa,delta_elo,season", 1)
        for line, row in enumerate(reader, start=2):
            try:
                y = row["y"] if family is SampleTag.GROUP_MATCH_TRINOMIAL else int(row["y"])
                out.append(Observation(y, float(row["delta_uefa"]), float(row["delta_elo"]), row["season"], family))
            except ValueError as exc:
                raise ParseError(str(exc), line) from None
    return out


data_options = [
    click.option("--data-dir", type=click.Path(exists=True, file_okay=False),
                 help="Directory with matches.csv, standings.csv, coefficients.csv."),
    click.option("--synthetic", is_flag=True, help="Use the bundled synthetic history."),
]


def with_data(fn):
    for option in reversed(data_options):
        fn = option(fn)
    return fn


@cli.command()
@with_data
@click.option("--sample", "sample_path", type=click.Path(exists=True, dir_okay=False),
              help="Ready-made sample CSV y,delta_uefa,delta_elo,season (instead of a data source).")
@click.option("--family", type=click.Choice(FAMILIES), required=True)
@click.option("--period", type=click.Choice(PERIODS), default="all", show_default=True)
@click.pass_obj
def fit(obj: Context, data_dir, synthetic, sample_path, family, period) -> None:
    """Fit models (1)-(3) for one sample family and period."""
    tag = SampleTag(family)
    if sample_path:
        if data_dir or synthetic:
            raise click.UsageError("--sample excludes --data-dir and --synthetic")
        samples = {tag: _read_sample(sample_path, tag)}
    else:
        samples = _samples(obj, data_dir, synthetic)
    report = run_suite(samples, SuiteSpec(tag, period))
    out = obj.path(f"fit_{family}_{period}.json")
    out.write_text(report.to_json(), encoding="utf-8")
    _echo_written(out)


@cli.command()
@with_data
@click.pass_obj
def suite(obj: Context, data_dir, synthetic) -> None:
    """Every family over the full sample and both periods: suite.json and suite.txt."""
    samples = _samples(obj, data_dir, synthetic)
    reports = []
    for tag in SampleTag:
        reports.append(run_suite(samples, SuiteSpec(tag, "all")))
        reports.extend(period_report(samples, tag))
    out_json, out_txt = obj.path("suite.json"), obj.path("suite.txt")
    write_report(reports, out_json)
    out_txt.write_text(render_payload(json.loads(out_json.read_text(encoding="utf-8"))), encoding="utf-8")
    _echo_written(out_json, out_txt)


@cli.command()
@click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False), required=True,
              help="suite.json or fit_*.json")
@click.pass_obj
def report(obj: Context, input_path) -> None:
    """Render a JSON report as text tables into report.txt."""
    try:
        payload = json.loads(Path(input_path).read_text(encoding="utf-8"))
        text = render_payload(payload)
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ParseError(f"{input_path} is not a suite report ({exc})") from None
    out = obj.path("report.txt")
    out.write_text(text, encoding="utf-8")
    click.echo(text, nl=False)


# ------------------------------------------------------------------ draw


def _draw_input(pots_path, no_exception: bool):
    if pots_path:
        return read_pots(pots_path, allow_exception=not no_exception)
    inst = default_instance()
    if no_exception:
        inst = type(inst)(inst.pots, inst.association, False, inst.format)
    return inst


@cli.command("draw")
@click.option("--pots", "pots_path", type=click.Path(exists=True, dir_okay=False),
              help="CSV club,pot,association with pots numbered from 1 (default: 2024/25 league phase).")
@click.option("--no-exception", is_flag=True, help="Forbid the same-association exception.")
@click.pass_obj
def draw_cmd(obj: Context, pots_path, no_exception) -> None:
    """Draw a league-phase schedule into schedule.csv and schedule.json."""
    draw_input = _draw_input(pots_path, no_exception)
    budget = int(obj.section("draw").get("node_budget", DEFAULT_NODE_BUDGET))
    schedule = draw(draw_input, obj.seed, budget)
    report = validate(draw_input, schedule)
    if not report.valid:
        raise InfeasibleDrawError("internal error: drawn schedule fails validation", {"violations": list(report.violations)})
    out_csv, out_json = obj.path("schedule.csv"), obj.path("schedule.json")
    write_schedule_csv(schedule, out_csv)
    write_schedule_json(schedule, out_json)
    _echo_written(out_csv, out_json)


# ------------------------------------------------------------------ simulate


def _read_ratings(path) -> dict[str, tuple[float, float, float]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        need = ["club", "rating_a", "rating_b", "strength"]
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != need:
            raise ParseError("header must be club,rating_a,rating_b,strength", 1)
        out = {}
        for line, row in enumerate(reader, start=2):
            try:
                out[row["club"]] = (float(row["rating_a"]), float(row["rating_b"]), float(row["strength"]))
            except (TypeError, ValueError):
                raise ParseError("ratings must be numbers", line) from None
    return out


@cli.command()
@click.option("--pots", "pots_path", type=click.Path(exists=True, dir_okay=False),
              help="Population as club,pot,association (pots are re-seeded; default: 2024/25 clubs).")
@click.option("--ratings", type=click.Path(exists=True, dir_okay=False),
              help="CSV club,rating_a,rating_b,strength.  Without it, strengths are drawn from the seed "
                   "and the two ratings add small (a) and large (b) noise.")
@click.option("--runs", type=int, help="Simulated seasons per seeding (default 10000).")
@click.option("--draw-factor", type=float, help=f"Draw share d of the Elo-implied model (default {DEFAULT_DRAW_FACTOR}).")
@click.pass_obj
def simulate(obj: Context, pots_path, ratings, runs, draw_factor) -> None:
    """Compare seeding by two ratings: fairness.json, ranks_a.csv, ranks_b.csv."""
    cfg = obj.section("simulate")
    runs = runs if runs is not None else int(cfg.get("runs", 10_000))
    if runs <= 0:
        raise click.BadParameter("must be positive", param_hint="--runs")
    d = draw_factor if draw_factor is not None else float(cfg.get("draw_factor", DEFAULT_DRAW_FACTOR))
    population = dict(_draw_input(pots_path, False).association)
    clubs = sorted(population)
    if ratings:
        table = _read_ratings(ratings)
        missing = [c for c in clubs if c not in table]
        if missing:
            raise ConfigurationError(f"no ratings for {', '.join(missing[:5])}")
        rating_a = {c: table[c][0] for c in clubs}
        rating_b = {c: table[c][1] for c in clubs}
        strength = {c: table[c][2] for c in clubs}
    else:
        rng = generator(obj.seed, "cli", "ratings")
        true = rng.normal(1600.0, 150.0, len(clubs))
        strength = dict(zip(clubs, map(float, true)))
        rating_a = dict(zip(clubs, map(float, true + rng.normal(0.0, 25.0, len(clubs)))))
        rating_b = dict(zip(clubs, map(float, true + rng.normal(0.0, 150.0, len(clubs)))))
    try:
        model = OutcomeModel(elo=obj.elo_params(), draw_factor=d)
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from None
    outcomes = compare_seedings(population, rating_a, rating_b, strength, runs, obj.seed, model)
    report = fairness_report(outcomes, model)
    report["seed"] = obj.seed
    report["runs"] = runs
    out_json = obj.path("fairness.json")
    write_fairness_json(report, out_json)
    written = [out_json]
    for label, outcome in outcomes.items():
        p = obj.path(f"ranks_{label}.csv")
        write_rank_csv(outcome.standings, p)
        written.append(p)
    _echo_written(*written)


# ------------------------------------------------------------------ entry


def main(argv=None) -> int:
    try:
        cli.main(args=argv, prog_name="uclrating", standalone_mode=False)
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except (FitError, InfeasibleDrawError, UndefinedValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        constraint = getattr(exc, "constraint", None)
        if constraint:
            click.echo(f"constraint: {json.dumps(constraint, sort_keys=True)}", err=True)
        return 2
    except (DataError, DomainError, OutOfRangeError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    except (KeyError, ValueError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
