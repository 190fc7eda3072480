"""UEFA club coefficients.

A club's coefficient for season ``t`` is the larger of two sums over the
``window`` seasons before ``t``: its own UEFA points, and a fifth of its
association's seasonal coefficient.  The association coefficient of a season
is the points total of its participating clubs divided by their number.
"""

from __future__ import annotations

import csv
from collections import defaultdict
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

import tomli

from .data_ingest import Competition, MatchRecord, Stage, season_label, season_start
from .errors import ConfigurationError, UndefinedValueError

ASSOCIATION_SHARE = 0.2
WINDOW = 5


@dataclass(frozen=True)
class PointsRules:
    win_points: float = 2.0
    draw_points: float = 1.0
    stage_bonuses: Mapping[tuple[Competition, Stage], float] = field(default_factory=dict)
    qualification_bonuses: Mapping[tuple[Competition, Stage], float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        values = [self.win_points, self.draw_points, *self.stage_bonuses.values(), *self.qualification_bonuses.values()]
        if any(v < 0 for v in values):
            raise ConfigurationError("points rules must be non-negative")


@dataclass(frozen=True)
class Edition:
    first_season: str
    last_season: str | None
    rules: PointsRules

    def covers(self, season: str) -> bool:
        year = season_start(season)
        if year < season_start(self.first_season):
            return False
        return self.last_season is None or year <= season_start(self.last_season)


@dataclass(frozen=True)
class RuleBook:
    editions: tuple[Edition, ...]

    def for_season(self, season: str) -> PointsRules:
        for edition in self.editions:
            if edition.covers(season):
                return edition.rules
        raise ConfigurationError(f"no points rules cover season {season}")


def _bonus_table(raw: Mapping[str, float], where: str) -> dict[tuple[Competition, Stage], float]:
    table = {}
    for key, value in raw.items():
        try:
            comp, stage = key.split(".", 1)
            table[(Competition(comp), Stage(stage))] = float(value)
        except ValueError:
            raise ConfigurationError(f"{where}: bad bonus key {key!r}, expected '<competition>.<stage>'") from None
    return table


def parse_rulebook(text: str) -> RuleBook:
    try:
        doc = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigurationError(f"rules file: {exc}") from None
    editions = []
    for i, raw in enumerate(doc.get("edition", [])):
        where = f"edition {i + 1}"
        try:
            first = raw["first_season"]
            season_start(first)
            last = raw.get("last_season")
            if last is not None:
                season_start(last)
            rules = PointsRules(
                win_points=float(raw.get("win_points", 2.0)),
                draw_points=float(raw.get("draw_points", 1.0)),
                stage_bonuses=_bonus_table(raw.get("stage_bonuses", {}), where),
                qualification_bonuses=_bonus_table(raw.get("qualification_bonuses", {}), where),
            )
        except KeyError as exc:
            raise ConfigurationError(f"{where}: missing {exc.args[0]}") from None
        except ValueError as exc:
            raise ConfigurationError(f"{where}: {exc}") from None
        editions.append(Edition(first, last, rules))
    if not editions:
        raise ConfigurationError("rules file defines no [[edition]]")
    return RuleBook(tuple(editions))


def load_rulebook(path: str | Path | None = None) -> RuleBook:
    """Read a rules TOML file; ``None`` loads the bundled default table."""
    if path is None:
        text = resources.files("uclrating").joinpath("data/rules_default.toml").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return parse_rulebook(text)


def season_points(records: Iterable[MatchRecord], team: str, rules: PointsRules) -> float:
    """UEFA points of ``team`` from its matches of one season."""
    points = 0.0
    stages: set[tuple[Competition, Stage]] = set()
    for r in records:
        if not r.competition.is_uefa or team not in (r.home_team, r.away_team):
            continue
        own, other = (r.home_goals, r.away_goals) if r.home_team == team else (r.away_goals, r.home_goals)
        if own > other:
            points += rules.win_points
        elif own == other:
            points += rules.draw_points
        stages.add((r.competition, r.stage))
    for key in stages:
        points += rules.stage_bonuses.get(key, 0.0) + rules.qualification_bonuses.get(key, 0.0)
    return points


@dataclass(frozen=True)
class CoefficientLedger:
    """Seasonal UEFA points by club, with association membership.

    ``association_points`` holds published association coefficients where
    known; seasons absent from it are averaged from ``club_points``.
    """

    club_points: Mapping[tuple[str, str], float]
    membership: Mapping[str, str]
    association_points: Mapping[tuple[str, str], float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if any(v < 0 for v in self.club_points.values()):
            raise ConfigurationError("club points must be non-negative")
        orphans = sorted({team for team, _ in self.club_points} - set(self.membership))
        if orphans:
            raise ConfigurationError(f"no association for {', '.join(orphans[:5])}")

    def participants(self, association: str, season: str) -> list[str]:
        return sorted(
            team for (team, s) in self.club_points
            if s == season and self.membership.get(team) == association
        )


def build_ledger(
    records: Iterable[MatchRecord],
    membership: Mapping[str, str],
    rulebook: RuleBook,
) -> CoefficientLedger:
    by_season: dict[str, list[MatchRecord]] = defaultdict(list)
    for r in records:
        if r.competition.is_uefa:
            by_season[r.season].append(r)
    club_points = {}
    for season, matches in by_season.items():
        rules = rulebook.for_season(season)
        by_team: dict[str, list[MatchRecord]] = defaultdict(list)
        for r in matches:
            by_team[r.home_team].append(r)
            by_team[r.away_team].append(r)
        for team in sorted(by_team):
            club_points[(team, season)] = season_points(by_team[team], team, rules)
    return CoefficientLedger(club_points, dict(membership))


def association_coefficient(ledger: CoefficientLedger, association: str, season: str) -> float:
    if (association, season) in ledger.association_points:
        return ledger.association_points[(association, season)]
    clubs = ledger.participants(association, season)
    if not clubs:
        raise UndefinedValueError(f"{association} had no participating club in {season}")
    return sum(ledger.club_points[(c, season)] for c in clubs) / len(clubs)


def _window(season: str, window: int) -> list[str]:
    start = season_start(season)
    return [season_label(y) for y in range(start - window, start)]


def own_points(ledger: CoefficientLedger, team: str, season: str, window: int = WINDOW) -> float:
    return sum(ledger.club_points.get((team, s), 0.0) for s in _window(season, window))


def association_floor(ledger: CoefficientLedger, team: str, season: str, window: int = WINDOW) -> float:
    association = ledger.membership.get(team)
    if association is None:
        raise ConfigurationError(f"{team} has no association")
    total = 0.0
    for s in _window(season, window):
        try:
            total += ASSOCIATION_SHARE * association_coefficient(ledger, association, s)
        except UndefinedValueError:
            pass
    return total


def club_coefficient(ledger: CoefficientLedger, team: str, season: str, window: int = WINDOW) -> float:
    """Coefficient used for seeding in ``season`` (seasons ``t-window .. t-1``)."""
    return max(own_points(ledger, team, season, window), association_floor(ledger, team, season, window))


def coefficient_table(
    ledger: CoefficientLedger, seasons: Iterable[str], teams: Iterable[str], window: int = WINDOW
) -> dict[tuple[str, str], float]:
    teams = list(teams)
    return {(s, t): club_coefficient(ledger, t, s, window) for s in seasons for t in teams}


def write_coefficients(table: Mapping[tuple[str, str], float], path: str | Path) -> None:
    """Export ``season,team,coefficient``."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["season", "team", "coefficient"])
        for (season, team), value in sorted(table.items()):
            writer.writerow([season, team, f"{value:.3f}"])


def write_coefficient_snapshot(
    table: Mapping[tuple[str, str], float], membership: Mapping[str, str], path: str | Path
) -> None:
    """Same values as ``season,team,association,uefa_points``, the layout read as coefficients.csv."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["season", "team", "association", "uefa_points"])
        for (season, team), value in sorted(table.items()):
            writer.writerow([season, team, membership[team], f"{value:.3f}"])
