"""CSV parsing and construction of the three regression samples.

Three sample families are built from Champions League records:

* group matches: decided group-stage games, ``y = 1`` for a home win;
* knockout qualification: one row per two-legged tie, ``y = 1`` when the
  club hosting the first leg goes through;
* group ranking: the six club pairs of every group, ``y = 1`` when the
  higher-rated club (by coefficient or by Elo) finishes above the other.

Ratings are passed as mappings keyed by ``(season, team)``.  Deltas are raw
rating differences; nothing is standardised.
"""

from __future__ import annotations

import csv
import hashlib
import itertools
import json
import logging
import statistics
from collections import Counter, defaultdict
from dataclasses import dataclass
from datetime import date
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import (
    DuplicateMatchError,
    EmptyInputError,
    InvariantError,
    PairingError,
    ParseError,
    UnresolvedRatingError,
)

log = logging.getLogger(__name__)

Ratings = Mapping[tuple[str, str], float]

MATCH_COLUMNS = (
    "match_id", "date", "season", "competition", "stage", "home_team", "away_team",
    "home_goals", "away_goals", "neutral", "closed_doors", "single_leg",
)
# optional trailing column: team that went through when aggregate and away goals tie
MATCH_OPTIONAL_COLUMNS = ("advanced",)
STANDINGS_COLUMNS = ("season", "group", "team", "rank")
COEFFICIENT_COLUMNS = ("season", "team", "association", "uefa_points")

FIRST_SEASON = 2003
LAST_SEASON = 2021
COVID_SEASON = 2020
# away goals rule abolished from this season on
AWAY_GOALS_LAST_SEASON = 2020
# seasons whose UEFA matches ran past June 30 (2019/20 finished in August 2020)
SEASON_EXTENSIONS = {"2019/20": date(2020, 8, 31)}


class Competition(str, Enum):
    CL = "CL"
    EL = "EL"
    ECL = "ECL"
    DOMESTIC_LEAGUE = "domestic-league"
    DOMESTIC_CUP = "domestic-cup"

    @property
    def is_uefa(self) -> bool:
        return self in (Competition.CL, Competition.EL, Competition.ECL)


class Stage(str, Enum):
    GROUP = "group"
    R16 = "R16"
    QF = "QF"
    SF = "SF"
    FINAL = "final"
    LEAGUE_PHASE = "league-phase"
    OTHER = "other"


KNOCKOUT_STAGES = (Stage.R16, Stage.QF, Stage.SF)


class SampleTag(str, Enum):
    GROUP_MATCH = "group-match"
    KNOCKOUT = "knockout"
    GROUP_RANKING = "group-ranking"
    GROUP_RANKING_ELO = "group-ranking-elo"
    GROUP_MATCH_TRINOMIAL = "group-match-trinomial"


def season_start(label: str) -> int:
    """``"2003/04"`` -> ``2003``."""
    try:
        head, tail = label.split("/")
        start = int(head)
        if len(head) != 4 or len(tail) != 2 or int(tail) != (start + 1) % 100:
            raise ValueError
    except ValueError:
        raise ValueError(f"bad season label {label!r}, expected e.g. '2003/04'") from None
    return start


def season_label(start: int) -> str:
    return f"{start}/{(start + 1) % 100:02d}"


def season_bounds(label: str) -> tuple[date, date]:
    """Inclusive date range of a season: July 1 to June 30."""
    start = season_start(label)
    return date(start, 7, 1), date(start + 1, 6, 30)


def match_window(label: str) -> tuple[date, date]:
    """Dates a match of season ``label`` may carry, extensions included."""
    lo, hi = season_bounds(label)
    return lo, SEASON_EXTENSIONS.get(label, hi)


def season_of(day: date) -> str:
    return season_label(day.year if day.month >= 7 else day.year - 1)


@dataclass(frozen=True)
class MatchRecord:
    match_id: str
    date: date
    season: str
    competition: Competition
    stage: Stage
    home_team: str
    away_team: str
    home_goals: int
    away_goals: int
    neutral_venue: bool = False
    behind_closed_doors: bool = False
    single_leg: bool = False
    advanced: str | None = None

    def __post_init__(self) -> None:
        if self.home_team == self.away_team:
            raise ValueError(f"match {self.match_id}: team plays itself")
        if self.home_goals < 0 or self.away_goals < 0:
            raise ValueError(f"match {self.match_id}: negative goals")
        lo, hi = match_window(self.season)
        if not lo <= self.date <= hi:
            raise ValueError(f"match {self.match_id}: {self.date} outside season {self.season}")

    @property
    def result(self) -> float:
        """1, 0.5 or 0 from the home side's perspective."""
        if self.home_goals > self.away_goals:
            return 1.0
        if self.home_goals < self.away_goals:
            return 0.0
        return 0.5

    @property
    def goal_diff(self) -> int:
        return abs(self.home_goals - self.away_goals)


@dataclass(frozen=True)
class Observation:
    y: int | str
    delta_uefa: float
    delta_elo: float
    season: str
    tag: SampleTag


@dataclass(frozen=True)
class GroupStanding:
    season: str
    group: str
    team: str
    rank: int


# --------------------------------------------------------------------- parsing


def _parse_bool(text: str, line: int, field: str) -> bool:
    value = text.strip().lower()
    if value in ("1", "true", "yes", "y", "t"):
        return True
    if value in ("0", "false", "no", "n", "f", ""):
        return False
    raise ParseError(f"not a boolean: {text!r}", line, field)


def _parse_int(text: str, line: int, field: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise ParseError(f"not an integer: {text!r}", line, field) from None
    if value < 0:
        raise ParseError(f"negative value {value}", line, field)
    return value


def _parse_float(text: str, line: int, field: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ParseError(f"not a number: {text!r}", line, field) from None


def _check_header(header: Sequence[str] | None, required: Sequence[str], optional: Sequence[str] = ()) -> None:
    if header is None:
        raise ParseError("empty file, header required", 1)
    header = [h.strip() for h in header]
    n = len(required)
    if tuple(header[:n]) != tuple(required) or any(h not in optional for h in header[n:]):
        raise ParseError(f"header {','.join(header)!r} does not match {','.join(required)!r}", 1)


def _rows(path: str | Path, required: Sequence[str], optional: Sequence[str] = ()):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        _check_header(header, required, optional)
        names = [h.strip() for h in header]
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(names):
                raise ParseError(f"expected {len(names)} fields, got {len(row)}", lineno)
            yield lineno, {k: v.strip() for k, v in zip(names, row)}


def parse_matches(path: str | Path) -> list[MatchRecord]:
    """Read ``matches.csv``; rows are validated and kept in file order."""
    records: list[MatchRecord] = []
    seen: dict[str, int] = {}
    for line, row in _rows(path, MATCH_COLUMNS, MATCH_OPTIONAL_COLUMNS):
        mid = row["match_id"]
        if not mid:
            raise ParseError("empty match id", line, "match_id")
        if mid in seen:
            raise DuplicateMatchError(f"line {line}: match_id {mid!r} already defined on line {seen[mid]}")
        seen[mid] = line
        try:
            day = date.fromisoformat(row["date"])
        except ValueError:
            raise ParseError(f"bad date {row['date']!r}", line, "date") from None
        try:
            lo, hi = match_window(row["season"])
        except ValueError as exc:
            raise ParseError(str(exc), line, "season") from None
        if not lo <= day <= hi:
            raise ParseError(f"{day} not within season {row['season']}", line, "date")
        try:
            competition = Competition(row["competition"])
        except ValueError:
            raise ParseError(f"unknown competition {row['competition']!r}", line, "competition") from None
        try:
            stage = Stage(row["stage"])
        except ValueError:
            raise ParseError(f"unknown stage {row['stage']!r}", line, "stage") from None
        home, away = row["home_team"], row["away_team"]
        if not home or not away:
            raise ParseError("empty team id", line, "home_team" if not home else "away_team")
        if home == away:
            raise ParseError(f"{home!r} cannot play itself", line, "away_team")
        records.append(
            MatchRecord(
                match_id=mid,
                date=day,
                season=row["season"],
                competition=competition,
                stage=stage,
                home_team=home,
                away_team=away,
                home_goals=_parse_int(row["home_goals"], line, "home_goals"),
                away_goals=_parse_int(row["away_goals"], line, "away_goals"),
                neutral_venue=_parse_bool(row["neutral"], line, "neutral"),
                behind_closed_doors=_parse_bool(row["closed_doors"], line, "closed_doors"),
                single_leg=_parse_bool(row["single_leg"], line, "single_leg"),
                advanced=row.get("advanced") or None,
            )
        )
    return records


def write_matches(records: Iterable[MatchRecord], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(MATCH_COLUMNS + MATCH_OPTIONAL_COLUMNS)
        for r in records:
            writer.writerow([
                r.match_id, r.date.isoformat(), r.season, r.competition.value, r.stage.value,
                r.home_team, r.away_team, r.home_goals, r.away_goals,
                int(r.neutral_venue), int(r.behind_closed_doors), int(r.single_leg), r.advanced or "",
            ])


def parse_standings(path: str | Path) -> list[GroupStanding]:
    standings = []
    for line, row in _rows(path, STANDINGS_COLUMNS):
        try:
            season_start(row["season"])
        except ValueError as exc:
            raise ParseError(str(exc), line, "season") from None
        rank = _parse_int(row["rank"], line, "rank")
        if not 1 <= rank <= 4:
            raise ParseError(f"rank {rank} outside 1-4", line, "rank")
        standings.append(GroupStanding(row["season"], row["group"], row["team"], rank))
    _check_groups(standings)
    return standings


def _check_groups(standings: Iterable[GroupStanding]) -> dict[tuple[str, str], list[GroupStanding]]:
    groups: dict[tuple[str, str], list[GroupStanding]] = defaultdict(list)
    for s in standings:
        groups[(s.season, s.group)].append(s)
    for (season, group), members in groups.items():
        teams = {m.team for m in members}
        ranks = sorted(m.rank for m in members)
        if len(members) != 4 or len(teams) != 4 or ranks != [1, 2, 3, 4]:
            raise InvariantError(f"group {group} of {season} must hold four distinct teams ranked 1-4")
    return groups


def write_standings(standings: Iterable[GroupStanding], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(STANDINGS_COLUMNS)
        for s in standings:
            writer.writerow([s.season, s.group, s.team, s.rank])


@dataclass(frozen=True)
class CoefficientTable:
    """Season-start coefficient snapshot as shipped in ``coefficients.csv``."""

    points: dict[tuple[str, str], float]
    membership: dict[str, str]


def parse_coefficients(path: str | Path) -> CoefficientTable:
    points: dict[tuple[str, str], float] = {}
    membership: dict[str, str] = {}
    for line, row in _rows(path, COEFFICIENT_COLUMNS):
        try:
            season_start(row["season"])
        except ValueError as exc:
            raise ParseError(str(exc), line, "season") from None
        key = (row["season"], row["team"])
        if key in points:
            raise ParseError(f"duplicate coefficient for {row['team']} in {row['season']}", line)
        value = _parse_float(row["uefa_points"], line, "uefa_points")
        if value < 0:
            raise ParseError(f"negative coefficient {value}", line, "uefa_points")
        points[key] = value
        known = membership.setdefault(row["team"], row["association"])
        if known != row["association"]:
            raise ParseError(f"{row['team']} listed under {known} and {row['association']}", line, "association")
    return CoefficientTable(points, membership)


# --------------------------------------------------------------------- samples


def _in_scope(season: str, seasons: Iterable[str] | None) -> bool:
    return seasons is None or season in seasons


def _lookup(ratings: Ratings, season: str, team: str, missing: list[tuple[str, str]]) -> float:
    value = ratings.get((season, team))
    if value is None:
        if (season, team) not in missing:
            missing.append((season, team))
        return float("nan")
    return float(value)


def _cl(records: Iterable[MatchRecord], stages, seasons) -> list[MatchRecord]:
    return [
        r for r in records
        if r.competition is Competition.CL and r.stage in stages and _in_scope(r.season, seasons)
    ]


def build_group_match_sample(
    records: Iterable[MatchRecord],
    ratings_uefa: Ratings,
    ratings_elo: Ratings,
    seasons: Iterable[str] | None = None,
) -> list[Observation]:
    """Decided CL group matches; draws are dropped."""
    sample, missing = [], []
    for r in _cl(records, (Stage.GROUP,), seasons):
        if r.home_goals == r.away_goals:
            continue
        du = _lookup(ratings_uefa, r.season, r.home_team, missing) - _lookup(ratings_uefa, r.season, r.away_team, missing)
        de = _lookup(ratings_elo, r.season, r.home_team, missing) - _lookup(ratings_elo, r.season, r.away_team, missing)
        sample.append(Observation(int(r.home_goals > r.away_goals), du, de, r.season, SampleTag.GROUP_MATCH))
    if missing:
        raise UnresolvedRatingError(missing)
    return sample


TRINOMIAL_CATEGORIES = ("away", "draw", "home")


def build_trinomial_sample(
    records: Iterable[MatchRecord],
    ratings_uefa: Ratings,
    ratings_elo: Ratings,
    seasons: Iterable[str] | None = None,
) -> list[Observation]:
    """All CL group matches with outcome ``home`` / ``draw`` / ``away``."""
    sample, missing = [], []
    for r in _cl(records, (Stage.GROUP,), seasons):
        y = "home" if r.home_goals > r.away_goals else "away" if r.home_goals < r.away_goals else "draw"
        du = _lookup(ratings_uefa, r.season, r.home_team, missing) - _lookup(ratings_uefa, r.season, r.away_team, missing)
        de = _lookup(ratings_elo, r.season, r.home_team, missing) - _lookup(ratings_elo, r.season, r.away_team, missing)
        sample.append(Observation(y, du, de, r.season, SampleTag.GROUP_MATCH_TRINOMIAL))
    if missing:
        raise UnresolvedRatingError(missing)
    return sample


@dataclass(frozen=True)
class Tie:
    season: str
    stage: Stage
    first_host: str
    second_host: str
    qualified: str


def _tie_winner(first: MatchRecord, second: MatchRecord) -> str:
    if second.advanced or first.advanced:
        winner = second.advanced or first.advanced
        if winner not in (first.home_team, first.away_team):
            raise PairingError(f"tie {first.match_id}/{second.match_id}: advanced team {winner!r} did not play")
        return winner
    a, b = first.home_team, first.away_team
    goals_a = first.home_goals + second.away_goals
    goals_b = first.away_goals + second.home_goals
    if goals_a != goals_b:
        return a if goals_a > goals_b else b
    if season_start(first.season) <= AWAY_GOALS_LAST_SEASON and second.away_goals != first.away_goals:
        return a if second.away_goals > first.away_goals else b
    raise PairingError(
        f"tie {first.match_id}/{second.match_id} level on aggregate; set the 'advanced' column"
    )


def reconstruct_ties(records: Iterable[MatchRecord], seasons: Iterable[str] | None = None) -> list[Tie]:
    """Pair CL knockout legs (round of 16 to semi-finals).

    Ties flagged ``single_leg`` are dropped; finals never enter.
    """
    legs: dict[tuple, list[MatchRecord]] = defaultdict(list)
    for r in _cl(records, KNOCKOUT_STAGES, seasons):
        legs[(r.season, r.stage, frozenset((r.home_team, r.away_team)))].append(r)
    ties = []
    for (season, stage, _), group in legs.items():
        group.sort(key=lambda r: (r.date, r.match_id))
        if any(r.single_leg for r in group):
            if len(group) != 1:
                raise PairingError(f"{season} {stage.value}: single-leg tie {group[0].match_id} has {len(group)} legs")
            continue
        if len(group) != 2:
            ids = ", ".join(r.match_id for r in group)
            raise PairingError(f"{season} {stage.value}: legs [{ids}] do not form a two-legged tie")
        first, second = group
        if (second.home_team, second.away_team) != (first.away_team, first.home_team):
            raise PairingError(f"{first.match_id}/{second.match_id}: second leg must swap venues")
        ties.append(Tie(season, stage, first.home_team, first.away_team, _tie_winner(first, second)))
    return ties


def build_knockout_sample(
    records: Iterable[MatchRecord],
    ratings_uefa: Ratings,
    ratings_elo: Ratings,
    seasons: Iterable[str] | None = None,
) -> list[Observation]:
    """One observation per two-legged tie, from the first-leg host's side."""
    sample, missing = [], []
    for t in reconstruct_ties(records, seasons):
        du = _lookup(ratings_uefa, t.season, t.first_host, missing) - _lookup(ratings_uefa, t.season, t.second_host, missing)
        de = _lookup(ratings_elo, t.season, t.first_host, missing) - _lookup(ratings_elo, t.season, t.second_host, missing)
        sample.append(Observation(int(t.qualified == t.first_host), du, de, t.season, SampleTag.KNOCKOUT))
    if missing:
        raise UnresolvedRatingError(missing)
    return sample


def build_group_ranking_sample(
    standings: Iterable[GroupStanding],
    ratings_uefa: Ratings,
    ratings_elo: Ratings,
    convention: str = "by-uefa",
    seasons: Iterable[str] | None = None,
) -> list[Observation]:
    """Six pairwise comparisons per group.

    Pairs are oriented from the club rated higher under ``convention``
    (``"by-uefa"`` or ``"by-elo"``).  Equal coefficients inside a group are
    an input error; equal Elo ratings are dropped and logged.
    """
    if convention not in ("by-uefa", "by-elo"):
        raise ValueError(f"unknown convention {convention!r}")
    tag = SampleTag.GROUP_RANKING if convention == "by-uefa" else SampleTag.GROUP_RANKING_ELO
    groups = _check_groups(s for s in standings if _in_scope(s.season, seasons))
    sample, missing, elo_ties = [], [], 0
    for (season, group) in sorted(groups):
        members = sorted(groups[(season, group)], key=lambda s: s.rank)
        for a, b in itertools.combinations(members, 2):
            ua, ub = _lookup(ratings_uefa, season, a.team, missing), _lookup(ratings_uefa, season, b.team, missing)
            ea, eb = _lookup(ratings_elo, season, a.team, missing), _lookup(ratings_elo, season, b.team, missing)
            if missing:
                continue
            key_a, key_b = (ua, ub) if convention == "by-uefa" else (ea, eb)
            if key_a == key_b:
                if convention == "by-uefa":
                    raise InvariantError(f"{a.team} and {b.team} share coefficient {ua} in group {group} of {season}")
                elo_ties += 1
                continue
            if key_a < key_b:
                a, b, ua, ub, ea, eb = b, a, ub, ua, eb, ea
            sample.append(Observation(int(a.rank < b.rank), ua - ub, ea - eb, season, tag))
    if missing:
        raise UnresolvedRatingError(missing)
    if elo_ties:
        log.warning("group ranking by Elo: %d pair(s) with equal Elo excluded", elo_ties)
    return sample


EARLY_SEASONS = tuple(season_label(y) for y in range(FIRST_SEASON, 2012))
LATE_SEASONS = tuple(season_label(y) for y in range(2012, LAST_SEASON + 1) if y != COVID_SEASON)
STUDY_SEASONS = tuple(season_label(y) for y in range(FIRST_SEASON, LAST_SEASON + 1))


def split_periods(sample: Sequence[Observation]) -> tuple[list[Observation], list[Observation]]:
    """2003/04-2011/12 and 2012/13-2021/22 without 2020/21."""
    early = [o for o in sample if o.season in EARLY_SEASONS]
    late = [o for o in sample if o.season in LATE_SEASONS]
    return early, late


def descriptive_stats(values: Sequence[float]) -> dict[str, float]:
    if not values:
        raise EmptyInputError("descriptive statistics of an empty list")
    values = [float(v) for v in values]
    return {
        "mean": statistics.fmean(values),
        "median": statistics.median(values),
        "st.dev": statistics.stdev(values) if len(values) > 1 else 0.0,
        "min": min(values),
        "max": max(values),
    }


def season_match_counts(records: Iterable[MatchRecord]) -> dict[str, dict[str, int]]:
    """Per-season match counts by ``competition/stage`` for coverage audits."""
    counts: dict[str, Counter] = defaultdict(Counter)
    for r in records:
        counts[r.season][f"{r.competition.value}/{r.stage.value}"] += 1
    return {s: dict(sorted(c.items())) for s, c in sorted(counts.items())}


def fingerprint(rows: Iterable) -> dict[str, object]:
    """Row count plus SHA-256 of a canonical JSON-lines rendering."""
    digest = hashlib.sha256()
    n = 0
    for row in rows:
        if isinstance(row, Observation):
            payload = [row.y, row.delta_uefa, row.delta_elo, row.season, row.tag.value]
        elif isinstance(row, MatchRecord):
            payload = [row.match_id, row.date.isoformat(), row.season, row.competition.value, row.stage.value,
                       row.home_team, row.away_team, row.home_goals, row.away_goals,
                       row.neutral_venue, row.behind_closed_doors, row.single_leg, row.advanced]
        elif isinstance(row, GroupStanding):
            payload = [row.season, row.group, row.team, row.rank]
        else:
            payload = row
        digest.update(json.dumps(payload, separators=(",", ":"), default=str).encode())
        digest.update(b"\n")
        n += 1
    return {"rows": n, "sha256": digest.hexdigest()}
