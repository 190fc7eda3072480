"""Football club Elo ratings.

The expected home score is ``W = 1 / (1 + 10 ** (-(d + H) / s))`` where ``d``
is the home-minus-away rating difference, ``H`` the home advantage (dropped at
neutral venues) and ``s`` the scale.  After a match the home side gains
``K * G * (R - W)`` and the away side loses the same amount, ``R`` being 1, 0.5
or 0 and ``G`` a margin-of-victory multiplier.
"""

from __future__ import annotations

import bisect
import csv
import math
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .data_ingest import MatchRecord, season_start
from .errors import DomainError, OutOfRangeError, ParseError


@dataclass(frozen=True)
class MovRule:
    """Margin-of-victory multiplier.

    ``table[d]`` applies to goal difference ``d``; beyond the table the last
    entry grows by ``tail_slope`` per extra goal.
    """

    table: tuple[float, ...] = (1.0, 1.0, 1.5, 1.75)
    tail_slope: float = 1.0 / 8.0

    def __post_init__(self) -> None:
        if not self.table or self.table[0] < 1.0:
            raise ValueError("margin-of-victory multipliers must be >= 1")
        if any(b < a for a, b in zip(self.table, self.table[1:])) or self.tail_slope < 0:
            raise ValueError("margin-of-victory multipliers must be non-decreasing")

    def __call__(self, goal_diff: int) -> float:
        if goal_diff < 0:
            raise DomainError(f"negative goal difference {goal_diff}")
        last = len(self.table) - 1
        if goal_diff <= last:
            return self.table[goal_diff]
        return self.table[last] + (goal_diff - last) * self.tail_slope


@dataclass(frozen=True)
class EloParams:
    scale: float = 400.0
    k_factor: float = 20.0
    home_advantage: float = 65.0
    mov_rule: MovRule = field(default_factory=MovRule)
    initial_rating: float = 1500.0

    def __post_init__(self) -> None:
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise ValueError(f"scale must be positive, got {self.scale}")
        if not (self.k_factor > 0 and math.isfinite(self.k_factor)):
            raise ValueError(f"k_factor must be positive, got {self.k_factor}")
        if not math.isfinite(self.home_advantage) or not math.isfinite(self.initial_rating):
            raise ValueError("home_advantage and initial_rating must be finite")


@dataclass(frozen=True)
class MatchResult:
    r: float
    goal_diff: int

    def __post_init__(self) -> None:
        if self.r not in (0.0, 0.5, 1.0):
            raise DomainError(f"result must be 0, 0.5 or 1, got {self.r}")
        if self.goal_diff < 0 or (self.r == 0.5) != (self.goal_diff == 0):
            raise DomainError(f"result {self.r} inconsistent with goal difference {self.goal_diff}")

    @classmethod
    def from_score(cls, home_goals: int, away_goals: int) -> "MatchResult":
        if home_goals > away_goals:
            r = 1.0
        elif home_goals < away_goals:
            r = 0.0
        else:
            r = 0.5
        return cls(r, abs(home_goals - away_goals))


@dataclass(frozen=True)
class EloState:
    ratings: Mapping[str, float]
    as_of: date | None = None

    def __getitem__(self, team: str) -> float:
        return self.ratings[team]


def expected_score(r_home: float, r_away: float, params: EloParams = EloParams(), neutral: bool = False) -> float:
    """Expected score of the home side."""
    if not (math.isfinite(r_home) and math.isfinite(r_away)):
        raise DomainError(f"non-finite rating: {r_home}, {r_away}")
    diff = r_home - r_away + (0.0 if neutral else params.home_advantage)
    return 1.0 / (1.0 + 10.0 ** (-diff / params.scale))


def rating_change(r_home: float, r_away: float, result: MatchResult, params: EloParams, neutral: bool) -> float:
    w = expected_score(r_home, r_away, params, neutral)
    return params.k_factor * params.mov_rule(result.goal_diff) * (result.r - w)


def update(
    state: EloState,
    home: str,
    away: str,
    result: MatchResult,
    params: EloParams = EloParams(),
    neutral: bool = False,
    on: date | None = None,
) -> tuple[EloState, float]:
    """Return the new state and the points moved to the home side."""
    if home == away:
        raise DomainError(f"{home} cannot play itself")
    r_home = state.ratings.get(home, params.initial_rating)
    r_away = state.ratings.get(away, params.initial_rating)
    delta = rating_change(r_home, r_away, result, params, neutral)
    ratings = dict(state.ratings)
    ratings[home] = r_home + delta
    ratings[away] = r_away - delta
    as_of = state.as_of
    if on is not None:
        if as_of is not None and on < as_of:
            raise OutOfRangeError(f"update dated {on} precedes state date {as_of}")
        as_of = on
    return EloState(ratings, as_of), delta


class EloTimeline:
    """All states of a chronological replay.

    ``timeline[i]`` is the state after the first ``i`` matches, so a replay
    of ``n`` matches holds ``n + 1`` states.  Each state lists every team
    of the replay; teams that have not played yet sit at their initial
    rating.  Per-team histories are stored instead of full copies.
    """

    def __init__(self, start: date, initial: Mapping[str, float], teams: Sequence[str]):
        self.start = start
        self._initial = dict(initial)
        self._teams = tuple(teams)
        self._dates: list[date] = []
        self._match_ids: list[str] = []
        self._history: dict[str, tuple[list[int], list[float]]] = {t: ([0], [self._initial[t]]) for t in teams}

    def _record(self, step_date: date, match_id: str, changes: Mapping[str, float]) -> None:
        self._dates.append(step_date)
        self._match_ids.append(match_id)
        step = len(self._dates)
        for team, rating in changes.items():
            steps, values = self._history[team]
            steps.append(step)
            values.append(rating)

    def __len__(self) -> int:
        return len(self._dates) + 1

    @property
    def teams(self) -> tuple[str, ...]:
        return self._teams

    @property
    def match_ids(self) -> tuple[str, ...]:
        return tuple(self._match_ids)

    def rating(self, team: str, step: int) -> float:
        steps, values = self._history[team]
        return values[bisect.bisect_right(steps, step) - 1]

    def __getitem__(self, step: int) -> EloState:
        n = len(self)
        if step < 0:
            step += n
        if not 0 <= step < n:
            raise IndexError(step)
        as_of = self._dates[step - 1] if step else self.start
        return EloState({t: self.rating(t, step) for t in self._teams}, as_of)

    def steps_through(self, day: date) -> int:
        """Number of matches dated on or before ``day``."""
        return bisect.bisect_right(self._dates, day)

    @property
    def final(self) -> EloState:
        return self[len(self) - 1]


def rate_history(
    records: Iterable[MatchRecord],
    params: EloParams = EloParams(),
    initial: Mapping[str, float] | None = None,
    start: date | None = None,
) -> EloTimeline:
    """Replay matches ordered by (date, match_id).

    ``start`` defaults to the date of the first match; a snapshot on that
    date already includes the matches played on it.
    """
    ordered = sorted(records, key=lambda r: (r.date, r.match_id))
    initial = dict(initial or {})
    teams = list(initial)
    seen = set(teams)
    for r in ordered:
        for t in (r.home_team, r.away_team):
            if t not in seen:
                seen.add(t)
                teams.append(t)
                initial[t] = params.initial_rating
    if start is None:
        start = ordered[0].date if ordered else date.min
    elif ordered and ordered[0].date < start:
        raise OutOfRangeError(f"match {ordered[0].match_id} on {ordered[0].date} precedes timeline start {start}")
    timeline = EloTimeline(start, initial, teams)
    current = dict(initial)
    for r in ordered:
        delta = rating_change(current[r.home_team], current[r.away_team],
                              MatchResult.from_score(r.home_goals, r.away_goals), params, r.neutral_venue)
        current[r.home_team] += delta
        current[r.away_team] -= delta
        timeline._record(r.date, r.match_id, {r.home_team: current[r.home_team], r.away_team: current[r.away_team]})
    return timeline


def snapshot_at(timeline: EloTimeline, day: date) -> dict[str, float]:
    """Ratings after every match dated ``<= day``."""
    if day < timeline.start:
        raise OutOfRangeError(f"{day} precedes timeline start {timeline.start}")
    return dict(timeline[timeline.steps_through(day)].ratings)


def season_snapshots(timeline: EloTimeline, seasons: Iterable[str]) -> dict[tuple[str, str], float]:
    """June-30 ratings preceding each season, keyed ``(season, team)``."""
    out: dict[tuple[str, str], float] = {}
    for season in seasons:
        snap = snapshot_at(timeline, date(season_start(season), 6, 30))
        for team, rating in snap.items():
            out[(season, team)] = rating
    return out


def write_snapshots(snapshots: Mapping[tuple[str, str], float], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["season", "team", "rating"])
        for (season, team), rating in sorted(snapshots.items()):
            writer.writerow([season, team, f"{rating:.2f}"])


def read_snapshots(path: str | Path) -> dict[tuple[str, str], float]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["season", "team", "rating"]:
            raise ParseError("header must be season,team,rating", 1)
        return {(row["season"], row["team"]): float(row["rating"]) for row in reader}
