"""Synthetic Champions League history for tests and offline runs.

The generator keeps the real competition layout of 2003/04-2021/22: eight
groups of four, two-legged ties from the round of 16 to the semi-finals, a
neutral final, single-leg quarter- and semi-finals in August 2020 and empty
stadiums in 2020/21.  Clubs belong to twelve associations with six clubs
each; domestic double round robins keep the Elo ratings moving.  Latent
strengths follow a per-season random walk and every match is drawn from
the Elo-implied outcome model at those strengths.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from datetime import date, timedelta
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .coefficient import build_ledger, club_coefficient, load_rulebook
from .data_ingest import (
    AWAY_GOALS_LAST_SEASON,
    COVID_SEASON,
    FIRST_SEASON,
    Competition,
    GroupStanding,
    MatchRecord,
    Observation,
    Stage,
    season_label,
    write_matches,
    write_standings,
)
from .errors import ConfigurationError
from .rng import generator

ASSOCIATIONS = ("ENG", "ESP", "GER", "ITA", "FRA", "POR", "NED", "RUS", "UKR", "BEL", "TUR", "SCO")
CLUBS_PER_ASSOCIATION = 6
FIRST_YEAR = 1998  # five warm-up seasons before 2003/04
LAST_YEAR = 2021
DEFAULT_SEED = 20240
HOME_ADVANTAGE = 65.0
CLOSED_DOORS_ADVANTAGE = 20.0
SCALE = 400.0
DRAW_FACTOR = 0.30
GROUP_LETTERS = "ABCDEFGH"


@dataclass(frozen=True)
class World:
    matches: tuple[MatchRecord, ...]
    standings: tuple[GroupStanding, ...]
    coefficients: dict[tuple[str, str], float]
    membership: dict[str, str]
    strength: dict[tuple[str, str], float]


def clubs() -> list[str]:
    return [f"{a}{k:02d}" for a in ASSOCIATIONS for k in range(1, CLUBS_PER_ASSOCIATION + 1)]


def membership() -> dict[str, str]:
    return {c: c[:3] for c in clubs()}


class _Season:
    """Match factory for one season."""

    def __init__(self, year: int, strength: Mapping[str, float], rng: np.random.Generator):
        self.year = year
        self.label = season_label(year)
        self.strength = strength
        self.rng = rng
        self.records: list[MatchRecord] = []
        self.closed = year == COVID_SEASON

    def score(self, home: str, away: str, neutral: bool) -> tuple[int, int]:
        adv = 0.0 if neutral else (CLOSED_DOORS_ADVANTAGE if self.closed else HOME_ADVANTAGE)
        w = 1.0 / (1.0 + 10.0 ** (-(self.strength[home] - self.strength[away] + adv) / SCALE))
        p_draw = DRAW_FACTOR * 4.0 * w * (1.0 - w)
        u = self.rng.random()
        if u < p_draw:
            g = int(self.rng.poisson(1.1))
            return g, g
        loser = int(self.rng.poisson(0.6))
        winner = loser + 1 + int(self.rng.poisson(0.6))
        return (winner, loser) if u < p_draw + w * (1.0 - p_draw) else (loser, winner)

    def play(self, day: date, comp: Competition, stage: Stage, home: str, away: str,
             neutral: bool = False, single_leg: bool = False) -> MatchRecord:
        hg, ag = self.score(home, away, neutral)
        rec = MatchRecord(
            match_id=f"{self.year}-{len(self.records) + 1:04d}",
            date=day,
            season=self.label,
            competition=comp,
            stage=stage,
            home_team=home,
            away_team=away,
            home_goals=hg,
            away_goals=ag,
            neutral_venue=neutral,
            behind_closed_doors=self.closed or (self.year == COVID_SEASON - 1 and day >= date(2020, 3, 12)),
            single_leg=single_leg,
        )
        self.records.append(rec)
        return rec

    def settle(self, rec: MatchRecord) -> MatchRecord:
        """Attach a shoot-out winner when a tie is otherwise level."""
        winner = rec.home_team if self.rng.random() < 0.5 else rec.away_team
        settled = dataclasses.replace(rec, advanced=winner)
        self.records[self.records.index(rec)] = settled
        return settled


def _domestic(season: _Season, members: Sequence[str]) -> None:
    start = date(season.year, 8, 10)
    pairs = [(h, a) for h in members for a in members if h != a]
    order = season.rng.permutation(len(pairs))
    for slot, k in enumerate(order):
        home, away = pairs[k]
        season.play(start + timedelta(days=9 * slot), Competition.DOMESTIC_LEAGUE, Stage.OTHER, home, away)


def _participants(season: _Season, rng: np.random.Generator) -> list[str]:
    chosen = []
    for i, assoc in enumerate(ASSOCIATIONS):
        members = [c for c in clubs() if c[:3] == assoc]
        form = {c: season.strength[c] + rng.normal(0.0, 40.0) for c in members}
        ranked = sorted(members, key=lambda c: -form[c])
        chosen.extend(ranked[: 4 if i < 4 else 2])
    return chosen


def _draw_groups(
    teams: Sequence[str], coef: Mapping[str, float], rng: np.random.Generator, distinct: bool
) -> list[list[str]]:
    """Eight groups, one club per pot, no two clubs of one association.

    With ``distinct`` no group holds two equal coefficients either, so the
    coefficient-ordered ranking pairs are well defined.
    """
    ordered = sorted(teams, key=lambda c: (-coef[c], c))
    queue = [c for p in range(4) for c in (ordered[8 * p + k] for k in rng.permutation(8))]
    groups: list[list[str]] = [[] for _ in range(8)]

    def fits(team: str, g: int, pot: int) -> bool:
        if len(groups[g]) != pot:
            return False
        return all(t[:3] != team[:3] and not (distinct and coef[t] == coef[team]) for t in groups[g])

    def place(k: int) -> bool:
        if k == len(queue):
            return True
        team, pot = queue[k], k // 8
        for g in rng.permutation(8):
            if fits(team, g, pot):
                groups[g].append(team)
                if place(k + 1):
                    return True
                groups[g].pop()
        return False

    if not place(0):
        raise ConfigurationError("could not draw groups without shared associations or coefficients")
    return groups


def _group_stage(season: _Season, groups: list[list[str]]) -> tuple[list[GroupStanding], list[tuple[str, str]]]:
    # matchday pairings of a double round robin of four
    rounds = [((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2))]
    matchdays = rounds + [tuple((b, a) for a, b in r) for r in rounds]
    standings, qualified = [], []
    for g, members in enumerate(groups):
        table = {c: [0, 0, 0] for c in members}  # points, goal difference, goals for
        for md, games in enumerate(matchdays):
            day = date(season.year, 9, 15) + timedelta(days=14 * md)
            for a, b in games:
                home, away = members[a], members[b]
                rec = season.play(day, Competition.CL, Stage.GROUP, home, away)
                for team, gf, ga in ((home, rec.home_goals, rec.away_goals), (away, rec.away_goals, rec.home_goals)):
                    table[team][0] += 3 if gf > ga else 1 if gf == ga else 0
                    table[team][1] += gf - ga
                    table[team][2] += gf
        noise = {c: season.rng.random() for c in members}
        ranked = sorted(members, key=lambda c: (-table[c][0], -table[c][1], -table[c][2], noise[c]))
        standings.extend(GroupStanding(season.label, GROUP_LETTERS[g], c, r + 1) for r, c in enumerate(ranked))
        qualified.append((ranked[0], ranked[1]))
    return standings, qualified


def _two_legs(season: _Season, stage: Stage, first_host: str, other: str, first_day: date) -> str:
    leg1 = season.play(first_day, Competition.CL, stage, first_host, other)
    leg2 = season.play(first_day + timedelta(days=21), Competition.CL, stage, other, first_host)
    goals_a = leg1.home_goals + leg2.away_goals
    goals_b = leg1.away_goals + leg2.home_goals
    if goals_a != goals_b:
        return first_host if goals_a > goals_b else other
    if season.year <= AWAY_GOALS_LAST_SEASON and leg2.away_goals != leg1.away_goals:
        return first_host if leg2.away_goals > leg1.away_goals else other
    return season.settle(leg2).advanced


def _single(season: _Season, stage: Stage, a: str, b: str, day: date, flag: bool) -> str:
    rec = season.play(day, Competition.CL, stage, a, b, neutral=True, single_leg=flag)
    if rec.home_goals != rec.away_goals:
        return a if rec.home_goals > rec.away_goals else b
    return season.settle(rec).advanced


def _knockout(season: _Season, qualified: list[tuple[str, str]]) -> None:
    rng = season.rng
    winners = [w for w, _ in qualified]
    runners = [r for _, r in qualified]
    # runners-up host first legs against a winner from another group
    for _ in range(1000):
        perm = rng.permutation(8)
        if all(perm[g] != g for g in range(8)):
            break
    y = season.year
    covid = y == COVID_SEASON - 1
    alive = [_two_legs(season, Stage.R16, runners[g], winners[perm[g]], date(y + 1, 2, 14)) for g in range(8)]
    for stage, first_day in ((Stage.QF, date(y + 1, 4, 6)), (Stage.SF, date(y + 1, 4, 27))):
        order = [alive[k] for k in rng.permutation(len(alive))]
        pairs = list(zip(order[0::2], order[1::2]))
        if covid:
            day = date(2020, 8, 12) if stage is Stage.QF else date(2020, 8, 18)
            alive = [_single(season, stage, a, b, day, True) for a, b in pairs]
        else:
            alive = [_two_legs(season, stage, a, b, first_day) for a, b in pairs]
    final_day = date(2020, 8, 23) if covid else date(y + 1, 5, 28)
    _single(season, Stage.FINAL, alive[0], alive[1], final_day, False)


def generate(seed: int = DEFAULT_SEED, first_year: int = FIRST_YEAR, last_year: int = LAST_YEAR) -> World:
    """Build a full synthetic history; identical seeds give identical worlds."""
    rng = generator(seed, "synthetic", "strength")
    all_clubs = clubs()
    member = membership()
    level = {a: 1750.0 - 35.0 * i for i, a in enumerate(ASSOCIATIONS)}
    current = {c: level[c[:3]] + rng.normal(0.0, 90.0) for c in all_clubs}
    rulebook = load_rulebook()
    records: list[MatchRecord] = []
    standings: list[GroupStanding] = []
    coefficients: dict[tuple[str, str], float] = {}
    strength: dict[tuple[str, str], float] = {}
    for year in range(first_year, last_year + 1):
        label = season_label(year)
        current = {c: v + rng.normal(0.0, 30.0) for c, v in current.items()}
        season = _Season(year, dict(current), generator(seed, "synthetic", "season", year))
        for c in all_clubs:
            strength[(label, c)] = current[c]
        ledger = build_ledger([r for r in records if r.competition.is_uefa], member, rulebook)
        # published coefficients carry three decimals
        coef = {c: round(club_coefficient(ledger, c, label), 3) for c in all_clubs}
        for c in all_clubs:
            coefficients[(label, c)] = coef[c]
        for assoc in ASSOCIATIONS:
            _domestic(season, [c for c in all_clubs if c[:3] == assoc])
        teams = _participants(season, generator(seed, "synthetic", "entry", year))
        groups = _draw_groups(teams, coef, season.rng, distinct=year >= FIRST_SEASON)
        table, qualified = _group_stage(season, groups)
        _knockout(season, qualified)
        standings.extend(table)
        records.extend(season.records)
    return World(tuple(records), tuple(standings), coefficients, member, strength)


def write_world(world: World, out_dir: str | Path, seasons: Iterable[str] | None = None) -> None:
    """``matches.csv``, ``standings.csv`` and ``coefficients.csv`` in ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_matches(world.matches, out / "matches.csv")
    keep = set(seasons) if seasons is not None else None
    write_standings([s for s in world.standings if keep is None or s.season in keep], out / "standings.csv")
    with open(out / "coefficients.csv", "w", encoding="utf-8", newline="") as fh:
        fh.write("season,team,association,uefa_points\n")
        for (season, team), value in sorted(world.coefficients.items()):
            if keep is None or season in keep:
                fh.write(f"{season},{team},{world.membership[team]},{value:.3f}\n")


def bundled_dir():
    """Traversable pointing at the packaged synthetic CSVs."""
    return resources.files("uclrating").joinpath("data/synthetic")


# ------------------------------------------------------------------ outcomes


def _expit(x: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def simulate_outcomes(
    sample: Sequence[Observation], coefficients: Mapping[str, float], seed: int
) -> list[Observation]:
    """Replace binary outcomes by draws from a known logit.

    ``coefficients`` maps ``const``, ``delta_uefa`` and ``delta_elo`` (any
    may be missing and then counts as 0) to their generating values.
    """
    rng = generator(seed, "synthetic", "outcomes")
    eta = np.array([
        coefficients.get("const", 0.0)
        + coefficients.get("delta_uefa", 0.0) * o.delta_uefa
        + coefficients.get("delta_elo", 0.0) * o.delta_elo
        for o in sample
    ])
    y = rng.random(eta.size) < _expit(eta)
    return [Observation(int(v), o.delta_uefa, o.delta_elo, o.season, o.tag) for o, v in zip(sample, y)]
