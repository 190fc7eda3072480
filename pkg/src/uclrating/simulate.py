"""Monte Carlo simulation of a league phase.

Every fixture gets a (win, draw, loss) triple from an outcome model, runs are
sampled in vectorised chunks, and clubs are ranked by points (3/1/0), then by
points won in matches between the clubs level on points, then at random.
Goal difference is not simulated.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from scipy.stats import spearmanr

from .elo import EloParams, expected_score
from .glm import RegressionModel
from .rng import generator
from .swiss_draw import DrawFormat, DrawInput, Schedule, balance_metrics, draw, pots_by_rating

FITTED_TRINOMIAL = "fitted-trinomial"
ELO_IMPLIED = "elo-implied"
DEFAULT_DRAW_FACTOR = 0.30
CHUNK = 20_000
TOP_BAND = (1, 8)
PLAYOFF_BAND = (9, 24)
TIE_BREAKERS = ("points", "head-to-head points", "random")


@dataclass(frozen=True)
class OutcomeModel:
    """Source of fixture probabilities.

    ``fitted-trinomial`` wraps a multinomial fit on a single rating
    difference with categories ``home``/``draw``/``away``.  ``elo-implied``
    turns the Elo expected score ``W`` into ``p_draw = d * 4W(1 - W)`` and
    splits the rest in proportion ``W : 1 - W``.
    """

    kind: str = ELO_IMPLIED
    regression: RegressionModel | None = None
    elo: EloParams = field(default_factory=EloParams)
    draw_factor: float = DEFAULT_DRAW_FACTOR

    def __post_init__(self) -> None:
        if self.kind == FITTED_TRINOMIAL:
            m = self.regression
            if m is None or not m.is_multinomial:
                raise ValueError("fitted-trinomial needs a multinomial RegressionModel")
            if set(m.categories) != {"home", "draw", "away"}:
                raise ValueError(f"categories must be home/draw/away, got {m.categories}")
            if len(m.feature_names) != 2:
                raise ValueError("fitted-trinomial supports exactly one rating-difference feature")
        elif self.kind == ELO_IMPLIED:
            if not 0.0 <= self.draw_factor < 1.0:
                raise ValueError(f"draw_factor must lie in [0, 1), got {self.draw_factor}")
        else:
            raise ValueError(f"unknown outcome model {self.kind!r}")

    def home_triples(self, deltas: np.ndarray) -> np.ndarray:
        """``(p_home_win, p_draw, p_away_win)`` rows for home-minus-away ``deltas``."""
        deltas = np.asarray(deltas, dtype=float)
        if not np.all(np.isfinite(deltas)):
            raise ValueError("rating differences must be finite")
        if self.kind == FITTED_TRINOMIAL:
            m = self.regression
            X = np.column_stack([np.ones(deltas.size), deltas])
            probs = m.predict_proba(X)
            cols = [m.categories.index(c) for c in ("home", "draw", "away")]
            return probs[:, cols]
        w = np.array([expected_score(d, 0.0, self.elo) for d in deltas])
        p_draw = self.draw_factor * 4.0 * w * (1.0 - w)
        return np.column_stack([w * (1.0 - p_draw), p_draw, (1.0 - w) * (1.0 - p_draw)])


def outcome_probs(model: OutcomeModel, delta: float, home: bool = True) -> tuple[float, float, float]:
    """Win, draw and loss probabilities of a club rated ``delta`` above its opponent.

    With ``home=True`` this is ``(p_home_win, p_draw, p_away_win)``.  With
    ``home=False`` the club plays away: the fixture is evaluated at ``-delta``
    and the triple is returned from the club's side.
    """
    if not math.isfinite(delta):
        raise ValueError(f"non-finite rating difference {delta}")
    row = model.home_triples(np.array([delta if home else -delta]))[0]
    triple = (float(row[0]), float(row[1]), float(row[2]))
    return triple if home else triple[::-1]


@dataclass(frozen=True)
class StandingsDistribution:
    clubs: tuple[str, ...]
    rank_probs: np.ndarray  # rank_probs[i, r] = P(clubs[i] finishes r + 1)
    runs: int
    seed: int
    tie_breakers: tuple[str, ...] = TIE_BREAKERS

    def band(self, first: int, last: int) -> dict[str, float]:
        """Probability of finishing between ranks ``first`` and ``last`` inclusive."""
        lo, hi = max(first, 1) - 1, min(last, len(self.clubs))
        return {c: float(self.rank_probs[i, lo:hi].sum()) for i, c in enumerate(self.clubs)}

    @property
    def top8(self) -> dict[str, float]:
        return self.band(*TOP_BAND)

    @property
    def playoff(self) -> dict[str, float]:
        return self.band(*PLAYOFF_BAND)

    @property
    def expected_rank(self) -> dict[str, float]:
        ranks = np.arange(1, len(self.clubs) + 1)
        return {c: float(self.rank_probs[i] @ ranks) for i, c in enumerate(self.clubs)}

    def to_dict(self) -> dict:
        return {
            "runs": self.runs,
            "seed": self.seed,
            "tie_breakers": list(self.tie_breakers),
            "clubs": {
                c: {
                    "expected_rank": self.expected_rank[c],
                    "top8": self.top8[c],
                    "playoff": self.playoff[c],
                }
                for c in self.clubs
            },
        }


def _fixture_arrays(schedule: Schedule, strengths: Mapping[str, float]):
    clubs = sorted({c for f in schedule.fixtures for c in (f.home, f.away)})
    missing = [c for c in clubs if c not in strengths]
    if missing:
        raise KeyError(f"no strength for {', '.join(missing)}")
    index = {c: i for i, c in enumerate(clubs)}
    home = np.array([index[f.home] for f in schedule.fixtures], dtype=np.intp)
    away = np.array([index[f.away] for f in schedule.fixtures], dtype=np.intp)
    deltas = np.array([strengths[f.home] - strengths[f.away] for f in schedule.fixtures], dtype=float)
    return clubs, home, away, deltas


def _play(cum: np.ndarray, size: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Home and away points of every fixture in ``size`` runs."""
    u = rng.random((size, cum.shape[0]))
    # 0 home win, 1 draw, 2 away win
    outcome = (u >= cum[:, 0]).astype(np.int8) + (u >= cum[:, 1])
    home_pts = np.choose(outcome, (3, 1, 0)).astype(np.int32)
    away_pts = np.choose(outcome, (0, 1, 3)).astype(np.int32)
    return home_pts, away_pts


def _rank_chunk(home, away, cum, n_clubs: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """Finishing positions (0-based) of a chunk of runs, shape ``(size, n_clubs)``."""
    home_pts, away_pts = _play(cum, size, rng)
    points = np.zeros((size, n_clubs), dtype=np.int32)
    for f in range(home.size):
        points[:, home[f]] += home_pts[:, f]
        points[:, away[f]] += away_pts[:, f]
    # head-to-head points only count between clubs level on points
    h2h = np.zeros_like(points)
    for f in range(home.size):
        level = points[:, home[f]] == points[:, away[f]]
        h2h[:, home[f]] += level * home_pts[:, f]
        h2h[:, away[f]] += level * away_pts[:, f]
    noise = rng.random((size, n_clubs))
    # lexsort sorts along the last axis with the last key primary
    order = np.lexsort((noise, -h2h, -points))
    positions = np.empty_like(order)
    rows = np.arange(size)[:, None]
    positions[rows, order] = np.arange(n_clubs)
    return positions


def simulate_league(
    schedule: Schedule,
    strengths: Mapping[str, float],
    model: OutcomeModel,
    runs: int,
    seed: int,
) -> StandingsDistribution:
    """Rank distribution of every club over ``runs`` simulated seasons.

    Runs are processed in chunks of fixed size, each with its own stream
    ``generator(seed, "league", k)``, so results do not depend on memory
    limits or on how chunks are scheduled.
    """
    if runs <= 0:
        raise ValueError(f"runs must be positive, got {runs}")
    clubs, home, away, deltas = _fixture_arrays(schedule, strengths)
    probs = model.home_triples(deltas)
    if not np.allclose(probs.sum(axis=1), 1.0, rtol=0, atol=1e-12):
        raise ValueError("outcome model returned probabilities that do not sum to 1")
    cum = np.cumsum(probs, axis=1)
    n = len(clubs)
    counts = np.zeros((n, n), dtype=np.int64)
    done, k = 0, 0
    while done < runs:
        size = min(CHUNK, runs - done)
        positions = _rank_chunk(home, away, cum, n, size, generator(seed, "league", k))
        counts += np.stack([np.bincount(positions[:, i], minlength=n) for i in range(n)])
        done += size
        k += 1
    return StandingsDistribution(tuple(clubs), counts / runs, runs, seed)


# ------------------------------------------------------------------ seeding


@dataclass(frozen=True)
class SeedingOutcome:
    label: str
    pots: tuple[tuple[str, ...], ...]
    schedule: Schedule
    spread: float
    rank_correlation: float
    standings: StandingsDistribution

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "pots": [list(p) for p in self.pots],
            "opponent_strength_spread": self.spread,
            "rank_correlation": None if math.isnan(self.rank_correlation) else self.rank_correlation,
            "exception_rule_used": self.schedule.exception_rule_used,
            "standings": self.standings.to_dict(),
        }


def strength_rank_correlation(standings: StandingsDistribution, true_strength: Mapping[str, float]) -> float:
    """Spearman correlation of true strength with expected finishing position.

    The sign is flipped so that 1 means the strongest club is expected to
    finish first.  NaN when either side is constant.
    """
    expected = standings.expected_rank
    clubs = standings.clubs
    truth = [true_strength[c] for c in clubs]
    ranks = [expected[c] for c in clubs]
    if len(set(truth)) < 2 or len(set(ranks)) < 2:
        return math.nan  # undefined for a constant column
    return float(-spearmanr(truth, ranks).statistic)


def compare_seedings(
    population: Mapping[str, str],
    rating_a: Mapping[str, float],
    rating_b: Mapping[str, float],
    true_strength: Mapping[str, float],
    runs: int,
    seed: int,
    model: OutcomeModel | None = None,
    n_pots: int = 4,
    fmt: DrawFormat | None = None,
    labels: Sequence[str] = ("a", "b"),
) -> dict[str, SeedingOutcome]:
    """Seed ``population`` (club -> association) by two ratings and compare.

    Each seeding gets its own draw and simulation stream; matches are
    played at ``true_strength``.
    """
    model = model or OutcomeModel()
    clubs = sorted(population)
    for name, rating in (("rating_a", rating_a), ("rating_b", rating_b), ("true_strength", true_strength)):
        missing = [c for c in clubs if c not in rating]
        if missing:
            raise KeyError(f"{name} lacks {', '.join(missing[:5])}")
    out = {}
    for label, rating in zip(labels, (rating_a, rating_b)):
        pots = pots_by_rating(clubs, rating, n_pots)
        draw_input = DrawInput(pots, dict(population), format=fmt or DrawFormat())
        schedule = draw(draw_input, int(generator(seed, "seeding", label).integers(1 << 62)))
        sim_seed = int(generator(seed, "seeding", label, "sim").integers(1 << 62))
        standings = simulate_league(schedule, true_strength, model, runs, sim_seed)
        out[label] = SeedingOutcome(
            label,
            pots,
            schedule,
            balance_metrics(schedule, true_strength).spread,
            strength_rank_correlation(standings, true_strength),
            standings,
        )
    return out


# ------------------------------------------------------------------ io


def write_rank_csv(standings: StandingsDistribution, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["club", "rank", "probability"])
        for i, club in enumerate(standings.clubs):
            for r in range(len(standings.clubs)):
                writer.writerow([club, r + 1, f"{standings.rank_probs[i, r]:.6f}"])


def fairness_report(outcomes: Mapping[str, SeedingOutcome], model: OutcomeModel) -> dict:
    return {
        "outcome_model": model.kind,
        "draw_factor": model.draw_factor if model.kind == ELO_IMPLIED else None,
        "points": {"win": 3, "draw": 1, "loss": 0},
        "tie_breakers": list(TIE_BREAKERS),
        "metrics_note": "opponent_strength_spread and rank_correlation are defined by this tool",
        "seedings": {k: v.to_dict() for k, v in outcomes.items()},
    }


def write_fairness_json(report: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
