"""From a data directory to the five regression samples."""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .data_ingest import (
    STUDY_SEASONS,
    CoefficientTable,
    GroupStanding,
    MatchRecord,
    Observation,
    SampleTag,
    build_group_match_sample,
    build_group_ranking_sample,
    build_knockout_sample,
    build_trinomial_sample,
    parse_coefficients,
    parse_matches,
    parse_standings,
)
from .elo import EloParams, rate_history, season_snapshots
from .errors import ConfigurationError

MATCHES_FILE = "matches.csv"
STANDINGS_FILE = "standings.csv"
COEFFICIENTS_FILE = "coefficients.csv"


@dataclass(frozen=True)
class Dataset:
    matches: list[MatchRecord]
    standings: list[GroupStanding]
    coefficients: CoefficientTable


def load_dataset(data_dir: str | Path) -> Dataset:
    root = Path(data_dir)
    for name in (MATCHES_FILE, STANDINGS_FILE, COEFFICIENTS_FILE):
        if not (root / name).is_file():
            raise ConfigurationError(f"{root} has no {name}")
    return Dataset(
        parse_matches(root / MATCHES_FILE),
        parse_standings(root / STANDINGS_FILE),
        parse_coefficients(root / COEFFICIENTS_FILE),
    )


def load_synthetic() -> Dataset:
    with resources.as_file(resources.files("uclrating").joinpath("data/synthetic")) as path:
        return load_dataset(path)


def build_samples(
    dataset: Dataset,
    params: EloParams = EloParams(),
    seasons: tuple[str, ...] = STUDY_SEASONS,
) -> dict[SampleTag, list[Observation]]:
    """Elo snapshots from the full match history, then every sample family."""
    timeline = rate_history(dataset.matches, params)
    elo = season_snapshots(timeline, seasons)
    uefa = dataset.coefficients.points
    return {
        SampleTag.GROUP_MATCH: build_group_match_sample(dataset.matches, uefa, elo, seasons),
        SampleTag.GROUP_MATCH_TRINOMIAL: build_trinomial_sample(dataset.matches, uefa, elo, seasons),
        SampleTag.KNOCKOUT: build_knockout_sample(dataset.matches, uefa, elo, seasons),
        SampleTag.GROUP_RANKING: build_group_ranking_sample(dataset.standings, uefa, elo, "by-uefa", seasons),
        SampleTag.GROUP_RANKING_ELO: build_group_ranking_sample(dataset.standings, uefa, elo, "by-elo", seasons),
    }
