import math
from datetime import date

import pytest
from hypothesis import given, strategies as st

from factories import match
from uclrating.data_ingest import Competition, Stage
from uclrating.elo import (
    EloParams,
    EloState,
    MatchResult,
    MovRule,
    expected_score,
    rate_history,
    read_snapshots,
    season_snapshots,
    snapshot_at,
    update,
    write_snapshots,
)
from uclrating.errors import DomainError, OutOfRangeError

NO_HOME = EloParams(home_advantage=0.0)
ratings = st.floats(min_value=500, max_value=2500, allow_nan=False)
goals = st.integers(min_value=0, max_value=9)


def direct_w(delta, h=0.0, s=400.0):
    return 1.0 / (1.0 + 10.0 ** (-(delta + h) / s))


def test_equal_ratings_neutral_is_even():
    assert expected_score(1600, 1600, neutral=True) == 0.5


def test_one_scale_ahead_is_ten_to_one():
    assert expected_score(1900, 1500, NO_HOME) == pytest.approx(10 / 11, abs=1e-15)


def test_home_advantage_alone():
    w = expected_score(1500, 1500, EloParams())
    assert w == pytest.approx(direct_w(0, 65), abs=1e-15)
    assert w == pytest.approx(0.5925, abs=1e-4)


def test_stronger_side_is_favoured():
    assert expected_score(1700, 1500, NO_HOME) > 0.5 > expected_score(1500, 1700, NO_HOME)


def test_non_finite_rating_rejected():
    with pytest.raises(DomainError):
        expected_score(float("nan"), 1500)


def test_draw_between_equals_moves_nothing():
    state, delta = update(EloState({"A": 1500, "B": 1500}), "A", "B", MatchResult(0.5, 0), neutral=True)
    assert delta == 0.0
    assert state.ratings == {"A": 1500, "B": 1500}


def test_one_goal_win_between_equals():
    state, delta = update(EloState({"A": 1500, "B": 1500}), "A", "B", MatchResult(1.0, 1), neutral=True)
    assert delta == pytest.approx(10.0)
    assert state["A"] == pytest.approx(1510.0) and state["B"] == pytest.approx(1490.0)


def test_unseen_teams_enter_at_initial_rating():
    state, _ = update(EloState({}), "A", "B", MatchResult(0.5, 0), EloParams(initial_rating=1234), neutral=True)
    assert set(state.ratings) == {"A", "B"}
    assert sum(state.ratings.values()) == pytest.approx(2468)


def test_update_date_must_not_go_back():
    state = EloState({"A": 1500, "B": 1500}, date(2020, 1, 2))
    with pytest.raises(OutOfRangeError):
        update(state, "A", "B", MatchResult(1.0, 1), on=date(2020, 1, 1))


@pytest.mark.parametrize("r, gd", [(0.5, 1), (1.0, 0), (0.7, 1), (1.0, -1)])
def test_inconsistent_results_rejected(r, gd):
    with pytest.raises(DomainError):
        MatchResult(r, gd)


def test_mov_table():
    mov = MovRule()
    assert [mov(d) for d in range(6)] == [1.0, 1.0, 1.5, 1.75, 1.875, 2.0]


@pytest.mark.parametrize("table", [(0.5,), (1.0, 2.0, 1.5)])
def test_mov_rule_must_be_at_least_one_and_non_decreasing(table):
    with pytest.raises(ValueError):
        MovRule(table)


@pytest.mark.parametrize("kwargs", [{"scale": 0}, {"k_factor": -1}, {"home_advantage": math.inf}])
def test_bad_params(kwargs):
    with pytest.raises(ValueError):
        EloParams(**kwargs)


@given(ratings, ratings, goals, goals, st.booleans())
def test_update_is_zero_sum(ra, rb, hg, ag, neutral):
    state, _ = update(EloState({"A": ra, "B": rb}), "A", "B", MatchResult.from_score(hg, ag), neutral=neutral)
    assert abs(state["A"] + state["B"] - (ra + rb)) < 1e-9


@given(ratings, ratings)
def test_symmetry_without_home_advantage(ra, rb):
    assert abs(expected_score(ra, rb, NO_HOME) + expected_score(rb, ra, NO_HOME) - 1.0) < 1e-12


@given(ratings, ratings, st.integers(min_value=1, max_value=8))
def test_bigger_margin_never_moves_less(ra, rb, gd):
    state = EloState({"A": ra, "B": rb})
    _, small = update(state, "A", "B", MatchResult(1.0, gd))
    _, large = update(state, "A", "B", MatchResult(1.0, gd + 1))
    assert abs(large) >= abs(small)


@given(ratings, ratings, st.integers(min_value=1, max_value=8), st.booleans())
def test_winner_gains_loser_drops(ra, rb, gd, home_wins):
    r = MatchResult(1.0 if home_wins else 0.0, gd)
    state, _ = update(EloState({"A": ra, "B": rb}), "A", "B", r)
    winner, loser = ("A", "B") if home_wins else ("B", "A")
    assert state[winner] > (ra if home_wins else rb)
    assert state[loser] < (rb if home_wins else ra)


@given(st.floats(min_value=1, max_value=800))
def test_lower_rated_side_gains_from_draw(gap):
    state, _ = update(EloState({"A": 1500 + gap, "B": 1500}), "A", "B", MatchResult(0.5, 0), NO_HOME)
    assert state["B"] > 1500


# ------------------------------------------------------------------ timeline


def test_empty_history_holds_one_state():
    timeline = rate_history([], initial={"A": 1600})
    assert len(timeline) == 1
    assert timeline[0].ratings == {"A": 1600}


def test_one_match_changes_only_its_teams():
    m = match("A", "B", 2, 0)
    timeline = rate_history([m], initial={"A": 1500, "B": 1500, "C": 1700})
    before, after = timeline[0].ratings, timeline[1].ratings
    assert len(timeline) == 2
    assert after["C"] == before["C"]
    assert after["A"] > before["A"] and after["B"] < before["B"]


def test_round_robin_conserves_total():
    teams = "ABCD"
    records, k = [], 0
    for h in teams:
        for a in teams:
            if h != a:
                k += 1
                records.append(match(h, a, k % 3, (k * 7) % 4, day=date(2010, 8, 1 + k)))
    final = rate_history(records).final.ratings
    assert sum(final.values()) == pytest.approx(4 * 1500, abs=1e-9)


def test_same_day_matches_follow_match_id():
    a = match("A", "B", 1, 0, match_id="x2", day=date(2010, 9, 1))
    b = match("A", "C", 5, 0, match_id="x1", day=date(2010, 9, 1))
    assert rate_history([a, b]).match_ids == ("x1", "x2")
    assert rate_history([b, a]).final.ratings == rate_history([a, b]).final.ratings


def test_replay_is_bitwise_deterministic():
    records = [match("A", "B", i % 4, i % 3, day=date(2010, 8, 1 + i)) for i in range(20)]
    assert rate_history(records).final.ratings == rate_history(list(reversed(records))).final.ratings


def test_june_30_boundary():
    june = match("A", "B", 3, 0, day=date(2011, 6, 30), season="2010/11", comp=Competition.DOMESTIC_LEAGUE, stage=Stage.OTHER)
    july = match("A", "B", 0, 3, day=date(2011, 7, 1), season="2011/12", comp=Competition.DOMESTIC_LEAGUE, stage=Stage.OTHER)
    timeline = rate_history([june, july], start=date(2011, 1, 1))
    snap = snapshot_at(timeline, date(2011, 6, 30))
    assert snap["A"] > 1500
    assert snap == timeline[1].ratings
    assert snapshot_at(timeline, date(2011, 5, 1)) == {"A": 1500, "B": 1500}
    assert snapshot_at(timeline, date(2030, 1, 1)) == timeline.final.ratings


def test_snapshot_before_start_rejected():
    timeline = rate_history([match("A", "B", 1, 0)])
    with pytest.raises(OutOfRangeError):
        snapshot_at(timeline, date(2000, 1, 1))


def test_season_snapshot_roundtrip(tmp_path):
    records = [match("A", "B", 2, 1, day=date(2010, 9, 1)), match("B", "A", 0, 0, day=date(2011, 3, 1))]
    snaps = season_snapshots(rate_history(records, start=date(2010, 6, 1)), ["2010/11", "2011/12"])
    assert snaps[("2010/11", "A")] == 1500
    path = tmp_path / "elo.csv"
    write_snapshots(snaps, path)
    back = read_snapshots(path)
    assert back.keys() == snaps.keys()
    assert all(abs(back[k] - snaps[k]) <= 0.005 for k in snaps)
    assert path.read_text().splitlines()[0] == "season,team,rating"
