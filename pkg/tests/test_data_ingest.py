from datetime import date

import pytest
from hypothesis import given, strategies as st

from factories import flat, match, tie
from uclrating.data_ingest import (
    MATCH_COLUMNS,
    STUDY_SEASONS,
    Competition,
    GroupStanding,
    Observation,
    SampleTag,
    Stage,
    build_group_match_sample,
    build_group_ranking_sample,
    build_knockout_sample,
    build_trinomial_sample,
    descriptive_stats,
    fingerprint,
    parse_coefficients,
    parse_matches,
    parse_standings,
    reconstruct_ties,
    season_label,
    season_of,
    season_start,
    split_periods,
    write_matches,
    write_standings,
)
from uclrating.errors import (
    DuplicateMatchError,
    EmptyInputError,
    InvariantError,
    PairingError,
    ParseError,
    UnresolvedRatingError,
)

HEADER = ",".join(MATCH_COLUMNS)


def write(tmp_path, text, name="matches.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


ROWS = [
    "m1,2010-09-14,2010/11,CL,group,A,B,2,1,0,0,0",
    "m2,2010-09-14,2010/11,CL,group,C,D,0,0,0,0,0",
    "m3,2011-05-28,2010/11,CL,final,A,C,3,1,1,0,0",
]


def test_three_rows(tmp_path):
    records = parse_matches(write(tmp_path, "\n".join([HEADER, *ROWS]) + "\n"))
    assert [r.match_id for r in records] == ["m1", "m2", "m3"]
    assert records[2].neutral_venue and records[2].stage is Stage.FINAL


def test_negative_goals_names_line_and_field(tmp_path):
    bad = ROWS[1].replace(",0,0,0,0,0", ",-1,0,0,0,0")
    with pytest.raises(ParseError) as err:
        parse_matches(write(tmp_path, "\n".join([HEADER, ROWS[0], bad]) + "\n"))
    assert err.value.line == 3 and err.value.field == "home_goals"


@pytest.mark.parametrize("row, field", [
    ("m9,2010-13-01,2010/11,CL,group,A,B,1,0,0,0,0", "date"),
    ("m9,2011-07-01,2010/11,CL,group,A,B,1,0,0,0,0", "date"),
    ("m9,2010-09-01,2010/12,CL,group,A,B,1,0,0,0,0", "season"),
    ("m9,2010-09-01,2010/11,UCL,group,A,B,1,0,0,0,0", "competition"),
    ("m9,2010-09-01,2010/11,CL,playoff,A,B,1,0,0,0,0", "stage"),
    ("m9,2010-09-01,2010/11,CL,group,A,A,1,0,0,0,0", "away_team"),
    ("m9,2010-09-01,2010/11,CL,group,A,B,x,0,0,0,0", "home_goals"),
    ("m9,2010-09-01,2010/11,CL,group,A,B,1,0,maybe,0,0", "neutral"),
])
def test_malformed_rows(tmp_path, row, field):
    with pytest.raises(ParseError) as err:
        parse_matches(write(tmp_path, f"{HEADER}\n{row}\n"))
    assert err.value.line == 2 and err.value.field == field


def test_wrong_field_count(tmp_path):
    with pytest.raises(ParseError) as err:
        parse_matches(write(tmp_path, f"{HEADER}\nm1,2010-09-14,2010/11\n"))
    assert err.value.line == 2


def test_bad_header(tmp_path):
    with pytest.raises(ParseError):
        parse_matches(write(tmp_path, "id,date\n"))


def test_duplicate_match_id(tmp_path):
    with pytest.raises(DuplicateMatchError):
        parse_matches(write(tmp_path, "\n".join([HEADER, ROWS[0], ROWS[0]]) + "\n"))


def test_june_30_belongs_to_closing_season(tmp_path):
    row = "m1,2011-06-30,2010/11,domestic-cup,final,A,B,1,0,1,0,0"
    assert parse_matches(write(tmp_path, f"{HEADER}\n{row}\n"))[0].season == "2010/11"
    assert season_of(date(2011, 6, 30)) == "2010/11" and season_of(date(2011, 7, 1)) == "2011/12"


def test_august_2020_finish_of_2019_20(tmp_path):
    row = "m1,2020-08-23,2019/20,CL,final,A,B,1,0,1,1,0"
    assert parse_matches(write(tmp_path, f"{HEADER}\n{row}\n"))[0].date == date(2020, 8, 23)


def test_season_labels():
    assert season_start("2003/04") == 2003 and season_label(1999) == "1999/00"
    with pytest.raises(ValueError):
        season_start("2003/05")


def test_roundtrip(tmp_path, world):
    season = [r for r in world.matches if r.season == "2010/11" and r.competition is Competition.CL and r.stage is Stage.GROUP]
    path = tmp_path / "m.csv"
    write_matches(season, path)
    back = parse_matches(path)
    assert len(back) == 96 and all(r.stage is Stage.GROUP for r in back)
    assert back == season


# ------------------------------------------------------------------ samples


def test_draws_are_excluded():
    m = match("A", "B", 1, 1)
    assert build_group_match_sample([m], flat("AB", "2010/11"), flat("AB", "2010/11")) == []


def test_group_match_counts():
    outcomes = [(2, 0)] * 50 + [(0, 1)] * 30 + [(1, 1)] * 16
    records = [match(f"T{i % 32}", f"T{(i + 1) % 32}", hg, ag) for i, (hg, ag) in enumerate(outcomes)]
    teams = [f"T{i}" for i in range(32)]
    sample = build_group_match_sample(records, flat(teams, "2010/11"), flat(teams, "2010/11"))
    assert len(sample) == 80 and sum(o.y for o in sample) == 50


def test_group_match_deltas_are_home_minus_away():
    u = {("2010/11", "A"): 30.0, ("2010/11", "B"): 10.0}
    e = {("2010/11", "A"): 1500.0, ("2010/11", "B"): 1600.0}
    (o,) = build_group_match_sample([match("A", "B", 0, 1)], u, e)
    assert (o.y, o.delta_uefa, o.delta_elo, o.tag) == (0, 20.0, -100.0, SampleTag.GROUP_MATCH)


def test_missing_ratings_are_listed():
    with pytest.raises(UnresolvedRatingError) as err:
        build_group_match_sample([match("A", "B", 1, 0)], flat("A", "2010/11"), flat("AB", "2010/11"))
    assert err.value.missing == [("2010/11", "B")]


@given(st.integers(0, 5), st.integers(0, 5), st.floats(-100, 100), st.floats(-100, 100),
       st.floats(1000, 2000), st.floats(1000, 2000))
def test_swapping_roles_negates_and_flips(hg, ag, ua, ub, ea, eb):
    u = {("2010/11", "A"): ua, ("2010/11", "B"): ub}
    e = {("2010/11", "A"): ea, ("2010/11", "B"): eb}
    one = build_group_match_sample([match("A", "B", hg, ag)], u, e)
    other = build_group_match_sample([match("B", "A", ag, hg)], u, e)
    assert len(one) == len(other) == (hg != ag)
    for a, b in zip(one, other):
        assert a.y == 1 - b.y and a.delta_uefa == -b.delta_uefa and a.delta_elo == -b.delta_elo


def test_trinomial_keeps_draws():
    records = [match("A", "B", 1, 1), match("B", "A", 2, 0), match("A", "B", 0, 3)]
    sample = build_trinomial_sample(records, flat("AB", "2010/11"), flat("AB", "2010/11"))
    assert [o.y for o in sample] == ["draw", "home", "away"]


def test_forced_knockout_outcome():
    legs = tie("A", "B", (3, 0), (0, 0))
    (o,) = build_knockout_sample(legs, flat("AB", "2010/11", 1.0), flat("AB", "2010/11", 1.0))
    assert o.y == 1 and o.tag is SampleTag.KNOCKOUT


def test_away_goals_decide_until_2020_21():
    early = tie("A", "B", (1, 2), (0, 1), season="2010/11")  # 2-2, B scored 2 away
    assert reconstruct_ties(early)[0].qualified == "B"
    late = tie("A", "B", (1, 2), (0, 1), season="2021/22", day=date(2022, 2, 15))
    with pytest.raises(PairingError):
        reconstruct_ties(late)
    settled = tie("A", "B", (1, 2), (0, 1), season="2021/22", day=date(2022, 2, 15), advanced="A")
    assert reconstruct_ties(settled)[0].qualified == "A"


def test_single_leg_and_final_are_dropped():
    records = [
        match("A", "B", 1, 0, stage=Stage.QF, single_leg=True, neutral=True, season="2019/20", day=date(2020, 8, 12)),
        match("A", "C", 1, 0, stage=Stage.FINAL, neutral=True),
        *tie("D", "E", (1, 0), (1, 1)),
    ]
    teams = "ABCDE"
    sample = build_knockout_sample(records, {**flat(teams, "2010/11"), **flat(teams, "2019/20")},
                                   {**flat(teams, "2010/11"), **flat(teams, "2019/20")})
    assert len(sample) == 1 and sample[0].y == 1


def test_orphan_leg_is_a_pairing_error():
    with pytest.raises(PairingError):
        reconstruct_ties([match("A", "B", 1, 0, stage=Stage.R16, day=date(2011, 2, 15))])


def test_second_leg_must_swap_venues():
    legs = [match("A", "B", 1, 0, stage=Stage.R16, day=date(2011, 2, 15)),
            match("A", "B", 1, 0, stage=Stage.R16, day=date(2011, 3, 8))]
    with pytest.raises(PairingError):
        reconstruct_ties(legs)


def group(season="2010/11", name="A", teams="WXYZ"):
    return [GroupStanding(season, name, t, r + 1) for r, t in enumerate(teams)]


def test_sorted_group_gives_six_positives():
    u = {("2010/11", t): v for t, v in zip("WXYZ", (40.0, 30.0, 20.0, 10.0))}
    e = flat("WXYZ", "2010/11", 1500.0)
    sample = build_group_ranking_sample(group(), u, e)
    assert len(sample) == 6 and all(o.y == 1 for o in sample)
    assert all(o.delta_uefa > 0 for o in sample)


def test_ranking_orientation_by_elo():
    u = {("2010/11", t): v for t, v in zip("WXYZ", (10.0, 20.0, 30.0, 40.0))}
    e = {("2010/11", t): v for t, v in zip("WXYZ", (1800.0, 1700.0, 1600.0, 1500.0))}
    by_uefa = build_group_ranking_sample(group(), u, e, "by-uefa")
    by_elo = build_group_ranking_sample(group(), u, e, "by-elo")
    assert all(o.y == 0 and o.delta_uefa > 0 for o in by_uefa)
    assert all(o.y == 1 and o.delta_elo > 0 for o in by_elo)
    assert {o.tag for o in by_elo} == {SampleTag.GROUP_RANKING_ELO}


def test_coefficient_tie_is_an_invariant_error():
    with pytest.raises(InvariantError):
        build_group_ranking_sample(group(), flat("WXYZ", "2010/11", 5.0), flat("WXYZ", "2010/11"))


def test_elo_ties_are_dropped(caplog):
    u = {("2010/11", t): v for t, v in zip("WXYZ", (4.0, 3.0, 2.0, 1.0))}
    e = {("2010/11", t): v for t, v in zip("WXYZ", (1500.0, 1500.0, 1600.0, 1400.0))}
    sample = build_group_ranking_sample(group(), u, e, "by-elo")
    assert len(sample) == 5
    assert "equal Elo" in caplog.text


def test_incomplete_group_is_rejected():
    with pytest.raises(InvariantError):
        build_group_ranking_sample(group()[:3], flat("WXYZ", "2010/11", 1.0), flat("WXYZ", "2010/11"))


def test_split_periods():
    sample = [Observation(1, 0.0, 0.0, s, SampleTag.GROUP_MATCH) for s in STUDY_SEASONS]
    early, late = split_periods(sample)
    assert (len(early), len(late)) == (9, 9)
    assert "2020/21" not in {o.season for o in late}
    assert split_periods([]) == ([], [])


def test_descriptive_stats():
    assert descriptive_stats([5]) == {"mean": 5, "median": 5, "st.dev": 0, "min": 5, "max": 5}
    stats = descriptive_stats([1, 2, 3, 4])
    assert stats["median"] == 2.5 and stats["mean"] == 2.5
    assert stats["st.dev"] == pytest.approx((5 / 3) ** 0.5)
    with pytest.raises(EmptyInputError):
        descriptive_stats([])


def test_standings_and_coefficients_files(tmp_path):
    path = tmp_path / "standings.csv"
    write_standings(group(), path)
    assert parse_standings(path) == group()
    bad = write(tmp_path, "season,group,team,rank\n2010/11,A,W,5\n", "s2.csv")
    with pytest.raises(ParseError):
        parse_standings(bad)
    coef = write(tmp_path, "season,team,association,uefa_points\n2010/11,W,ENG,12.5\n2011/12,W,ENG,14\n", "c.csv")
    table = parse_coefficients(coef)
    assert table.points[("2011/12", "W")] == 14.0 and table.membership == {"W": "ENG"}
    clash = write(tmp_path, "season,team,association,uefa_points\n2010/11,W,ENG,1\n2011/12,W,ESP,1\n", "c2.csv")
    with pytest.raises(ParseError):
        parse_coefficients(clash)


def test_fingerprint_tracks_content():
    a = [match("A", "B", 1, 0, match_id="x")]
    b = [match("A", "B", 2, 0, match_id="x")]
    assert fingerprint(a)["rows"] == 1
    assert fingerprint(a) == fingerprint(list(a)) and fingerprint(a) != fingerprint(b)


def test_synthetic_sample_sizes(synthetic_samples, synthetic_dataset):
    cl_group = [r for r in synthetic_dataset.matches
                if r.competition is Competition.CL and r.stage is Stage.GROUP and r.season in STUDY_SEASONS]
    draws = sum(r.home_goals == r.away_goals for r in cl_group)
    assert len(cl_group) == 1824
    assert len(synthetic_samples[SampleTag.GROUP_MATCH]) + draws == 1824
    assert len(synthetic_samples[SampleTag.KNOCKOUT]) == 260
    assert len(synthetic_samples[SampleTag.GROUP_RANKING]) == 912
