"""League-phase draw with pots and association constraints.

Clubs are seeded into equally sized pots.  In the default format every club
meets two clubs of every pot (its own included), one at home and one away,
so 36 clubs in four pots of nine play eight matches each.  Clubs of the same
association are kept apart; one such pairing per club may be allowed for
associations with at least four clubs, but only once a search without it has
failed.

The draw is a randomised backtracking search.  Fixtures between two pots
(or inside one pot) form a *block*; blocks are filled in pot order and,
inside a block, the open slot with the fewest candidates is filled first.
Candidate sets are bitmasks over club indices.  The sampler is not uniform
over valid schedules, but every valid schedule has positive probability.
"""

from __future__ import annotations

import csv
import json
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import InfeasibleDrawError, ParseError
from .rng import py_random

HOME, AWAY, EITHER = "H", "A", "*"
_RECIPROCAL = {HOME: AWAY, AWAY: HOME, EITHER: EITHER}
DEFAULT_NODE_BUDGET = 2_000_000


@dataclass(frozen=True)
class DrawFormat:
    """``opponents_per_pot`` is 2 (one home, one away per pot) or 1 (home
    and away balanced over the whole schedule, which needs an even number
    of pots)."""

    opponents_per_pot: int = 2
    exception_min_association_size: int = 4
    max_exceptions_per_club: int = 1

    def __post_init__(self) -> None:
        if self.opponents_per_pot not in (1, 2):
            raise ValueError("opponents_per_pot must be 1 or 2")


@dataclass(frozen=True)
class DrawInput:
    pots: tuple[tuple[str, ...], ...]
    association: Mapping[str, str]
    allow_same_association_exception: bool = True
    format: DrawFormat = field(default_factory=DrawFormat)

    def __post_init__(self) -> None:
        pots = tuple(tuple(p) for p in self.pots)
        object.__setattr__(self, "pots", pots)
        if not pots:
            raise ValueError("no pots")
        sizes = {len(p) for p in pots}
        if len(sizes) != 1:
            raise ValueError(f"pots differ in size: {[len(p) for p in pots]}")
        clubs = [c for p in pots for c in p]
        if len(set(clubs)) != len(clubs):
            dup = [c for c, k in Counter(clubs).items() if k > 1]
            raise ValueError(f"clubs in more than one pot: {dup}")
        missing = [c for c in clubs if c not in self.association]
        if missing:
            raise ValueError(f"no association for {missing}")
        size = len(pots[0])
        if self.format.opponents_per_pot == 2 and size < 3:
            raise ValueError("two opponents from the own pot need pots of at least three clubs")
        if self.format.opponents_per_pot == 1 and (len(pots) % 2 or size % 2):
            raise ValueError("one opponent per pot needs an even number of pots of even size")

    @property
    def clubs(self) -> tuple[str, ...]:
        return tuple(c for p in self.pots for c in p)

    @property
    def pot_of(self) -> dict[str, int]:
        """Zero-based pot index of each club."""
        return {c: i for i, p in enumerate(self.pots) for c in p}

    @property
    def matches_per_club(self) -> int:
        return len(self.pots) * self.format.opponents_per_pot

    def association_sizes(self) -> Counter:
        return Counter(self.association[c] for c in self.clubs)

    def exception_allowed(self, club: str) -> bool:
        if not self.allow_same_association_exception:
            return False
        return self.association_sizes()[self.association[club]] >= self.format.exception_min_association_size


@dataclass(frozen=True)
class Fixture:
    home: str
    away: str
    away_pot: int  # one-based, as printed in draw outputs


@dataclass(frozen=True)
class Schedule:
    fixtures: tuple[Fixture, ...]
    exception_rule_used: bool = False

    def opponents(self, club: str) -> list[tuple[str, bool]]:
        """``(opponent, at_home)`` pairs for ``club``."""
        out = []
        for f in self.fixtures:
            if f.home == club:
                out.append((f.away, True))
            elif f.away == club:
                out.append((f.home, False))
        return out

    def by_club(self) -> dict[str, list[tuple[str, bool]]]:
        view: dict[str, list[tuple[str, bool]]] = defaultdict(list)
        for f in self.fixtures:
            view[f.home].append((f.away, True))
            view[f.away].append((f.home, False))
        return dict(view)

    def key(self) -> frozenset[tuple[str, str]]:
        return frozenset((f.home, f.away) for f in self.fixtures)


@dataclass(frozen=True)
class ValidityReport:
    violations: tuple[tuple[str, tuple[str, ...]], ...] = ()

    @property
    def valid(self) -> bool:
        return not self.violations

    def rules(self) -> set[str]:
        return {rule for rule, _ in self.violations}


def validate(draw_input: DrawInput, schedule: Schedule) -> ValidityReport:
    """Check a schedule against every draw rule; violations are returned, not raised."""
    violations: list[tuple[str, tuple[str, ...]]] = []
    pot_of = draw_input.pot_of
    assoc = draw_input.association
    fmt = draw_input.format
    n_pots = len(draw_input.pots)
    per_side = draw_input.matches_per_club // 2
    sizes = draw_input.association_sizes()
    view: dict[str, list[tuple[str, bool]]] = {c: [] for c in draw_input.clubs}
    pairs: Counter = Counter()
    for f in schedule.fixtures:
        if f.home not in pot_of or f.away not in pot_of:
            violations.append(("unknown club", tuple(c for c in (f.home, f.away) if c not in pot_of)))
            continue
        if f.home == f.away:
            violations.append(("self fixture", (f.home,)))
            continue
        if f.away_pot != pot_of[f.away] + 1:
            violations.append(("pot label", (f.home, f.away)))
        pairs[frozenset((f.home, f.away))] += 1
        view[f.home].append((f.away, True))
        view[f.away].append((f.home, False))
    for pair, k in pairs.items():
        if k > 1:
            violations.append(("repeat opponent", tuple(sorted(pair))))
    for club, games in view.items():
        if len(games) != draw_input.matches_per_club:
            violations.append(("opponent count", (club,)))
        homes = 0
        per_pot = [0] * n_pots
        home_per_pot = [0] * n_pots
        same = []
        for o, at_home in games:
            q = pot_of[o]
            per_pot[q] += 1
            if at_home:
                homes += 1
                home_per_pot[q] += 1
            if assoc[o] == assoc[club]:
                same.append(o)
        if homes != per_side or len(games) - homes != per_side:
            violations.append(("home/away balance", (club,)))
        for q in range(n_pots):
            ok = per_pot[q] == fmt.opponents_per_pot
            if ok and fmt.opponents_per_pot == 2:
                ok = home_per_pot[q] == 1
            if not ok:
                violations.append(("pot balance", (club, f"pot {q + 1}")))
        if not same:
            continue
        permitted = (
            schedule.exception_rule_used
            and draw_input.allow_same_association_exception
            and sizes[assoc[club]] >= fmt.exception_min_association_size
        )
        if not permitted:
            for o in same:
                if club < o:
                    violations.append(("association", (club, o)))
        elif len(same) > fmt.max_exceptions_per_club:
            violations.append(("exception limit", (club, *sorted(same))))
    return ValidityReport(tuple(violations))


# ------------------------------------------------------------------ the search


class _BudgetExceeded(Exception):
    pass


class _Search:
    """Mutable search state; one instance per draw attempt."""

    def __init__(self, draw_input: DrawInput, rng, allow_exceptions: bool, budget: int):
        self.input = draw_input
        self.rng = rng
        self.budget = budget
        self.nodes = 0
        clubs = draw_input.clubs
        self.clubs = clubs
        self.n = len(clubs)
        self.index = {c: i for i, c in enumerate(clubs)}
        self.n_pots = len(draw_input.pots)
        self.pot = [draw_input.pot_of[c] for c in clubs]
        self.pot_mask = [0] * self.n_pots
        for i, q in enumerate(self.pot):
            self.pot_mask[q] |= 1 << i
        by_assoc: dict[str, int] = defaultdict(int)
        for i, c in enumerate(clubs):
            by_assoc[draw_input.association[c]] |= 1 << i
        self.same = [by_assoc[draw_input.association[c]] & ~(1 << i) for i, c in enumerate(clubs)]
        self.eligible = 0
        if allow_exceptions and draw_input.allow_same_association_exception:
            sizes = draw_input.association_sizes()
            bound = draw_input.format.exception_min_association_size
            for i, c in enumerate(clubs):
                if sizes[draw_input.association[c]] >= bound:
                    self.eligible |= 1 << i
        self.exc_count = [0] * self.n
        self.exc_spent = 0  # clubs at their exception limit
        self.max_exc = draw_input.format.max_exceptions_per_club
        self.opp = [0] * self.n
        two = draw_input.format.opponents_per_pot == 2
        self.sides = (HOME, AWAY) if two else (EITHER,)
        everyone = (1 << self.n) - 1
        # open[q][side]: clubs with an unfilled slot of that side towards pot q
        self.open = [{s: everyone for s in self.sides} for _ in range(self.n_pots)]
        cap = draw_input.matches_per_club // 2
        self.cap = cap
        self.home_count = [0] * self.n
        self.away_count = [0] * self.n
        self.home_open = everyone
        self.away_open = everyone
        self.fixtures: list[tuple[int, int]] = []
        self.failures: Counter = Counter()
        self.blocks = []
        for i in range(self.n_pots):
            for j in range(i, self.n_pots):
                members = [k for k in range(self.n) if self.pot[k] == i]
                if two and i == j:
                    variables = [(k, HOME) for k in members]
                else:
                    variables = [(k, s) for k in members for s in self.sides]
                self.blocks.append(((i, j), variables))

    # -- candidates ------------------------------------------------------

    def is_open(self, c: int, side: str, q: int) -> bool:
        return bool(self.open[q][side] >> c & 1)

    def candidates(self, c: int, side: str, q: int) -> int:
        base = self.open[self.pot[c]][_RECIPROCAL[side]] & self.pot_mask[q] & ~(self.opp[c] | 1 << c)
        if side == EITHER:
            orient = 0
            if self.home_open >> c & 1:
                orient |= self.away_open
            if self.away_open >> c & 1:
                orient |= self.home_open
            base &= orient
        same = self.same[c]
        mask = base & ~same
        if self.eligible >> c & 1 and not self.exc_spent >> c & 1:
            mask |= base & same & self.eligible & ~self.exc_spent
        return mask

    def values(self, c: int, side: str, mask: int):
        """Candidate ``(opponent, c_at_home)`` pairs in seeded random order.

        Regular opponents come before same-association ones.  The order is
        drawn lazily: almost every draw keeps its first choice, so only a
        failed choice pays for shuffling the rest.
        """
        same = self.same[c]
        rng = self.rng
        for group in (mask & ~same, mask & same):
            ds = []
            while group:
                low = group & -group
                ds.append(low.bit_length() - 1)
                group ^= low
            while ds:
                k = rng.randrange(len(ds))
                d = ds[k]
                ds[k] = ds[-1]
                ds.pop()
                if side != EITHER:
                    yield d, side == HOME
                    continue
                options = []
                if self.home_open >> c & 1 and self.away_open >> d & 1:
                    options.append(True)
                if self.away_open >> c & 1 and self.home_open >> d & 1:
                    options.append(False)
                if len(options) == 2 and rng.random() < 0.5:
                    options.reverse()
                for c_home in options:
                    yield d, c_home

    # -- assignment ------------------------------------------------------

    def _apply(self, c: int, d: int, c_home: bool, side: str, sign: int) -> None:
        bit_c, bit_d = 1 << c, 1 << d
        pc, pd = self.pot[c], self.pot[d]
        if side == EITHER:
            s_c = s_d = EITHER
        else:
            s_c, s_d = (HOME, AWAY) if c_home else (AWAY, HOME)
        if sign > 0:
            self.open[pd][s_c] &= ~bit_c
            self.open[pc][s_d] &= ~bit_d
            self.opp[c] |= bit_d
            self.opp[d] |= bit_c
        else:
            self.open[pd][s_c] |= bit_c
            self.open[pc][s_d] |= bit_d
            self.opp[c] &= ~bit_d
            self.opp[d] &= ~bit_c
        h, a = (c, d) if c_home else (d, c)
        self.home_count[h] += sign
        self.away_count[a] += sign
        for k in (h, a):
            self.home_open = (self.home_open | 1 << k) if self.home_count[k] < self.cap else (self.home_open & ~(1 << k))
            self.away_open = (self.away_open | 1 << k) if self.away_count[k] < self.cap else (self.away_open & ~(1 << k))
        if self.same[c] >> d & 1:
            for k in (c, d):
                self.exc_count[k] += sign
                if self.exc_count[k] >= self.max_exc:
                    self.exc_spent |= 1 << k
                else:
                    self.exc_spent &= ~(1 << k)

    def fill(self, block_ids: Sequence[int], pos: int = 0) -> bool:
        """Depth-first completion of ``block_ids[pos:]``."""
        while pos < len(block_ids):
            (i, j), variables = self.blocks[block_ids[pos]]
            open_j = self.open[j]
            open_i = self.open[i]
            pot_j = self.pot_mask[j]
            opp, same, elig, spent = self.opp, self.same, self.eligible, self.exc_spent
            best = None
            for c, side in variables:
                if not open_j[side] >> c & 1:
                    continue
                if side == EITHER:
                    mask = self.candidates(c, side, j)
                else:
                    base = open_i[AWAY if side == HOME else HOME] & pot_j & ~(opp[c] | 1 << c)
                    mask = base & ~same[c]
                    if elig >> c & 1 and not spent >> c & 1:
                        mask |= base & same[c] & elig & ~spent
                count = mask.bit_count()
                if count == 0:
                    self.failures[(i, j, c)] += 1
                    return False
                if best is None or count < best[0]:
                    best = (count, c, side, mask)
                    if count == 1:
                        break
            if best is None:
                pos += 1
                continue
            _, c, side, mask = best
            for d, c_home in self.values(c, side, mask):
                self.nodes += 1
                if self.nodes > self.budget:
                    raise _BudgetExceeded
                self._apply(c, d, c_home, side, +1)
                self.fixtures.append((c, d) if c_home else (d, c))
                if self.fill(block_ids, pos):
                    return True
                self.fixtures.pop()
                self._apply(c, d, c_home, side, -1)
            return False
        return True

    def fill_simple(self, block_id: int) -> bool:
        """Fast path for one block of the two-sided format, exceptions off.

        Each assignment closes exactly one variable of the block, so the
        open variables are kept in a list instead of being rescanned.
        """
        (i, j), variables = self.blocks[block_id]
        open_i, open_j = self.open[i], self.open[j]
        pot_j = self.pot_mask[j]
        opp, same, rng = self.opp, self.same, self.rng
        fixtures = self.fixtures
        pending = list(variables)

        def step() -> bool:
            if not pending:
                return True
            best_k, best_count, best_mask = -1, 1 << 30, 0
            for k, (c, side) in enumerate(pending):
                mask = open_i[AWAY if side == HOME else HOME] & pot_j & ~(opp[c] | same[c] | 1 << c)
                count = mask.bit_count()
                if count < best_count:
                    if count == 0:
                        self.failures[(i, j, c)] += 1
                        return False
                    best_k, best_count, best_mask = k, count, mask
                    if count == 1:
                        break
            c, side = pending[best_k]
            pending[best_k] = pending[-1]
            pending.pop()
            ds = []
            mask = best_mask
            while mask:
                low = mask & -mask
                ds.append(low.bit_length() - 1)
                mask ^= low
            other = AWAY if side == HOME else HOME
            bit_c = 1 << c
            while ds:
                k = rng.randrange(len(ds)) if len(ds) > 1 else 0
                d = ds[k]
                ds[k] = ds[-1]
                ds.pop()
                self.nodes += 1
                if self.nodes > self.budget:
                    raise _BudgetExceeded
                bit_d = 1 << d
                open_j[side] &= ~bit_c
                open_i[other] &= ~bit_d
                opp[c] |= bit_d
                opp[d] |= bit_c
                fixtures.append((c, d) if side == HOME else (d, c))
                if step():
                    return True
                fixtures.pop()
                open_j[side] |= bit_c
                open_i[other] |= bit_d
                opp[c] &= ~bit_d
                opp[d] &= ~bit_c
            pending.append((c, side))
            return False

        return step()

    def shuffle_variables(self) -> None:
        for _, variables in self.blocks:
            self.rng.shuffle(variables)

    def schedule(self, exception_rule_used: bool) -> Schedule:
        order = sorted(self.fixtures, key=lambda hd: (self.pot[hd[0]], hd[0], self.pot[hd[1]], hd[1]))
        return Schedule(
            tuple(Fixture(self.clubs[h], self.clubs[a], self.pot[a] + 1) for h, a in order),
            exception_rule_used,
        )


def _hall_violation(draw_input: DrawInput, pots: tuple[int, int]) -> dict:
    """Smallest witness that a block cannot be filled without exceptions.

    Builds the bipartite graph "club of pot i may host club of pot j" and
    looks for a set of pot-i clubs whose admissible opponents are fewer than
    the set itself (Hall's condition).
    """
    i, j = pots
    left, right = draw_input.pots[i], draw_input.pots[j]
    assoc = draw_input.association
    adj = {a: [b for b in right if b != a and assoc[a] != assoc[b]] for a in left}
    match_r: dict[str, str] = {}

    def augment(a: str, seen: set) -> bool:
        for b in adj[a]:
            if b in seen:
                continue
            seen.add(b)
            if b not in match_r or augment(match_r[b], seen):
                match_r[b] = a
                return True
        return False

    unmatched = [a for a in left if not augment(a, set())]
    info = {"block": [i + 1, j + 1]}
    if not unmatched:
        info["clubs"] = sorted(set(left) | set(right))
        info["reason"] = "no completion avoids repeat opponents and association clashes"
        return info
    # alternating-path closure from an unmatched club gives the violator
    S, N, frontier = {unmatched[0]}, set(), [unmatched[0]]
    while frontier:
        a = frontier.pop()
        for b in adj[a]:
            if b not in N:
                N.add(b)
                partner = match_r.get(b)
                if partner is not None and partner not in S:
                    S.add(partner)
                    frontier.append(partner)
    info["clubs"] = sorted(S)
    info["admissible_opponents"] = sorted(N)
    info["reason"] = f"{len(S)} clubs of pot {i + 1} share {len(N)} admissible opponents in pot {j + 1}"
    return info


def draw(draw_input: DrawInput, seed: int, node_budget: int = DEFAULT_NODE_BUDGET) -> Schedule:
    """Draw a schedule; the same input and seed give the same schedule."""
    independent = draw_input.format.opponents_per_pot == 2
    search = _Search(draw_input, py_random(seed, "swiss-draw"), allow_exceptions=False, budget=node_budget)
    search.shuffle_variables()
    failed_block = None
    exhausted = False
    try:
        if independent:
            # blocks share no constraint when exceptions are off
            for b in range(len(search.blocks)):
                if not search.fill_simple(b):
                    failed_block = search.blocks[b][0]
                    break
            else:
                return search.schedule(False)
        elif search.fill(list(range(len(search.blocks)))):
            return search.schedule(False)
    except _BudgetExceeded:
        exhausted = True
    if not exhausted and failed_block is None:
        failed_block = _tightest_block(search)

    if draw_input.allow_same_association_exception and any(
        draw_input.exception_allowed(c) for c in draw_input.clubs
    ):
        retry = _Search(draw_input, py_random(seed, "swiss-draw", "exceptions"), allow_exceptions=True, budget=node_budget)
        retry.shuffle_variables()
        try:
            if retry.fill(list(range(len(retry.blocks)))):
                return retry.schedule(True)
        except _BudgetExceeded:
            raise InfeasibleDrawError(
                f"search budget of {node_budget} nodes exhausted with the exception rule enabled",
                _describe_failure(draw_input, retry, failed_block),
            ) from None
        raise InfeasibleDrawError(
            "no valid schedule exists even with the association exception",
            _describe_failure(draw_input, retry, failed_block),
        )
    if exhausted:
        raise InfeasibleDrawError(f"search budget of {node_budget} nodes exhausted", _describe_failure(draw_input, search, None))
    raise InfeasibleDrawError("no valid schedule exists", _describe_failure(draw_input, search, failed_block))


def _tightest_block(search: _Search) -> tuple[int, int] | None:
    if not search.failures:
        return None
    (i, j, _), _ = search.failures.most_common(1)[0]
    return (i, j)


def _describe_failure(draw_input: DrawInput, search: _Search, block: tuple[int, int] | None) -> dict:
    if block is not None:
        return _hall_violation(draw_input, block)
    if search.failures:
        (i, j, c), count = search.failures.most_common(1)[0]
        return {"block": [i + 1, j + 1], "clubs": [search.clubs[c]], "dead_ends": count}
    return {}


# ------------------------------------------------------------------ balance


@dataclass(frozen=True)
class BalanceReport:
    per_club: dict[str, dict[str, float]]
    spread: float


def balance_metrics(schedule: Schedule, strengths: Mapping[str, float]) -> BalanceReport:
    """Opponent-strength mean and sum per club; rank 1 is the hardest schedule."""
    view = schedule.by_club()
    missing = sorted(c for c in view if c not in strengths)
    if missing:
        raise KeyError(f"no strength for {', '.join(missing)}")
    sums = {c: float(sum(strengths[o] for o, _ in games)) for c, games in view.items()}
    ordered = sorted(sums.values(), reverse=True)
    per_club = {
        c: {
            "mean": sums[c] / len(view[c]),
            "sum": sums[c],
            "rank": float(ordered.index(sums[c]) + 1),
        }
        for c in sorted(view)
    }
    spread = max(sums.values()) - min(sums.values()) if sums else 0.0
    return BalanceReport(per_club, spread)


# ------------------------------------------------------------------ io


def read_pots(path: str | Path, allow_exception: bool = True, fmt: DrawFormat | None = None) -> DrawInput:
    """``pots.csv`` with header ``club,pot,association``; pots are 1-based."""
    pots: dict[int, list[str]] = defaultdict(list)
    association = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["club", "pot", "association"]:
            raise ParseError("header must be club,pot,association", 1)
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise ParseError(f"expected 3 fields, got {len(row)}", line)
            club, pot, assoc = (x.strip() for x in row)
            try:
                q = int(pot)
            except ValueError:
                raise ParseError(f"bad pot {pot!r}", line, "pot") from None
            if q < 1:
                raise ParseError(f"pot must be >= 1, got {q}", line, "pot")
            if club in association:
                raise ParseError(f"club {club!r} listed twice", line, "club")
            pots[q].append(club)
            association[club] = assoc
    if sorted(pots) != list(range(1, len(pots) + 1)):
        raise ParseError(f"pots must be numbered 1..{len(pots)}")
    try:
        return DrawInput(tuple(tuple(pots[q]) for q in sorted(pots)), association, allow_exception, fmt or DrawFormat())
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def default_instance() -> DrawInput:
    """The 36 clubs of the 2024/25 Champions League league phase."""
    with resources.as_file(resources.files("uclrating").joinpath("data/pots_2024_25.csv")) as path:
        return read_pots(path)


def write_schedule_csv(schedule: Schedule, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["home", "away", "away_pot"])
        for f in schedule.fixtures:
            writer.writerow([f.home, f.away, f.away_pot])


def schedule_to_dict(schedule: Schedule) -> dict:
    return {
        "exception_rule_used": schedule.exception_rule_used,
        "fixtures": [{"home": f.home, "away": f.away, "away_pot": f.away_pot} for f in schedule.fixtures],
    }


def write_schedule_json(schedule: Schedule, path: str | Path) -> None:
    Path(path).write_text(json.dumps(schedule_to_dict(schedule), indent=2) + "\n", encoding="utf-8")


def read_schedule_csv(path: str | Path) -> Schedule:
    fixtures = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["home", "away", "away_pot"]:
            raise ParseError("header must be home,away,away_pot", 1)
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise ParseError(f"expected 3 fields, got {len(row)}", line)
            try:
                fixtures.append(Fixture(row[0].strip(), row[1].strip(), int(row[2])))
            except ValueError:
                raise ParseError(f"bad pot {row[2]!r}", line, "away_pot") from None
    return Schedule(tuple(fixtures))


def pots_by_rating(clubs: Iterable[str], rating: Mapping[str, float], n_pots: int, titleholder: str | None = None) -> tuple[tuple[str, ...], ...]:
    """Seed clubs into pots by descending rating; a titleholder heads pot 1."""
    ordered = sorted(clubs, key=lambda c: (-rating[c], c))
    if titleholder is not None:
        ordered.remove(titleholder)
        ordered.insert(0, titleholder)
    size, rem = divmod(len(ordered), n_pots)
    if rem:
        raise ValueError(f"{len(ordered)} clubs do not split into {n_pots} pots")
    return tuple(tuple(ordered[k * size:(k + 1) * size]) for k in range(n_pots))
