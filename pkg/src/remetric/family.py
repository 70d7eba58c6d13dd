"""Function families on finite carriers and their composition closures.

Maps are index tables.  The closure groups every distinct composition
table by the least word length producing it (breadth-first over
generator composition with dedup by exact table equality), which is what
the sup-metric construction and the word-length metric both need.

In inverse-closed mode the effective generating set is the symmetric one:
identity, the generators, and their inverses.  The minimal level of a
table is then the length metric of the induced transformation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import TableBudgetExceeded
from .metricspace import FiniteMetricSpace

DEFAULT_TABLE_BUDGET = 1_000_000


def _canon(table) -> np.ndarray:
    t = np.ascontiguousarray(np.asarray(table, dtype=np.int64))
    if t.ndim != 1:
        raise ValueError("map table must be one-dimensional")
    return t


def _key(table: np.ndarray) -> bytes:
    return table.tobytes()


@dataclass(frozen=True)
class FunctionFamily:
    """Named generator tables on a carrier of a fixed size."""

    carrier_size: int
    generators: dict[str, np.ndarray]
    closed_under_inverse: bool = False

    def __post_init__(self):
        gens = {}
        for name, table in self.generators.items():
            t = _canon(table)
            if t.size != self.carrier_size:
                raise ValueError(f"generator {name!r} has length {t.size}, "
                                 f"expected {self.carrier_size}")
            if t.size and (t.min() < 0 or t.max() >= self.carrier_size):
                raise ValueError(f"generator {name!r} maps outside the carrier")
            if self.closed_under_inverse:
                if not np.array_equal(np.sort(t), np.arange(self.carrier_size)):
                    raise ValueError(f"generator {name!r} is not a bijection; "
                                     "inverse-closed mode needs invertible maps")
            t.setflags(write=False)
            gens[str(name)] = t
        object.__setattr__(self, "generators", gens)

    def identity_table(self) -> np.ndarray:
        return np.arange(self.carrier_size, dtype=np.int64)

    def effective_generators(self) -> list[tuple[str, np.ndarray]]:
        """The generating set actually composed: includes id and inverses
        in inverse-closed mode, deduplicated by table."""
        out = []
        seen = set()

        def add(name, table):
            k = _key(table)
            if k not in seen:
                seen.add(k)
                out.append((name, table))

        if self.closed_under_inverse:
            add("id", self.identity_table())
        for name, t in self.generators.items():
            add(name, t)
            if self.closed_under_inverse:
                inv = np.empty_like(t)
                inv[t] = np.arange(self.carrier_size, dtype=np.int64)
                add(f"{name}^-1", inv)
        return out


@dataclass
class ClosureLevels:
    """Distinct composition tables grouped by minimal word length.

    ``levels[n]`` holds the tables first reachable with n generator
    applications; level 0 is the identity alone.  ``stabilized_at`` is the
    last level that produced anything new, when the following expansion
    round confirmed the closure is complete; None if unknown within the
    explored range.
    """

    family: FunctionFamily
    levels: list[list[np.ndarray]]
    min_level: dict[bytes, int]
    first_word: dict[bytes, tuple[str, ...]]
    stabilized_at: Optional[int]
    tables_examined: int

    @property
    def max_level(self) -> int:
        return len(self.levels) - 1

    def tables_at(self, n: int) -> list[np.ndarray]:
        return self.levels[n] if n <= self.max_level else []

    def all_tables(self):
        for n, tier in enumerate(self.levels):
            for t in tier:
                yield n, t

    def distinct_count(self) -> int:
        return len(self.min_level)

    def word_for(self, table) -> tuple[str, ...]:
        return self.first_word[_key(_canon(table))]

    def exact_level_tables(self, n: int, budget: int = DEFAULT_TABLE_BUDGET
                           ) -> list[np.ndarray]:
        """Distinct tables of compositions of exactly n generators.

        With the identity among the effective generators this is just the
        union of levels up to n; otherwise it is computed by an exact-length
        recurrence (tables may reappear at several exact lengths).
        """
        eff = self.family.effective_generators()
        has_id = any(np.array_equal(t, self.family.identity_table()) for _, t in eff)
        if has_id:
            if self.stabilized_at is not None:
                top = min(n, self.stabilized_at)
            elif n <= self.max_level:
                top = n
            else:
                raise ValueError(f"levels explored only to {self.max_level}, "
                                 f"need {n}")
            return [t for k in range(top + 1) for t in self.levels[k]]

        current = {_key(self.family.identity_table()): self.family.identity_table()}
        examined = 0
        for _ in range(n):
            nxt = {}
            for _, g in eff:
                for t in current.values():
                    comp = g[t]
                    examined += 1
                    if examined > budget:
                        raise TableBudgetExceeded(
                            f"exact-level expansion exceeded {budget} tables", budget)
                    nxt.setdefault(_key(comp), comp)
            current = nxt
        return list(current.values())


def close_levels(family: FunctionFamily, max_n: int,
                 table_budget: int = DEFAULT_TABLE_BUDGET) -> ClosureLevels:
    """Breadth-first closure of the family under composition, up to max_n.

    New tables at level n+1 are generator-after-frontier compositions; a
    table seen earlier keeps its first (minimal) level.  When an expansion
    round adds nothing the closure is complete and the previous level is
    recorded as the stabilization point; one extra probe round past max_n
    detects stabilization that lands exactly on the boundary.
    """
    if max_n < 0:
        raise ValueError("max_n must be >= 0")
    eff = family.effective_generators()
    ident = family.identity_table()
    levels = [[ident]]
    min_level = {_key(ident): 0}
    first_word = {_key(ident): ()}
    examined = 0
    stabilized = None

    frontier = [ident]
    level = 0
    while frontier and level < max_n:
        level += 1
        fresh = []
        for gname, g in eff:
            for t in frontier:
                comp = g[t]
                examined += 1
                if examined > table_budget:
                    raise TableBudgetExceeded(
                        f"closure exceeded the table budget of {table_budget}",
                        table_budget)
                k = _key(comp)
                if k not in min_level:
                    min_level[k] = level
                    first_word[k] = (gname,) + first_word[_key(t)]
                    fresh.append(comp)
        if not fresh:
            stabilized = level - 1
            frontier = []
            break
        levels.append(fresh)
        frontier = fresh

    if frontier:
        # probe one round past max_n, recording nothing, to detect
        # stabilization that lands exactly on the boundary
        any_new = False
        for _, g in eff:
            for t in frontier:
                examined += 1
                if examined > table_budget:
                    raise TableBudgetExceeded(
                        f"closure exceeded the table budget of {table_budget}",
                        table_budget)
                if _key(g[t]) not in min_level:
                    any_new = True
                    break
            if any_new:
                break
        if not any_new:
            stabilized = max_n

    for tier in levels:
        for t in tier:
            t.setflags(write=False)
    return ClosureLevels(family, levels, min_level, first_word, stabilized, examined)


def word_length(levels: ClosureLevels, table) -> Optional[int]:
    """Minimal word length of a table, or None when unreached in the closure."""
    t = _canon(table)
    if t.size != levels.family.carrier_size:
        raise ValueError(f"table has length {t.size}, expected "
                         f"{levels.family.carrier_size}")
    return levels.min_level.get(_key(t))


def _worst_image_distance(space: FiniteMetricSpace, tables) -> np.ndarray:
    """Entrywise max over tables of d(f(x), f(y))."""
    worst = np.zeros_like(space.dist)
    for t in tables:
        np.maximum(worst, space.dist[np.ix_(t, t)], out=worst)
    return worst


def _profile_delta(space: FiniteMetricSpace, worst: np.ndarray, eps: float,
                   strict_image: bool = True) -> float:
    """Largest delta with d(x,y) < delta implying worst image <= eps
    (or < eps when strict_image is False, used for chaining)."""
    bad = worst > eps if strict_image else worst >= eps
    np.fill_diagonal(bad, False)
    if not bad.any():
        return math.inf
    return float(space.dist[bad].min())


@dataclass(frozen=True)
class ProfileRow:
    eps: float
    delta: float
    worst_pair: tuple[int, int]


@dataclass(frozen=True)
class EquicontinuityProfile:
    level: int
    table_count: int
    rows: tuple[ProfileRow, ...]


def equicontinuity_profile(levels: ClosureLevels, space: FiniteMetricSpace,
                           n: int, eps_grid) -> EquicontinuityProfile:
    """delta(eps) table for the compositions of exactly n family members.

    On a finite carrier the pointwise and uniform notions coincide, so one
    delta per eps tells the whole story: it is the smallest distance of a
    pair whose image under some length-n composition stretches past eps
    (infinity when no pair does).
    """
    tables = levels.exact_level_tables(n)
    worst = _worst_image_distance(space, tables)
    rows = []
    for eps in eps_grid:
        eps = float(eps)
        delta = _profile_delta(space, worst, eps)
        masked = np.where(np.eye(space.size, dtype=bool), -math.inf, worst)
        i, j = np.unravel_index(int(np.argmax(masked)), masked.shape)
        rows.append(ProfileRow(eps, delta, (int(i), int(j))))
    return EquicontinuityProfile(n, len(tables), tuple(rows))


@dataclass(frozen=True)
class ChainRow:
    level: int
    delta: float
    confirmed: bool


@dataclass(frozen=True)
class ChainedDeltaReport:
    eps: float
    rows: tuple[ChainRow, ...]
    ok: bool


def chained_delta_probe(levels: ClosureLevels, space: FiniteMetricSpace,
                        eps: float, n_max: int) -> ChainedDeltaReport:
    """Materialize the induction from one-step to n-step equicontinuity.

    delta for level 1 comes from the family profile at eps; each next level
    reuses the family profile at the previous delta (a length-(n+1) word is
    a length-n word after one generator).  Every chained delta is then
    confirmed directly against the exact-length tables of its level.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    level1 = levels.exact_level_tables(1)
    worst1 = _worst_image_distance(space, level1)

    rows = []
    delta = _profile_delta(space, worst1, eps)
    for n in range(1, n_max + 1):
        if n > 1:
            step = _profile_delta(space, worst1, delta, strict_image=False)
            delta = min(step, delta)
        worst_n = _worst_image_distance(space, levels.exact_level_tables(n))
        if math.isinf(delta):
            confirmed = bool((worst_n <= eps + 1e-12).all())
        else:
            covered = space.dist < delta
            np.fill_diagonal(covered, False)
            confirmed = bool((worst_n[covered] <= eps + 1e-12).all())
        rows.append(ChainRow(n, delta, confirmed))
    return ChainedDeltaReport(eps, tuple(rows), all(r.confirmed for r in rows))
