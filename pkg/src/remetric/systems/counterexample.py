"""A family on countably many real lines whose k-fold compositions stay
equicontinuous while the (k+1)-fold ones cannot.

The space is pairs (line, coord) with line in {1, 2, ...}.  For a family
parameter k >= 2 the generators are

* dilations ``dil(n)``: scale coordinates on line n by n, fix the rest;
* contractions ``con(n, m)`` for n < m: swap lines n and m and scale the
  moved coordinates by m^(-(k-2)/2).

The distance between (a, b) and (c, e) is min(1/a, |b - e|) on a common
line and |a - c| + min(1/a, |b|) + min(1/c, |e|) across lines, so high
lines are uniformly short and everything is anchored through the origin
of each line.

Everything here is symbolic: points and vertical intervals in closed
form, scale factors as exact half-integer exponent products.  The family
is unbounded and the interesting behavior lives at large line indices, so
no finite tabulation would do.

The k = 1 and k = 0 variants are realized as fixed powers of the k = 2
family (two-fold and three-fold words respectively); the certificate and
schedule handle that translation internally.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

DIAM_TOL = 1e-12


@dataclass(frozen=True)
class Point:
    line: int
    coord: float

    def __post_init__(self):
        if self.line < 1:
            raise ValueError("line index must be >= 1")


def dil(n: int) -> tuple:
    if n < 1:
        raise ValueError("dilation position must be >= 1")
    return ("dil", n)


def con(n: int, m: int) -> tuple:
    if not 1 <= n < m:
        raise ValueError(f"contraction needs 1 <= n < m, got ({n}, {m})")
    return ("con", n, m)


def _contraction_scale(k: int, m: int) -> float:
    return float(m) ** (-(k - 2) / 2.0)


def apply_generator(k: int, gen: tuple, p: Point) -> Point:
    """Apply one generator of the parameter-k family to a point."""
    if k < 2:
        raise ValueError("generators are defined for k >= 2; smaller k is "
                         "realized through fixed powers of the k = 2 family")
    if gen[0] == "dil":
        _, n = gen
        if n < 1:
            raise ValueError("dilation position must be >= 1")
        if p.line == n:
            return Point(p.line, n * p.coord)
        return p
    if gen[0] == "con":
        _, n, m = gen
        if not 1 <= n < m:
            raise ValueError(f"contraction needs 1 <= n < m, got ({n}, {m})")
        s = _contraction_scale(k, m)
        if p.line == n:
            return Point(m, p.coord * s)
        if p.line == m:
            return Point(n, p.coord * s)
        return p
    raise ValueError(f"unknown generator {gen!r}")


def distance(p: Point, q: Point) -> float:
    """The bespoke metric: short high lines, anchored across lines."""
    if p.line == q.line:
        return min(1.0 / p.line, abs(p.coord - q.coord))
    return (abs(p.line - q.line)
            + min(1.0 / p.line, abs(p.coord))
            + min(1.0 / q.line, abs(q.coord)))


@dataclass(frozen=True)
class ScaleFactor:
    """Product of integer bases raised to half-integer exponents, kept exact."""

    half_exponents: tuple[tuple[int, int], ...] = ()

    def times(self, base: int, half_exp: int) -> "ScaleFactor":
        if base < 1:
            raise ValueError("scale bases must be positive integers")
        if base == 1 or half_exp == 0:
            return self
        acc = dict(self.half_exponents)
        acc[base] = acc.get(base, 0) + half_exp
        return ScaleFactor(tuple(sorted((b, e) for b, e in acc.items() if e != 0)))

    @property
    def is_exact(self) -> bool:
        return all(e % 2 == 0 for _, e in self.half_exponents)

    def exact_value(self) -> Fraction:
        if not self.is_exact:
            raise ValueError("scale has an odd half-exponent; not rational")
        out = Fraction(1)
        for b, e in self.half_exponents:
            out *= Fraction(b) ** (e // 2)
        return out

    def value(self) -> float:
        rational = Fraction(1)
        root = 1.0
        for b, e in self.half_exponents:
            q, r = divmod(e, 2)
            rational *= Fraction(b) ** q
            if r:
                root *= math.sqrt(b)
        return float(rational) * root


@dataclass(frozen=True)
class LineInterval:
    """An open coordinate interval sitting on a single line."""

    line: int
    lo: float
    hi: float

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def diameter(self) -> float:
        return min(1.0 / self.line, self.length)


def net_dilation_image(k: int, m: int, delta: float) -> LineInterval:
    """Image of {1} x (-delta, delta) under contract-in, dilate k-1 times,
    contract back (a (k+1)-fold word).

    Composed symbolically: the contraction exponents cancel against the
    dilations except for a single net factor of m, so the image is exactly
    {1} x (-m*delta, m*delta).
    """
    if k < 2:
        raise ValueError("net dilation is composed from k >= 2 generators")
    if m <= 1:
        raise ValueError("need m > 1")
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    line = 1
    scale = ScaleFactor()
    # in: line 1 -> m
    line, scale = m, scale.times(m, -(k - 2))
    # dilate at m, k-1 times
    for _ in range(k - 1):
        if line != m:
            raise AssertionError("dilation lost its line")
        scale = scale.times(m, 2)
    # out: line m -> 1
    line, scale = 1, scale.times(m, -(k - 2))
    if not scale.is_exact:
        raise AssertionError("net scale should have even exponents")
    factor = scale.exact_value()
    width = (float(factor) if factor.denominator > 1 else int(factor)) * delta
    return LineInterval(line, -width, width)


def default_alphabet(k: int, bound: int = 6) -> list[tuple]:
    """All dilations and contractions with indices up to the bound."""
    gens = [dil(n) for n in range(1, bound + 1)]
    gens += [con(n, m) for n in range(1, bound + 1)
             for m in range(n + 1, bound + 1)]
    return gens


def _realized(k: int) -> tuple[int, int]:
    """(base parameter, word length) realizing the k-fold compositions."""
    if k >= 2:
        return k, k
    if k == 1:
        return 2, 2
    if k == 0:
        return 2, 0
    raise ValueError("k must be >= 0")


@dataclass(frozen=True)
class CertificateRow:
    word: tuple
    final_line: int
    diameter: float
    case: int
    passes: bool


@dataclass(frozen=True)
class EquicontinuityCertificate:
    k: int
    point: Point
    eps: float
    cutoff_line: int
    delta: float
    rows: tuple[CertificateRow, ...]
    case_counts: tuple[int, int, int]
    ok: bool
    note: str


def equicontinuity_certificate(k: int, point: Point, eps: float,
                               words: Optional[Sequence[Sequence[tuple]]] = None,
                               alphabet_bound: int = 6) -> EquicontinuityCertificate:
    """Certify the k-fold compositions on a vertical neighborhood of a point.

    With N = max(line, ceil(1/eps)) and delta = eps / (2 N^k), the image of
    U = {line} x (coord - delta, coord + delta) under every sampled k-fold
    word is a vertical interval whose diameter stays at or below eps.  Each
    word is classified by where its image lands: on a line at or past the
    cutoff N (case 1, short by the metric), below it after a contraction
    pair with index above N (case 2, the scales cancel), or below it with
    all affecting indices at most N (case 3, covered by the delta choice).

    Words apply left to right; each entry must have length exactly k (for
    k < 2, the realized word length over the k = 2 generators).
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    base_k, word_len = _realized(k)
    cutoff = max(point.line, math.ceil(1.0 / eps))
    delta = eps / (2.0 * cutoff ** word_len) if word_len else eps / 2.0
    if words is None:
        words = [tuple(w) for w in
                 itertools.product(default_alphabet(base_k, alphabet_bound),
                                   repeat=word_len)]

    rows = []
    counts = [0, 0, 0]
    all_ok = True
    for word in words:
        if len(word) != word_len:
            raise ValueError(f"word {word!r} has length {len(word)}, "
                             f"expected {word_len}")
        line = point.line
        scale = ScaleFactor()
        affecting_max = 0
        for gen in word:
            if gen[0] == "dil":
                _, n = gen
                if line == n and n >= 2:
                    scale = scale.times(n, 2)
                    affecting_max = max(affecting_max, n)
            elif gen[0] == "con":
                _, n, m = gen
                if not 1 <= n < m:
                    raise ValueError(f"contraction needs n < m, got ({n}, {m})")
                if line in (n, m):
                    line = m if line == n else n
                    scale = scale.times(m, -(base_k - 2))
                    affecting_max = max(affecting_max, m)
            else:
                raise ValueError(f"unknown generator {gen!r}")
        width = 2.0 * delta * scale.value()
        diam = min(1.0 / line, width)
        if line >= cutoff:
            case = 1
        elif affecting_max > cutoff:
            case = 2
        else:
            case = 3
        passes = diam <= eps + DIAM_TOL
        counts[case - 1] += 1
        all_ok = all_ok and passes
        rows.append(CertificateRow(tuple(word), line, diam, case, passes))

    note = ""
    if k < 2:
        note = (f"parameter {k} realized as length-{word_len} words over the "
                f"k = 2 generators")
    return EquicontinuityCertificate(k, point, eps, cutoff, delta, tuple(rows),
                                     tuple(counts), all_ok, note)


@dataclass(frozen=True)
class ScheduleRow:
    delta: float
    m: int
    stretched: float


@dataclass(frozen=True)
class NonequicontinuitySchedule:
    k: int
    eps: float
    rows: tuple[ScheduleRow, ...]
    ok: bool
    note: str = ("witnessed for the explicit metric of this family; the claim "
                 "over all compatible metrics is not finitely checkable")


def nonequicontinuity_schedule(k: int, eps: float,
                               deltas: Sequence[float] = tuple(10.0 ** -j for j in range(1, 7))
                               ) -> NonequicontinuitySchedule:
    """For every delta, a pump index m whose (k+1)-fold word stretches the
    delta-neighborhood of (1, 0) past eps.

    The net dilation sends {1} x (-delta, delta) to {1} x (-m delta, m delta),
    of diameter min(1, 2 m delta); any m above eps / (2 delta) clears eps, so
    no single delta can serve the whole (k+1)-fold family.  Requires
    eps < 1 since diameters on line 1 cap there.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError("need 0 < eps < 1 (line-1 diameters cap at 1)")
    if k < 0:
        raise ValueError("k must be >= 0")
    rows = []
    for delta in deltas:
        delta = float(delta)
        if delta <= 0:
            raise ValueError("deltas must be positive")
        m = max(2, math.floor(eps / (2.0 * delta)) + 1)
        while 2.0 * m * delta <= eps:
            m += 1
        stretched = min(1.0, 2.0 * m * delta)
        rows.append(ScheduleRow(delta, m, stretched))
    ok = all(r.stretched > eps for r in rows)
    return NonequicontinuitySchedule(k, eps, tuple(rows), ok)
