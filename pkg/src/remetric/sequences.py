"""Submultiplicative envelopes under a growth sequence.

Given a sequence a_n > 1, build b_n <= a_n that is nondecreasing and
submultiplicative (b_{n+m} <= b_n * b_m) by blocks of powers of
c = inf a_n: block boundaries i_v are chosen so that a_n >= c^v from i_v
on and each boundary at least doubles the previous one.  Inside block v
the value is c^max(v, 1); the max with 1 keeps b_n > 1 on the very first
block, where the raw power would be c^0 = 1.  b_0 is defined as 1.

When a_n diverges the envelope does too.  Bounded inputs (constant values,
finite lists) cannot cross ever-higher thresholds; the block recursion
then stops and the envelope stays flat, which keeps every pointwise
invariant (1 < b_n <= a_n, monotone, submultiplicative) while b_n -> inf
is necessarily lost.  Such envelopes are flagged ``saturated``.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .errors import HorizonExhausted

SUBMULT_TOL = 1e-12

# tail-crossing outcomes beside a concrete index
BEYOND = "beyond"   # a crossing exists but past the requested cap
NEVER = "never"     # provably no crossing (bounded sequence)


@dataclass(frozen=True)
class GrowthSequence:
    """A sequence a_n > 1 given in closed form or as an explicit list.

    Kinds: ``log`` (a_n = ln(n+2)), ``linear`` (a_n = n+1),
    ``const`` (a_n = value), ``list`` (finite values, treated as the whole
    sequence).  The closed forms are nondecreasing, which makes tail
    conditions decidable by first crossing.
    """

    kind: str
    const_value: float = 0.0
    values: tuple[float, ...] = ()

    @staticmethod
    def log() -> "GrowthSequence":
        return GrowthSequence("log")

    @staticmethod
    def linear() -> "GrowthSequence":
        return GrowthSequence("linear")

    @staticmethod
    def const(v: float) -> "GrowthSequence":
        return GrowthSequence("const", const_value=float(v))

    @staticmethod
    def from_list(vals) -> "GrowthSequence":
        vals = tuple(float(v) for v in vals)
        if not vals:
            raise ValueError("empty sequence")
        return GrowthSequence("list", values=vals)

    @property
    def length(self) -> Optional[int]:
        return len(self.values) if self.kind == "list" else None

    @property
    def diverges(self) -> bool:
        return self.kind in ("log", "linear")

    def value(self, n: int) -> float:
        if n < 1:
            raise ValueError("sequence indices start at 1")
        if self.kind == "log":
            return math.log(n + 2)
        if self.kind == "linear":
            return float(n + 1)
        if self.kind == "const":
            return self.const_value
        if n > len(self.values):
            raise IndexError(f"index {n} beyond list of length {len(self.values)}")
        return self.values[n - 1]

    def infimum(self, horizon: int) -> float:
        """inf over the whole sequence; for lists, the minimum of the list."""
        if self.kind in ("log", "linear"):
            return self.value(1)
        if self.kind == "const":
            return self.const_value
        return min(self.values)

    def first_tail_index(self, threshold: float, cap: int) -> Union[int, str]:
        """Least n with inf_{m >= n} a_m >= threshold.

        Returns an index <= cap, BEYOND if the crossing exists past cap,
        or NEVER when the sequence provably never clears the threshold.
        """
        if self.kind in ("log", "linear"):
            # nondecreasing, so the tail inf at n is a_n itself
            if self.value(cap) < threshold:
                return BEYOND
            lo, hi = 1, cap
            while lo < hi:
                mid = (lo + hi) // 2
                if self.value(mid) >= threshold:
                    hi = mid
                else:
                    lo = mid + 1
            return lo
        if self.kind == "const":
            return 1 if self.const_value >= threshold else NEVER
        suffix = np.minimum.accumulate(np.asarray(self.values)[::-1])[::-1]
        hits = np.nonzero(suffix >= threshold)[0]
        if hits.size == 0:
            return NEVER
        idx = int(hits[0]) + 1
        return idx if idx <= cap else BEYOND


@dataclass(frozen=True)
class Envelope:
    """Blockwise power envelope b_n = c^max(v, 1) for blocks[v] <= n < blocks[v+1].

    ``blocks`` starts at 1; the last block extends through the horizon.
    ``saturated`` marks envelopes of bounded inputs whose block recursion
    stopped because no index clears the next power threshold.
    """

    c: float
    blocks: tuple[int, ...]
    horizon: int
    saturated: bool = False
    source: Optional[GrowthSequence] = None

    def value(self, n: int) -> float:
        if n == 0:
            return 1.0
        if n < 0:
            raise ValueError("negative index")
        if n > self.horizon and not self.saturated:
            raise HorizonExhausted(
                f"envelope horizon {self.horizon} exhausted at index {n}", needed=n)
        v = bisect_right(self.blocks, n) - 1
        return self.c ** max(v, 1)

    def values(self, upto: int) -> np.ndarray:
        """b_0 .. b_upto as an array."""
        return np.array([self.value(n) for n in range(upto + 1)])

    def block_of(self, n: int) -> int:
        if n < 1:
            raise ValueError("blocks start at index 1")
        return bisect_right(self.blocks, n) - 1


def build_envelope(a: GrowthSequence, horizon: int) -> Envelope:
    """Run the block recursion for the envelope of a growth sequence.

    Each boundary is max(twice the previous one, the first index from which
    the sequence stays at or above the next power of c).  For divergent
    closed forms a crossing always exists (possibly past the horizon, which
    simply ends the block list); for bounded inputs a provably missing
    crossing ends the list and marks the envelope saturated.
    """
    if a.kind == "list":
        if horizon > len(a.values):
            raise ValueError(
                f"horizon {horizon} exceeds list length {len(a.values)}")
    if horizon < 2:
        raise HorizonExhausted(
            "horizon too small to place the first block boundary", needed=2)

    low = next((n for n in range(1, horizon + 1) if a.value(n) <= 1.0), None)
    if low is not None:
        raise ValueError(f"hypothesis violated: a_{low} = {a.value(low)} <= 1")
    c = a.infimum(horizon)
    if c <= 1.0:
        raise ValueError(f"hypothesis violated: inf a_n = {c} <= 1")

    blocks = [1]
    saturated = False
    while True:
        v = len(blocks)
        doubling = 2 * blocks[-1]
        if doubling > horizon:
            break
        crossing = a.first_tail_index(c ** v, cap=horizon)
        if crossing == NEVER:
            saturated = True
            break
        if crossing == BEYOND:
            break
        boundary = max(doubling, crossing)
        if boundary > horizon:
            break
        blocks.append(boundary)

    return Envelope(c=c, blocks=tuple(blocks), horizon=horizon,
                    saturated=saturated, source=a)


@dataclass(frozen=True)
class SubmultReport:
    ok: bool
    limit: int
    violation: Optional[tuple[int, int]] = None
    detail: str = ""


def verify_submultiplicative(b, limit: int, tol: float = SUBMULT_TOL) -> SubmultReport:
    """Exhaustively check b_{n+m} <= b_n * b_m for all n, m >= 1, n + m <= limit.

    ``b`` is an Envelope or any indexable of values b_1..b_limit.  Reports
    the lexicographically first violating pair.
    """
    if isinstance(b, Envelope):
        if limit > b.horizon:
            raise ValueError(f"limit {limit} exceeds envelope horizon {b.horizon}")
        vals = b.values(limit)[1:]
    else:
        vals = np.asarray([float(x) for x in b], dtype=float)[:limit]
        if vals.size < limit:
            raise ValueError(f"need {limit} values, got {vals.size}")
    for n in range(1, limit):
        m_max = limit - n
        lhs = vals[n : n + m_max]            # b_{n+m} for m = 1..m_max
        rhs = vals[n - 1] * vals[:m_max]
        bad = np.nonzero(lhs > rhs + tol)[0]
        if bad.size:
            m = int(bad[0]) + 1
            return SubmultReport(False, limit, (n, m),
                                 f"b_{n + m}={lhs[bad[0]]} > b_{n}*b_{m}={rhs[bad[0]]}")
    return SubmultReport(True, limit)
