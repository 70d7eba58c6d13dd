"""Moduli of continuity: representation, evaluation, checks, and minorant construction.

A modulus of continuity here is a function w: [0, inf) -> [0, inf) with
w(0) = 0, w nondecreasing, and t -> w(t)/t nonincreasing.  The limit of
w(t)/t as t -> 0+ is called the derivative at zero (possibly +inf); it is
the best small-scale Lipschitz constant a map admitting w can have.

Four concrete kinds are supported:

* ``simple``   w(t) = min(slope * t, cap)
* ``loglin``   w(t) = t * ln(n + 2) for a fixed index n >= 1
* ``linear``   w(t) = slope * t
* ``table``    piecewise-linear through a finite grid starting at (0, 0),
               extended past the last point with the final segment slope
               (clamped so the ratio w(t)/t stays nonincreasing)

The module also hosts the sequence-level machinery: a floor check for
modulus sequences (is there a constant c > 0 eventually below every
w_n(t), with all derivatives at zero above 1) and the construction of
simple minorants with prescribed slope growth from any sequence passing
that check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import HorizonExhausted
from .util import geometric_grid

AUDIT_TOL = 1e-12


@dataclass(frozen=True)
class Modulus:
    """One evaluable modulus of continuity."""

    kind: str
    slope: float = 0.0
    cap: float = math.inf
    index: int = 0
    grid: tuple[tuple[float, float], ...] = ()

    @staticmethod
    def simple(slope: float, cap: float = math.inf) -> "Modulus":
        if slope < 0 or cap <= 0:
            raise ValueError("simple modulus needs slope >= 0 and cap > 0")
        return Modulus(kind="simple", slope=float(slope), cap=float(cap))

    @staticmethod
    def loglin(index: int) -> "Modulus":
        if index < 1:
            raise ValueError("loglin index must be >= 1")
        return Modulus(kind="loglin", slope=math.log(index + 2), index=int(index))

    @staticmethod
    def linear(slope: float) -> "Modulus":
        if slope < 0:
            raise ValueError("linear modulus needs slope >= 0")
        return Modulus(kind="linear", slope=float(slope))

    @staticmethod
    def table(points: Sequence[tuple[float, float]]) -> "Modulus":
        pts = tuple((float(t), float(v)) for t, v in points)
        if len(pts) < 2:
            raise ValueError("table modulus needs at least two grid points")
        if pts[0] != (0.0, 0.0):
            raise ValueError("table modulus must start at (0, 0)")
        ts = [t for t, _ in pts]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("table abscissae must be strictly increasing")
        if any(v < 0 for _, v in pts):
            raise ValueError("table values must be nonnegative")
        return Modulus(kind="table", grid=pts)

    def _table_arrays(self):
        ts = np.array([t for t, _ in self.grid])
        vs = np.array([v for _, v in self.grid])
        return ts, vs

    def _extension_slope(self) -> float:
        ts, vs = self._table_arrays()
        seg = (vs[-1] - vs[-2]) / (ts[-1] - ts[-2])
        # clamp so w(t)/t keeps decreasing past the grid
        return float(min(seg, vs[-1] / ts[-1]))

    def __call__(self, t: float) -> float:
        if t < 0:
            raise ValueError(f"modulus evaluated at negative t={t}")
        if self.kind == "simple":
            return min(self.slope * t, self.cap)
        if self.kind in ("loglin", "linear"):
            return self.slope * t
        ts, vs = self._table_arrays()
        if t <= ts[-1]:
            return float(np.interp(t, ts, vs))
        return float(vs[-1] + self._extension_slope() * (t - ts[-1]))

    def values(self, ts) -> np.ndarray:
        """Vectorized evaluation on an array of nonnegative arguments."""
        arr = np.asarray(ts, dtype=float)
        if arr.size and arr.min() < 0:
            raise ValueError("modulus evaluated at negative argument")
        if self.kind == "simple":
            return np.minimum(self.slope * arr, self.cap)
        if self.kind in ("loglin", "linear"):
            return self.slope * arr
        gt, gv = self._table_arrays()
        out = np.interp(arr, gt, gv)
        beyond = arr > gt[-1]
        if beyond.any():
            out = np.where(beyond, gv[-1] + self._extension_slope() * (arr - gt[-1]), out)
        return out

    @property
    def derivative_at_zero(self) -> float:
        """lim_{t -> 0+} w(t)/t; +inf is possible for table moduli only by construction."""
        if self.kind in ("simple", "loglin", "linear"):
            return self.slope
        t1, v1 = self.grid[1]
        return v1 / t1

    @property
    def sup(self) -> float:
        """Supremum of the modulus over [0, inf)."""
        if self.kind == "simple":
            return self.cap if self.slope > 0 else 0.0
        if self.kind in ("loglin", "linear"):
            return math.inf if self.slope > 0 else 0.0
        if self._extension_slope() > 0:
            return math.inf
        return max(v for _, v in self.grid)


@dataclass(frozen=True)
class ModulusSequence:
    """A rule n -> modulus for 1 <= n <= horizon.

    ``monotone_in_n`` certifies that the values w_n(t) are nondecreasing in n
    for every fixed t; tail conditions then reduce to first crossings.
    """

    produce: Callable[[int], Modulus]
    horizon: int
    monotone_in_n: bool = False
    label: str = ""

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")

    def __getitem__(self, n: int) -> Modulus:
        if not 1 <= n <= self.horizon:
            raise IndexError(f"index {n} outside [1, {self.horizon}]")
        return self.produce(n)

    @staticmethod
    def loglin(horizon: int) -> "ModulusSequence":
        return ModulusSequence(Modulus.loglin, horizon, monotone_in_n=True, label="loglin")

    @staticmethod
    def constant(m: Modulus, horizon: int) -> "ModulusSequence":
        return ModulusSequence(lambda n: m, horizon, monotone_in_n=True,
                               label=f"constant-{m.kind}")

    @staticmethod
    def from_list(mods: Sequence[Modulus], monotone_in_n: bool = False) -> "ModulusSequence":
        mods = tuple(mods)
        return ModulusSequence(lambda n: mods[n - 1], len(mods),
                               monotone_in_n=monotone_in_n, label="explicit")


@dataclass(frozen=True)
class ConditionWitness:
    condition: str
    points: tuple[float, ...]
    detail: str = ""


@dataclass(frozen=True)
class ModulusCheck:
    ok: bool
    zero_at_zero: bool
    nondecreasing: bool
    ratio_nonincreasing: bool
    subadditive: bool
    witnesses: tuple[ConditionWitness, ...] = ()


def check_modulus_conditions(m: Modulus, grid) -> ModulusCheck:
    """Audit the modulus axioms on a finite grid of positive points.

    Checks w(0) = 0, monotonicity, nonincreasing ratio w(t)/t, and the
    implied subadditivity w(x + y) <= w(x) + w(y) over all grid pairs.
    A failure records witness points.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("empty audit grid")
    if grid.min() <= 0:
        raise ValueError("audit grid must be strictly positive")
    grid = np.sort(grid)

    witnesses = []
    zero_ok = m(0.0) == 0.0
    if not zero_ok:
        witnesses.append(ConditionWitness("zero_at_zero", (0.0,), f"w(0)={m(0.0)}"))

    vals = m.values(grid)
    mono_bad = np.nonzero(vals[1:] < vals[:-1] - AUDIT_TOL)[0]
    mono_ok = mono_bad.size == 0
    if not mono_ok:
        i = int(mono_bad[0])
        witnesses.append(ConditionWitness("nondecreasing",
                                          (float(grid[i]), float(grid[i + 1])),
                                          f"w drops {vals[i]} -> {vals[i + 1]}"))

    ratios = vals / grid
    ratio_bad = np.nonzero(ratios[1:] > ratios[:-1] + AUDIT_TOL)[0]
    ratio_ok = ratio_bad.size == 0
    if not ratio_ok:
        i = int(ratio_bad[0])
        witnesses.append(ConditionWitness("ratio_nonincreasing",
                                          (float(grid[i]), float(grid[i + 1])),
                                          f"w(t)/t rises {ratios[i]} -> {ratios[i + 1]}"))

    sums = grid[:, None] + grid[None, :]
    lhs = m.values(sums.ravel()).reshape(sums.shape)
    rhs = vals[:, None] + vals[None, :]
    sub_bad = np.argwhere(lhs > rhs + AUDIT_TOL)
    sub_ok = sub_bad.size == 0
    if not sub_ok:
        i, j = (int(v) for v in sub_bad[0])
        witnesses.append(ConditionWitness("subadditive",
                                          (float(grid[i]), float(grid[j])),
                                          f"w(x+y)={lhs[i, j]} > {rhs[i, j]}"))

    ok = zero_ok and mono_ok and ratio_ok and sub_ok
    return ModulusCheck(ok, zero_ok, mono_ok, ratio_ok, sub_ok, tuple(witnesses))


def cap_modulus(m: Modulus, cap: float) -> Modulus:
    """Pointwise minimum of a modulus with a constant cap, as a modulus."""
    if cap <= 0:
        raise ValueError("cap must be positive")
    if m.kind == "simple":
        return Modulus.simple(m.slope, min(m.cap, cap))
    if m.kind in ("loglin", "linear"):
        return Modulus.simple(m.slope, cap)
    if m.sup <= cap:
        return m
    pts = []
    for t, v in m.grid:
        if v >= cap:
            t_prev, v_prev = pts[-1]
            seg = (v - v_prev) / (t - t_prev)
            t_cross = t_prev + (cap - v_prev) / seg
            pts.append((t_cross, cap))
            break
        pts.append((t, v))
    else:
        # grid stays below cap but the extension crosses it
        t_last, v_last = m.grid[-1]
        ext = m._extension_slope()
        t_cross = t_last + (cap - v_last) / ext
        pts.append((t_cross, cap))
    # flat tail keeps the minimum exact past the crossing
    t_end, _ = pts[-1]
    pts.append((t_end + max(t_end, 1.0), cap))
    return Modulus.table(pts)


@dataclass(frozen=True)
class FloorRow:
    t: float
    window_inf: float
    argmin_n: int
    above_floor: bool


@dataclass(frozen=True)
class FloorCheck:
    """Semi-decision report for the floor condition on a modulus sequence.

    The condition asks for a constant c > 0 with c < liminf_n w_n(t) for
    every t > 0, together with w_n'(0) > 1 for all n.  A finite window can
    refute or support this, never prove it; ``supported`` reflects the
    window evidence only.
    """

    supported: bool
    floor: float
    rows: tuple[FloorRow, ...]
    derivative_failures: tuple[int, ...]
    certified_floor: float
    note: str = ("finite-window evidence: values below the floor refute the condition, "
                 "values above it only support it")


def check_liminf_floor(seq: ModulusSequence, floor: float, t_grid,
                       window: tuple[int, int]) -> FloorCheck:
    """Compare inf over a window of w_n(t) against a candidate floor.

    Also checks the companion requirement that the derivative at zero of
    every w_n up to the window end exceeds 1.  ``certified_floor`` is the
    largest floor the given grid and window would support.
    """
    lo, hi = window
    if not (1 <= lo <= hi <= seq.horizon):
        raise ValueError(f"degenerate window {window} for horizon {seq.horizon}")
    t_grid = [float(t) for t in t_grid]
    if not t_grid or min(t_grid) <= 0:
        raise ValueError("t_grid must be nonempty and positive")

    rows = []
    for t in t_grid:
        best_val, best_n = math.inf, lo
        for n in range(lo, hi + 1):
            v = seq[n](t)
            if v < best_val:
                best_val, best_n = v, n
        rows.append(FloorRow(t, best_val, best_n, best_val > floor))

    deriv_failures = tuple(n for n in range(1, hi + 1)
                           if seq[n].derivative_at_zero <= 1.0)
    supported = all(r.above_floor for r in rows) and not deriv_failures
    certified = min(r.window_inf for r in rows)
    return FloorCheck(supported, floor, tuple(rows), deriv_failures, certified)


@dataclass(frozen=True)
class MinorantResult:
    """Simple minorants phi_n <= w_n with slope growth and a common positive sup.

    ``thresholds`` lists the certified indices (m, N_m): from N_m on, the
    minorant slope exceeds m.  ``guaranteed_floor`` is half the smallest
    sup over all constructed minorants.
    """

    minorants: tuple[Modulus, ...]
    thresholds: tuple[tuple[int, int], ...]
    guaranteed_floor: float
    cut_indices: tuple[int, ...]
    floor: float

    def __getitem__(self, n: int) -> Modulus:
        return self.minorants[n - 1]

    @property
    def horizon(self) -> int:
        return len(self.minorants)

    def as_sequence(self) -> ModulusSequence:
        return ModulusSequence.from_list(self.minorants)


def _first_slope_threshold(seq: ModulusSequence, floor: float, m: int,
                           start: int) -> Optional[int]:
    """Least n >= start with floor < w_n(floor/m), or None within the horizon.

    Valid as a tail threshold only for sequences nondecreasing in n.
    """
    t = floor / m
    for n in range(start, seq.horizon + 1):
        if seq[n](t) > floor:
            return n
    return None


def build_simple_minorants(seq: ModulusSequence, floor: float, horizon: int,
                           tail_witness="monotone",
                           audit_grid=None) -> MinorantResult:
    """Build simple minorants phi_n = min(slope_n * t, floor) below a sequence.

    Requires the floor condition: every derivative at zero exceeds 1 and the
    values w_n(floor/m) eventually exceed the floor for each m.  Block m
    starts at the first certified index N_m (strictly increasing in m) and
    assigns slope w_n(floor/m) * m / floor, which exceeds m there.

    Indices before the first block get cut minorants: the largest audit-grid
    point t* with w_n(t*)/t* > 1 yields phi_n = min(ratio * t, w_n(t*)),
    which sits below w_n, keeps slope above 1, and has positive sup.

    ``tail_witness`` is either the string "monotone" (the sequence is
    certified nondecreasing in n, so tail conditions are first crossings)
    or a callable m -> N_m supplying certified thresholds directly.
    """
    if floor <= 0:
        raise ValueError("floor must be positive")
    horizon = min(horizon, seq.horizon)
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if tail_witness == "monotone" and not seq.monotone_in_n:
        raise ValueError("sequence is not certified monotone in n; "
                         "pass a threshold oracle as tail_witness")

    bad = [n for n in range(1, horizon + 1) if seq[n].derivative_at_zero <= 1.0]
    if bad:
        raise ValueError(f"floor condition violated: derivative at zero <= 1 at n={bad[0]}")

    if audit_grid is None:
        audit_grid = geometric_grid(floor * 1e-9, 10.0 * floor, 400)

    def threshold(m: int, start: int) -> Optional[int]:
        if callable(tail_witness):
            n = tail_witness(m)
            if n is None or n > horizon:
                return None
            n = max(n, start)
            if seq[n](floor / m) <= floor:
                raise ValueError(f"threshold oracle value N_{m}={n} fails its own condition")
            return n
        found = _first_slope_threshold(seq, floor, m, start)
        if found is None or found > horizon:
            return None
        return found

    n1 = threshold(1, 1)
    if n1 is None:
        raise HorizonExhausted(
            f"cannot certify the first slope threshold within horizon {horizon}",
            needed=1)

    thresholds = [(1, n1)]
    while True:
        m_prev, n_prev = thresholds[-1]
        nxt = threshold(m_prev + 1, n_prev + 1)
        if nxt is None or nxt > horizon:
            break
        thresholds.append((m_prev + 1, max(nxt, n_prev + 1)))

    minorants: list[Modulus] = []
    cut = []
    for n in range(1, n1):
        w = seq[n]
        ratios = w.values(audit_grid) / audit_grid
        ok = np.nonzero(ratios > 1.0)[0]
        if ok.size == 0:
            raise ValueError(f"audit grid finds no point with w_{n}(t)/t > 1; "
                             "extend the grid toward 0")
        t_star = float(audit_grid[ok[-1]])
        minorants.append(Modulus.simple(w(t_star) / t_star, w(t_star)))
        cut.append(n)

    block = 0
    for n in range(n1, horizon + 1):
        while block + 1 < len(thresholds) and n >= thresholds[block + 1][1]:
            block += 1
        m = thresholds[block][0]
        slope = seq[n](floor / m) * m / floor
        minorants.append(Modulus.simple(slope, floor))

    guaranteed = 0.5 * min(p.sup for p in minorants)
    return MinorantResult(tuple(minorants), tuple(thresholds), guaranteed,
                          tuple(cut), floor)
