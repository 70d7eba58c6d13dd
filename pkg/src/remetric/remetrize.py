"""The sup-metric remetrization on a finite carrier, computed exactly.

Given a bounded base metric d (diameter below a constant c), a composition
closure of a function family, and a submultiplicative envelope b, the new
metric is

    dhat(x, y) = sup over n >= 0 and tables f of word length n
                 of d(f(x), f(y)) / b_n.

On a finite forward-invariant carrier the sup is a max attained among
finitely many levels, and the build certifies that exactly: levels are
examined in increasing order, each distinct table only at its minimal
word length (sound because b is nondecreasing, so later appearances can
only divide by more), and the scan stops when one of these holds:

* the closure stabilized, so every composition table has been examined;
* the tail bound c / b_{next} is at or below the smallest running max
  over pairs, so no unexamined level can raise any entry;
* the family has a single effective generator and every pair's orbit has
  merged, making all later terms zero.

The resulting matrix dominates the base metric entrywise (the level-0 term
is the base itself), never exceeds c, and satisfies the metric axioms as a
max of pseudometrics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import HorizonExhausted
from .family import ClosureLevels, _worst_image_distance
from .metricspace import (FiniteMetricSpace, LipschitzEstimate, METRIC_TOL,
                          admits_modulus, lipschitz_estimate)
from .moduli import Modulus, ModulusSequence
from .sequences import Envelope


@dataclass(frozen=True)
class StopCertificate:
    stop_level: int
    reason: str                 # "stabilized" | "tail_bound" | "orbits_merged"
    next_b: Optional[float]
    min_running_max: float
    detail: str = ""


@dataclass(frozen=True)
class Remetrization:
    base: FiniteMetricSpace
    envelope: Envelope
    levels: ClosureLevels
    dhat: FiniteMetricSpace
    stop_level: int
    certificate: StopCertificate
    bound_c: float


def build_remetrization(base: FiniteMetricSpace, levels: ClosureLevels,
                        envelope: Envelope, c: float = 1.0) -> Remetrization:
    """Compute the sup metric with an exactness certificate.

    Preconditions: the base diameter is strictly below c (cap it first via
    ``bound_metric``) and the envelope is nondecreasing with value 1 at 0.
    Raises HorizonExhausted when neither stop criterion can be certified
    within the available closure levels or envelope horizon; the exception
    carries the envelope value that would have been needed.
    """
    if c <= 0:
        raise ValueError("bound constant must be positive")
    if base.diameter >= c:
        raise ValueError(f"base diameter {base.diameter} is not below c={c}; "
                         "apply bound_metric first")
    if levels.family.carrier_size != base.size:
        raise ValueError("closure and base metric disagree on carrier size")
    if envelope.value(0) != 1.0:
        raise ValueError("envelope must start at 1")
    top = levels.stabilized_at if levels.stabilized_at is not None else levels.max_level
    bvals = [envelope.value(n) for n in range(0, min(top, envelope.horizon) + 1)]
    if any(b2 < b1 for b1, b2 in zip(bvals, bvals[1:])):
        raise ValueError("envelope is not nondecreasing; minimal-level "
                         "deduplication would be unsound")

    eff = levels.family.effective_generators()
    single = [t for _, t in eff if not np.array_equal(t, levels.family.identity_table())]
    single_gen = single[0] if len(single) == 1 and len(eff) - len(single) <= 1 else None

    n_pts = base.size
    running = base.dist.copy()
    offdiag = ~np.eye(n_pts, dtype=bool)
    orbit = np.arange(n_pts, dtype=np.int64) if single_gen is not None else None

    def finish(level, reason, next_b, detail=""):
        mrm = float(running[offdiag].min()) if n_pts > 1 else math.inf
        cert = StopCertificate(level, reason, next_b, mrm, detail)
        dh = FiniteMetricSpace(base.labels, running)
        return Remetrization(base, envelope, levels, dh, level, cert, c)

    if n_pts < 2:
        return finish(0, "stabilized", None, "carrier has fewer than two points")

    level = 0
    while True:
        if levels.stabilized_at is not None and level >= levels.stabilized_at:
            return finish(level, "stabilized", None,
                          f"all {levels.distinct_count()} composition tables "
                          f"examined at their minimal level")
        if level >= levels.max_level and levels.stabilized_at is None:
            raise HorizonExhausted(
                f"closure levels end at {levels.max_level} before any stop "
                f"criterion is met", needed=levels.max_level + 1)

        level += 1
        try:
            b_n = envelope.value(level)
        except HorizonExhausted:
            raise HorizonExhausted(
                f"envelope horizon {envelope.horizon} exhausted at level {level}; "
                f"the tail bound needs b >= {c / float(running[offdiag].min())}",
                needed=c / float(running[offdiag].min()))
        for t in levels.tables_at(level):
            np.maximum(running, base.dist[np.ix_(t, t)] / b_n, out=running)

        if single_gen is not None:
            orbit = single_gen[orbit]
            if np.unique(orbit).size == 1 or _all_pairs_merged(orbit):
                return finish(level, "orbits_merged", None,
                              "every pair's orbit under the single generator "
                              "has merged; later terms vanish")

        try:
            b_next = envelope.value(level + 1)
        except HorizonExhausted:
            b_next = None
        if b_next is not None:
            mrm = float(running[offdiag].min())
            if c / b_next <= mrm:
                return finish(level, "tail_bound", b_next,
                              f"c/b_{level + 1} = {c / b_next} <= min running "
                              f"max {mrm}")


def _all_pairs_merged(orbit: np.ndarray) -> bool:
    return np.unique(orbit).size == 1


def naive_sup_metric(base: FiniteMetricSpace, levels: ClosureLevels,
                     envelope: Envelope, max_level: int) -> np.ndarray:
    """Reference evaluation by full word enumeration, for oracle tests.

    Composes every word over the effective generators up to max_level with
    no deduplication and no early exit.  Exponential in max_level; only for
    small instances.
    """
    eff = [t for _, t in levels.family.effective_generators()]
    running = base.dist.copy()
    words = [levels.family.identity_table()]
    for n in range(1, max_level + 1):
        words = [g[w] for g in eff for w in words]
        b_n = envelope.value(n)
        for w in words:
            np.maximum(running, base.dist[np.ix_(w, w)] / b_n, out=running)
    return running


@dataclass(frozen=True)
class LevelBoundRow:
    level: int
    b: float
    a: Optional[float]
    table_count: int
    worst_ratio: Optional[float]
    witness_pair: Optional[tuple[int, int]]
    witness_word: Optional[tuple[str, ...]]
    distance_margin: float
    within_cap: bool
    admits: Optional[bool]


@dataclass(frozen=True)
class LevelBoundReport:
    rows: tuple[LevelBoundRow, ...]
    ok: bool


def _ratio_scan(dhat: np.ndarray, table: np.ndarray):
    img = dhat[np.ix_(table, table)]
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(dhat > 0, img / np.where(dhat > 0, dhat, 1.0), -math.inf)
    i, j = np.unravel_index(int(np.argmax(r)), r.shape)
    return float(r[i, j]), (int(i), int(j)), img


def verify_level_bounds(rem: Remetrization, moduli: Optional[ModulusSequence],
                        n_max: int, tol: float = METRIC_TOL) -> LevelBoundReport:
    """Check the growth bounds level by level under the new metric.

    For every table f of minimal word length m <= n_max and all pairs:
    dhat(f(x), f(y)) <= b_m * dhat(x, y) + tol and <= c + tol, and when a
    modulus sequence is supplied, f admits its m-th modulus.  The worst
    ratio per level is the empirical Lipschitz constant of that level.
    """
    dh = rem.dhat
    rows = []
    ok = True
    for m in range(1, n_max + 1):
        try:
            b_m = rem.envelope.value(m)
        except HorizonExhausted:
            raise ValueError(f"envelope has no value at level {m}")
        a_m = rem.envelope.source.value(m) if rem.envelope.source is not None else None
        tables = rem.levels.tables_at(m)
        if not tables:
            rows.append(LevelBoundRow(m, b_m, a_m, 0, None, None, None,
                                      -math.inf, True, None))
            continue
        worst_ratio, worst_pair, worst_word = -math.inf, None, None
        margin = -math.inf
        cap_ok = True
        admit_ok = True if moduli is not None else None
        for t in tables:
            ratio, pair, img = _ratio_scan(dh.dist, t)
            if ratio > worst_ratio:
                worst_ratio, worst_pair = ratio, pair
                worst_word = rem.levels.word_for(t)
            margin = max(margin, float((img - b_m * dh.dist).max()))
            cap_ok = cap_ok and bool((img <= rem.bound_c + tol).all())
            if moduli is not None:
                rep = admits_modulus(dh, dh, t, moduli[m], tol=tol)
                admit_ok = admit_ok and rep.ok
        row_ok = margin <= tol and cap_ok and (admit_ok is not False)
        ok = ok and row_ok
        rows.append(LevelBoundRow(m, b_m, a_m, len(tables), worst_ratio,
                                  worst_pair, worst_word, margin, cap_ok,
                                  admit_ok))
    return LevelBoundReport(tuple(rows), ok)


@dataclass(frozen=True)
class IterateRow:
    n: int
    b: float
    a: Optional[float]
    worst_ratio: float
    witness_pair: tuple[int, int]
    distance_margin: float
    admits: Optional[bool]


@dataclass(frozen=True)
class IterateReport:
    rows: tuple[IterateRow, ...]
    ok: bool


def iterate_bound_report(rem: Remetrization, moduli: Optional[ModulusSequence],
                         n_max: int, tol: float = METRIC_TOL) -> IterateReport:
    """Growth bounds for the iterates of a single-generator family.

    The n-th iterate is an n-fold composition, so it must satisfy the
    level-n bound even when its table already appeared at a lower level
    (orbits that merge make high iterates collapse).
    """
    eff = [t for _, t in rem.levels.family.effective_generators()
           if not np.array_equal(t, rem.levels.family.identity_table())]
    if len(eff) != 1:
        raise ValueError("iterate report needs exactly one non-identity generator")
    g = eff[0]
    dh = rem.dhat
    rows = []
    ok = True
    table = rem.levels.family.identity_table()
    for n in range(1, n_max + 1):
        table = g[table]
        b_n = rem.envelope.value(n)
        a_n = rem.envelope.source.value(n) if rem.envelope.source is not None else None
        ratio, pair, img = _ratio_scan(dh.dist, table)
        margin = float((img - b_n * dh.dist).max())
        admit = None
        if moduli is not None:
            admit = admits_modulus(dh, dh, table, moduli[n], tol=tol).ok
        row_ok = margin <= tol and (admit is not False)
        ok = ok and row_ok
        rows.append(IterateRow(n, b_n, a_n, max(ratio, 0.0), pair, margin, admit))
    return IterateReport(tuple(rows), ok)


@dataclass(frozen=True)
class EquivalenceRow:
    eps: float
    cutoff_level: int
    delta: float
    confirmed: bool


@dataclass(frozen=True)
class EquivalenceReport:
    base_below_dhat: bool
    rows: tuple[EquivalenceRow, ...]
    ok: bool
    note: str = ("on a finite carrier the two metrics are trivially equivalent; "
                 "this reproduces the delta construction literally")


def equivalence_probe(rem: Remetrization, eps_grid) -> EquivalenceReport:
    """Two-sided comparability of base and dhat, via the explicit deltas.

    base <= dhat holds entrywise by construction.  For each eps, N is the
    first level whose envelope value pushes the worst tail term below eps
    (diam <= b_N * eps); equicontinuity of the union of levels below N
    yields a delta, and the implication base(x,y) < delta => dhat(x,y) <= eps
    is then checked over all pairs.
    """
    dh, base = rem.dhat, rem.base
    below = bool((base.dist <= dh.dist + 1e-12).all())
    diam = base.diameter
    rows = []
    all_ok = below
    for eps in eps_grid:
        eps = float(eps)
        cutoff = 0
        while rem.envelope.value(cutoff) * eps < diam:
            cutoff += 1
            if cutoff > rem.envelope.horizon:
                raise HorizonExhausted(
                    f"no envelope value reaches diam/eps = {diam / eps}",
                    needed=diam / eps)
        top = rem.levels.stabilized_at
        if top is None and rem.levels.max_level < cutoff - 1:
            raise ValueError(f"need closure levels up to {cutoff - 1}, "
                             f"have {rem.levels.max_level}")
        avail = min(cutoff - 1, rem.levels.max_level) if top is None \
            else min(cutoff - 1, top)
        union = [t for k in range(avail + 1) for t in rem.levels.tables_at(k)]
        worst = _worst_image_distance(base, union)
        bad = worst > eps
        np.fill_diagonal(bad, False)
        delta = float(base.dist[bad].min()) if bad.any() else math.inf
        if math.isinf(delta):
            confirmed = bool((dh.dist <= eps + 1e-12).all())
        else:
            covered = base.dist < delta
            np.fill_diagonal(covered, False)
            confirmed = bool((dh.dist[covered] <= eps + 1e-12).all())
        rows.append(EquivalenceRow(eps, cutoff, delta, confirmed))
        all_ok = all_ok and confirmed
    return EquivalenceReport(below, tuple(rows), all_ok)


@dataclass(frozen=True)
class ExpansionWitness:
    iterations: int
    pair: tuple[int, int]
    image_pair: tuple[int, int]
    ratio: float
    margin: float
    candidates: tuple[tuple[int, float], ...]   # (j, ratio) over scanned pairs


def tent_expansion_witness(rem: Remetrization, n: int) -> ExpansionWitness:
    """Exhibit a pair stretched by the n-th tent iterate under dhat.

    Scans the dyadic pairs (2^-j, 2^-(j-1)) for j a multiple of n within
    the grid; their images under the n-th iterate are again such pairs,
    shifted toward the top, so a ratio above 1 appears wherever the
    envelope steps up between blocks.  Confirms that no iterate is
    1-Lipschitz under dhat even though each respects its level bound.
    """
    if n < 1:
        raise ValueError("iteration count must be >= 1")
    try:
        values = [float(s) for s in rem.base.labels]
    except ValueError as exc:
        raise ValueError("base labels are not numeric; expected a dyadic "
                         "grid system") from exc
    index_of = {v: i for i, v in enumerate(values)}
    level_l = int(round(math.log2(len(values) - 1)))
    if level_l < 2 * n:
        raise ValueError(f"grid level {level_l} too small; need at least {2 * n}")

    eff = [t for _, t in rem.levels.family.effective_generators()
           if not np.array_equal(t, rem.levels.family.identity_table())]
    if len(eff) != 1:
        raise ValueError("expansion witness needs a single-generator system")
    g = eff[0]
    iterate = rem.levels.family.identity_table()
    for _ in range(n):
        iterate = g[iterate]

    dh = rem.dhat.dist
    candidates = []
    best = None
    for j in range(n, level_l + 1, n):
        i1, i2 = index_of[2.0 ** -j], index_of[2.0 ** -(j - 1)]
        denom = dh[i1, i2]
        numer = dh[iterate[i1], iterate[i2]]
        ratio = numer / denom
        candidates.append((j, float(ratio)))
        if best is None or ratio > best[0]:
            best = (float(ratio), (i1, i2), (int(iterate[i1]), int(iterate[i2])))
    ratio, pair, image_pair = best
    if ratio <= 1.0:
        needed = _required_grid_level(rem.envelope, n)
        raise ValueError(f"no expansion witness on this grid; a dyadic grid of "
                         f"level >= {needed} contains one")
    return ExpansionWitness(n, pair, image_pair, ratio, ratio - 1.0,
                            tuple(candidates))


def _required_grid_level(envelope: Envelope, n: int) -> int:
    """Smallest dyadic level whose pair scan crosses an envelope step."""
    for j in range(n, envelope.horizon - 1, n):
        if envelope.value(j - 1) > envelope.value(max(j - n - 1, 0)):
            return j
    return envelope.horizon


@dataclass(frozen=True)
class ShrinkRow:
    n: int
    t_n: float
    bound: float
    holds: bool


@dataclass(frozen=True)
class ShrinkReport:
    endpoint_distance: float
    rows: tuple[ShrinkRow, ...]
    ok: bool


def tent_distance_shrink_check(rem: Remetrization, moduli: ModulusSequence,
                               n_max: int) -> ShrinkReport:
    """Check dhat(0, 1) <= w_n(t_n) for t_n = dhat(2^-(n-1), 2^-n).

    The n-th iterate maps that dyadic pair onto the endpoints, so any
    modulus sequence admitted by the iterates must clear the endpoint
    distance at the pair distances t_n.
    """
    values = [float(s) for s in rem.base.labels]
    index_of = {v: i for i, v in enumerate(values)}
    level_l = int(round(math.log2(len(values) - 1)))
    if n_max > level_l:
        raise ValueError(f"need grid level >= {n_max}, have {level_l}")
    dh = rem.dhat.dist
    d01 = float(dh[index_of[0.0], index_of[1.0]])
    rows = []
    for n in range(1, n_max + 1):
        t_n = float(dh[index_of[2.0 ** -(n - 1)], index_of[2.0 ** -n]])
        bound = moduli[n](t_n)
        rows.append(ShrinkRow(n, t_n, bound, d01 <= bound + METRIC_TOL))
    return ShrinkReport(d01, tuple(rows), all(r.holds for r in rows))
