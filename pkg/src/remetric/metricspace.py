"""Finite metric spaces as dense distance matrices, with exhaustive checks.

Carriers here are desk-scale (a few thousand points at most), so every
verification is a full scan: all triples for the triangle inequality, all
pairs for modulus admission and Lipschitz ratios.  That exhaustiveness is
the point; nothing is sampled.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .moduli import Modulus
from .util import fmt_exact, worker_count

METRIC_TOL = 1e-9


@dataclass(frozen=True)
class FiniteMetricSpace:
    """Labeled points with a symmetric nonnegative distance matrix."""

    labels: tuple[str, ...]
    dist: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.dist, dtype=float)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise ValueError(f"distance matrix must be square, got {d.shape}")
        if len(self.labels) != d.shape[0]:
            raise ValueError("label count does not match matrix size")
        if not np.isfinite(d).all():
            raise ValueError("distance matrix has non-finite entries")
        if (d < 0).any():
            raise ValueError("distance matrix has negative entries")
        d = d.copy()
        d.setflags(write=False)
        object.__setattr__(self, "dist", d)
        object.__setattr__(self, "labels", tuple(str(s) for s in self.labels))

    @staticmethod
    def from_points(points, cap: Optional[float] = None,
                    labels: Optional[Sequence[str]] = None) -> "FiniteMetricSpace":
        """Line metric |x - y| on numeric points, optionally capped."""
        pts = np.asarray(points, dtype=float)
        d = np.abs(pts[:, None] - pts[None, :])
        if cap is not None:
            d = np.minimum(d, cap)
        if labels is None:
            labels = [fmt_exact(p) for p in pts]
        return FiniteMetricSpace(tuple(labels), d)

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def diameter(self) -> float:
        return float(self.dist.max()) if self.size else 0.0

    def min_positive_distance(self) -> float:
        if self.size < 2:
            return math.inf
        off = self.dist[~np.eye(self.size, dtype=bool)]
        return float(off.min())

    def pair(self, i: int, j: int) -> tuple[str, str]:
        return self.labels[i], self.labels[j]


@dataclass(frozen=True)
class MetricReport:
    ok: bool
    axiom: str = ""
    witness: tuple[int, ...] = ()
    detail: str = ""


def validate_metric(space: FiniteMetricSpace, tol: float = METRIC_TOL) -> MetricReport:
    """Check symmetry, identity, and the triangle inequality over all triples."""
    d = space.dist
    n = space.size

    asym = np.argwhere(np.abs(d - d.T) > tol)
    if asym.size:
        i, j = (int(v) for v in asym[0])
        return MetricReport(False, "symmetry", (i, j),
                            f"d[{i},{j}]={d[i, j]} != d[{j},{i}]={d[j, i]}")

    diag = np.nonzero(np.abs(np.diag(d)) > tol)[0]
    if diag.size:
        i = int(diag[0])
        return MetricReport(False, "identity", (i, i), f"d[{i},{i}]={d[i, i]} != 0")
    off = d + np.where(np.eye(n, dtype=bool), np.inf, 0.0)
    zeros = np.argwhere(off <= tol)
    if zeros.size:
        i, j = (int(v) for v in zeros[0])
        return MetricReport(False, "identity", (i, j),
                            f"distinct points at distance {d[i, j]}")

    def scan(js):
        # first triangle violation (j, i, k) within this middle-point chunk
        for j in js:
            bound = d[:, j : j + 1] + d[j : j + 1, :]
            bad = np.argwhere(d > bound + tol)
            if bad.size:
                i, k = (int(v) for v in bad[0])
                return (j, i, k)
        return None

    workers = worker_count()
    if workers > 1 and n >= 64:
        chunks = np.array_split(np.arange(n), workers)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            hits = [h for h in pool.map(scan, chunks) if h is not None]
        hit = min(hits) if hits else None
    else:
        hit = scan(range(n))
    if hit is not None:
        j, i, k = hit
        return MetricReport(False, "triangle", (i, j, k),
                            f"d[{i},{k}]={d[i, k]} > d[{i},{j}]+d[{j},{k}]"
                            f"={d[i, j] + d[j, k]}")
    return MetricReport(True)


def bound_metric(space: FiniteMetricSpace, c: float) -> FiniteMetricSpace:
    """Cap every distance at c/2, so the diameter drops strictly below c."""
    if c <= 0:
        raise ValueError("bound constant must be positive")
    return FiniteMetricSpace(space.labels, np.minimum(space.dist, c / 2.0))


def _as_table(f, size: int) -> np.ndarray:
    t = np.asarray(f, dtype=np.int64)
    if t.ndim != 1 or t.size != size:
        raise ValueError(f"map table must have length {size}")
    return t


@dataclass(frozen=True)
class AdmissionReport:
    ok: bool
    worst_pair: tuple[int, int]
    worst_margin: float
    max_ratio: float
    detail: str = ""


def admits_modulus(dom: FiniteMetricSpace, cod: FiniteMetricSpace, f,
                   omega: Modulus, tol: float = METRIC_TOL) -> AdmissionReport:
    """Check rho(f(x), f(y)) <= omega(d(x, y)) over all pairs.

    The worst pair maximizes the violation margin; ``max_ratio`` is the
    largest image distance relative to the modulus value among pairs at
    positive distance.
    """
    table = _as_table(f, dom.size)
    if table.min() < 0 or table.max() >= cod.size:
        raise ValueError("map table leaves the codomain index range")
    d_img = cod.dist[np.ix_(table, table)]
    w = omega.values(dom.dist.ravel()).reshape(dom.dist.shape)
    margins = d_img - w
    np.fill_diagonal(margins, -math.inf)
    i, j = np.unravel_index(int(np.argmax(margins)), margins.shape)
    worst = float(margins[i, j])
    pos = dom.dist > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(pos & (w > 0), d_img / np.where(w > 0, w, 1.0), 0.0)
    return AdmissionReport(worst <= tol, (int(i), int(j)), worst,
                           float(ratios.max()) if ratios.size else 0.0)


@dataclass(frozen=True)
class LipschitzEstimate:
    value: float
    pair: tuple[int, int]


def lipschitz_estimate(dom: FiniteMetricSpace, cod: FiniteMetricSpace,
                       f) -> LipschitzEstimate:
    """Max over pairs of rho(f(x), f(y)) / d(x, y); a lower bound on Lip(f).

    Ties break to the lexicographically smallest index pair.
    """
    if dom.size < 2:
        raise ValueError("need at least two points")
    table = _as_table(f, dom.size)
    if table.min() < 0 or table.max() >= cod.size:
        raise ValueError("map table leaves the codomain index range")
    d_img = cod.dist[np.ix_(table, table)]
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(dom.dist > 0, d_img / np.where(dom.dist > 0, dom.dist, 1.0), -math.inf)
    i, j = np.unravel_index(int(np.argmax(r)), r.shape)
    return LipschitzEstimate(float(r[i, j]), (int(i), int(j)))


def write_matrix_csv(space: FiniteMetricSpace, path) -> None:
    """Header row of labels, then one row of distances per point.

    Values use shortest round-tripping decimals, so reading the file back
    reproduces the floats bit-exactly.
    """
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(space.labels)
        for row in space.dist:
            wr.writerow([fmt_exact(v) for v in row])


def read_matrix_csv(path) -> FiniteMetricSpace:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"empty matrix file {path}")
    labels = tuple(rows[0])
    data = [[float(v) for v in row] for row in rows[1:]]
    return FiniteMetricSpace(labels, np.array(data))
