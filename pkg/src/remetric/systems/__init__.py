"""Built-in finite systems: tent map on dyadic grids, rotations, permutation groups.

Each builder returns a bounded base metric together with the generating
family, ready for the closure and remetrization pipeline.  The symbolic
two-parameter counterexample family lives in the ``counterexample``
submodule.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from ..family import FunctionFamily
from ..metricspace import FiniteMetricSpace
from ..util import fmt_exact
from . import counterexample

__all__ = [
    "DyadicGrid", "tent_value", "make_tent_system", "make_rotation_system",
    "make_group_system", "s3_preset", "load_system_json", "counterexample",
]


@dataclass(frozen=True)
class DyadicGrid:
    """The points k / 2^level for k = 0..2^level, exact in binary."""

    level: int

    def __post_init__(self):
        if self.level < 1:
            raise ValueError("grid level must be >= 1")

    @property
    def size(self) -> int:
        return 2 ** self.level + 1

    @property
    def points(self) -> np.ndarray:
        denom = 2 ** self.level
        return np.arange(denom + 1) / denom

    def tent_table(self) -> np.ndarray:
        """Index table of the tent map; the grid is closed under it."""
        denom = 2 ** self.level
        ks = np.arange(denom + 1)
        return (denom - np.abs(2 * ks - denom)).astype(np.int64)

    def index_of(self, value: float) -> int:
        k = value * 2 ** self.level
        if k != int(k) or not 0 <= k <= 2 ** self.level:
            raise ValueError(f"{value} is not on the level-{self.level} grid")
        return int(k)


def tent_value(x: float) -> float:
    """The tent map 1 - |2x - 1| on [0, 1]; exact on dyadic inputs."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"tent map argument {x} outside [0, 1]")
    return 1.0 - abs(2.0 * x - 1.0)


def make_tent_system(level: int, c: float = 1.0):
    """Dyadic grid of the given level with metric min(|x - y|, c/2) and the
    tent map as the single generator."""
    grid = DyadicGrid(level)
    space = FiniteMetricSpace.from_points(grid.points, cap=c / 2.0)
    family = FunctionFamily(grid.size, {"T": grid.tent_table()})
    return space, family


def make_rotation_system(q: int, c: float = 1.0):
    """q points on a circle with the capped arc metric and the one-step
    rotation as generator, inverse-closed."""
    if q < 3:
        raise ValueError("need at least 3 points on the circle")
    idx = np.arange(q)
    gaps = np.abs(idx[:, None] - idx[None, :])
    arc = np.minimum(gaps, q - gaps) / q
    dist = np.minimum(arc, c / 2.0)
    labels = [fmt_exact(i / q) for i in range(q)]
    space = FiniteMetricSpace(tuple(labels), dist)
    family = FunctionFamily(q, {"r": (idx + 1) % q}, closed_under_inverse=True)
    return space, family


def make_group_system(perms, c: float = 1.0):
    """A finitely generated permutation group on a line-metric carrier.

    ``perms`` maps names to permutation tables of a common size.  The family
    is inverse-closed (identity and inverses join the generating set), so
    minimal word lengths realize the length metric of the induced maps.
    """
    if not perms:
        raise ValueError("need at least one permutation")
    if not isinstance(perms, dict):
        perms = {f"g{i}": p for i, p in enumerate(perms)}
    sizes = {len(p) for p in perms.values()}
    if len(sizes) != 1:
        raise ValueError("permutations act on carriers of different sizes")
    n = sizes.pop()
    pts = np.arange(n) / n
    space = FiniteMetricSpace.from_points(pts, cap=c / 2.0,
                                          labels=[str(i) for i in range(n)])
    family = FunctionFamily(n, {k: np.asarray(v) for k, v in perms.items()},
                            closed_under_inverse=True)
    return space, family


def s3_preset() -> dict[str, list[int]]:
    """The symmetric group on three points, generated by two transpositions."""
    return {"s01": [1, 0, 2], "s12": [0, 2, 1]}


def load_system_json(path, default_c: float = 1.0):
    """Read a system description: points, metric, generators, flags.

    The document carries ``points`` (labels), ``metric`` (either
    ``{"type": "matrix", "rows": [...]}`` or ``{"type": "interval_capped",
    "cap": x}`` over numeric points), ``generators`` (name -> index array),
    optional ``inverse_closed`` and ``c``.
    Returns (space, family, c).
    """
    with open(path) as fh:
        doc = json.load(fh)
    for key in ("points", "metric", "generators"):
        if key not in doc:
            raise ValueError(f"system document missing {key!r}")
    labels = [str(p) for p in doc["points"]]
    n = len(labels)
    metric = doc["metric"]
    kind = metric.get("type")
    if kind == "matrix":
        rows = metric["rows"]
        if len(rows) != n or any(len(r) != n for r in rows):
            raise ValueError("metric rows do not match the point count")
        space = FiniteMetricSpace(tuple(labels), np.array(rows, dtype=float))
    elif kind == "interval_capped":
        try:
            pts = [float(p) for p in doc["points"]]
        except (TypeError, ValueError) as exc:
            raise ValueError("interval_capped metric needs numeric points") from exc
        space = FiniteMetricSpace.from_points(pts, cap=float(metric["cap"]),
                                              labels=labels)
    else:
        raise ValueError(f"unknown metric type {kind!r}")
    gens = {str(k): np.asarray(v, dtype=np.int64)
            for k, v in doc["generators"].items()}
    family = FunctionFamily(n, gens,
                            closed_under_inverse=bool(doc.get("inverse_closed", False)))
    c = float(doc.get("c", default_c))
    return space, family, c
