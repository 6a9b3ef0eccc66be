"""Euclidean spaces inside ``C(K)``: the circle map, stereographic covers and filling curves."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import pdist

from ..convex_geometry import LqNorm, sphere_grid
from ..errors import CoverageUncertified, PreconditionError
from ..metric_core import BitopModel, interval_grid
from .core import EmbeddingMap, verify_isometry

COVER_TOL = 0.1


def embed_euclid2_circle(grid_n: int, test_vectors=None, lip_sample: int | None = None):
    """``Psi(t) = (cos pi t, sin pi t)`` on ``interval_grid(grid_n)``; returns ``(E, report)``."""
    if grid_n < 2:
        raise PreconditionError("grid_n must be >= 2")
    model = interval_grid(grid_n)
    t = model.coords[:, 0]
    psi = np.column_stack([np.cos(np.pi * t), np.sin(np.pi * t)])
    E = EmbeddingMap(model, psi, LqNorm(2, 2.0), label="circle")
    report = verify_isometry(E, test_vectors, lip_sample=lip_sample, construction="circle",
                             params={"grid_n": grid_n})
    E.report = report
    return E, report


def inverse_stereographic(y: np.ndarray) -> np.ndarray:
    """``y -> (2y, 1 - |y|^2) / (1 + |y|^2)``; 0 goes to the north pole."""
    y = np.atleast_2d(np.asarray(y, dtype=float))
    s = np.sum(y * y, axis=1, keepdims=True)
    return np.hstack([2 * y, 1 - s]) / (1 + s)


def cover_map(u: np.ndarray) -> np.ndarray:
    """Cube ``[0,1]^n`` to ``S^n``: rescale to ``[-1,1]^n`` and project stereographically.

    The image contains the closed upper hemisphere, the image of the unit
    disc of the rescaled cube.
    """
    return inverse_stereographic(2.0 * np.asarray(u, dtype=float) - 1.0)


@dataclass
class SphereCover:
    n: int
    grid: int
    cube_points: np.ndarray
    sphere_points: np.ndarray
    coverage_defect: float
    lipschitz: float
    test_points: int

    def to_dict(self) -> dict:
        return {"n": self.n, "grid": self.grid, "nodes_per_axis": int(round(len(self.cube_points) ** (1 / self.n))),
                "coverage_defect": self.coverage_defect, "lipschitz": self.lipschitz,
                "test_points": self.test_points}


def symmetric_coverage(points: np.ndarray, targets: np.ndarray) -> float:
    """Largest Euclidean distance from a target to ``points U -points``."""
    tree = cKDTree(np.vstack([points, -points]))
    dist, _ = tree.query(targets)
    return float(dist.max())


def sphere_cover(n: int, grid: int) -> SphereCover:
    """Tabulate :func:`cover_map` on a cube grid with an odd number of nodes per axis.

    The centre node is present, so the north pole is hit exactly.  The
    coverage defect is measured against ``sphere_grid(n, grid)``.
    """
    if n not in (1, 2):
        raise PreconditionError("sphere_cover supports n in {1, 2}")
    if grid < 8:
        raise PreconditionError("grid must be >= 8")
    nodes = 2 * (grid // 2) + 1
    axis = np.linspace(0.0, 1.0, nodes)
    U = np.array(np.meshgrid(*([axis] * n), indexing="ij")).reshape(n, -1).T
    S = cover_map(U)
    targets = sphere_grid(n, grid)
    cov = symmetric_coverage(S, targets)
    lip = float(np.max(pdist(S) / pdist(U)))
    return SphereCover(n, grid, U, S, cov, lip, len(targets))


def embed_euclid_via_cover(n: int, model: BitopModel, tolerance: float = COVER_TOL, test_vectors=None,
                           lip_sample: int | None = 50):
    """``Psi = cover_map o (first n coordinates)`` on a Hilbert-cube grid.

    Gives an almost-isometric copy of Euclidean ``R^{n+1}``; the isometry
    defect is at most the coverage defect.  Raises
    :class:`CoverageUncertified` when the coverage defect exceeds
    ``tolerance``.  Returns ``(E, report)``.
    """
    if n not in (1, 2):
        raise PreconditionError("embed_euclid_via_cover supports n in {1, 2}")
    if model.coords is None or model.coords.shape[1] < n:
        raise PreconditionError(f"model needs at least {n} coordinates")
    psi = cover_map(model.coords[:, :n])
    norm = LqNorm(n + 1, 2.0)
    E = EmbeddingMap(model, psi, norm, label=f"cover S^{n} on {model.name}")
    report = verify_isometry(E, test_vectors, lip_sample=lip_sample, construction="cover",
                             params={"n": n, "model": model.name, "tolerance": tolerance})
    if report.coverage_defect > tolerance:
        raise CoverageUncertified(report.coverage_defect, tolerance)
    E.report = report
    return E, report


def hilbert_d2xy(order: int, d: np.ndarray) -> np.ndarray:
    """Cell ``(x, y)`` visited at step ``d`` of the Hilbert curve on a ``2^order`` grid."""
    d = np.asarray(d, dtype=np.int64)
    x = np.zeros_like(d)
    y = np.zeros_like(d)
    t = d.copy()
    s = 1
    side = 1 << order
    while s < side:
        rx = 1 & (t // 2)
        ry = 1 & (t ^ rx)
        flip = ry == 0
        swap_x = np.where(flip & (rx == 1), s - 1 - x, x)
        swap_y = np.where(flip & (rx == 1), s - 1 - y, y)
        x, y = np.where(flip, swap_y, swap_x), np.where(flip, swap_x, swap_y)
        x = x + s * rx
        y = y + s * ry
        t = t // 4
        s *= 2
    return np.column_stack([x, y])


def hilbert_curve(order: int) -> np.ndarray:
    """Centres of the ``4^order`` cells of ``[0,1]^2`` in Hilbert order."""
    if order < 0:
        raise PreconditionError("order must be nonnegative")
    cells = hilbert_d2xy(order, np.arange(4 ** order))
    return (cells + 0.5) / (1 << order)


def filling_curve_demo(refinements, test_vectors=None, lip_sample: int | None = 0) -> dict:
    """Near-isometric copies of Euclidean ``R^3`` over interval grids built from Hilbert curves.

    Level ``k`` uses ``interval_grid(4^k)`` and ``Psi(t_i) = cover_map(h_k(i))``.
    The Lipschitz constant of ``Psi`` (the best bound on ``L(J(x)) / ||x||``)
    roughly doubles per level while the isometry defect shrinks.  The
    circle embedding on the same grids is reported for contrast; its
    constant stays below ``pi``.
    """
    levels = [int(k) for k in refinements]
    if any(b <= a for a, b in zip(levels, levels[1:])):
        raise PreconditionError("refinements must be increasing")
    rows = []
    for k in levels:
        pts = hilbert_curve(k)
        model = interval_grid(len(pts)) if len(pts) > 1 else interval_grid(2)
        if len(pts) == 1:
            pts = np.vstack([pts, pts])
        E = EmbeddingMap(model, cover_map(pts), LqNorm(3, 2.0), label=f"hilbert curve level {k}")
        rep = verify_isometry(E, test_vectors, lip_sample=lip_sample, construction="filling_curve",
                              params={"level": k})
        _, circ = embed_euclid2_circle(model.n, test_vectors=test_vectors, lip_sample=0)
        rows.append({
            "level": k,
            "points": model.n,
            "lip": rep.psi_lip,
            "max_lip": rep.max_lip,
            "isometry_defect": rep.isometry_defect,
            "coverage_defect": rep.coverage_defect,
            "circle_lip": circ.psi_lip,
            "circle_defect": circ.isometry_defect,
        })
    ratios = [(a["level"], b["level"], b["lip"] / a["lip"])
              for a in rows for b in rows if b["level"] == a["level"] + 2]
    defects = [r["isometry_defect"] for r in rows]
    return {
        "rows": rows,
        "two_level_ratios": ratios,
        "defect_monotone": all(b < a for a, b in zip(defects, defects[1:])),
        "circle_max_lip": max(r["circle_lip"] for r in rows) if rows else 0.0,
    }
