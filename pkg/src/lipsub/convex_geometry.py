"""Polyhedral and l_q norms on R^n, polar duality and dual extreme points.

Vertex enumeration is brute-force double description: every ``dim``-subset
of facet functionals is intersected and the feasible solutions kept.  That
is only sensible in low dimension, so polyhedral work is capped at
``MAX_DIM``.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.optimize import linprog

from .errors import DegenerateBall, PreconditionError, UnsupportedDimension

MAX_DIM = 4
DEDUP_TOL = 1e-9
FEAS_TOL = 1e-9


def _dedup(points: np.ndarray, tol: float = DEDUP_TOL) -> np.ndarray:
    kept: list[np.ndarray] = []
    for p in points:
        if all(np.linalg.norm(p - q) > tol for q in kept):
            kept.append(p)
    return np.array(kept).reshape(-1, points.shape[1] if points.ndim == 2 else 0)


def _canonical_order(points: np.ndarray) -> np.ndarray:
    """Sort rows in descending lexicographic order of their rounded coordinates."""
    if len(points) == 0:
        return points
    points = points + 0.0  # drop negative zeros
    keys = np.round(points, 9)
    order = np.lexsort(tuple(-keys[:, k] for k in reversed(range(keys.shape[1]))))
    return points[order]


def vertices_of_halfspaces(A: np.ndarray, tol: float = FEAS_TOL) -> np.ndarray:
    """Vertices of the polytope ``{z : A z <= 1}`` (assumed bounded)."""
    A = np.asarray(A, dtype=float)
    m, dim = A.shape
    if np.linalg.matrix_rank(A) < dim:
        raise DegenerateBall("constraints do not bound the body")
    found = []
    for rows in itertools.combinations(range(m), dim):
        sub = A[list(rows)]
        if abs(np.linalg.det(sub)) < 1e-12:
            continue
        z = np.linalg.solve(sub, np.ones(dim))
        if np.all(A @ z <= 1 + tol):
            found.append(z)
    if not found:
        raise DegenerateBall("no vertices found")
    return _canonical_order(_dedup(np.array(found)))


def _symmetrize(rep: np.ndarray) -> np.ndarray:
    rep = np.asarray(rep, dtype=float)
    if rep.ndim != 2:
        raise PreconditionError("representation must be a list of vectors")
    return _dedup(np.vstack([rep, -rep]))


def _is_symmetric(rep: np.ndarray) -> bool:
    return all(np.min(np.linalg.norm(rep + v, axis=1)) <= DEDUP_TOL for v in rep)


class PolyhedralNorm:
    """A norm on ``R^dim`` whose unit ball is an origin-symmetric polytope.

    Give exactly one of ``v_rep`` (unit-ball vertices) or ``h_rep`` (facet
    functionals ``u`` with facet ``<u, x> = 1``).  Representations are
    closed under negation on construction when ``symmetrize`` is set,
    otherwise a non-symmetric representation is rejected.
    """

    def __init__(self, dim: int, v_rep=None, h_rep=None, name: str | None = None,
                 symmetrize: bool = True):
        if (v_rep is None) == (h_rep is None):
            raise PreconditionError("give exactly one of v_rep or h_rep")
        if dim < 1:
            raise PreconditionError("dim must be positive")
        self.dim = int(dim)
        self.name = name
        rep = np.asarray(v_rep if v_rep is not None else h_rep, dtype=float).reshape(-1, self.dim)
        if symmetrize:
            rep = _symmetrize(rep)
        elif not _is_symmetric(rep):
            raise PreconditionError("representation is not symmetric under negation")
        if np.linalg.matrix_rank(rep) < self.dim:
            raise DegenerateBall("representation does not span R^dim; the unit ball is flat or unbounded")
        self.v_rep = rep if v_rep is not None else None
        self.h_rep = rep if h_rep is not None else None

    # -- enumeration -------------------------------------------------------

    def _check_dim(self):
        if self.dim > MAX_DIM:
            raise UnsupportedDimension(f"vertex enumeration is capped at dimension {MAX_DIM}")

    @cached_property
    def ball_vertices(self) -> np.ndarray:
        """Irredundant vertices of the unit ball."""
        self._check_dim()
        if self.dim == 1:
            scale = np.max(np.abs(self.v_rep)) if self.v_rep is not None else 1 / np.max(np.abs(self.h_rep))
            return np.array([[scale], [-scale]])
        return vertices_of_halfspaces(self.dual_extreme_points)

    @cached_property
    def dual_extreme_points(self) -> np.ndarray:
        """Extreme points of the dual unit ball (the facet functionals)."""
        self._check_dim()
        if self.dim == 1:
            scale = 1 / np.max(np.abs(self.v_rep)) if self.v_rep is not None else np.max(np.abs(self.h_rep))
            return np.array([[scale], [-scale]])
        if self.v_rep is not None:
            return vertices_of_halfspaces(self.v_rep)
        return vertices_of_halfspaces(vertices_of_halfspaces(self.h_rep))

    # -- evaluation --------------------------------------------------------

    def _as_rows(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise PreconditionError(f"vector of dimension {x.shape[-1]} for a norm on R^{self.dim}")
        return x

    def norm(self, x):
        """Gauge of the unit ball; ``x`` may be a single vector or a stack of rows."""
        x = self._as_rows(x)
        U = self.h_rep if self.h_rep is not None else self.dual_extreme_points
        return np.max(np.abs(x @ U.T), axis=-1)

    def dual_norm(self, y):
        y = self._as_rows(y)
        V = self.v_rep if self.v_rep is not None else self.ball_vertices
        return np.max(np.abs(y @ V.T), axis=-1)

    def gauge_lp(self, x) -> float:
        """Minkowski gauge computed by linear programming over the vertices.

        Solves ``min sum(lam)`` subject to ``V^T lam = x, lam >= 0``; an
        independent route to :meth:`norm`.
        """
        x = self._as_rows(x)
        V = self.v_rep if self.v_rep is not None else self.ball_vertices
        res = linprog(np.ones(len(V)), A_eq=V.T, b_eq=x, bounds=(0, None), method="highs")
        if res.status != 0:
            raise DegenerateBall(f"gauge LP failed: {res.message}")
        return float(res.fun)

    def dual_extreme_representatives(self) -> np.ndarray:
        """One dual extreme point per antipodal pair (first nonzero coordinate positive)."""
        ext = self.dual_extreme_points
        keep = []
        for e in ext:
            nz = np.flatnonzero(np.abs(e) > DEDUP_TOL)
            if e[nz[0]] > 0:
                keep.append(e)
        return _canonical_order(np.array(keep))

    def to_dict(self) -> dict:
        doc = {"dim": self.dim}
        if self.v_rep is not None:
            doc["v_rep"] = self.v_rep.tolist()
        else:
            doc["h_rep"] = self.h_rep.tolist()
        if self.name:
            doc["name"] = self.name
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "PolyhedralNorm":
        return cls(doc["dim"], v_rep=doc.get("v_rep"), h_rep=doc.get("h_rep"), name=doc.get("name"))

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def __repr__(self):
        return f"PolyhedralNorm(dim={self.dim}, name={self.name!r})"


@dataclass(frozen=True)
class DualBall:
    dim: int
    ext_points: np.ndarray

    def __len__(self):
        return len(self.ext_points)


class LqNorm:
    """The ``l_q`` norm on ``R^dim`` (``q`` in [1, inf])."""

    def __init__(self, dim: int, q: float):
        if q < 1:
            raise PreconditionError("q must be >= 1")
        self.dim = int(dim)
        self.q = float(q)
        self.name = f"l{_fmt_q(self.q)}^{self.dim}"

    @property
    def conjugate(self) -> float:
        return conjugate_exponent(self.q)

    def norm(self, x):
        return np.linalg.norm(np.asarray(x, dtype=float), ord=self.q, axis=-1)

    def dual_norm(self, y):
        return np.linalg.norm(np.asarray(y, dtype=float), ord=self.conjugate, axis=-1)

    def dual_extreme_points(self, resolution: int = 16) -> np.ndarray:
        """Extreme points of the dual ball.

        Finite for ``q`` in {1, inf}.  Otherwise the whole dual sphere is
        extreme and a normalised :func:`sphere_grid` sample is returned.
        """
        if self.q == 1.0:
            return np.array(list(itertools.product((1.0, -1.0), repeat=self.dim)))
        if math.isinf(self.q):
            eye = np.eye(self.dim)
            return np.vstack([eye, -eye])
        if self.dim == 1:
            return np.array([[1.0], [-1.0]])
        pts = sphere_grid(self.dim - 1, resolution)
        return pts / self.dual_norm(pts)[:, None]

    def to_dict(self) -> dict:
        return {"dim": self.dim, "q": "inf" if math.isinf(self.q) else self.q, "name": self.name}

    def __repr__(self):
        return f"LqNorm(dim={self.dim}, q={self.q:g})"


def _fmt_q(q: float) -> str:
    return "inf" if math.isinf(q) else f"{q:g}"


def conjugate_exponent(q: float) -> float:
    if q == 1.0:
        return math.inf
    if math.isinf(q):
        return 1.0
    return q / (q - 1.0)


def norm_eval(N, x):
    """Norm of ``x`` (vector or stack of rows) under ``N``."""
    return N.norm(x)


def polar_vertices(N: PolyhedralNorm) -> DualBall:
    """Extreme points of the polar body, i.e. of the dual unit ball."""
    if N.dim > MAX_DIM:
        raise UnsupportedDimension(f"vertex enumeration is capped at dimension {MAX_DIM}")
    return DualBall(N.dim, N.dual_extreme_points)


def polar(N: PolyhedralNorm) -> PolyhedralNorm:
    """The dual norm as a :class:`PolyhedralNorm` given by its ball vertices."""
    return PolyhedralNorm(N.dim, v_rep=polar_vertices(N).ext_points,
                          name=f"polar({N.name})" if N.name else None)


def face_count(N: PolyhedralNorm) -> int:
    """Number of facets of the unit ball."""
    return len(polar_vertices(N).ext_points)


# -- presets ------------------------------------------------------------------


def l1_norm(dim: int) -> PolyhedralNorm:
    return PolyhedralNorm(dim, v_rep=np.eye(dim), name=f"l1^{dim}")


def linf_norm(dim: int) -> PolyhedralNorm:
    return PolyhedralNorm(dim, h_rep=np.eye(dim), name=f"linf^{dim}")


def hexagon_norm() -> PolyhedralNorm:
    """Regular hexagon with vertices (+-1, 0), (+-1/2, +-sqrt(3)/2)."""
    angles = np.arange(6) * np.pi / 3
    return PolyhedralNorm(2, v_rep=np.column_stack([np.cos(angles), np.sin(angles)]), name="hexagon")


PRESETS = {
    "l1_2": lambda: l1_norm(2),
    "linf_2": lambda: linf_norm(2),
    "l1_3": lambda: l1_norm(3),
    "linf_3": lambda: linf_norm(3),
    "hexagon": hexagon_norm,
}


def preset(name: str) -> PolyhedralNorm:
    try:
        return PRESETS[name]()
    except KeyError:
        raise PreconditionError(f"unknown norm preset {name!r}; choose from {sorted(PRESETS)}") from None


# -- sphere sampling ----------------------------------------------------------


def sphere_grid(n: int, resolution: int) -> np.ndarray:
    """Deterministic quasi-uniform sample of the unit sphere ``S^n`` in ``R^{n+1}``.

    ``n = 1`` gives ``2*resolution`` equally spaced circle points starting
    at (1, 0), rounded up to a multiple of 4 so that the axes are included.  For ``n`` in {2, 3} an equiangular grid with ``2r+1`` nodes
    per axis is laid on every facet of the cube and projected radially;
    facet centres give the points ``+-e_i``.
    """
    if n not in (1, 2, 3):
        raise UnsupportedDimension("sphere_grid supports n in {1, 2, 3}")
    if resolution < 2:
        raise PreconditionError("resolution must be >= 2")
    if n == 1:
        m = 4 * math.ceil(resolution / 2)
        t = np.arange(m) * (2 * np.pi / m)
        pts = np.column_stack([np.cos(t), np.sin(t)])
        # exact axis points
        pts[np.abs(pts) < 1e-15] = 0.0
        return pts
    ticks = np.tan(np.linspace(-np.pi / 4, np.pi / 4, 2 * resolution + 1))
    ticks[resolution] = 0.0
    ticks[0], ticks[-1] = -1.0, 1.0
    faces = []
    free = np.array(list(itertools.product(ticks, repeat=n)))
    for axis in range(n + 1):
        for sign in (1.0, -1.0):
            face = np.insert(free, axis, sign, axis=1)
            faces.append(face)
    pts = np.vstack(faces)
    pts = np.unique(np.round(pts, 12), axis=0)
    pts = pts / np.linalg.norm(pts, axis=1)[:, None]
    return _canonical_order(pts)


def mesh_size(points: np.ndarray) -> float:
    """Largest nearest-neighbour Euclidean distance within ``points``."""
    from scipy.spatial import cKDTree

    dist, _ = cKDTree(points).query(points, k=2)
    return float(dist[:, 1].max())
