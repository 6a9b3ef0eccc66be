"""Finite bitopological models and the Lipschitz kernels that act on them.

A :class:`BitopModel` is a finite point set carrying two metrics: a coarse
one ``rho`` standing in for the compact topology and a finer one ``d``
that plays the role of the lower semicontinuous metric.  Neighbourhoods
are closed ``rho``-balls whose radius is at least the model resolution
``delta``.

Distances are float64.  Small models keep a dense matrix; generated
models keep coordinates and produce distance rows on demand, so that a
10^4 point interval grid never materialises a 800 MB matrix.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy.spatial.distance import cdist

from . import _kernels
from .errors import NotLipschitzError, PreconditionError

AXIOM_TOL = 1e-12
VALUE_TOL = 1e-9


# ---------------------------------------------------------------------------
# metrics


@dataclass(frozen=True, eq=False)
class FiniteMetric:
    """A metric on ``n`` labelled points.

    Either ``matrix`` is given (dense storage) or ``kind`` names a formula
    evaluated on ``coords``:

    ``minkowski``   ``params['p']`` norm of coordinate differences
    ``weighted_l1`` ``sum_k w_k |x_k - y_k|`` with ``params['weights']``
    ``discrete``    ``params['gap']`` between distinct points
    ``dyadic``      ``2**-k`` with ``k`` the first (1-based) differing bit
    """

    point_ids: tuple
    matrix: np.ndarray | None = None
    coords: np.ndarray | None = None
    kind: str = "dense"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.matrix is None and self.kind == "dense":
            raise PreconditionError("dense metric needs a matrix")
        if self.matrix is not None:
            m = np.asarray(self.matrix, dtype=float)
            if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] != len(self.point_ids):
                raise PreconditionError(f"distance matrix of shape {m.shape} does not match point set")
            if not np.all(np.isfinite(m)):
                raise PreconditionError("distance matrix has non-finite entries")
            m.setflags(write=False)
            object.__setattr__(self, "matrix", m)
        if self.coords is not None:
            c = np.asarray(self.coords)
            c.setflags(write=False)
            object.__setattr__(self, "coords", c)

    @classmethod
    def from_matrix(cls, matrix, point_ids=None) -> "FiniteMetric":
        matrix = np.asarray(matrix, dtype=float)
        if point_ids is None:
            point_ids = tuple(range(matrix.shape[0]))
        return cls(tuple(point_ids), matrix=matrix)

    @property
    def n(self) -> int:
        return len(self.point_ids)

    def block(self, rows=None, cols=None) -> np.ndarray:
        """Distances between the points indexed by ``rows`` and ``cols``."""
        rows = np.arange(self.n) if rows is None else np.asarray(rows, dtype=np.intp)
        cols = np.arange(self.n) if cols is None else np.asarray(cols, dtype=np.intp)
        if self.matrix is not None:
            return self.matrix[np.ix_(rows, cols)]
        X = self.coords
        if self.kind == "minkowski":
            p = self.params["p"]
            if math.isinf(p):
                return cdist(X[rows], X[cols], "chebyshev")
            return cdist(X[rows], X[cols], "minkowski", p=p)
        if self.kind == "weighted_l1":
            w = np.asarray(self.params["weights"], dtype=float)
            return cdist(X[rows], X[cols], "minkowski", p=1, w=w)
        if self.kind == "discrete":
            return self.params["gap"] * (rows[:, None] != cols[None, :]).astype(float)
        if self.kind == "dyadic":
            diff = X[rows][:, None, :] != X[cols][None, :, :]
            first = np.argmax(diff, axis=2)
            return np.where(diff.any(axis=2), np.ldexp(1.0, -(first + 1)), 0.0)
        raise PreconditionError(f"unknown metric kind {self.kind!r}")

    def row_blocks(self, rows=None):
        """Yield ``(row_indices, distance_block)`` pairs covering ``rows``."""
        rows = np.arange(self.n) if rows is None else np.asarray(rows, dtype=np.intp)
        step = max(1, _kernels.BLOCK_ENTRIES // max(self.n, 1))
        for s in range(0, len(rows), step):
            r = rows[s : s + step]
            yield r, self.block(r)

    @cached_property
    def dist(self) -> np.ndarray:
        """Full dense matrix (materialised on first access)."""
        if self.matrix is not None:
            return self.matrix
        m = self.block()
        m.setflags(write=False)
        return m

    def diameter(self, subset=None) -> float:
        idx = np.arange(self.n) if subset is None else np.asarray(subset, dtype=np.intp)
        if len(idx) < 2:
            return 0.0
        return float(max(b.max() for _, b in _sub_blocks(self, idx)))

    def nearest_neighbour(self) -> np.ndarray:
        """Distance from every point to its closest other point."""
        out = np.empty(self.n)
        for r, b in self.row_blocks():
            b = b.copy()
            b[np.arange(len(r)), r] = np.inf
            out[r] = b.min(axis=1)
        return out

    def to_json(self) -> list:
        return self.dist.tolist()


def _sub_blocks(metric: FiniteMetric, idx: np.ndarray):
    step = max(1, _kernels.BLOCK_ENTRIES // max(len(idx), 1))
    for s in range(0, len(idx), step):
        yield idx[s : s + step], metric.block(idx[s : s + step], idx)


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)
    truncated: bool = False

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok

    def __len__(self):
        return len(self.violations)


def validate_metric(m: FiniteMetric | np.ndarray, tol: float = AXIOM_TOL,
                    max_report: int = 1000) -> ValidationReport:
    """Check the metric axioms and list every violation found.

    Each violation is a tuple ``(axiom, indices, amount)``.  Listing stops
    after ``max_report`` entries and sets ``truncated``.
    """
    D = m.dist if isinstance(m, FiniteMetric) else np.asarray(m, dtype=float)
    rep = ValidationReport()
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        rep.violations.append(("shape", D.shape, float("nan")))
        return rep
    if not np.all(np.isfinite(D)):
        rep.violations.append(("finite", tuple(map(tuple, np.argwhere(~np.isfinite(D))[:10])), float("nan")))
        return rep

    def add(kind, idx, amount):
        if len(rep.violations) >= max_report:
            rep.truncated = True
            return False
        rep.violations.append((kind, tuple(int(i) for i in idx), float(amount)))
        return True

    n = D.shape[0]
    for i in np.flatnonzero(np.abs(np.diag(D)) > tol):
        add("identity", (i, i), D[i, i])
    asym = np.abs(D - D.T)
    for i, j in zip(*np.nonzero(np.triu(asym > tol, 1))):
        add("symmetry", (i, j), asym[i, j])
    off = ~np.eye(n, dtype=bool)
    for i, j in zip(*np.nonzero(np.triu((D <= 0) & off, 1))):
        add("separation", (i, j), D[i, j])
    for i, j in zip(*np.nonzero((D < 0) & ~off)):
        add("nonnegative", (i, j), D[i, j])
    # triangle: D[i,j] <= D[i,k] + D[k,j]
    for k in range(n):
        excess = D - (D[:, [k]] + D[[k], :])
        bad = np.argwhere(excess > tol)
        for i, j in bad:
            if i == k or j == k:
                continue
            if not add("triangle", (i, k, j), excess[i, j]):
                return rep
    return rep


# ---------------------------------------------------------------------------
# models


@dataclass(frozen=True, eq=False)
class BitopModel:
    """Point set with a coarse metric ``rho``, a fine metric ``d`` and a resolution."""

    rho: FiniteMetric
    d: FiniteMetric
    delta: float
    spec: dict = field(default_factory=dict)
    coords: np.ndarray | None = None
    base_point: int | None = None

    def __post_init__(self):
        if self.rho.point_ids != self.d.point_ids:
            raise PreconditionError("rho and d must share the point set")
        if not self.delta > 0:
            raise PreconditionError(f"resolution delta must be positive, got {self.delta}")

    @property
    def n(self) -> int:
        return self.d.n

    @property
    def point_ids(self) -> tuple:
        return self.d.point_ids

    @property
    def name(self) -> str:
        if not self.spec:
            return "custom"
        args = ",".join(f"{v}" for k, v in self.spec.items() if k != "kind")
        return f"{self.spec['kind']}({args})"

    def check_finer(self, tol: float = AXIOM_TOL) -> list:
        """Pairs where ``d < rho``; empty when the fine metric dominates."""
        bad = []
        for r, db in self.d.row_blocks():
            rb = self.rho.block(r)
            for a, j in np.argwhere(db < rb - tol):
                bad.append((int(r[a]), int(j)))
        return bad

    def rho_ball(self, x: int, radius: float) -> np.ndarray:
        """Indices of the closed ``rho``-ball around point ``x``."""
        return np.flatnonzero(self.rho.block([x])[0] <= radius + AXIOM_TOL)

    def to_dict(self) -> dict:
        doc = {
            "points": [_jsonable(p) for p in self.point_ids],
            "rho_matrix": self.rho.to_json(),
            "d_matrix": self.d.to_json(),
            "delta": self.delta,
            "spec": self.spec,
        }
        if self.coords is not None:
            doc["coords"] = np.asarray(self.coords).tolist()
        if self.base_point is not None:
            doc["base_point"] = self.base_point
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "BitopModel":
        ids = tuple(_hashable(p) for p in doc["points"])
        coords = np.asarray(doc["coords"]) if doc.get("coords") is not None else None
        return cls(
            rho=FiniteMetric(ids, matrix=np.asarray(doc["rho_matrix"], dtype=float)),
            d=FiniteMetric(ids, matrix=np.asarray(doc["d_matrix"], dtype=float)),
            delta=float(doc["delta"]),
            spec=dict(doc.get("spec") or {}),
            coords=coords,
            base_point=doc.get("base_point"),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def loads(cls, text: str) -> "BitopModel":
        return cls.from_dict(json.loads(text))


def _jsonable(p):
    if isinstance(p, tuple):
        return [_jsonable(q) for q in p]
    if isinstance(p, np.generic):
        return p.item()
    return p


def _hashable(p):
    if isinstance(p, list):
        return tuple(_hashable(q) for q in p)
    return p


@dataclass(eq=False)
class ScalarField:
    """One real value per model point."""

    model: BitopModel
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.model.n,):
            raise PreconditionError(f"field has shape {v.shape}, model has {self.model.n} points")
        if not np.all(np.isfinite(v)):
            raise PreconditionError("field values must be finite")
        v.setflags(write=False)
        self.values = v

    @cached_property
    def lip_d(self) -> float:
        return lip_constant(self, "fine")

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))


# ---------------------------------------------------------------------------
# Lipschitz kernels


def _metric_of(model: BitopModel, metric_choice: str) -> FiniteMetric:
    if metric_choice in ("fine", "d"):
        return model.d
    if metric_choice in ("coarse", "rho"):
        return model.rho
    raise PreconditionError(f"metric_choice must be 'fine' or 'coarse', got {metric_choice!r}")


def pairwise_lipschitz(values, metric: FiniteMetric) -> np.ndarray:
    """Lipschitz constant of every column of ``values`` (shape (n,) or (n, m))."""
    F = np.asarray(values, dtype=float)
    squeeze = F.ndim == 1
    if squeeze:
        F = F[:, None]
    F = np.ascontiguousarray(F)
    out = np.zeros(F.shape[1])
    if metric.n >= 2:
        for r, block in metric.row_blocks():
            _kernels.lip_block(F, np.ascontiguousarray(block), int(r[0]), out)
    return out[0] if squeeze else out


def lip_witness(values, metric: FiniteMetric):
    """Return ``(L, (i, j))`` with the first maximising pair in row-major order."""
    f = np.ascontiguousarray(np.asarray(values, dtype=float))
    best = np.zeros(1)
    wi = np.full(1, -1, dtype=np.int64)
    wj = np.full(1, -1, dtype=np.int64)
    if metric.n >= 2:
        for r, block in metric.row_blocks():
            _kernels.lip_block_witness(f, np.ascontiguousarray(block), int(r[0]), best, wi, wj)
    pair = (int(wi[0]), int(wj[0])) if wi[0] >= 0 else None
    return float(best[0]), pair


def lip_constant(f: ScalarField, metric_choice: str = "fine") -> float:
    """Exact maximum of ``|f(s)-f(t)| / dist(s, t)`` over distinct pairs."""
    metric = _metric_of(f.model, metric_choice)
    if metric_choice in ("fine", "d") and "lip_d" in f.__dict__:
        return f.__dict__["lip_d"]
    value = float(pairwise_lipschitz(f.values, metric))
    if metric_choice in ("fine", "d"):
        f.__dict__["lip_d"] = value
    return value


def distance_to_set(metric: FiniteMetric, H) -> np.ndarray:
    """``min_{h in H} dist(x, h)`` for every point ``x``."""
    H = np.asarray(H, dtype=np.intp)
    if H.size == 0:
        raise PreconditionError("reference set H is empty")
    out = np.empty(metric.n)
    step = max(1, _kernels.BLOCK_ENTRIES // max(metric.n, 1))
    for s in range(0, len(H), step):
        part = metric.block(H[s : s + step]).min(axis=0)
        out = part if s == 0 else np.minimum(out, part)
    return out


def closed_ball(model: BitopModel, H, r: float, metric_choice: str = "fine") -> np.ndarray:
    """Indices of ``{x : d(H, x) <= r}``."""
    if r < 0:
        raise PreconditionError("radius must be nonnegative")
    dist = distance_to_set(_metric_of(model, metric_choice), H)
    return np.flatnonzero(dist <= r)


def mcshane_extend(model: BitopModel, H, values, L: float, value_range=None,
                   metric_choice: str = "fine") -> ScalarField:
    """Extend ``values`` given on ``H`` to the whole model.

    The extension is ``min_h (f(h) + L d(x, h))`` clipped to ``value_range``.
    Clipping keeps both the range and the Lipschitz bound; values on ``H``
    are copied verbatim.

    Raises :class:`NotLipschitzError` if the data on ``H`` exceeds ``L``.
    """
    H = np.asarray(H, dtype=np.intp)
    f = np.asarray(values, dtype=float)
    if H.size == 0:
        raise PreconditionError("cannot extend from an empty set")
    if f.shape != H.shape:
        raise PreconditionError("values must match H")
    if len(np.unique(H)) != len(H):
        raise PreconditionError("H contains repeated points")
    if not L > 0:
        raise PreconditionError("L must be positive")
    a, b = value_range if value_range is not None else (-np.inf, np.inf)
    if a > b or f.min() < a or f.max() > b:
        raise PreconditionError(f"data range [{f.min():g}, {f.max():g}] not inside [{a:g}, {b:g}]")
    metric = _metric_of(model, metric_choice)

    sub = FiniteMetric(tuple(range(len(H))), matrix=metric.block(H, H))
    ratio, pair = lip_witness(f, sub)
    if ratio > L * (1 + VALUE_TOL):
        raise NotLipschitzError((int(H[pair[0]]), int(H[pair[1]])), ratio, L)

    ext = np.full(metric.n, np.inf)
    step = max(1, _kernels.BLOCK_ENTRIES // max(metric.n, 1))
    for s in range(0, len(H), step):
        hb = H[s : s + step]
        cand = f[s : s + step, None] + L * metric.block(hb)
        ext = np.minimum(ext, cand.min(axis=0))
    ext = np.clip(ext, a, b)
    ext[H] = f
    return ScalarField(model, ext)


# ---------------------------------------------------------------------------
# generators


def _default_delta(rho: FiniteMetric) -> float:
    return float(rho.nearest_neighbour().max()) if rho.n > 1 else 1.0


def interval_grid(n: int, delta: float | None = None) -> BitopModel:
    """``n`` equally spaced points of [0, 1] with ``rho = d = |x - y|``."""
    if n < 2:
        raise PreconditionError("interval_grid needs n >= 2")
    x = np.linspace(0.0, 1.0, n)
    coords = x[:, None]
    ids = tuple(range(n))
    m = FiniteMetric(ids, coords=coords, kind="minkowski", params={"p": 1.0})
    return BitopModel(m, m, delta if delta is not None else 1.0 / (n - 1),
                      spec={"kind": "interval_grid", "n": n}, coords=coords, base_point=0)


def convergent_sequence(m: int, gap: float = 1.0, delta: float | None = None) -> BitopModel:
    """``{0} U {1/k : k <= m}``; ``rho`` Euclidean, ``d = gap`` off the diagonal.

    Point 0 (the limit) is the base point.  ``gap`` must be at least 1 so
    that ``d`` dominates ``rho``.
    """
    if m < 1:
        raise PreconditionError("convergent_sequence needs m >= 1")
    if gap < 1.0:
        raise PreconditionError("gap must be >= 1 so that d >= rho")
    x = np.concatenate([[0.0], 1.0 / np.arange(1, m + 1)])
    coords = x[:, None]
    ids = tuple(range(m + 1))
    rho = FiniteMetric(ids, coords=coords, kind="minkowski", params={"p": 1.0})
    d = FiniteMetric(ids, kind="discrete", params={"gap": float(gap)})
    return BitopModel(rho, d, delta if delta is not None else _default_delta(rho),
                      spec={"kind": "convergent_sequence", "m": m, "gap": gap},
                      coords=coords, base_point=0)


def cantor_tree(depth: int, delta: float | None = None) -> BitopModel:
    """All binary words of length ``depth``.

    ``rho(x, y) = 2**-k`` where ``k`` is the first (1-based) position at
    which the words differ, and ``d`` is the discrete metric.
    """
    if depth < 1:
        raise PreconditionError("cantor_tree needs depth >= 1")
    bits = np.array(list(itertools.product((0, 1), repeat=depth)), dtype=np.int8)
    ids = tuple("".join(map(str, b)) for b in bits)
    rho = FiniteMetric(ids, coords=bits, kind="dyadic")
    d = FiniteMetric(ids, kind="discrete", params={"gap": 1.0})
    return BitopModel(rho, d, delta if delta is not None else 2.0 ** -depth,
                      spec={"kind": "cantor_tree", "depth": depth}, coords=bits, base_point=0)


def sample_lq_ball(q: float, dim: int, samples: int, seed: int, include_vertices: bool = True):
    """Deterministic sample of the ``l_q`` unit ball in ``R^dim``.

    Directions are signed uniform draws normalised in the ``q``-norm and
    pushed inward by a radius ``u**(1/dim)``.  With ``include_vertices`` the
    origin and the vertices ``+-e_k`` come first.
    """
    rng = np.random.default_rng(seed)
    v = rng.uniform(-1.0, 1.0, size=(samples, dim))
    norms = np.linalg.norm(v, ord=q, axis=1)
    radius = rng.uniform(0.0, 1.0, size=samples) ** (1.0 / dim)
    pts = v / norms[:, None] * radius[:, None]
    if include_vertices:
        eye = np.eye(dim)
        anchors = np.vstack([np.zeros((1, dim)), eye, -eye])
        pts = np.vstack([anchors, pts])
    return pts


def weighted_coordinate_weights(dim: int) -> np.ndarray:
    return np.ldexp(1.0, -np.arange(1, dim + 1))


def lq_ball(q: float, dim: int, samples: int, seed: int = 0, delta: float | None = None,
            include_vertices: bool = True) -> BitopModel:
    """Sampled ``B_{l_q^dim}`` with ``d`` the ``l_q`` metric and ``rho = sum 2^-k |x_k - y_k|``."""
    if q < 1:
        raise PreconditionError("q must be >= 1")
    if dim < 1 or samples < 1:
        raise PreconditionError("dim and samples must be positive")
    pts = sample_lq_ball(q, dim, samples, seed, include_vertices)
    ids = tuple(range(len(pts)))
    d = FiniteMetric(ids, coords=pts, kind="minkowski", params={"p": float(q)})
    rho = FiniteMetric(ids, coords=pts, kind="weighted_l1",
                       params={"weights": weighted_coordinate_weights(dim).tolist()})
    return BitopModel(rho, d, delta if delta is not None else _default_delta(rho),
                      spec={"kind": "lq_ball", "q": q, "dim": dim, "samples": samples, "seed": seed},
                      coords=pts, base_point=0 if include_vertices else None)


def hilbert_cube(dim: int, grid: int, delta: float | None = None) -> BitopModel:
    """``grid**dim`` lattice of [0,1]^dim with ``rho = d = sum 2^-k |a_k - b_k|``."""
    if dim < 1 or grid < 2:
        raise PreconditionError("hilbert_cube needs dim >= 1 and grid >= 2")
    axis = np.linspace(0.0, 1.0, grid)
    pts = np.array(list(itertools.product(axis, repeat=dim)), dtype=float)
    ids = tuple(range(len(pts)))
    m = FiniteMetric(ids, coords=pts, kind="weighted_l1",
                     params={"weights": weighted_coordinate_weights(dim).tolist()})
    return BitopModel(m, m, delta if delta is not None else 2.0 ** -dim / (grid - 1),
                      spec={"kind": "hilbert_cube", "dim": dim, "grid": grid}, coords=pts, base_point=0)


FAN_SPIKE = 0.75


def fan(n: int, fan_delta: float = 0.05) -> BitopModel:
    """Apex 0 and spikes ``0.75 e_k`` (k = 1..n) in ``l_1`` coordinates.

    ``d`` is the ``l_1`` metric.  ``rho`` is the weighted coordinate metric
    with weights ``fan_delta * (1 + 2^-(k+1))``, which puts every spike at
    ``rho``-distance in ``(0.75, 0.94] * fan_delta`` from the apex while any
    two spikes are more than ``1.5 * fan_delta`` apart.  At resolution
    ``fan_delta`` each spike therefore sees only itself and the apex, and
    the apex sees every spike.
    """
    if n < 1:
        raise PreconditionError("fan needs n >= 1")
    if not 0 < fan_delta <= 0.8:
        raise PreconditionError("fan_delta must lie in (0, 0.8] so that d >= rho")
    pts = np.vstack([np.zeros((1, n)), FAN_SPIKE * np.eye(n)])
    ids = tuple(range(n + 1))
    weights = fan_delta * (1.0 + np.ldexp(1.0, -np.arange(2, n + 2)))
    d = FiniteMetric(ids, coords=pts, kind="minkowski", params={"p": 1.0})
    rho = FiniteMetric(ids, coords=pts, kind="weighted_l1", params={"weights": weights.tolist()})
    return BitopModel(rho, d, fan_delta, spec={"kind": "fan", "n": n, "fan_delta": fan_delta},
                      coords=pts, base_point=0)


def point_model() -> BitopModel:
    """The one-point space."""
    m = FiniteMetric((0,), matrix=np.zeros((1, 1)))
    return BitopModel(m, m, 1.0, spec={"kind": "point"}, base_point=0)


def from_matrices(rho, d, delta: float, point_ids: Sequence | None = None) -> BitopModel:
    rho = np.asarray(rho, dtype=float)
    ids = tuple(point_ids) if point_ids is not None else tuple(range(rho.shape[0]))
    return BitopModel(FiniteMetric(ids, matrix=rho), FiniteMetric(ids, matrix=np.asarray(d, dtype=float)),
                      delta, spec={"kind": "custom"})


_GENERATORS = {
    "interval_grid": interval_grid,
    "convergent_sequence": convergent_sequence,
    "cantor_tree": cantor_tree,
    "lq_ball": lq_ball,
    "hilbert_cube": hilbert_cube,
    "fan": fan,
    "point": point_model,
}

# short names accepted by parse_model_spec, with positional parameter order
_ALIASES = {
    "interval": ("interval_grid", ("n",)),
    "grid": ("interval_grid", ("n",)),
    "interval_grid": ("interval_grid", ("n",)),
    "seq": ("convergent_sequence", ("m", "gap")),
    "convergent_sequence": ("convergent_sequence", ("m", "gap")),
    "cantor": ("cantor_tree", ("depth",)),
    "cantor_tree": ("cantor_tree", ("depth",)),
    "lq": ("lq_ball", ("q", "dim", "samples", "seed")),
    "lq_ball": ("lq_ball", ("q", "dim", "samples", "seed")),
    "cube": ("hilbert_cube", ("dim", "grid")),
    "hilbert_cube": ("hilbert_cube", ("dim", "grid")),
    "fan": ("fan", ("n", "fan_delta")),
    "point": ("point", ()),
}

_INT_PARAMS = {"n", "m", "depth", "dim", "samples", "seed", "grid"}


def parse_model_spec(text: str, seed: int | None = None) -> dict:
    """Turn ``"fan:8"`` or ``"lq:2,6,3000"`` into a model spec dict."""
    name, _, args = text.partition(":")
    if name not in _ALIASES:
        raise PreconditionError(f"unknown model {name!r}; choose from {sorted(_ALIASES)}")
    kind, order = _ALIASES[name]
    values = [a for a in args.split(",") if a] if args else []
    if len(values) > len(order):
        raise PreconditionError(f"model {name} takes at most {len(order)} parameters")
    spec = {"kind": kind}
    for key, raw in zip(order, values):
        spec[key] = int(raw) if key in _INT_PARAMS else float(raw)
    if kind == "lq_ball" and "seed" not in spec and seed is not None:
        spec["seed"] = seed
    return spec


def make_model(spec: dict | str) -> BitopModel:
    """Build one of the standard models from a spec dict (or short string)."""
    if isinstance(spec, str):
        spec = parse_model_spec(spec)
    spec = dict(spec)
    kind = spec.pop("kind")
    if kind not in _GENERATORS:
        raise PreconditionError(f"unknown model kind {kind!r}")
    for key, value in spec.items():
        if key in _INT_PARAMS and value is not None and value <= 0 and key != "seed":
            raise PreconditionError(f"{key} must be positive")
    return _GENERATORS[kind](**spec)
