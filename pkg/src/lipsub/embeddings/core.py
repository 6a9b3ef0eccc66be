"""Embedding maps ``Psi : K -> B_{X*}`` and the isometry verifier.

A map ``Psi`` induces the operator ``J(x)(t) = <Psi(t), x>``.  ``J`` is an
isometric embedding of ``X`` into ``C(K)`` exactly when the dual extreme
points are covered by ``Psi(K) U -Psi(K)``; :func:`verify_isometry`
measures both sides of that equivalence on finite data together with the
Lipschitz constants involved.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .. import _kernels
from ..convex_geometry import DualBall, LqNorm, PolyhedralNorm
from ..errors import PreconditionError
from ..metric_core import BitopModel, FiniteMetric, ScalarField, from_matrices, pairwise_lipschitz

MEMBERSHIP_TOL = 1e-9
REL_FLOOR = 1e-6


@dataclass(eq=False)
class EmbeddingMap:
    """Per-point dual vectors ``psi[t]`` together with the source norm."""

    model: BitopModel
    psi: np.ndarray
    norm: PolyhedralNorm | LqNorm
    label: str = ""
    report: "EmbeddingReport | None" = None

    def __post_init__(self):
        psi = np.asarray(self.psi, dtype=float)
        if psi.ndim != 2 or psi.shape[0] != self.model.n:
            raise PreconditionError(f"psi has shape {psi.shape}; expected ({self.model.n}, dim)")
        if psi.shape[1] != self.norm.dim:
            raise PreconditionError("psi dimension does not match the norm")
        self.psi = psi

    @property
    def dim(self) -> int:
        return self.psi.shape[1]

    def J(self, x) -> ScalarField:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise PreconditionError(f"vector of shape {x.shape}, expected ({self.dim},)")
        return ScalarField(self.model, self.psi @ x)

    def fields(self, X) -> np.ndarray:
        """Matrix whose column ``k`` is ``J(X[k])``."""
        return self.psi @ np.asarray(X, dtype=float).T

    def dual_membership(self) -> float:
        """Largest dual norm of any ``Psi(t)``; at most 1 for a valid map."""
        return float(np.max(self.norm.dual_norm(self.psi)))

    def scaled(self, s: float) -> "EmbeddingMap":
        return EmbeddingMap(self.model, s * self.psi, self.norm, label=f"{self.label}*{s:g}")

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "model": self.model.to_dict(),
            "psi": self.psi.tolist(),
            "norm": self.norm.to_dict(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "EmbeddingMap":
        nd = doc["norm"]
        if "q" in nd:
            q = math.inf if nd["q"] == "inf" else float(nd["q"])
            norm = LqNorm(nd["dim"], q)
        else:
            norm = PolyhedralNorm.from_dict(nd)
        return cls(BitopModel.from_dict(doc["model"]), np.asarray(doc["psi"]), norm, label=doc.get("label", ""))


@dataclass(eq=False)
class SubspaceBasis:
    """Finitely many fields ``f_1..f_m`` meant to span a copy of a sequence space.

    ``target`` names the norm the coefficients should see: ``c0`` (max),
    ``ell1`` (sum of absolute values) or ``linf_n``.
    """

    model: BitopModel
    matrix: np.ndarray  # (n, m), column k is f_k
    target: str
    eps: float | None = None
    meta: dict = field(default_factory=dict)

    @property
    def m(self) -> int:
        return self.matrix.shape[1]

    @property
    def fields(self) -> list[ScalarField]:
        return [ScalarField(self.model, self.matrix[:, k]) for k in range(self.m)]

    def combine(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=float)
        if a.shape[-1] > self.m:
            raise PreconditionError(f"{a.shape[-1]} coefficients for {self.m} basis fields")
        if a.shape[-1] < self.m:
            a = np.concatenate([a, np.zeros(a.shape[:-1] + (self.m - a.shape[-1],))], axis=-1)
        return self.matrix @ a.T

    def coefficient_norm(self, A) -> np.ndarray:
        A = np.atleast_2d(np.asarray(A, dtype=float))
        if self.target == "ell1":
            return np.sum(np.abs(A), axis=1)
        return np.max(np.abs(A), axis=1)

    def source_norm(self):
        return LqNorm(self.m, 1.0 if self.target == "ell1" else math.inf)

    def as_embedding(self, label: str = "") -> EmbeddingMap:
        """View the basis as ``Psi(t) = (f_1(t), ..., f_m(t))``."""
        return EmbeddingMap(self.model, self.matrix, self.source_norm(), label=label or self.target)

    def lip_constants(self) -> np.ndarray:
        return pairwise_lipschitz(self.matrix, self.model.d)


@dataclass
class EmbeddingReport:
    construction: str = ""
    params: dict = field(default_factory=dict)
    isometry_defect: float = 0.0
    relative_defect: float = 0.0
    coverage_defect: float = 0.0
    lam: float = 0.0
    max_lip: float = 0.0
    psi_lip: float | None = None
    dual_membership: float = 0.0
    n_tests: int = 0
    n_lip_tests: int = 0
    witnesses: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc["lambda"] = doc.pop("lam")
        return doc


def default_test_vectors(dim: int, count: int = 200, seed: int = 0) -> np.ndarray:
    """``+-e_i``, normalised ``+-e_i +- e_j`` and seeded uniform vectors in [-1,1]^dim."""
    eye = np.eye(dim)
    rows = [eye, -eye]
    pairs = []
    for i, j in itertools.combinations(range(dim), 2):
        for si, sj in itertools.product((1.0, -1.0), repeat=2):
            v = np.zeros(dim)
            v[i], v[j] = si, sj
            pairs.append(v / math.sqrt(2.0))
    if pairs:
        rows.append(np.array(pairs))
    fixed = np.vstack(rows)
    extra = max(0, count - len(fixed))
    rng = np.random.default_rng(seed)
    return np.vstack([fixed, rng.uniform(-1.0, 1.0, size=(extra, dim))])


def _dual_generators(norm):
    """Rows ``G`` with dual-norm(y) = max_g |<g, y>|; empty for Euclidean; None if unavailable."""
    if isinstance(norm, PolyhedralNorm):
        return norm.v_rep if norm.v_rep is not None else norm.ball_vertices
    if norm.q == 2.0:
        return np.zeros((0, norm.dim))
    if norm.q == 1.0:
        return np.eye(norm.dim)
    if math.isinf(norm.q) and norm.dim <= 12:
        return np.array(list(itertools.product((1.0, -1.0), repeat=norm.dim)))
    return None


def psi_lipschitz(psi: np.ndarray, metric: FiniteMetric, norm) -> float:
    """Lipschitz constant of ``t -> Psi(t)`` from the fine metric into the dual norm."""
    P = np.ascontiguousarray(psi, dtype=float)
    G = _dual_generators(norm)
    out = np.zeros(1)
    for r, block in metric.row_blocks():
        if G is not None:
            _kernels.vec_lip_block(P, np.ascontiguousarray(block), int(r[0]),
                                   np.ascontiguousarray(G, dtype=float), out)
        else:
            for a, i in enumerate(r):
                diff = norm.dual_norm(P[i + 1:] - P[i])
                dd = block[a, i + 1:]
                with np.errstate(divide="ignore", invalid="ignore"):
                    ratio = np.where(dd > 0, diff / dd, np.where(diff > 0, np.inf, 0.0))
                if ratio.size:
                    out[0] = max(out[0], ratio.max())
    return float(out[0])


def _dual_points(norm, dual_ext):
    if dual_ext is None:
        if isinstance(norm, PolyhedralNorm):
            return norm.dual_extreme_points
        return norm.dual_extreme_points()
    if isinstance(dual_ext, DualBall):
        return np.asarray(dual_ext.ext_points, dtype=float)
    return np.asarray(dual_ext, dtype=float)


def coverage_defect(psi: np.ndarray, norm, dual_ext) -> tuple[float, int]:
    """Worst dual-norm distance from an extreme point to ``Psi(K) U -Psi(K)``."""
    E = _dual_points(norm, dual_ext)
    worst, arg = 0.0, -1
    for k, e in enumerate(E):
        gap = min(np.min(norm.dual_norm(psi - e)), np.min(norm.dual_norm(psi + e)))
        if gap > worst:
            worst, arg = float(gap), k
    return worst, arg


def verify_isometry(E: EmbeddingMap, test_vectors=None, dual_ext=None, lip_sample: int | None = None,
                    with_psi_lip: bool = True, construction: str = "", params: dict | None = None
                    ) -> EmbeddingReport:
    """Measure how far ``J`` is from an isometric Lipschitz embedding.

    ``isometry_defect`` is ``max_x | sup_t |J(x)(t)| - ||x|| |`` over the
    test vectors; ``coverage_defect`` is the dual-norm distance of the
    worst dual extreme point from ``Psi(K) U -Psi(K)``.  ``max_lip`` is the
    largest ``L(J(x)) / ||x||`` and ``lam`` the largest ``L(J(x)) / ||J(x)||``
    over the first ``lip_sample`` test vectors (all by default).
    ``psi_lip`` is the Lipschitz constant of ``Psi`` itself, the supremum
    of ``max_lip`` over every ``x``.
    """
    X = default_test_vectors(E.dim) if test_vectors is None else np.atleast_2d(np.asarray(test_vectors, dtype=float))
    if X.size == 0 or len(X) == 0:
        raise PreconditionError("verify_isometry needs at least one test vector")
    if X.shape[1] != E.dim:
        raise PreconditionError("test vectors have the wrong dimension")
    F = E.fields(X)
    sup = np.max(np.abs(F), axis=0)
    norms = np.asarray(E.norm.norm(X), dtype=float)
    err = np.abs(sup - norms)
    k_def = int(np.argmax(err))
    big = norms >= REL_FLOOR
    rel = float(np.max(err[big] / norms[big])) if big.any() else 0.0

    n_lip = len(X) if lip_sample is None else min(lip_sample, len(X))
    lips = pairwise_lipschitz(F[:, :n_lip], E.model.d) if n_lip else np.zeros(0)
    with np.errstate(divide="ignore", invalid="ignore"):
        by_norm = np.where(norms[:n_lip] > 0, lips / norms[:n_lip], 0.0)
        by_sup = np.where(sup[:n_lip] > 0, lips / sup[:n_lip], 0.0)

    cov, k_cov = coverage_defect(E.psi, E.norm, dual_ext)
    report = EmbeddingReport(
        construction=construction or E.label,
        params=dict(params or {}),
        isometry_defect=float(err.max()),
        relative_defect=rel,
        coverage_defect=cov,
        lam=float(by_sup.max()) if n_lip else 0.0,
        max_lip=float(by_norm.max()) if n_lip else 0.0,
        psi_lip=psi_lipschitz(E.psi, E.model.d, E.norm) if with_psi_lip else None,
        dual_membership=E.dual_membership(),
        n_tests=len(X),
        n_lip_tests=n_lip,
        witnesses={
            "worst_defect_vector": X[k_def].tolist(),
            "worst_coverage_index": k_cov,
        },
    )
    return report


def discrete_model(n: int, labels=None) -> BitopModel:
    """``n`` points with the discrete metric as both coarse and fine metric."""
    D = 1.0 - np.eye(n)
    ids = tuple(labels) if labels is not None else tuple(range(1, n + 1))
    m = from_matrices(D, D, 1.0, point_ids=ids)
    return BitopModel(m.rho, m.d, 1.0, spec={"kind": "discrete", "n": n})
