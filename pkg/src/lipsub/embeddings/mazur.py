"""Signed power maps between ``l_q`` balls and the induced ``l_p`` transfer."""

from __future__ import annotations

import math

import numpy as np

from ..convex_geometry import LqNorm, conjugate_exponent
from ..errors import DirectionNotLipschitz, PreconditionError
from ..metric_core import lq_ball
from .core import EmbeddingMap, verify_isometry


def mazur_map(x, q1: float, q2: float) -> np.ndarray:
    """``sign(x) |x|^(q1/q2)`` coordinatewise; carries the ``l_q1`` sphere onto the ``l_q2`` sphere."""
    if q1 < 1 or q2 < 1:
        raise PreconditionError("exponents must be >= 1")
    x = np.asarray(x, dtype=float)
    if q1 == q2:
        return x.copy()
    return np.sign(x) * np.abs(x) ** (q1 / q2)


def mazur_ratios(q1: float, q2: float, dim: int = 6, pairs: int = 100_000, seed: int = 0,
                 scale: float = 1.0) -> np.ndarray:
    """``||Phi(x) - Phi(y)||_q2 / ||x - y||_q1`` for seeded pairs in ``scale * B_{l_q1}``."""
    rng = np.random.default_rng(seed)
    X = rng.uniform(-1, 1, size=(pairs, dim))
    Y = rng.uniform(-1, 1, size=(pairs, dim))
    X /= np.maximum(1.0, np.linalg.norm(X, ord=q1, axis=1))[:, None]
    Y /= np.maximum(1.0, np.linalg.norm(Y, ord=q1, axis=1))[:, None]
    X, Y = scale * X, scale * Y
    num = np.linalg.norm(mazur_map(X, q1, q2) - mazur_map(Y, q1, q2), ord=q2, axis=1)
    den = np.linalg.norm(X - Y, ord=q1, axis=1)
    keep = den > 0
    return num[keep] / den[keep]


def blowup_profile(q1: float, q2: float, scales=(1.0, 1e-1, 1e-2, 1e-3, 1e-4), dim: int = 6,
                   pairs: int = 20_000, seed: int = 0) -> list[tuple[float, float]]:
    """Largest sampled ratio at each scale; grows without bound near 0 when ``q1 < q2``."""
    return [(float(s), float(mazur_ratios(q1, q2, dim, pairs, seed, s).max())) for s in scales]


def transfer_lp(model, q: float, q_prime: float, dim: int | None = None, test_vectors=None,
                lip_sample: int | None = 20):
    """Push the identity sampling of ``B_{l_q}`` through the Mazur map into ``B_{l_q'}``.

    ``model`` is a sampled ``l_q`` ball (its coordinates are ``Psi``).  The
    transferred ``Psi' = Phi_{q,q'} o Psi`` sits in the dual ball of
    ``l_p'`` with ``p'`` conjugate to ``q'``; the report measures how far
    the induced ``J`` is from an isometry of ``l_p'^dim``.

    Returns ``(EmbeddingMap, EmbeddingReport)``.
    """
    if q_prime > q:
        raise DirectionNotLipschitz(f"Mazur map from l_{q:g} to l_{q_prime:g} is not Lipschitz (q' > q)")
    P = np.asarray(model.coords, dtype=float)
    dim = P.shape[1] if dim is None else dim
    if dim > P.shape[1]:
        raise PreconditionError(f"model has dimension {P.shape[1]} < {dim}")
    P = P[:, :dim]
    if np.any(np.linalg.norm(P, ord=q, axis=1) > 1 + 1e-12):
        raise PreconditionError(f"model points leave the l_{q:g} unit ball")
    psi = mazur_map(P, q, q_prime)
    p_prime = conjugate_exponent(q_prime)
    norm = LqNorm(dim, p_prime)
    E = EmbeddingMap(model, psi, norm, label=f"l_{q:g} -> l_{q_prime:g} transfer")
    report = verify_isometry(E, test_vectors, lip_sample=lip_sample, with_psi_lip=model.n <= 4000,
                             construction="lp_transfer",
                             params={"q": q, "q_prime": q_prime, "p_prime": _fmt(p_prime), "dim": dim,
                                     "samples": model.n})
    E.report = report
    return E, report


def transfer_lp_sampled(q: float, q_prime: float, dim: int, samples: int, seed: int = 0, **kw):
    return transfer_lp(lq_ball(q, dim, samples, seed), q, q_prime, dim, **kw)


def _fmt(p):
    return "inf" if math.isinf(p) else p
