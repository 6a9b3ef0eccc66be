"""Polyhedral spaces inside ``l_inf^n`` and inside ``C(K)`` via disjoint bumps."""

from __future__ import annotations

import numpy as np

from ..convex_geometry import PolyhedralNorm, face_count
from ..errors import FacesExceedCapacity, PreconditionError, SiteSeparationError
from ..metric_core import BitopModel, mcshane_extend
from .core import EmbeddingMap, SubspaceBasis, discrete_model, verify_isometry


def embed_polyhedral_linf(N: PolyhedralNorm, n: int, test_vectors=None) -> EmbeddingMap:
    """Embed ``(R^dim, N)`` isometrically into ``l_inf^n``.

    Coordinate ``i`` evaluates the ``i``-th dual extreme point (one per
    antipodal pair); surplus coordinates repeat the last one.  Possible
    exactly when ``2n`` is at least the number of facets of the unit ball.
    The verification report is attached as ``.report``.
    """
    faces = face_count(N)
    if 2 * n < faces:
        raise FacesExceedCapacity(faces, n)
    reps = N.dual_extreme_representatives()
    psi = np.vstack([reps, np.repeat(reps[-1:], n - len(reps), axis=0)])
    E = EmbeddingMap(discrete_model(n), psi, N, label=f"{N.name or 'polyhedral'}->linf^{n}")
    E.report = verify_isometry(E, test_vectors, construction="polyhedral_linf",
                               params={"norm": N.name, "n": n, "faces": faces})
    return E


def _pick_sites(model: BitopModel, k: int) -> np.ndarray:
    """Greedy farthest-point choice of ``k`` sites, starting at point 0."""
    sites = [0]
    dist = model.d.block([0])[0]
    for _ in range(1, k):
        nxt = int(np.argmax(dist))
        sites.append(nxt)
        dist = np.minimum(dist, model.d.block([nxt])[0])
    return np.array(sites)


def embed_polyhedral_bumps(N: PolyhedralNorm, model: BitopModel, sites=None, radius: float | None = None,
                           test_vectors=None):
    """Realise ``(R^dim, N)`` as a Lipschitz subspace of ``C(K)`` with bump functions.

    One site per antipodal pair of dual extreme points carries a bump
    ``psi_k`` with value 1 at the site and 0 at ``d``-distance ``>= radius``
    (McShane extension with constant ``1/radius``), and
    ``Psi(t) = sum_k psi_k(t) x_k*``.  Supports are disjoint once the sites
    are ``2*radius`` apart.  ``radius`` defaults to a quarter of the
    ``d``-diameter divided by the number of sites.

    Returns ``(EmbeddingMap, SubspaceBasis, EmbeddingReport)``.
    """
    reps = N.dual_extreme_representatives()
    k = len(reps)
    if model.n < 2 * len(N.dual_extreme_points):
        raise PreconditionError(f"model has {model.n} points; need at least {2 * len(N.dual_extreme_points)}")
    if sites is None:
        sites = _pick_sites(model, k)
    sites = np.asarray(sites, dtype=np.intp)
    if len(sites) != k:
        raise PreconditionError(f"need one site per dual extreme pair ({k}), got {len(sites)}")
    if len(np.unique(sites)) != k:
        raise SiteSeparationError("sites must be distinct points")
    if radius is None:
        radius = model.d.diameter() / (4.0 * k)
    if not radius > 0:
        raise PreconditionError("bump radius must be positive")
    if k > 1:
        S = model.d.block(sites, sites)
        sep = float(np.min(S[~np.eye(k, dtype=bool)]))
        if sep < 2 * radius:
            raise SiteSeparationError(
                f"sites only {sep:.4g} apart; disjoint bumps of radius {radius:.4g} need {2 * radius:.4g}")

    bumps = np.zeros((model.n, k))
    for j, s in enumerate(sites):
        far = np.flatnonzero(model.d.block([s])[0] >= radius)
        H = np.concatenate([[s], far])
        vals = np.concatenate([[1.0], np.zeros(len(far))])
        bumps[:, j] = mcshane_extend(model, H, vals, 1.0 / radius, (0.0, 1.0)).values
    psi = bumps @ reps
    E = EmbeddingMap(model, psi, N, label=f"{N.name or 'polyhedral'} bumps on {model.name}")
    basis = SubspaceBasis(model, bumps, "source-norm", meta={"sites": sites.tolist(), "radius": radius})
    report = verify_isometry(E, test_vectors, construction="polyhedral_bumps",
                             params={"norm": N.name, "model": model.name, "sites": sites.tolist(),
                                     "radius": radius})
    E.report = report
    return E, basis, report
