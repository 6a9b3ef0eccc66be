"""Lipschitz copies of ``c0`` and ``l1`` built from separated families of points."""

from __future__ import annotations

import numpy as np

from ..errors import PreconditionError, WitnessInvalid
from ..fragmentation import NonFragWitness, build_dyadic_families, map_lipschitz
from ..metric_core import BitopModel, ScalarField, lq_ball, mcshane_extend, pairwise_lipschitz
from .core import SubspaceBasis, verify_isometry


def c0_sites(model: BitopModel, eps: float, base: int | None = None) -> tuple[int, list[int]]:
    """Greedy choice of ``t_0`` and ``t_1, t_2, ...``.

    Points are scanned in index order; a point is taken when it lies at
    ``d``-distance ``>= 3 eps`` from ``t_0`` and ``> 6 eps`` from every
    point taken before it.
    """
    t0 = model.base_point if base is None else base
    if t0 is None:
        t0 = 0
    D = model.d
    row0 = D.block([t0])[0]
    chosen: list[int] = []
    for t in range(model.n):
        if t == t0 or row0[t] < 3 * eps:
            continue
        if chosen and D.block([t], chosen)[0].min() <= 6 * eps:
            continue
        chosen.append(t)
    return t0, chosen


def construct_c0(model: BitopModel, eps: float, sites=None, base: int | None = None, test_vectors=None):
    """Fields ``f_n`` with disjoint supports spanning an isometric copy of ``c0^m``.

    ``f_n`` equals 1 on ``B_d[t_n, eps]`` and 0 off ``U_n = {d(., t_n) < 3 eps}``,
    extended in between with constant ``1/eps``.  Any combination then has
    sup-norm ``max |a_n|`` and Lipschitz constant at most ``2 max |a_n| / eps``.

    Returns ``(SubspaceBasis, EmbeddingReport)``.
    """
    if not eps > 0:
        raise PreconditionError("eps must be positive")
    if sites is None:
        t0, sites = c0_sites(model, eps, base)
    else:
        t0 = model.base_point if base is None else base
        sites = [int(s) for s in sites]
    D = model.d
    if not sites:
        far = float(D.block([t0])[0].max()) if model.n > 1 else 0.0
        raise WitnessInvalid(f"no point at distance >= 3*eps = {3 * eps:g} from t0", best_separation=far)
    if len(sites) > 1:
        S = D.block(sites, sites)
        sep = float(S[~np.eye(len(sites), dtype=bool)].min())
        if not sep > 6 * eps:
            raise WitnessInvalid(f"sites only {sep:g} apart; need > 6*eps = {6 * eps:g}", best_separation=sep)
    if t0 is not None and D.block([t0], sites)[0].min() < 3 * eps:
        raise WitnessInvalid("a site lies within 3*eps of t0", best_separation=float(D.block([t0], sites).min()))

    cols, supports = [], []
    for t in sites:
        row = D.block([t])[0]
        inner = np.flatnonzero(row <= eps)
        outer = np.flatnonzero(row >= 3 * eps)
        H = np.concatenate([inner, outer])
        vals = np.concatenate([np.ones(len(inner)), np.zeros(len(outer))])
        cols.append(mcshane_extend(model, H, vals, 1.0 / eps, (0.0, 1.0)).values)
        supports.append(np.flatnonzero(cols[-1] > 0).tolist())
    basis = SubspaceBasis(model, np.column_stack(cols), "c0", eps,
                          meta={"t0": t0, "sites": list(sites), "supports": supports})
    E = basis.as_embedding(label=f"c0 on {model.name}")
    report = verify_isometry(E, test_vectors, construction="c0",
                             params={"model": model.name, "eps": eps, "sites": list(sites), "t0": t0})
    return basis, report


def sign_map(families) -> dict[int, tuple[int, ...]]:
    """Leaf bit pattern of each point of ``H``, the union of the deepest ``V_s``."""
    out = {}
    for s in families.leaves():
        bits = tuple(int(c) for c in s)
        for p in families.V[s].tolist():
            out[p] = bits
    return out


def construct_ell1(model: BitopModel, witness: NonFragWitness, depth: int, test_vectors=None):
    """Fields ``f_1..f_depth`` spanning an isometric copy of ``l1^depth``.

    On ``H`` the field ``f_n`` is ``+1`` or ``-1`` according to bit ``n`` of
    the leaf containing the point; elsewhere it is the McShane extension
    with constant ``1/eps`` clipped to ``[-1, 1]``.  Points of ``H`` with
    different bits sit ``3 eps`` apart, so the data is ``1/eps``-Lipschitz.

    Returns ``(SubspaceBasis, EmbeddingReport)``; the families are kept in
    ``basis.meta["families"]``.
    """
    if witness.model is not model:
        raise PreconditionError("witness belongs to a different model")
    if depth < 1:
        raise PreconditionError("depth must be at least 1")
    fam = build_dyadic_families(witness, depth)
    sig = sign_map(fam)
    H = np.array(sorted(sig), dtype=np.intp)
    bits = np.array([sig[p] for p in H.tolist()], dtype=float)
    eps = witness.eps
    cols = [mcshane_extend(model, H, 2.0 * bits[:, n] - 1.0, 1.0 / eps, (-1.0, 1.0)).values
            for n in range(depth)]
    leaf_points = {s: int(fam.x[s]) for s in fam.leaves()}
    basis = SubspaceBasis(model, np.column_stack(cols), "ell1", eps,
                          meta={"H": H.tolist(), "leaf_points": leaf_points, "families": fam})
    E = basis.as_embedding(label=f"ell1 on {model.name}")
    report = verify_isometry(E, test_vectors, construction="ell1",
                             params={"model": model.name, "eps": eps, "depth": depth, "H_size": len(H)})
    return basis, report


def attaining_point(basis: SubspaceBasis, a) -> int:
    """Point of ``H`` whose leaf pattern matches ``sign(a)`` (zeros read as ``+``)."""
    a = np.asarray(a, dtype=float)
    a = np.concatenate([a, np.zeros(basis.m - len(a))])
    key = "".join("0" if v < 0 else "1" for v in a)
    return basis.meta["leaf_points"][key]


def example_c0_in_ball(dim: int, samples: int, seed: int, coeffs):
    """The field ``x -> sum a_k x_k^2`` on a sampled Euclidean ball.

    Returns the field and a dict of checks: values bounded by ``max |a_k|``,
    Lipschitz constant at most ``2 max |a_k|`` and the sampled sup.
    """
    a = np.asarray(coeffs, dtype=float)
    if a.ndim != 1 or len(a) > dim:
        raise PreconditionError(f"{len(a)} coefficients for dimension {dim}")
    model = lq_ball(2.0, dim, samples, seed)
    X = model.coords[:, : len(a)]
    f = ScalarField(model, (X ** 2) @ a)
    amax = float(np.abs(a).max()) if len(a) else 0.0
    lip = f.lip_d
    checks = {
        "max_abs_coeff": amax,
        "sup_norm": f.sup_norm,
        "bounded": f.sup_norm <= amax + 1e-12,
        "lip": lip,
        "lip_bound": 2 * amax,
        "lip_ok": lip <= 2 * amax + 1e-9,
    }
    return f, checks


def pullback(basis: SubspaceBasis, K2: BitopModel, phi) -> SubspaceBasis:
    """Compose every field of ``basis`` with ``phi : K2 -> K1``."""
    phi = np.asarray(phi, dtype=np.intp)
    if phi.shape != (K2.n,):
        raise PreconditionError("phi must give one image per point of K2")
    return SubspaceBasis(K2, basis.matrix[phi], basis.target, basis.eps, meta={"pulled_back_from": basis.model.name})


def check_pullback(basis: SubspaceBasis, K2: BitopModel, phi, coeffs) -> dict:
    """Sup-norms survive composition with an onto ``phi``; Lipschitz constants grow by at most ``L(phi)``."""
    phi = np.asarray(phi, dtype=np.intp)
    onto = np.unique(phi).size == basis.model.n
    pulled = pullback(basis, K2, phi)
    A = np.atleast_2d(np.asarray(coeffs, dtype=float))
    F1 = basis.combine(A)
    F2 = pulled.combine(A)
    sup_err = float(np.max(np.abs(np.abs(F1).max(axis=0) - np.abs(F2).max(axis=0))))
    L = map_lipschitz(K2, basis.model, phi)
    l1 = pairwise_lipschitz(F1, basis.model.d)
    l2 = pairwise_lipschitz(F2, K2.d)
    excess = float(np.max(l2 - L * l1 * (1 + 1e-9))) if len(l1) else 0.0
    return {"onto": bool(onto), "lip_phi": L, "sup_error": sup_err, "lip_excess": max(0.0, excess),
            "ok": bool(onto and sup_err == 0.0 and excess <= 1e-12)}
