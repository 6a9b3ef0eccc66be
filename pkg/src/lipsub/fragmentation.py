"""Set derivation, Szlenk indices and non-fragmentability witnesses.

The derivation at scale ``eps`` and resolution ``delta`` keeps the points
``x`` of ``A`` whose resolved neighbourhood ``A ∩ B_rho[x, delta]`` still
has ``d``-diameter at least ``eps``.  Neighbourhoods are closed
``rho``-balls of radius exactly ``delta``; ``delta <= eps/4`` is enforced
so that the coarse scale stays finer than the scale being probed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import stats

from .errors import DepthExhausted, PreconditionError, ResolutionTooCoarse
from .metric_core import AXIOM_TOL, BitopModel, pairwise_lipschitz

RESOLUTION_FACTOR = 0.25


# ---------------------------------------------------------------------------
# verdicts


@dataclass(frozen=True)
class Finite:
    index: int

    def __str__(self):
        return f"Finite({self.index})"


@dataclass(frozen=True, eq=False)
class NonFragmentable:
    fixpoint: np.ndarray

    def __str__(self):
        return f"NonFragmentable(|A|={len(self.fixpoint)})"

    def __eq__(self, other):
        return isinstance(other, NonFragmentable) and np.array_equal(self.fixpoint, other.fixpoint)

    def __hash__(self):
        return hash(tuple(self.fixpoint.tolist()))


def index_leq(a, b) -> bool:
    """Order on verdicts: every finite index lies below ``NonFragmentable``."""
    if isinstance(b, NonFragmentable):
        return True
    if isinstance(a, NonFragmentable):
        return False
    return a.index <= b.index


def verdict_value(v):
    """Finite index as int, ``math.inf`` for a non-fragmentable verdict (reporting only)."""
    return v.index if isinstance(v, Finite) else math.inf


@dataclass(eq=False)
class DerivationTrace:
    model: BitopModel
    eps: float
    delta: float
    levels: list
    verdict: Finite | NonFragmentable

    def sizes(self) -> list[int]:
        return [len(a) for a in self.levels]

    def to_dict(self) -> dict:
        return {
            "model": self.model.name,
            "eps": self.eps,
            "delta": self.delta,
            "sizes": self.sizes(),
            "verdict": str(self.verdict),
            "index": self.verdict.index if isinstance(self.verdict, Finite) else "inf",
        }


# ---------------------------------------------------------------------------
# derivation


def _check_resolution(delta, eps):
    if not eps > 0:
        raise PreconditionError("eps must be positive")
    if not delta > 0:
        raise PreconditionError("delta must be positive")
    if delta > RESOLUTION_FACTOR * eps * (1 + 1e-12):
        raise ResolutionTooCoarse(delta, eps, RESOLUTION_FACTOR)


def neighbourhood_diameters(model: BitopModel, A, delta: float) -> np.ndarray:
    """``d``-diameter of ``A ∩ B_rho[x, delta]`` for every ``x`` in ``A``."""
    A = np.asarray(A, dtype=np.intp)
    if len(A) == 0:
        return np.zeros(0)
    R = model.rho.block(A, A)
    D = model.d.block(A, A)
    near = R <= delta + AXIOM_TOL
    out = np.empty(len(A))
    for a in range(len(A)):
        idx = np.flatnonzero(near[a])
        out[a] = D[np.ix_(idx, idx)].max() if len(idx) > 1 else 0.0
    return out


def derive_once(model: BitopModel, A, eps: float, delta: float | None = None) -> np.ndarray:
    """One derivation step; returns the sorted surviving indices of ``A``."""
    delta = model.delta if delta is None else delta
    _check_resolution(delta, eps)
    A = np.unique(np.asarray(A, dtype=np.intp))
    diam = neighbourhood_diameters(model, A, delta)
    return A[diam >= eps - AXIOM_TOL]


def szlenk_index(model: BitopModel, eps: float, delta: float | None = None, start=None) -> DerivationTrace:
    """Iterate :func:`derive_once` from ``start`` (default: all points) to termination."""
    delta = model.delta if delta is None else delta
    _check_resolution(delta, eps)
    A = np.arange(model.n) if start is None else np.unique(np.asarray(start, dtype=np.intp))
    levels = [A]
    while len(A):
        B = derive_once(model, A, eps, delta)
        if len(B) == len(A):
            return DerivationTrace(model, eps, delta, levels, NonFragmentable(A))
        levels.append(B)
        A = B
    return DerivationTrace(model, eps, delta, levels, Finite(len(levels) - 1))


# ---------------------------------------------------------------------------
# witnesses


@dataclass(eq=False)
class NonFragWitness:
    """A set ``A`` whose every resolved neighbourhood has ``d``-diameter ``>= 3 eps``."""

    model: BitopModel
    A: np.ndarray
    eps: float
    delta: float
    min_diameter: float = field(init=False)

    def __post_init__(self):
        self.A = np.unique(np.asarray(self.A, dtype=np.intp))
        if len(self.A) == 0:
            raise PreconditionError("witness set is empty")
        diam = neighbourhood_diameters(self.model, self.A, self.delta)
        self.min_diameter = float(diam.min())
        if self.min_diameter < 3 * self.eps - AXIOM_TOL:
            bad = int(self.A[np.argmin(diam)])
            raise PreconditionError(
                f"point {bad} has resolved diameter {self.min_diameter:g} < 3*eps = {3 * self.eps:g}")


def find_witness(model: BitopModel, eps: float, delta: float | None = None) -> NonFragWitness | None:
    """Largest self-certifying set at threshold ``3 eps``, or ``None`` when none exists.

    This is the fixpoint of the derivation at scale ``3 eps``.
    """
    delta = model.delta if delta is None else delta
    trace = szlenk_index(model, 3 * eps, delta)
    if isinstance(trace.verdict, NonFragmentable):
        return NonFragWitness(model, trace.verdict.fixpoint, eps, delta)
    return None


# ---------------------------------------------------------------------------
# dyadic families


@dataclass(eq=False)
class DyadicFamilies:
    """Nested families ``U_s``, ``V_s`` and chosen points ``x_s`` for words ``s``.

    Keys are strings over {'0','1'}; the empty word is the root, whose
    ``U`` and ``V`` are the whole model.
    """

    witness: NonFragWitness
    depth: int
    U: dict
    V: dict
    x: dict
    radius: dict

    @property
    def eps(self) -> float:
        return self.witness.eps

    def leaves(self) -> list[str]:
        return sorted(s for s in self.V if len(s) == self.depth)

    def check_invariants(self) -> list[str]:
        """Exhaustive check of nesting, closure, margin and disjointness conditions."""
        model, eps = self.witness.model, self.eps
        D = model.d
        problems = []
        everything = np.arange(model.n)
        for s in self.V:
            U, V = set(self.U[s].tolist()), set(self.V[s].tolist())
            if not V <= U:
                problems.append(f"V_{s} not inside U_{s}")
            rest = np.setdiff1d(everything, self.U[s])
            if len(rest) and len(self.V[s]):
                gap = float(D.block(self.V[s], rest).min())
                if not gap > eps:
                    problems.append(f"d(V_{s}, K minus U_{s}) = {gap:g} is not > eps")
            if s:
                parent = s[:-1]
                if not U <= set(self.U[parent].tolist()):
                    problems.append(f"U_{s} not inside U_{parent}")
                if not V <= set(self.V[parent].tolist()):
                    problems.append(f"V_{s} not inside V_{parent}")
                if int(self.x[s]) not in V:
                    problems.append(f"x_{s} not in V_{s}")
            if len(s) < self.depth and s + "0" in self.U:
                if np.intersect1d(self.U[s + "0"], self.U[s + "1"]).size:
                    problems.append(f"U_{s}0 and U_{s}1 intersect")
                sep = float(D.block([self.x[s + "0"]], [self.x[s + "1"]])[0, 0])
                if not sep > 3 * eps:
                    problems.append(f"d(x_{s}0, x_{s}1) = {sep:g} is not > 3 eps")
        return problems


def _split(model: BitopModel, W: np.ndarray, candidates: np.ndarray, eps: float, max_pairs: int):
    """Best admissible split of ``W``.

    A pair ``a, b`` of candidates with ``d(a, b) > 3 eps`` is admissible at
    radius ``r`` when the pieces ``W ∩ B_rho[a, r]`` and ``W ∩ B_rho[b, r]``
    are at ``d``-distance at least ``3 eps``.  For each pair the largest
    admissible radius is found by bisection over the ``rho``-distances that
    occur; the pair keeping the most candidates in its smaller piece wins,
    ties going to the lexicographically first pair.
    """
    if len(candidates) < 2:
        return None
    Dc = model.d.block(candidates, candidates)
    ia, ib = np.nonzero(np.triu(Dc > 3 * eps, 1))
    if len(ia) == 0:
        return None
    if len(ia) > max_pairs:
        pick = np.linspace(0, len(ia) - 1, max_pairs).round().astype(int)
        ia, ib = ia[pick], ib[pick]
    Rw = model.rho.block(candidates, W)
    Dw = model.d.block(W, W)
    cand_pos = np.searchsorted(W, candidates)
    best = None
    for a, b in zip(ia.tolist(), ib.tolist()):
        radii = np.unique(np.concatenate([[0.0], Rw[a], Rw[b]]))

        def pieces(r):
            pa = Rw[a] <= r + AXIOM_TOL
            pb = Rw[b] <= r + AXIOM_TOL
            return pa, pb

        def ok(r):
            pa, pb = pieces(r)
            if np.any(pa & pb):
                return False
            return Dw[np.ix_(pa, pb)].min() >= 3 * eps - AXIOM_TOL

        lo, hi = 0, len(radii) - 1
        if not ok(radii[0]):
            continue
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if ok(radii[mid]):
                lo = mid
            else:
                hi = mid - 1
        r = radii[lo]
        pa, pb = pieces(r)
        score = min(int(pa[cand_pos].sum()), int(pb[cand_pos].sum()))
        if best is None or score > best[0]:
            best = (score, int(candidates[a]), int(candidates[b]), float(r), W[pa], W[pb])
    return best


def build_dyadic_families(witness: NonFragWitness, depth: int, max_pairs: int = 4096) -> DyadicFamilies:
    """Finite-depth dyadic families grown inside a non-fragmentability witness.

    Each ``V_s`` is split into two ``rho``-neighbourhoods of witness points
    more than ``3 eps`` apart in ``d`` (see :func:`_split`) and
    ``U_s = {x in U_parent : d(x, V_s) <= eps}``.

    Raises :class:`DepthExhausted` when some piece no longer contains a
    ``3 eps``-separated pair.
    """
    if depth < 0:
        raise PreconditionError("depth must be nonnegative")
    model, eps = witness.model, witness.eps
    everything = np.arange(model.n)
    U = {"": everything}
    V = {"": everything}
    x = {"": int(witness.A[0])}
    radius = {"": math.inf}
    A = witness.A
    frontier = [""]
    for level in range(depth):
        nxt = []
        for s in frontier:
            W = V[s]
            cands = np.intersect1d(A, W)
            found = _split(model, W, cands, eps, max_pairs)
            if found is None:
                raise DepthExhausted(depth, level, node=s)
            _, a, b, r, Va, Vb = found
            for bit, pt, piece in (("0", a, Va), ("1", b, Vb)):
                t = s + bit
                V[t] = piece
                near = model.d.block(piece, U[s]).min(axis=0) <= eps
                U[t] = U[s][near]
                x[t] = pt
                radius[t] = r
                nxt.append(t)
        frontier = nxt
    return DyadicFamilies(witness, depth, U, V, x, radius)


# ---------------------------------------------------------------------------
# quotient maps


@dataclass
class QuotientReport:
    lip_phi: float
    c: float
    rows: list
    violations: list
    coarse_modulus: list

    def to_dict(self) -> dict:
        return {"lip_phi": self.lip_phi, "c": self.c, "rows": self.rows,
                "violations": self.violations, "coarse_modulus": self.coarse_modulus}


def map_lipschitz(K2: BitopModel, K1: BitopModel, phi) -> float:
    """Lipschitz constant of ``phi : K2 -> K1`` for the fine metrics."""
    phi = np.asarray(phi, dtype=np.intp)
    best = 0.0
    for r, block in K2.d.row_blocks():
        img = K1.d.block(phi[r], phi)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(block > 0, img / block, np.where(img > 0, np.inf, 0.0))
        best = max(best, float(ratio.max()))
    return best


def coarse_modulus(K2: BitopModel, K1: BitopModel, phi) -> list:
    """Monotone envelope ``r -> max{rho1(phi x, phi y) : rho2(x, y) <= r}`` on observed radii."""
    phi = np.asarray(phi, dtype=np.intp)
    R2 = K2.rho.dist
    R1 = K1.rho.block(phi, phi)
    r = R2.ravel()
    v = R1.ravel()
    order = np.argsort(r, kind="stable")
    env = np.maximum.accumulate(v[order])
    rs = r[order]
    last = np.r_[rs[1:] != rs[:-1], True]
    return [(float(a), float(b)) for a, b in zip(rs[last], env[last])]


def matched_resolution(K2: BitopModel, K1: BitopModel, phi, delta2: float) -> float:
    """Largest ``delta1`` whose balls pull back into ``delta2``-balls around fibres.

    ``rho1(x, phi(y)) <= delta1`` must force ``rho2(y, phi^-1(x)) <= delta2``
    for every ``x`` in ``K1`` and ``y`` in ``K2``.
    """
    phi = np.asarray(phi, dtype=np.intp)
    R2 = K2.rho.dist
    to_fibre = np.empty((K2.n, K1.n))
    for x in range(K1.n):
        fibre = np.flatnonzero(phi == x)
        to_fibre[:, x] = R2[:, fibre].min(axis=1)
    R1 = K1.rho.block(np.arange(K1.n), phi)  # (n1, n2): rho1(x, phi(y))
    bad = to_fibre.T > delta2 + AXIOM_TOL
    limit = float(R1[bad].min()) if bad.any() else math.inf
    cands = np.unique(K1.rho.dist)
    ok = cands[cands < limit - AXIOM_TOL]
    return float(ok.max()) if len(ok) else 0.0


def _singleton_resolution(K: BitopModel, cap: float) -> float:
    """A positive radius whose ``rho``-balls are singletons, at most ``cap``."""
    pos = K.rho.dist[K.rho.dist > 0]
    return min(cap, 0.5 * float(pos.min())) if pos.size else cap


def check_quotient_monotonicity(K1: BitopModel, K2: BitopModel, phi, eps_list: Sequence[float],
                                delta2: float | None = None) -> QuotientReport:
    """Check ``Sz(K1, c eps) <= Sz(K2, eps)`` with ``c = 2 L(phi)`` along ``eps_list``.

    ``phi[i]`` is the image in ``K1`` of point ``i`` of ``K2``.  ``K2`` is
    derived at ``delta2`` (default ``eps/4``) and ``K1`` at the matched
    resolution from :func:`matched_resolution`, capped at ``c eps / 4``.
    If ``L(phi) = 0`` then ``K1`` is a single point and it is derived at
    ``eps`` itself.
    """
    phi = np.asarray(phi, dtype=np.intp)
    if phi.shape != (K2.n,):
        raise PreconditionError("phi must give one image per point of K2")
    if phi.min() < 0 or phi.max() >= K1.n:
        raise PreconditionError("phi has images outside K1")
    missing = np.setdiff1d(np.arange(K1.n), phi)
    if missing.size:
        raise PreconditionError(f"phi is not onto: {missing.size} points of K1 have no preimage")
    lip = map_lipschitz(K2, K1, phi)
    c = 2.0 * lip
    rows, violations = [], []
    for eps in eps_list:
        d2 = min(delta2, RESOLUTION_FACTOR * eps) if delta2 is not None else RESOLUTION_FACTOR * eps
        eps1 = c * eps if c > 0 else eps
        d1 = min(matched_resolution(K2, K1, phi, d2), RESOLUTION_FACTOR * eps1)
        if d1 <= 0:
            d1 = _singleton_resolution(K1, RESOLUTION_FACTOR * eps1)
        s1 = szlenk_index(K1, eps1, d1).verdict
        s2 = szlenk_index(K2, eps, d2).verdict
        ok = index_leq(s1, s2)
        row = {"eps": eps, "c_eps": eps1, "delta1": d1, "delta2": d2,
               "sz_K1": str(s1), "sz_K2": str(s2), "ok": ok}
        rows.append(row)
        if not ok:
            violations.append(row)
    env = coarse_modulus(K2, K1, phi) if K2.n <= 2000 else []
    return QuotientReport(lip, c, rows, violations, env)


# ---------------------------------------------------------------------------
# l_q scaling experiment


def lq_scaling_experiment(q_list: Sequence[float], dims: Sequence[int], eps_grid: Sequence[float],
                          seed: int = 0, samples: int = 300, delta: float | None = None) -> dict:
    """Szlenk indices of sampled ``l_q`` balls across a decreasing ``eps`` grid.

    A single resolution ``delta`` (default ``min(eps_grid)/4``) is used for
    every ``eps`` of a model, so the index is antitone in ``eps`` by
    construction.  A log-log slope of index against ``1/eps`` is fitted on
    the finite entries and reported with a 95% band; it is a report, not a
    claim.
    """
    from .metric_core import lq_ball

    eps_grid = [float(e) for e in eps_grid]
    if any(b >= a for a, b in zip(eps_grid, eps_grid[1:])):
        raise PreconditionError("eps_grid must be strictly decreasing")
    delta = RESOLUTION_FACTOR * min(eps_grid) if delta is None else delta
    rows, fits = [], []
    for q in q_list:
        for dim in dims:
            model = lq_ball(q, dim, samples, seed)
            entries = []
            for eps in eps_grid:
                tr = szlenk_index(model, eps, delta)
                rows.append({"q": q, "dim": dim, "samples": samples, "eps": eps, "delta": delta,
                             "index": tr.verdict.index if isinstance(tr.verdict, Finite) else "inf",
                             "sizes": tr.sizes()})
                entries.append((eps, tr.verdict))
            fits.append(_fit_slope(q, dim, entries))
    return {"rows": rows, "fits": fits, "delta": delta, "seed": seed, "samples": samples}


def _fit_slope(q, dim, entries) -> dict:
    pts = [(math.log(1 / e), math.log(v.index)) for e, v in entries if isinstance(v, Finite) and v.index > 0]
    fit = {"q": q, "dim": dim, "n_points": len(pts), "slope": None, "stderr": None,
           "band95": None, "monotone": _antitone(entries)}
    if len(pts) >= 3 and len({p[0] for p in pts}) >= 2:
        xs, ys = np.array(pts).T
        res = stats.linregress(xs, ys)
        half = float(stats.t.ppf(0.975, len(pts) - 2) * res.stderr) if len(pts) > 2 else math.inf
        fit.update(slope=float(res.slope), stderr=float(res.stderr),
                   band95=[float(res.slope - half), float(res.slope + half)])
    return fit


def _antitone(entries) -> bool:
    """Index never drops as eps decreases."""
    return all(index_leq(a, b) for (_, a), (_, b) in zip(entries, entries[1:]))


def constant_map(K2: BitopModel) -> np.ndarray:
    return np.zeros(K2.n, dtype=np.intp)


def cantor_to_fan(depth: int = 6, spokes: int = 8) -> np.ndarray:
    """Collapse ``cantor_tree(depth)`` onto ``fan(spokes)`` by leading bits.

    With ``b = log2(spokes)`` leading bits, prefix ``p`` goes to spike
    ``p + 1``; the all-zero word goes to the apex.
    """
    b = int(round(math.log2(spokes)))
    if 2 ** b != spokes or b > depth:
        raise PreconditionError("spokes must be a power of two with log2(spokes) <= depth")
    words = np.arange(2 ** depth)
    phi = (words >> (depth - b)) + 1
    phi[0] = 0
    return phi.astype(np.intp)


def cantor_truncation(depth: int, target: int) -> np.ndarray:
    """Keep the first ``target`` bits of every word."""
    if not 1 <= target <= depth:
        raise PreconditionError("target depth must lie in [1, depth]")
    return (np.arange(2 ** depth) >> (depth - target)).astype(np.intp)


def interval_rounding(n_fine: int, n_coarse: int) -> np.ndarray:
    """Nearest grid point of ``interval_grid(n_coarse)`` for each point of ``interval_grid(n_fine)``."""
    t = np.linspace(0.0, 1.0, n_fine)
    return np.rint(t * (n_coarse - 1)).astype(np.intp)


def cube_projection(grid: int) -> np.ndarray:
    """``hilbert_cube(2, grid) -> hilbert_cube(1, grid)``, forgetting the second coordinate."""
    return (np.arange(grid * grid) // grid).astype(np.intp)


def quotient_corpus() -> list[tuple[str, BitopModel, BitopModel, np.ndarray]]:
    """Shipped ``(name, K1, K2, phi)`` quotient pairs with ``phi : K2 -> K1`` onto."""
    from .metric_core import cantor_tree, fan, hilbert_cube, interval_grid, point_model

    c6, f8 = cantor_tree(6), fan(8)
    i41, i21 = interval_grid(41), interval_grid(21)
    h2, h1 = hilbert_cube(2, 12), hilbert_cube(1, 12)
    return [
        ("identity fan:8", f8, f8, np.arange(f8.n)),
        ("identity cantor:6", c6, c6, np.arange(c6.n)),
        ("identity interval:41", i41, i41, np.arange(i41.n)),
        ("cantor:6 -> fan:8", f8, c6, cantor_to_fan(6, 8)),
        ("cantor:6 -> cantor:3", cantor_tree(3), c6, cantor_truncation(6, 3)),
        ("interval:41 -> interval:21", i21, i41, interval_rounding(41, 21)),
        ("cube:2,12 -> cube:1,12", h1, h2, cube_projection(12)),
        ("cantor:6 -> point", point_model(), c6, constant_map(c6)),
    ]


QUOTIENT_EPS = (2.0, 1.0, 0.5, 0.25, 0.125)
