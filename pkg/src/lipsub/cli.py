"""Command-line interface.

Every command writes ``report.json`` (deterministic), ``metadata.json``
(timestamps and argv), CSV tables and, where useful, SVG figures into the
output directory.  Exit status is 0 when every asserted check passed, 1
when a check failed or a construction refused its input, 2 for usage
errors.

Configuration comes from flags or from a JSON file given with
``--config``; flags win.  ``lipsub run --config cfg.json`` takes the
command name from the file.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import __version__
from . import convex_geometry as cg
from . import fragmentation as fr
from . import metric_core as mc
from . import plotting
from .embeddings import core as emb
from .embeddings import euclidean, mazur, polyhedral, subspaces
from .errors import LipsubError
from .reports import default_out_dir, metadata, write_bundle

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
VALUE_TOL = 1e-9


@dataclass
class Outcome:
    report: dict
    checks: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)
    figures: dict = field(default_factory=dict)

    @property
    def failed(self) -> list[str]:
        return sorted(k for k, v in self.checks.items() if not v)


@dataclass(frozen=True)
class Param:
    name: str
    kind: str  # int | float | str | floats | ints
    default: object = None
    help: str = ""
    choices: tuple | None = None


@dataclass(frozen=True)
class Command:
    name: str
    handler: Callable[[dict], Outcome]
    params: tuple
    help: str


# -- parsing helpers ----------------------------------------------------------


def _floats(v) -> list[float]:
    if v is None:
        return []
    if isinstance(v, str):
        return [float(x) for x in v.split(",") if x.strip()]
    if isinstance(v, (int, float)):
        return [float(v)]
    return [float(x) for x in v]


def _ints(v) -> list[int]:
    return [int(x) for x in _floats(v)]


def _model(cfg, key="model") -> mc.BitopModel:
    return mc.make_model(mc.parse_model_spec(cfg[key], cfg.get("seed")))


def _norm(name):
    return cg.preset(name)


def _embedding_table(E, X):
    F = E.fields(X)
    sup = np.abs(F).max(axis=0)
    norms = E.norm.norm(X)
    header = [f"x{i}" for i in range(X.shape[1])] + ["norm", "sup", "defect"]
    rows = [list(x) + [n, s, abs(s - n)] for x, n, s in zip(X, norms, sup)]
    return header, rows


def _embed_outcome(E, rep, checks=None, extra=None):
    X = emb.default_test_vectors(E.dim)
    report = {"construction": rep.construction, "report": rep.to_dict()}
    report.update(extra or {})
    chk = {"dual_membership": rep.dual_membership <= 1 + VALUE_TOL,
           "report_finite": all(math.isfinite(v) for v in (rep.isometry_defect, rep.coverage_defect,
                                                            rep.lam, rep.max_lip))}
    chk.update(checks or {})
    return Outcome(report, chk, {"vectors": _embedding_table(E, X)})


# -- metric_core ----------------------------------------------------------------


def cmd_validate_metric(cfg):
    model = _model(cfg)
    out = {}
    checks = {}
    for label, m in (("rho", model.rho), ("d", model.d)):
        rep = mc.validate_metric(m)
        out[label] = {"ok": rep.ok, "violations": rep.violations, "truncated": rep.truncated}
        checks[f"{label}_axioms"] = rep.ok
    finer = model.check_finer()
    out["d_dominates_rho"] = {"violations": finer}
    checks["d_dominates_rho"] = not finer
    rows = [[label, *v] for label in ("rho", "d") for v in out[label]["violations"]]
    return Outcome({"model": model.name, "n": model.n, **out}, checks,
                   {"violations": (["metric", "kind", "indices", "amount"], rows)})


def _field_values(model, spec: str, seed: int):
    kind, _, arg = spec.partition(":")
    if kind == "coord":
        if model.coords is None:
            raise LipsubError("model has no coordinates")
        return model.coords[:, int(arg or 0)].astype(float)
    if kind == "dist":
        return model.d.block([int(arg or 0)])[0]
    if kind == "random":
        return np.random.default_rng(seed).uniform(-1, 1, model.n)
    raise LipsubError(f"unknown field {spec!r}; use coord:k, dist:i or random")


def cmd_lip(cfg):
    model = _model(cfg)
    f = mc.ScalarField(model, _field_values(model, cfg["field"], cfg["seed"]))
    fine = mc.lip_constant(f, "fine")
    coarse = mc.lip_constant(f, "coarse")
    ratio, pair = mc.lip_witness(f.values, model.d)
    report = {"model": model.name, "field": cfg["field"], "lip_fine": fine, "lip_coarse": coarse,
              "witness_pair": list(pair), "sup_norm": f.sup_norm}
    return Outcome(report, {"finite": math.isfinite(fine), "fine_le_coarse": fine <= coarse * (1 + VALUE_TOL)})


def cmd_extend(cfg):
    model = _model(cfg)
    H = _ints(cfg["H"])
    vals = _floats(cfg["values"])
    rng = tuple(_floats(cfg["range"])) if cfg.get("range") else None
    f = mc.mcshane_extend(model, H, vals, cfg["L"], rng, cfg["metric"])
    lip = mc.lip_constant(f, cfg["metric"]) if cfg["metric"] == "fine" else \
        float(mc.pairwise_lipschitz(f.values, model.rho)[0])
    checks = {"restriction_exact": bool(np.array_equal(f.values[H], np.asarray(vals))),
              "lipschitz_bound": lip <= cfg["L"] * (1 + VALUE_TOL)}
    if rng:
        checks["range"] = bool(f.values.min() >= rng[0] and f.values.max() <= rng[1])
    rows = [[i, model.point_ids[i], v] for i, v in enumerate(f.values)]
    return Outcome({"model": model.name, "L": cfg["L"], "lip": lip, "H": H, "sup_norm": f.sup_norm},
                   checks, {"extension": (["index", "point", "value"], rows)})


def cmd_ball(cfg):
    model = _model(cfg)
    H = _ints(cfg["H"])
    B = mc.closed_ball(model, H, cfg["r"], cfg["metric"])
    return Outcome({"model": model.name, "H": H, "r": cfg["r"], "metric": cfg["metric"], "ball": B,
                    "size": len(B)}, {"contains_H": set(H) <= set(B.tolist())})


def cmd_model(cfg):
    model = _model(cfg)
    rho_ok = mc.validate_metric(model.rho).ok
    d_ok = mc.validate_metric(model.d).ok
    report = {"model": model.name, "spec": model.spec, "n": model.n, "delta": model.delta,
              "rho_diameter": model.rho.diameter(), "d_diameter": model.d.diameter(),
              "base_point": model.base_point}
    checks = {"rho_axioms": rho_ok, "d_axioms": d_ok, "d_dominates_rho": not model.check_finer()}
    if cfg.get("save"):
        report["saved"] = cfg["save"]
        with open(cfg["save"], "w", encoding="utf-8") as fh:
            fh.write(model.dumps())
    return Outcome(report, checks)


# -- convex_geometry ------------------------------------------------------------


def cmd_norm(cfg):
    N = _norm(cfg["norm"])
    x = np.asarray(_floats(cfg["x"]))
    val = float(cg.norm_eval(N, x))
    lp = float(N.gauge_lp(x))
    return Outcome({"norm": N.name, "x": x, "value": val, "dual_value": float(N.dual_norm(x)), "lp_check": lp},
                   {"nonnegative": val >= 0, "lp_agrees": abs(val - lp) <= 1e-9 * max(1.0, val)})


def cmd_polar(cfg):
    N = _norm(cfg["norm"])
    D = cg.polar_vertices(N)
    back = cg.polar(cg.polar(N)).ball_vertices
    same = back.shape == N.ball_vertices.shape and np.allclose(back, N.ball_vertices, atol=1e-9)
    rows = [list(p) for p in D.ext_points]
    return Outcome({"norm": N.name, "ball_vertices": N.ball_vertices, "dual_extreme_points": D.ext_points},
                   {"involution": bool(same)},
                   {"dual_extreme_points": ([f"y{i}" for i in range(N.dim)], rows)})


def cmd_faces(cfg):
    N = _norm(cfg["norm"])
    k = cg.face_count(N)
    return Outcome({"norm": N.name, "faces": k, "vertices": len(N.ball_vertices),
                    "linf_dimension_needed": (k + 1) // 2},
                   {"even": k % 2 == 0})


def cmd_sphere_grid(cfg):
    P = cg.sphere_grid(cfg["n"], cfg["resolution"])
    err = float(np.max(np.abs(np.linalg.norm(P, axis=1) - 1)))
    return Outcome({"n": cfg["n"], "resolution": cfg["resolution"], "points": len(P),
                    "mesh": cg.mesh_size(P)}, {"unit_norm": err <= 1e-12},
                   {"points": ([f"y{i}" for i in range(P.shape[1])], P.tolist())})


# -- embeddings -----------------------------------------------------------------


def _build_embedding(cfg):
    kind = cfg["kind"]
    if kind == "circle":
        E, rep = euclidean.embed_euclid2_circle(cfg["grid"], lip_sample=cfg["lip_sample"])
        return E, rep, {"lip_le_pi": rep.psi_lip <= math.pi * (1 + VALUE_TOL)}
    if kind == "linf":
        E = polyhedral.embed_polyhedral_linf(_norm(cfg["norm"]), cfg["n"])
        rep = E.report
        return E, rep, {"isometry": rep.isometry_defect <= VALUE_TOL, "coverage": rep.coverage_defect <= VALUE_TOL}
    if kind == "bumps":
        model = _model(cfg)
        sites = _ints(cfg["sites"]) if cfg.get("sites") else None
        E, _, rep = polyhedral.embed_polyhedral_bumps(_norm(cfg["norm"]), model, sites, cfg.get("radius"))
        return E, rep, {"isometry": rep.isometry_defect <= VALUE_TOL, "coverage": rep.coverage_defect <= VALUE_TOL}
    if kind == "cover":
        E, rep = euclidean.embed_euclid_via_cover(cfg["n"], _model(cfg), euclidean.COVER_TOL if cfg["tol"] is None else cfg["tol"],
                                                  lip_sample=cfg["lip_sample"])
        return E, rep, {"defect_within_coverage": rep.relative_defect <= rep.coverage_defect + VALUE_TOL}
    if kind == "lp-transfer":
        model = mc.lq_ball(cfg["q"], cfg["dim"], cfg["samples"], cfg["seed"])
        E, rep = mazur.transfer_lp(model, cfg["q"], cfg["q_prime"], cfg["dim"], lip_sample=cfg["lip_sample"])
        P = model.coords
        odd = np.array_equal(mazur.mazur_map(-P, cfg["q"], cfg["q_prime"]), -mazur.mazur_map(P, cfg["q"], cfg["q_prime"]))
        return E, rep, {"odd_symmetry": bool(odd)}
    raise LipsubError(f"unknown embedding kind {kind!r}")


def cmd_embed(cfg):
    E, rep, checks = _build_embedding(cfg)
    if cfg.get("tol") is not None and cfg["kind"] != "cover":
        checks["isometry_tolerance"] = rep.isometry_defect <= cfg["tol"]
    return _embed_outcome(E, rep, checks, {"kind": cfg["kind"]})


def cmd_verify(cfg):
    E, _, _ = _build_embedding(cfg)
    s = cfg["scale"]
    psi = s * E.psi
    if cfg["perturb"]:
        rng = np.random.default_rng(cfg["seed"])
        psi = psi + cfg["perturb"] * rng.uniform(-1, 1, psi.shape)
    F = emb.EmbeddingMap(E.model, psi, E.norm, label=f"{E.label} (scale {s:g}, perturb {cfg['perturb']:g})")
    rep = emb.verify_isometry(F, lip_sample=cfg["lip_sample"], construction="verify",
                              params={"kind": cfg["kind"], "scale": s, "perturb": cfg["perturb"]})
    checks = {}
    if cfg.get("tol") is not None:
        checks["isometry_tolerance"] = rep.isometry_defect <= cfg["tol"]
    out = _embed_outcome(F, rep, checks, {"kind": cfg["kind"], "scale": s, "perturb": cfg["perturb"]})
    if s * (1 + cfg["perturb"]) > 1 + VALUE_TOL:
        out.checks.pop("dual_membership")
    return out


def _coefficients(cfg, m):
    if cfg.get("coeffs"):
        return np.atleast_2d(_floats(cfg["coeffs"]))
    return np.random.default_rng(cfg["seed"]).uniform(-1, 1, size=(cfg["trials"], m))


def _basis_checks(basis, A, identity, lip_bound):
    F = basis.combine(A)
    sup = np.abs(F).max(axis=0)
    target = basis.coefficient_norm(A)
    err = float(np.max(np.abs(sup - target)))
    lips = mc.pairwise_lipschitz(F, basis.model.d)
    bound = lip_bound(A)
    worst = float(np.max(lips - bound))
    rows = [[*a, t, s, l] for a, t, s, l in zip(A, target, sup, lips)]
    header = [f"a{i + 1}" for i in range(A.shape[1])] + [identity, "sup_norm", "lip"]
    return err, worst, lips, (header, rows)


def cmd_c0_construct(cfg):
    model = _model(cfg)
    eps = cfg["eps"]
    basis, rep = subspaces.construct_c0(model, eps)
    A = _coefficients(cfg, basis.m)
    err, worst, _, table = _basis_checks(basis, A, "max_abs",
                                         lambda A: 2.0 / eps * np.abs(A).max(axis=1) * (1 + VALUE_TOL))
    sup = basis.meta["supports"]
    disjoint = all(not set(a) & set(b) for i, a in enumerate(sup) for b in sup[i + 1:])
    report = {"model": model.name, "eps": eps, "m": basis.m, "t0": basis.meta["t0"], "sites": basis.meta["sites"],
              "field_lips": basis.lip_constants(), "max_identity_error": err, "report": rep.to_dict()}
    if cfg.get("coeffs"):
        report["sup_norm"] = float(np.abs(basis.combine(A[0])).max())
    return Outcome(report, {"sup_identity": err <= 1e-12, "lip_bound": worst <= 0, "disjoint_supports": disjoint},
                   {"coefficients": table})


def cmd_ell1(cfg):
    model = _model(cfg)
    eps = cfg["eps"]
    w = fr.find_witness(model, eps, cfg.get("delta"))
    if w is None:
        return Outcome({"model": model.name, "eps": eps, "witness": None}, {"witness_found": False})
    basis, rep = subspaces.construct_ell1(model, w, cfg["depth"])
    A = _coefficients(cfg, basis.m)
    err, _, _, table = _basis_checks(basis, A, "sum_abs",
                                     lambda A: 1.0 / eps * np.abs(A).sum(axis=1) * (1 + VALUE_TOL))
    lips = basis.lip_constants()
    fam = basis.meta["families"]
    problems = fam.check_invariants()
    report = {"model": model.name, "eps": eps, "depth": cfg["depth"], "H": basis.meta["H"],
              "field_lips": lips, "max_identity_error": err, "family_problems": problems,
              "report": rep.to_dict()}
    if cfg.get("coeffs"):
        a = A[0]
        report["sup_norm"] = float(np.abs(basis.combine(a)).max())
        report["attained_at"] = model.point_ids[subspaces.attaining_point(basis, a)]
    return Outcome(report, {"sup_identity": err <= 1e-12, "field_lip_bound": bool(np.all(lips <= (1 + VALUE_TOL) / eps)),
                            "families_invariants": not problems}, {"coefficients": table})


def cmd_c0_ball(cfg):
    coeffs = _floats(cfg["coeffs"])
    f, checks = subspaces.example_c0_in_ball(cfg["dim"], cfg["samples"], cfg["seed"], coeffs)
    return Outcome({"dim": cfg["dim"], "samples": cfg["samples"], "seed": cfg["seed"], "coeffs": coeffs, **checks},
                   {"bounded": checks["bounded"], "lip_ok": checks["lip_ok"]})


def cmd_mazur(cfg):
    q1, q2 = cfg["q1"], cfg["q2"]
    rng = np.random.default_rng(cfg["seed"])
    if cfg.get("x"):
        X = np.atleast_2d(_floats(cfg["x"]))
    else:
        X = rng.uniform(-1, 1, size=(cfg["trials"], cfg["dim"]))
    Y = mazur.mazur_map(X, q1, q2)
    lhs = np.sum(np.abs(Y) ** q2, axis=1)
    rhs = np.sum(np.abs(X) ** q1, axis=1)
    err = float(np.max(np.abs(lhs - rhs)))
    odd = bool(np.array_equal(mazur.mazur_map(-X, q1, q2), -Y))
    report = {"q1": q1, "q2": q2, "vectors": len(X), "max_identity_error": err}
    if cfg.get("x"):
        report["image"] = Y[0]
    if q2 <= q1:
        report["max_ratio"] = float(mazur.mazur_ratios(q1, q2, cfg["dim"], cfg["pairs"], cfg["seed"]).max())
    else:
        report["blowup"] = mazur.blowup_profile(q1, q2, dim=cfg["dim"], seed=cfg["seed"])
    rows = [[*x, *y] for x, y in zip(X[:200], Y[:200])]
    header = [f"x{i}" for i in range(X.shape[1])] + [f"y{i}" for i in range(X.shape[1])]
    return Outcome(report, {"norm_identity": err <= 1e-12, "odd": odd}, {"images": (header, rows)})


def cmd_sphere_cover(cfg):
    sc = euclidean.sphere_cover(cfg["n"], cfg["grid"])
    pole = np.zeros(cfg["n"] + 1)
    pole[-1] = 1.0
    hit = bool(np.any(np.all(sc.sphere_points == pole, axis=1)))
    rows = [[*u, *s] for u, s in zip(sc.cube_points, sc.sphere_points)]
    header = [f"u{i}" for i in range(cfg["n"])] + [f"s{i}" for i in range(cfg["n"] + 1)]
    return Outcome(sc.to_dict(), {"north_pole": hit, "coverage": sc.coverage_defect <= 2 * math.pi / cfg["grid"],
                                  "lipschitz_finite": math.isfinite(sc.lipschitz)},
                   {"cover": (header, rows)})


def cmd_filling_curve(cfg):
    demo = euclidean.filling_curve_demo(_ints(cfg["levels"]))
    rows = demo["rows"]
    keys = ["level", "points", "lip", "max_lip", "isometry_defect", "coverage_defect", "circle_lip", "circle_defect"]
    fig = plotting.refinement_curves([r["level"] for r in rows], [r["lip"] for r in rows],
                                     [r["isometry_defect"] for r in rows], [r["circle_lip"] for r in rows])
    checks = {"growth": all(r >= cfg["min_ratio"] for _, _, r in demo["two_level_ratios"]),
              "defect_monotone": demo["defect_monotone"],
              "circle_bounded": demo["circle_max_lip"] <= math.pi + 0.01}
    return Outcome(demo, checks, {"levels": (keys, [[r[k] for k in keys] for r in rows])},
                   {"refinement": fig})


# -- fragmentation ---------------------------------------------------------------


def _delta(cfg, model, eps):
    return cfg["delta"] if cfg.get("delta") is not None else min(model.delta, fr.RESOLUTION_FACTOR * eps)


def cmd_derive(cfg):
    model = _model(cfg)
    delta = _delta(cfg, model, cfg["eps"])
    A = _ints(cfg["A"]) if cfg.get("A") else list(range(model.n))
    B = fr.derive_once(model, A, cfg["eps"], delta)
    return Outcome({"model": model.name, "eps": cfg["eps"], "delta": delta, "size_in": len(A), "size_out": len(B),
                    "survivors": [model.point_ids[i] for i in B]}, {"subset": set(B.tolist()) <= set(A)})


def cmd_szlenk(cfg):
    model = _model(cfg)
    delta = _delta(cfg, model, cfg["eps"])
    tr = fr.szlenk_index(model, cfg["eps"], delta)
    sizes = tr.sizes()
    strict = all(b < a for a, b in zip(sizes, sizes[1:]))
    rows = [[model.name, cfg["eps"], delta, k, s] for k, s in enumerate(sizes)]
    return Outcome(tr.to_dict(), {"strictly_decreasing": strict},
                   {"levels": (["model", "eps", "delta", "level", "size"], rows)},
                   {"cascade": plotting.cascade(sizes, f"{model.name}, eps={cfg['eps']:g}")})


def cmd_witness(cfg):
    model = _model(cfg)
    delta = cfg["delta"] if cfg.get("delta") is not None else min(model.delta, 3 * fr.RESOLUTION_FACTOR * cfg["eps"])
    w = fr.find_witness(model, cfg["eps"], delta)
    report = {"model": model.name, "eps": cfg["eps"], "delta": delta, "found": w is not None}
    if w is not None:
        report.update(size=len(w.A), min_diameter=w.min_diameter, A=[model.point_ids[i] for i in w.A])
        return Outcome(report, {"certified": w.min_diameter >= 3 * cfg["eps"] - mc.AXIOM_TOL})
    return Outcome(report, {})


def cmd_dyadic(cfg):
    model = _model(cfg)
    delta = cfg["delta"] if cfg.get("delta") is not None else min(model.delta, 3 * fr.RESOLUTION_FACTOR * cfg["eps"])
    w = fr.find_witness(model, cfg["eps"], delta)
    if w is None:
        return Outcome({"model": model.name, "eps": cfg["eps"], "witness": None}, {"witness_found": False})
    fam = fr.build_dyadic_families(w, cfg["depth"])
    problems = fam.check_invariants()
    ids = model.point_ids
    rows = [[s or "-", ids[fam.x[s]], len(fam.V[s]), len(fam.U[s]), fam.radius[s]] for s in sorted(fam.V, key=lambda s: (len(s), s))]
    report = {"model": model.name, "eps": cfg["eps"], "depth": cfg["depth"], "witness_size": len(w.A),
              "points": {s: ids[p] for s, p in fam.x.items()}, "problems": problems}
    return Outcome(report, {"invariants": not problems},
                   {"families": (["word", "x", "V_size", "U_size", "radius"], rows)})


def cmd_quotient_check(cfg):
    eps = _floats(cfg["eps"]) or list(fr.QUOTIENT_EPS)
    wanted = cfg["map"]
    rows, out = [], []
    for name, K1, K2, phi in fr.quotient_corpus():
        if wanted != "all" and wanted != name:
            continue
        rep = fr.check_quotient_monotonicity(K1, K2, phi, eps)
        out.append({"map": name, "lip_phi": rep.lip_phi, "c": rep.c, "violations": len(rep.violations),
                    "rows": rep.rows})
        rows += [[name, r["eps"], r["c_eps"], r["delta1"], r["delta2"], r["sz_K1"], r["sz_K2"], r["ok"]]
                 for r in rep.rows]
    if not out:
        raise LipsubError(f"unknown map {wanted!r}")
    total = sum(o["violations"] for o in out)
    return Outcome({"maps": out, "pairs": len(rows), "violations": total}, {"no_violations": total == 0},
                   {"quotient": (["map", "eps", "c_eps", "delta1", "delta2", "sz_K1", "sz_K2", "ok"], rows)})


def cmd_lq_scaling(cfg):
    res = fr.lq_scaling_experiment(_floats(cfg["q"]), _ints(cfg["dims"]), _floats(cfg["eps"]),
                                   cfg["seed"], cfg["samples"])
    rows = [[r["q"], r["dim"], r["samples"], r["eps"], r["delta"], k, s]
            for r in res["rows"] for k, s in enumerate(r["sizes"])]
    return Outcome(res, {"antitone": all(f["monotone"] for f in res["fits"])},
                   {"levels": (["q", "dim", "samples", "eps", "delta", "level", "size"], rows)},
                   {"scaling": plotting.loglog_scaling(res["rows"], res["fits"])})


# -- registry ----------------------------------------------------------------------

P = Param
MODEL = P("model", "str", "fan:8", "model spec, e.g. fan:8, cantor:4, interval:1000, seq:6,1, lq:2,6,3000, cube:2,64")
SEED = P("seed", "int", 0, "random seed")
NORM = P("norm", "str", "hexagon", "norm preset", tuple(cg.PRESETS))
EMBED_PARAMS = (
    P("kind", "str", "circle", "embedding kind", ("circle", "linf", "bumps", "cover", "lp-transfer")),
    P("grid", "int", 10000, "interval grid size (circle)"),
    NORM,
    P("n", "int", 3, "target dimension (linf) or sphere dimension (cover)"),
    P("model", "str", "interval:200", "model spec (bumps, cover)"),
    P("sites", "ints", None, "bump sites"),
    P("radius", "float", None, "bump radius"),
    P("q", "float", 2.0, "source exponent (lp-transfer)"),
    P("q_prime", "float", 1.0, "target exponent (lp-transfer)"),
    P("dim", "int", 3, "dimension (lp-transfer)"),
    P("samples", "int", 10000, "ball samples (lp-transfer)"),
    P("tol", "float", None, "isometry defect tolerance to assert (coverage tolerance for cover)"),
    P("lip_sample", "int", 20, "test vectors used in Lipschitz scans"),
    SEED,
)

COMMANDS = {c.name: c for c in [
    Command("validate-metric", cmd_validate_metric, (MODEL, SEED), "check metric axioms and d >= rho"),
    Command("lip", cmd_lip, (MODEL, P("field", "str", "coord:0", "coord:k, dist:i or random"), SEED),
            "exact Lipschitz constant of a field"),
    Command("extend", cmd_extend, (MODEL, P("H", "ints", "0", "subset indices"), P("values", "floats", "0"),
                                   P("L", "float", 1.0), P("range", "floats", None, "a,b"),
                                   P("metric", "str", "fine", choices=("fine", "coarse")), SEED),
            "McShane extension with clamping"),
    Command("ball", cmd_ball, (MODEL, P("H", "ints", "0"), P("r", "float", 0.1),
                               P("metric", "str", "fine", choices=("fine", "coarse")), SEED),
            "closed ball around a set"),
    Command("model", cmd_model, (MODEL, P("save", "str", None, "write the model JSON here"), SEED),
            "build and summarise a model"),
    Command("norm", cmd_norm, (NORM, P("x", "floats", "1,0")), "evaluate a polyhedral norm"),
    Command("polar", cmd_polar, (NORM,), "dual extreme points"),
    Command("faces", cmd_faces, (NORM,), "facet count"),
    Command("sphere-grid", cmd_sphere_grid, (P("n", "int", 1), P("resolution", "int", 4)), "sphere sample"),
    Command("embed", cmd_embed, EMBED_PARAMS, "build an embedding and verify it"),
    Command("verify", cmd_verify, EMBED_PARAMS + (P("scale", "float", 1.0), P("perturb", "float", 0.0)),
            "verify a (scaled or perturbed) embedding"),
    Command("c0-construct", cmd_c0_construct, (P("model", "str", "seq:6,1"), P("eps", "float", 0.125),
                                               P("coeffs", "floats", None), P("trials", "int", 1000), SEED),
            "isometric c0 from separated points"),
    Command("ell1", cmd_ell1, (P("model", "str", "cantor:4"), P("eps", "float", 0.25), P("depth", "int", 4),
                               P("delta", "float", None), P("coeffs", "floats", None), P("trials", "int", 1000), SEED),
            "isometric l1 from a non-fragmentability witness"),
    Command("c0-ball", cmd_c0_ball, (P("dim", "int", 8), P("samples", "int", 2000), P("coeffs", "floats", "1,-0.5"), SEED),
            "squared coordinates on a Euclidean ball"),
    Command("mazur", cmd_mazur, (P("q1", "float", 2.0), P("q2", "float", 1.0), P("x", "floats", None),
                                 P("dim", "int", 6), P("trials", "int", 100000), P("pairs", "int", 100000), SEED),
            "signed power map between l_q balls"),
    Command("sphere-cover", cmd_sphere_cover, (P("n", "int", 1), P("grid", "int", 64)), "stereographic cube cover"),
    Command("filling-curve", cmd_filling_curve, (P("levels", "ints", "1,2,3,4,5,6"), P("min_ratio", "float", 1.8)),
            "Hilbert curve obstruction demo"),
    Command("derive", cmd_derive, (MODEL, P("eps", "float", 1.0), P("delta", "float", None),
                                   P("A", "ints", None, "start set (default: all)"), SEED), "one derivation step"),
    Command("szlenk", cmd_szlenk, (MODEL, P("eps", "float", 1.0), P("delta", "float", None), SEED), "derivation index"),
    Command("witness", cmd_witness, (MODEL, P("eps", "float", 0.25), P("delta", "float", None), SEED),
            "non-fragmentability witness"),
    Command("dyadic", cmd_dyadic, (P("model", "str", "cantor:4"), P("eps", "float", 0.25), P("depth", "int", 4),
                                   P("delta", "float", None), SEED), "dyadic families inside a witness"),
    Command("quotient-check", cmd_quotient_check, (P("map", "str", "all"), P("eps", "floats", None)),
            "index monotonicity under Lipschitz quotients"),
    Command("lq-scaling", cmd_lq_scaling, (P("q", "floats", "1,2"), P("dims", "ints", "2,3"),
                                           P("eps", "floats", "0.8,0.4,0.2,0.1,0.05"), P("samples", "int", 400), SEED),
            "index of sampled l_q balls across scales"),
]}

# every public operation, the command exposing it and what it realises
OPERATIONS = [
    ("validate_metric", "validate-metric", "metric axioms at finite scale"),
    ("lip_constant", "lip", "exact Lipschitz constant over all pairs"),
    ("mcshane_extend", "extend", "Lipschitz extension preserving the constant"),
    ("closed_ball", "ball", "closed ball operator for a lower semicontinuous metric"),
    ("make_model", "model", "finite bitopological models"),
    ("norm_eval", "norm", "polyhedral norm evaluation"),
    ("polar_vertices", "polar", "dual ball extreme points by polarity"),
    ("face_count", "faces", "facets of a polyhedral ball"),
    ("sphere_grid", "sphere-grid", "dual sphere sampling for coverage tests"),
    ("embed_euclid2_circle", "embed circle", "Euclidean plane over an interval"),
    ("embed_polyhedral_linf", "embed linf", "polyhedral space into l_inf^n iff 2n >= faces"),
    ("embed_polyhedral_bumps", "embed bumps", "polyhedral space via disjoint bumps"),
    ("construct_c0", "c0-construct", "isometric c0 Lipschitz subspace"),
    ("construct_ell1", "ell1", "isometric l1 from non-fragmentability"),
    ("example_c0_in_ball", "c0-ball", "c0 inside functions on the Hilbert ball"),
    ("mazur_map", "mazur", "Mazur map between l_q balls"),
    ("transfer_lp", "embed lp-transfer", "l_p copies transferred by the Mazur map"),
    ("sphere_cover", "sphere-cover", "stereographic cover of the sphere by a cube"),
    ("embed_euclid_via_cover", "embed cover", "Euclidean spaces over a Lipschitz preimage of the cube"),
    ("filling_curve_demo", "filling-curve", "space-filling curve obstruction"),
    ("verify_isometry", "verify", "extreme point characterisation of isometries"),
    ("derive_once", "derive", "set derivation at scale eps"),
    ("szlenk_index", "szlenk", "Szlenk index at scale eps"),
    ("find_witness", "witness", "non-fragmentability witness"),
    ("build_dyadic_families", "dyadic", "dyadic families inside a witness"),
    ("check_quotient_monotonicity", "quotient-check", "Szlenk monotonicity under Lipschitz quotients"),
    ("lq_scaling_experiment", "lq-scaling", "Szlenk index of l_q balls against eps"),
]


def list_commands() -> list[tuple[str, str, str]]:
    return list(OPERATIONS)


def defaults(command: str) -> dict:
    return {p.name: p.default for p in COMMANDS[command].params}


def _coerce(p: Param, v):
    if v is None:
        return None
    if p.kind == "int":
        return int(v)
    if p.kind == "float":
        return float(v)
    if p.kind == "floats":
        return ",".join(repr(x) for x in _floats(v))
    if p.kind == "ints":
        return ",".join(str(x) for x in _ints(v))
    return str(v)


def resolve(command: str, file_cfg: dict | None = None, flags: dict | None = None) -> dict:
    """Defaults, then the config file, then flags."""
    if command not in COMMANDS:
        raise KeyError(command)
    cfg = defaults(command)
    for src in (file_cfg or {}, flags or {}):
        for k, v in src.items():
            if k in cfg:
                cfg[k] = v
    spec = {p.name: p for p in COMMANDS[command].params}
    for k, p in spec.items():
        cfg[k] = _coerce(p, cfg[k])
        if p.choices and cfg[k] is not None and cfg[k] not in p.choices:
            raise LipsubError(f"{k} must be one of {', '.join(p.choices)}")
    cfg["command"] = command
    return cfg


def execute(cfg: dict) -> Outcome:
    """Run a resolved configuration; construction refusals become a failed check."""
    cmd = COMMANDS[cfg["command"]]
    try:
        out = cmd.handler(cfg)
    except LipsubError as exc:
        out = Outcome({"error": type(exc).__name__, "message": str(exc)}, {type(exc).__name__: False})
    out.report = {"command": cfg["command"], "config": {k: v for k, v in sorted(cfg.items())},
                  "checks": out.checks, "result": out.report, "version": __version__}
    return out


def run(config: dict, out_dir: str | None = None, argv=None, write: bool = True) -> tuple[int, Outcome | None]:
    """Dispatch one configuration; returns ``(exit status, outcome)``."""
    config = dict(config)
    command = config.pop("command", None)
    if command not in COMMANDS:
        print(f"unknown command {command!r}", file=sys.stderr)
        return EXIT_USAGE, None
    out_dir = out_dir or config.pop("out", None) or default_out_dir()
    config.pop("out", None)
    try:
        cfg = resolve(command, config)
    except LipsubError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_USAGE, None
    outcome = execute(cfg)
    if write:
        write_bundle(out_dir, outcome.report, outcome.tables, outcome.figures, metadata(command, argv))
    return (EXIT_FAIL if outcome.failed else EXIT_OK), outcome


# -- argparse ---------------------------------------------------------------------


def _add_param(sp, p: Param):
    flag = "--" + p.name.replace("_", "-")
    kw = {"dest": p.name, "default": argparse.SUPPRESS,
          "help": f"{p.help} (default: {p.default})".strip()}
    if p.kind == "int":
        kw["type"] = int
    elif p.kind == "float":
        kw["type"] = float
    if p.choices:
        kw["choices"] = p.choices
    if p.name == "kind":
        kw.pop("dest")
        sp.add_argument("kind", nargs="?", **kw)
    else:
        sp.add_argument(flag, **kw)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lipsub", description="Lipschitz subspaces of C(K) on finite models.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    for name, cmd in COMMANDS.items():
        sp = sub.add_parser(name, help=cmd.help, description=cmd.help)
        for p in cmd.params:
            _add_param(sp, p)
        sp.add_argument("--out", default=None, help="output directory (default: $LIPSUB_OUT or lipsub-out)")
        sp.add_argument("--config", default=None, help="JSON config file; flags override it")
    sp = sub.add_parser("run", help="run a JSON config file")
    sp.add_argument("--config", required=True)
    sp.add_argument("--out", default=None)
    sub.add_parser("list", help="operations and the commands exposing them")
    return parser


def _print_summary(outcome: Outcome):
    res = outcome.report["result"]
    keys = [k for k in ("model", "verdict", "index", "sup_norm", "faces", "value", "violations", "pairs",
                        "found", "max_identity_error", "coverage_defect", "error", "message") if k in res]
    for k in keys:
        print(f"{k}: {res[k]}")
    if "report" in res:
        r = res["report"]
        print(f"isometry_defect: {r['isometry_defect']:.3g}  coverage_defect: {r['coverage_defect']:.3g}  "
              f"lambda: {r['lambda']:.4g}  max_lip: {r['max_lip']:.4g}")
    for name, ok in sorted(outcome.checks.items()):
        print(f"check {name}: {'pass' if ok else 'FAIL'}")


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return EXIT_USAGE
    if args.command == "list":
        width = max(len(c) for _, c, _ in OPERATIONS)
        for op, command, anchor in OPERATIONS:
            print(f"{command:<{width}}  {op:<28}  {anchor}")
        return EXIT_OK
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "out", "config")}
    file_cfg = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            file_cfg = json.load(fh)
    if args.command == "run":
        config = dict(file_cfg)
    else:
        config = {**file_cfg, **flags, "command": args.command}
    status, outcome = run(config, out_dir=args.out or file_cfg.get("out"), argv=argv)
    if outcome is not None:
        _print_summary(outcome)
        if outcome.failed:
            print(f"failed checks: {', '.join(outcome.failed)}", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
