"""Embedding constructors and the isometry verifier."""

from .core import (EmbeddingMap, EmbeddingReport, SubspaceBasis, coverage_defect, default_test_vectors,
                   discrete_model, psi_lipschitz, verify_isometry)
from .euclidean import (cover_map, embed_euclid2_circle, embed_euclid_via_cover, filling_curve_demo,
                        hilbert_curve, inverse_stereographic, sphere_cover)
from .mazur import blowup_profile, mazur_map, mazur_ratios, transfer_lp, transfer_lp_sampled
from .polyhedral import embed_polyhedral_bumps, embed_polyhedral_linf
from .subspaces import (attaining_point, c0_sites, check_pullback, construct_c0, construct_ell1,
                        example_c0_in_ball, pullback, sign_map)

__all__ = [
    "EmbeddingMap", "EmbeddingReport", "SubspaceBasis", "attaining_point", "blowup_profile", "c0_sites",
    "check_pullback", "construct_c0", "construct_ell1", "cover_map", "coverage_defect", "default_test_vectors",
    "discrete_model", "embed_euclid2_circle", "embed_euclid_via_cover", "embed_polyhedral_bumps",
    "embed_polyhedral_linf", "example_c0_in_ball", "filling_curve_demo", "hilbert_curve",
    "inverse_stereographic", "mazur_map", "mazur_ratios", "psi_lipschitz", "pullback", "sign_map",
    "sphere_cover", "transfer_lp", "transfer_lp_sampled", "verify_isometry",
]
