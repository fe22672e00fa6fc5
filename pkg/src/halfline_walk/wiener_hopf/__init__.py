"""Wiener-Hopf route to the survival exponent."""

from .halfplane import (
    HalfPlaneIntegrals,
    RadiusChoice,
    ab_closed,
    ab_closed_bd,
    ab_numeric,
    choose_radius,
    closed_arcsin_argument,
    half_plane_integrals,
    inner_integrals,
    lemma31_constant,
    lemma41_constant,
    limit_arcsin,
    phi_lambda,
    tail_constants,
)
from .ladder import LineTransform, SurvivalFactors, ladder_transform, line_survival, survival_factors
from .quartic import (
    AbcdSet,
    QuarticFactors,
    abcd,
    abcd_from_values,
    factorization_residual,
    pf_integral,
    quartic_factor,
)
from .ratio import RatioCurve, closed_form_ratio, i0_bracket, i0_series, q_functions, ratio_curve

__all__ = [
    "AbcdSet", "HalfPlaneIntegrals", "LineTransform", "QuarticFactors", "RadiusChoice",
    "RatioCurve", "SurvivalFactors", "ab_closed", "ab_closed_bd", "ab_numeric", "abcd",
    "abcd_from_values", "choose_radius", "closed_arcsin_argument", "closed_form_ratio",
    "factorization_residual", "half_plane_integrals", "i0_bracket", "i0_series",
    "inner_integrals", "ladder_transform", "lemma31_constant", "lemma41_constant",
    "limit_arcsin", "line_survival", "pf_integral", "phi_lambda", "q_functions",
    "quartic_factor", "ratio_curve", "survival_factors", "tail_constants",
]
