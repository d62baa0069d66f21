"""Exact character-degree counts and coadjoint-orbit data for uniform pro-p groups."""

from .arith import INF, CycloValue, PrimeContext
from .liealg import LieAlgebra, StructureReport, validate_algebra
from .zeta import LambdaTable, RationalFit, ZetaPolynomial, fit_rational, lambda_exact

__all__ = [
    "INF",
    "CycloValue",
    "PrimeContext",
    "LieAlgebra",
    "StructureReport",
    "validate_algebra",
    "LambdaTable",
    "RationalFit",
    "ZetaPolynomial",
    "fit_rational",
    "lambda_exact",
]

__version__ = "0.1.0"
