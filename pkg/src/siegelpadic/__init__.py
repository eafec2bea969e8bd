"""Exact arithmetic for p-adic L-functions of half-integral weight Siegel modular forms."""
from .chars import DirichletChar, gauss_sum, gauss_sum_n
from .cyclo import CycloNumber
from .errors import SiegelPadicError
from .hecke import SatakeParams, WeylLaurentPoly, hecke_polynomial, p_stabilise
from .measures import DiracMeasure, DistributionSystem, kummer_check, mellin, sigma_measure
from .padic import PadicNumber, embed_cyclo, teichmuller, valuation_cyclo
from .qexp import ExtCoeff, FourierExpansion, theta_series
from .symlat import HalfIntSymMatrix, reduce_class, theta_ideal

__version__ = "0.1.0"

__all__ = [
    "CycloNumber", "DiracMeasure", "DirichletChar", "DistributionSystem", "ExtCoeff",
    "FourierExpansion", "HalfIntSymMatrix", "PadicNumber", "SatakeParams", "SiegelPadicError",
    "WeylLaurentPoly", "embed_cyclo", "gauss_sum", "gauss_sum_n", "hecke_polynomial",
    "kummer_check", "mellin", "p_stabilise", "reduce_class", "sigma_measure", "teichmuller",
    "theta_ideal", "theta_series", "valuation_cyclo",
]
