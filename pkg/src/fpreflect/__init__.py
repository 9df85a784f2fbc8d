"""Reflection coefficients R_r(x, -inf; k) of the Fokker-Planck equation.

Modules:

- ``potential``: expression parsing, catalog potentials, drift derivatives, asymptotic classes
- ``series_algebra``: exact high-energy coefficients c_n and remainder kernels
- ``lowenergy``: nested bracket integrals and low-energy coefficients r_n
- ``specfun``: Gamma, 1F1, 2F1 and Bessel J in multiprecision
- ``reference``: numerical and closed-form oracles for the scattering coefficients
- ``analysis``: remainder sweeps, validity verdicts, Green function
- ``cli``: the ``fpreflect`` command
"""

from .analysis import (
    SweepReport,
    SweepSpec,
    greens,
    integral_remainder_high,
    run_sweep,
    s_value,
    validity_verdict,
)
from .lowenergy import BracketSignature, bracket, low_coeff, low_coeffs, low_partial_sum
from .potential import (
    AsymptoticClass,
    PotentialProfile,
    PotentialSpec,
    build_profile,
    catalog,
    classify_asymptotics,
    parse_potential,
)
from .reference import (
    ComplexEnergy,
    closed_form_rr,
    finite_interval,
    generalize,
    k0_forms,
    semiinfinite_rr,
)
from .series_algebra import DiffPolynomial, XiPolynomial, cbar, ctilde, high_coeffs, remainder_kernel

__version__ = "0.1.0"

__all__ = [
    "AsymptoticClass",
    "BracketSignature",
    "ComplexEnergy",
    "DiffPolynomial",
    "PotentialProfile",
    "PotentialSpec",
    "SweepReport",
    "SweepSpec",
    "XiPolynomial",
    "bracket",
    "build_profile",
    "catalog",
    "cbar",
    "classify_asymptotics",
    "closed_form_rr",
    "ctilde",
    "finite_interval",
    "generalize",
    "greens",
    "high_coeffs",
    "integral_remainder_high",
    "k0_forms",
    "low_coeff",
    "low_coeffs",
    "low_partial_sum",
    "parse_potential",
    "remainder_kernel",
    "run_sweep",
    "s_value",
    "semiinfinite_rr",
    "validity_verdict",
]
