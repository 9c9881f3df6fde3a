"""Exact noncommutative de Rham cohomology with a Serre spectral sequence for A(S^2_q) -> A(SL_q(2))."""

from .qfield import Q, SYMBOLIC, RatFunc, ScalarMode, q_integer, scalar_mode, specialized
from .ncpoly import Report, build_laurent, build_sl2, verify_presentation
from .calculus import (Calculus, FormElement, build_3d, build_4d, build_H3, build_H4, d_squared_check,
                       dump_calculus, load_calculus, verify_calculus)
from .homomorph import (KSpace, build_4d_full, coaction_check, condition_K_check, horizontal_forms, omega_B,
                        pi_star, rho_star)
from .connection import (ConnectionData, ProductStructure, composite_check, connecting_map, product_structure_check,
                         twisted_cohomology)
from .spectral import (Fibration, FibrationError, SpectralSequence, braiding_condition_check, convergence_check,
                       fibration_test, fibre_connection, hopf_fibration, sigma_hat, spectral_pages, theta_map,
                       xi_component)

__all__ = [
    "Q", "SYMBOLIC", "RatFunc", "ScalarMode", "q_integer", "scalar_mode", "specialized",
    "Report", "build_laurent", "build_sl2", "verify_presentation",
    "Calculus", "FormElement", "build_3d", "build_4d", "build_H3", "build_H4", "d_squared_check",
    "dump_calculus", "load_calculus", "verify_calculus",
    "KSpace", "build_4d_full", "coaction_check", "condition_K_check", "horizontal_forms", "omega_B",
    "pi_star", "rho_star",
    "ConnectionData", "ProductStructure", "composite_check", "connecting_map", "product_structure_check",
    "twisted_cohomology",
    "Fibration", "FibrationError", "SpectralSequence", "braiding_condition_check", "convergence_check",
    "fibration_test", "fibre_connection", "hopf_fibration", "sigma_hat", "spectral_pages", "theta_map",
    "xi_component",
]
