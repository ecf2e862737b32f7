"""Nikishin and Angelesco systems, type I and type II Hermite-Padé
polynomials, vector equilibrium problems and asymptotic harnesses at
configurable precision."""

from . import precision
from .asymptotics import (DegreeSchedule, Report, connection_check, diagonal_schedule,
                          miracle_residual, rate_report, ratio_report, staircase_schedule,
                          type_i_ratio_report, weak_report)
from .hermite_pade import (NormalityFailure, TypeIFamily, TypeIIFamily, at_system_probe,
                           certify_perfectness, h_type_i, h_type_ii, pade_numerator, psi,
                           remainder_phi, solve_type_i, solve_type_ii, type_i_form)
from .measures import (AngelescoSystem, Interval, Measure, NikishinSystem, angelesco_system,
                       cauchy_transform, chebyshev, integrate, jacobi, legendre, make_measure,
                       nikishin_system)
from .polynomials import MultiIndex, Polynomial
from .potential import (EquilibriumSolution, interaction_matrix, solve_external_field_equilibrium,
                        solve_vector_equilibrium, u_function, xi_function)
from .zeros import (counting_measure, form_zeros, interlace_check, kolmogorov_distance,
                    poly_real_zeros)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "angelesco_system",
    "AngelescoSystem",
    "at_system_probe",
    "cauchy_transform",
    "certify_perfectness",
    "chebyshev",
    "connection_check",
    "counting_measure",
    "DegreeSchedule",
    "diagonal_schedule",
    "EquilibriumSolution",
    "form_zeros",
    "h_type_i",
    "h_type_ii",
    "integrate",
    "interaction_matrix",
    "interlace_check",
    "Interval",
    "jacobi",
    "kolmogorov_distance",
    "legendre",
    "make_measure",
    "Measure",
    "miracle_residual",
    "MultiIndex",
    "nikishin_system",
    "NikishinSystem",
    "NormalityFailure",
    "pade_numerator",
    "poly_real_zeros",
    "Polynomial",
    "precision",
    "psi",
    "rate_report",
    "ratio_report",
    "remainder_phi",
    "Report",
    "solve_external_field_equilibrium",
    "solve_type_i",
    "solve_type_ii",
    "solve_vector_equilibrium",
    "staircase_schedule",
    "type_i_form",
    "type_i_ratio_report",
    "TypeIFamily",
    "TypeIIFamily",
    "u_function",
    "weak_report",
    "xi_function",
]
