"""Numerical validation that a candidate real solution set is complete.

Given polynomials f and a finite (or parametrized) candidate set S of real
solutions, the library interpolates the vanishing ideal of S and certifies
each generator's real-radical membership through sums-of-squares
semidefinite feasibility.  A True verdict means I(S) equals the real
radical of <f>, i.e. no real solution is missing from S.
"""

from .poly import (Polynomial, PolynomialSystem, PolyMatrix, parse_system,
                   parse_poly, format_poly, format_system, jacobian, minors)
from .candidates import (PointSet, Point, newton_refine, random_real_search,
                         deflation_sequence, dedupe, ComponentParam,
                         sample_component, build_gdh, track)
from .interpolate import (monomial_basis, evaluation_matrix, vanishing_space,
                          hilbert_function, regularity_check, reduced_generators,
                          VanishingBasis)
from .sdp import SDPProblem, PSDSolution, project_psd, solve_feasibility
from .soscert import (SOSCertificate, MembershipQuery, build_membership_sdp,
                      certify, verify_certificate, slack_augment,
                      a_radical_validate)
from .pipeline import ValidationReport, validate_real_set

__version__ = "0.1.0"
