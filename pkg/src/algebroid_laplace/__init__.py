"""Finsler geometry on holomorphic Lie algebroids.

Symbolic Wirtinger calculus, the Chern-Finsler connection, Laplacians of
functions and horizontal forms, and numerical checks of the identities they
satisfy.
"""
from . import expr
from .algebroid import AlgebroidSpec, anchor_derivative, validate_algebroid
from .calculus import (SectionField, TensorField, cov_deriv_h, cov_deriv_v, differential_split,
                       div_h, div_v, divergence_consistency_check, grad_h, grad_v, laplacian_h,
                       laplacian_h_cov, laplacian_v, laplacian_v_cov, volume_density)
from .connection import (ConnectionData, build_connection, check_connection_identities,
                         delta_deriv, is_kahler, verify_brackets)
from .expr import EvalPoint, Expr, Var, conj, diff, evaluate, fd_deriv
from .finsler import FinslerData, build_finsler, check_homogeneity, check_pseudoconvexity
from .forms import (HorizontalForm, box_h, box_h_composed, box_h_kahler, del_adjoint, del_h,
                    delbar_adjoint, delbar_adjoint_raised, delbar_h, global_inner_product,
                    inner_product_pointwise)
from .parsing import parse_expr
from .quadrature import IntegrationDomain, check_integral_identity, integrate
from .report import CheckResult, ValidationReport
from .scenario import Scenario, load_scenario

__version__ = "0.1.0"
