"""Exact classification of quadratic homogeneous maps by Jacobian rank, and
tame factorizations of the Keller maps ``x + H`` with ``rk JH <= 3``."""

from .errors import (ContractViolation, CtxMismatch, DegreeTooHigh, FieldTooSmall,
                     NotKeller, ParseError, PreconditionViolated, QuadmapError, RankTooHigh,
                     TriangularizationStuck)
from .field import FieldCtx, make_field
from .poly import Poly, parse_poly
from .matrix import ConstMatrix
from .matpoly import (PolyMatrix, constant_kernel, det, evenrk_reduce, irlem_decompose,
                      is_nilpotent, rank_kx, symmetric_reduce)
from .maps import (AffineAuto, ElementaryAuto, PolyMap, TameCertificate, compose, conjugate,
                   hessian_const, jacobian, verify_certificate)
from .classify import (CaseReport, RkrReport, case4_form, case4_relation, classify_rk3,
                       classify_rkr, verify_case_predicate)
from .keller import (is_keller, lem3_normal_form, lem4_translation, principal_minor_normalize,
                     tame_decompose, triangularize_nilpotent)
from .cli import format_map, parse_map

__version__ = "0.1.0"
