"""Symbolic calculus for Whitehead products in shrinking wedges of spaces."""

from .abgroup import (FGAbelianGroup, ProductTensor, TensorElement, finite_wedge_kernel_group,
                      smith_normal_form, tensor, theta_forward, theta_inverse, truncated_W_group)
from .affine import Affine
from .dsl import parse, to_text
from .earring import (StandardForm, TensorSequence, phi, phi_inv, project_Q, sf_add, sf_eq, sf_is_zero,
                      sf_neg, sf_sub, sigma_kernel_check, to_standard_form)
from .errors import (ClusterViolation, ConservativeReject, GradeMismatch, HeterogeneousSchema,
                     InvalidExpression, NotInW, OverlapViolation, ParseError, UnorderableSupports,
                     WedgeMismatch, WhiteheadError)
from .expr import (Bracket, Const, FinSum, Gen, InfSum, IntMul, LoopExpr, Neg, SupportDesc,
                   WedgeSpec, check_cluster, check_wedge_disjoint, grade, support, truncate,
                   validate)
from .poly import Poly
from .rewrite import (NormalExpr, apply_graded_symmetry, expand_bilinear,
                      expand_infinite_bilinearity, flatten_sums, jacobi_check, normalize,
                      push_negation)

__version__ = "0.1.0"
