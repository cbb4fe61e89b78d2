"""Desk-scale laboratory for amplified norms over lp base spaces.

Finite-support vectors and windowed operators over an atomic base space,
amplified elements with injective/projective quantization norms, the metric
diamond operation, and two tensor norms (general and p-convex) reported as
certified [lower, upper] brackets.
"""

from .amplify import (MAX, MIN, AmplifiedElement, amp_norm, amplify_bilinear,
                      amplify_linear, beta_norm, lbounded_norm_linear,
                      max_norm, maxleft_exact, min_norm, module_action,
                      product_functional_lbounded_norm, underlying_norm)
from .diamond import (diamond_amp, diamond_base, diamond_left,
                      diamond_operator, diamond_right)
from .gtensor import (Representation, RepTerm, canonical_representation,
                      general_norm_bracket, general_norm_lower,
                      general_norm_upper, maxleft_norm)
from .lpcore import (INF, LpOperator, LpVector, NormBracket, ProperIsometry,
                     basis_vector, conjugate, disjoint_isometries, lp_norm,
                     operator_norm_bracket, opnorm_bracket, proper_projection,
                     vector_pnorm)
from .measure import (COUNTING, MeasureSpace, UnsupportedCombination,
                      finite_space, pairing, product_space, unpairing)
from .normed import FiniteNormedSpace, dual_norm, lq_space
from .pctensor import (PRepresentation, StepFormInstance,
                       canonical_prepresentation, kron_norm_check,
                       kron_operator, l1_max_counterexample,
                       merge_orthogonal, merge_prepresentations,
                       pconvex_norm_bracket, pconvex_norm_lower,
                       pconvex_norm_upper, pconvexity_check,
                       thm64_constructive, thm64_oracle)
from .projnorm import operator_norm_between, projective_norm_bracket

__version__ = "0.1.0"
