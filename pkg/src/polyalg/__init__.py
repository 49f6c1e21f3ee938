"""Polynomials on finite-dimensional normed spaces with values in commutative Banach algebras."""

from .algebra import (
    Character,
    FiniteBanachAlgebra,
    FiniteSpace,
    NormSpec,
    alg_mul,
    alg_norm,
    dual_norm_sup,
    enumerate_characters,
    make_lourenco_algebra,
    make_pointwise_algebra,
    scalar_algebra,
    validate_character,
)
from .errors import (
    ConfigError,
    DimensionMismatchError,
    InvalidAlgebraError,
    InvalidCharacterError,
    InvalidDecompositionError,
    InvalidNormError,
    NoPolarizationError,
    NotCertifiedError,
    PolyalgError,
    UnsupportedAlgebraError,
)
from .hulls import HullCertificate, HullQuery, character_from_point, hull_membership, product_character
from .norms import (
    CompactSet,
    check_growth_bound,
    injective_tensor_norm,
    multilinear_norm,
    nuclear_norm_upper,
    operator_norm,
    polarization_sandwich,
    sup_norm_unit_ball,
    uniform_norm_on_K,
)
from .polynomials import (
    LinearOperator,
    PolynomialSum,
    PowerSumRep,
    SymmetricForm,
    compose_character,
    eval_form,
    eval_power_sum,
    leibniz_expand,
    multiply_by_constant,
    polarize,
    product_polynomials,
    product_power_sums,
    root_of_unity_decomposition,
)
from .search import NormEstimate, SearchBudget
from .suites import verify_suite
from .tensor import (
    IdentityApproximation,
    TensorElement,
    finite_rank_identity_approx,
    g_terms,
    tensorize,
    verify_tensorization,
)

__version__ = "0.1.0"
