"""Certificates and determinacy checks for truncated moment problems.

Finite-dimensional moment sequences, grid-discretized moment tensors of
random measures, quasi-analyticity analysis of positive sequences, weighted
Sobolev machinery, and an independent finite-atomic oracle, all behind a
batch CLI (``momentcert``).
"""

from . import errors
from .fields import (
    FieldPolynomial,
    Grid,
    GridMeasure,
    MomentTensorSeq,
    TestFunction,
    WeightFamily,
    check_bounded_density,
    check_radon,
    default_phi_samples,
    determining_bound,
    field_shift,
    generalized_moment_matrix,
    pair,
    pair_tensor,
    sliced_density_psd,
    weighted_carleman_field,
)
from .moments import (
    MomentSequence,
    Polynomial,
    PsdReport,
    SemiAlgebraicSpec,
    all_psd,
    check_semialgebraic,
    is_psd,
    localizing_matrix,
    moment_matrix,
    multi_indices,
    multivariate_carleman,
    riesz,
    shift,
    verify_qm_certificate,
)
from .oracle import (
    AtomicEnsemble,
    FieldDomain,
    FitResult,
    PointDomain,
    brute_force_realizable,
    exact_moments,
    perturb,
    sample_atomic_ensemble,
)
from .quasianalytic import (
    BumpBoundToken,
    ClassifierThresholds,
    PositiveSequence,
    QaVerdict,
    SummableSequence,
    bump_derivative_bounds,
    classify,
    denjoy_carleman_sums,
    dominating_summable_sequence,
    log_convex_regularize,
    lower_log_envelope,
    scale,
    subsequence_class,
)
from .sobolev import (
    ConditionDWitness,
    SampledFunction,
    SobolevIndex,
    bump_norm_bound,
    bump_test_family,
    condition_d_witness,
    total_family_bound,
    weighted_sobolev_norm,
)
from .weights import ConstantWeight, ExpWeight, PolyEvenWeight

__version__ = "0.1.0"
