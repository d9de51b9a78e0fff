"""Python bindings for the TRish optimizer library."""

from ._trish import (  # noqa: F401
    DataError,
    DomainError,
    HypothesisError,
    IoError,
    StepCase,
    TrishParams,
    UsageError,
    classify_case,
    dataset_stats,
    fixed_noise_h,
    gaussian_conditional_product,
    parse_libsvm,
    roundtrip_libsvm,
    run,
    sg_comparison_bound,
    sg_step,
    step_norm,
    trish_step,
    verify,
)
