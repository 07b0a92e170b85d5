"""Bayes factor functions (BFFs) from z, t, chi-square, and F statistics.

Closed-form log Bayes factors under non-local priors indexed by standardized
effect size, evidence combination across replicated studies, and MMAP
maximization of the prior shape r.  The `oracle` submodule is in-repo test
support (quadrature and simulation cross-checks) and not part of this public
surface.
"""

from .bayes_factors import (
    Sidedness,
    StatFamily,
    TestStatistic,
    log_bf10,
    log_bf10_chisq,
    log_bf10_f,
    log_bf10_t_one,
    log_bf10_t_two,
    log_bf10_z_one,
    log_bf10_z_two,
)
from .effect_map import (
    DesignKind,
    DesignTag,
    EffectSize,
    effective_n,
    fisher_z,
    mode_consistency_check,
    rmses,
    target_noncentrality,
    tau_sq_for,
)
from .evidence import (
    BffCurve,
    BffPoint,
    EffectGrid,
    FixedR,
    MmapR,
    MmapResult,
    Study,
    StudySet,
    bff_curve,
    combined_log_bf,
    evidence_thresholds,
    mmap_r,
    per_study_log_bf,
)
from .priors import (
    PriorFamily,
    PriorSpec,
    jeffreys_log_prior_gamma,
    jeffreys_log_prior_nm,
    log_density,
    mode,
    sample,
)
from .specfun import (
    LogValue,
    NonConvergenceError,
    digamma,
    log_1f1,
    log_2f1,
    log_gamma,
    log_gamma_half_ratio,
    log_pochhammer,
    trigamma,
)

__version__ = "0.1.0"
