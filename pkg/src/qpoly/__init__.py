"""Tsallis-q correlations, their optimizers, and checks of the q-expected polygamy inequalities."""

from .ccq import (
    CcqState,
    GeneralizedPauli,
    apply_m0,
    apply_m1,
    build_ccq,
    ccq_mutual_closed_form,
    ccq_mutual_direct,
    gap_report,
    generalized_paulis,
    subadditivity_gap,
)
from .harness import ReportRecord, TrialConfig, parse_state_file, render, run_sweep, summarize, trial_seed
from .inequalities import (
    CHECKS,
    PremiseStatus,
    Status,
    Verdict,
    check_cor2,
    check_prop1,
    check_prop2,
    check_thm1,
    check_thm2,
    check_thm3,
    q_threshold,
)
from .measures import (
    BoundedValue,
    DecompositionCandidate,
    Direction,
    OptimizationBudget,
    Rank1Measurement,
    induced_ensemble,
    measure,
    q_cc,
    q_discord,
    q_entanglement,
    q_eoa,
    q_ud,
    q_ue,
)
from .oracle import brute_force_oracle
from .states import (
    DensityOperator,
    Ensemble,
    InvalidStateError,
    NumericError,
    PureState,
    SpectralDecomposition,
    SubsystemLayout,
    bell_state,
    ghz_state,
    partial_trace,
    purify,
    random_density,
    random_pure,
    spectral_decompose,
    tensor_product,
)
from .tsallis import (
    EntropyParameter,
    max_tsallis_entropy,
    q_log,
    q_mutual_entropy,
    tsallis_entropy,
    tsallis_q_difference,
)
