"""Spectral diagnostics for one-frequency quasiperiodic Schrodinger
operators: transfer-matrix cocycles, Weyl m-functions, subordinacy
ladders, resonance arithmetic, and conjugation schemes."""

from .arithmetic import (
    Frequency,
    RationalDetected,
    ResonanceSet,
    diophantine_score,
    expand,
    from_terms,
    resolve_alpha,
    resonance_repulsion_check,
    resonances,
    torus_norm,
)
from .cocycle import (
    GrowthProfile,
    Mat2,
    Potential,
    SolutionSeq,
    growth_profile,
    iterate,
    lyapunov,
    solution,
    step_matrix,
)
from .conjugation import (
    BandFunction,
    MatFunction,
    NotContracting,
    NotUnimodular,
    Normalization,
    TriangularCocycle,
    normalize_constant,
    perturbation_bound_check,
    schrodinger_reduction,
    tx_asymptotics_check,
    tx_bruteforce,
    tx_closed_form,
)
from .spectral import (
    GapRecord,
    HolderFit,
    IdsTable,
    ThoulessRecord,
    gap_edges,
    holder_fit,
    ids,
    l1_window_bound,
    smoothed_window,
    thouless_check,
)
from .subordinacy import (
    BracketRecord,
    PMatrix,
    SubordinacyProfile,
    det_via_beta_scan,
    jl_bracket_check,
    p_matrix,
    profile,
)
from .weyl import (
    MTriple,
    NoConvergence,
    M_function,
    m_minus,
    m_plus,
    m_triple,
    phi,
    psi,
    rotate_beta,
)

__version__ = "0.1.0"
