"""Branch-partitioned dynamical systems and their truncated operator algebras."""

from .errors import (
    BranchDynError,
    DepthExhausted,
    DomainMismatch,
    IdentityComposition,
    InvalidSpec,
    NonInjectiveBranch,
    NotACycle,
    NotAffineFamily,
    NotClosedSystem,
    OrbitConditionFailed,
    OutOfDomain,
    PreconditionUnmet,
    TooShort,
    WindowMismatch,
    WindowTooSmall,
)
from .systems import (
    AlphaBeta,
    DynamicalSystem,
    EventuallyPeriodic,
    FiniteTable,
    IntWindow,
    QxPlusD,
    SetWindow,
    SymbolicShift,
    collatz,
    make_system,
    mersenne,
    spec_from_json,
    spec_to_json,
    verify_bounded_condition,
)
from .orbits import (
    canonical_cycle,
    invariant_closure,
    minimality_probe,
    orbit_iterate,
    total_orbit,
)
from .words import (
    AffineMap,
    check_separating,
    check_uniqueness,
    compose_affine,
    cycle_word_aperiodicity,
    enumerate_cycles,
    fixed_point_of_word,
    is_aperiodic,
    lyndon_words,
    verify_unifix,
)
from .coding import (
    CodingPrefix,
    ResidueTower,
    check_alphabeta_hypotheses,
    coding_prefix,
    distinguishing_prefix_length,
    exact_coding,
    shift_prefix,
    tower_apply,
    tower_from_state,
    verify_recovery_lemma,
    verify_tuc_window,
)
from .operators import (
    SubspaceBasis,
    Truncation,
    apply_word_op,
    build_truncation,
    commutant_projections,
    fixed_vectors_of_word,
    is_reducing,
    projection_P,
    subspace_from_invariant_set,
    verify_pm_limit,
)
from .morphisms import (
    Morphism,
    check_homomorphism,
    compose,
    conjugate_unitary,
    identity,
    induced_isometry,
    induced_symbolic,
    is_isomorphism,
    verify_tuc_iso,
)

__version__ = "0.1.0"
