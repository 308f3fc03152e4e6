"""larc: controllability analysis and unitary synthesis on compact groups.

Given a finite-dimensional control system dX/dt = -i H(u) X with arbitrary
(not necessarily bilinear) dependence of the Hermitian matrix H on the
controls, this package computes the Lie algebra generated by the sampled
dynamical generators, decides the rank condition, and constructively
reaches any certified target with piecewise-constant controls of
nonnegative duration.
"""

__version__ = "0.1.0"

from .closure import LieBasis, bracket, classify, lie_closure, project_to_algebra
from .errors import (
    BoundaryHit,
    BranchCut,
    BudgetExceeded,
    ChartFailure,
    ConfigError,
    LarcError,
    MembershipRejected,
    MixedSupport,
    NoConvergence,
)
from .matrixcore import frobenius_inner, matexp, matlog_unitary
from .model import (
    ControlSet,
    Exhaustive,
    GeneratorSet,
    Grid,
    HamiltonianModel,
    Random,
    evaluate_model,
    sample_generators,
    select_independent,
)
from .oracle import PauliString, pauli_bracket, pauli_closure_dimension
from .synthesis import (
    ControlProgram,
    ReachableWord,
    SynthesisResult,
    approx_inverse_word,
    build_chart,
    density_sampler,
    invert_via_powers,
    local_solve,
    positive_time_recurrence,
    propagate_program,
    reach_near_identity,
    synthesize,
    word_to_program,
)

__all__ = [name for name in dir() if not name.startswith("_")]
