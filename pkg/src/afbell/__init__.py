"""Alignment-free Bell test: exact verification, Monte Carlo sampling, LHV audit."""

__version__ = "0.1.0"

from .qstate import (
    StateVector,
    basis_state,
    build_eta,
    build_phi,
    build_psi,
    expand_eta_in,
    inner_product,
    tensor,
)
from .observables import (
    PVM,
    LocalProtocol,
    born_distribution,
    build_F,
    build_G,
    coarse_grain,
    local_protocol_for,
    protocol_pvm,
)
from .rotations import (
    CollectiveRotation,
    RotationPair,
    apply_collective,
    apply_pair,
    rotate_pvm,
    sample_su2,
    split_seed,
)
from .experiment import (
    ExactBehavior,
    JointStats,
    Setting,
    SetupRotations,
    TrialLog,
    TrialRecord,
    conditional,
    epr_audit,
    exact_behavior,
    run_trials,
)
from .lhv import (
    Constraint,
    FeasibilityCertificate,
    Strategy,
    check_feasibility,
    max_hardy_fraction,
    quantum_constraints,
    verify_certificate,
)

__all__ = [
    "__version__",
    "StateVector", "basis_state", "build_eta", "build_phi", "build_psi",
    "expand_eta_in", "inner_product", "tensor",
    "PVM", "LocalProtocol", "born_distribution", "build_F", "build_G",
    "coarse_grain", "local_protocol_for", "protocol_pvm",
    "CollectiveRotation", "RotationPair", "apply_collective", "apply_pair",
    "rotate_pvm", "sample_su2", "split_seed",
    "ExactBehavior", "JointStats", "Setting", "SetupRotations", "TrialLog",
    "TrialRecord", "conditional", "epr_audit", "exact_behavior", "run_trials",
    "Constraint", "FeasibilityCertificate", "Strategy", "check_feasibility",
    "max_hardy_fraction", "quantum_constraints", "verify_certificate",
]
