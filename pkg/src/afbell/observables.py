"""Three-outcome collective observables and the equivalent single-qubit protocol.

The two observables F and G each distinguish a pair of invariant 4-qubit
states with outcomes -1 and +1; the leftover rank-14 projector carries the
label 0, which has probability zero on any state in the invariant span but is
represented explicitly so that Born distributions are total on arbitrary
states.  The same discrimination can be done with fixed single-qubit
measurements: two qubits along z, two along x, and a parity classifier over
the 16 outcome strings.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .qstate import StateVector, build_phi, build_psi

PVM_TOL = 1e-12

OUTCOME_LABELS = (-1, +1, 0)


@dataclass(frozen=True)
class PVM:
    """Ordered projector-valued measure with integer outcome labels."""

    outcomes: tuple[tuple[int, np.ndarray], ...]

    def __post_init__(self) -> None:
        mats = []
        for label, proj in self.outcomes:
            proj = np.asarray(proj, dtype=complex)
            if proj.ndim != 2 or proj.shape[0] != proj.shape[1]:
                raise ValueError(f"projector for label {label} is not square")
            proj = proj.copy()
            proj.setflags(write=False)
            mats.append((int(label), proj))
        object.__setattr__(self, "outcomes", tuple(mats))
        self.validate()

    @property
    def dim(self) -> int:
        return self.outcomes[0][1].shape[0]

    @property
    def labels(self) -> tuple[int, ...]:
        return tuple(label for label, _ in self.outcomes)

    def projector(self, label: int) -> np.ndarray:
        for lab, proj in self.outcomes:
            if lab == label:
                return proj
        raise KeyError(f"no outcome labelled {label}")

    def validate(self, tol: float = PVM_TOL) -> None:
        """Check Hermiticity, idempotence, mutual orthogonality and completeness."""
        dim = self.dim
        total = np.zeros((dim, dim), dtype=complex)
        projs = [proj for _, proj in self.outcomes]
        for i, p in enumerate(projs):
            if np.max(np.abs(p - p.conj().T)) > tol:
                raise ValueError(f"projector {i} is not Hermitian")
            if np.max(np.abs(p @ p - p)) > tol:
                raise ValueError(f"projector {i} is not idempotent")
            for q in projs[:i]:
                if np.max(np.abs(p @ q)) > tol:
                    raise ValueError("projectors are not mutually orthogonal")
            total += p
        if np.max(np.abs(total - np.eye(dim))) > tol:
            raise ValueError("projectors do not sum to the identity")


def _rank1(state: StateVector) -> np.ndarray:
    v = state.amps
    return np.outer(v, v.conj())


def _two_state_pvm(minus: StateVector, plus: StateVector) -> PVM:
    p_minus = _rank1(minus)
    p_plus = _rank1(plus)
    rest = np.eye(16) - p_minus - p_plus
    return PVM(((-1, p_minus), (+1, p_plus), (0, rest)))


def build_F() -> PVM:
    """Observable distinguishing phi0 (outcome -1) from phi1 (outcome +1)."""
    return _two_state_pvm(build_phi(0), build_phi(1))


def build_G() -> PVM:
    """Observable distinguishing psi0 (outcome -1) from psi1 (outcome +1)."""
    return _two_state_pvm(build_psi(0), build_psi(1))


def born_distribution(state: StateVector, m: PVM) -> dict[int, float]:
    """Born-rule outcome distribution of a PVM on a unit-norm state."""
    if 2**state.num_qubits != m.dim:
        raise ValueError(
            f"dimension mismatch: state has {2**state.num_qubits} amplitudes, "
            f"PVM acts on dimension {m.dim}"
        )
    if abs(state.norm() - 1.0) > 1e-9:
        raise ValueError("state must be unit-norm")
    probs = {}
    for label, proj in m.outcomes:
        p = float(np.real(np.vdot(state.amps, proj @ state.amps)))
        probs[label] = max(p, 0.0)
    total = sum(probs.values())
    if abs(total - 1.0) > PVM_TOL * 10:
        raise ValueError(f"probabilities sum to {total}, not 1")
    return probs


# ---------------------------------------------------------------------------
# Local single-qubit protocol
# ---------------------------------------------------------------------------

_SQRT2_INV = 1.0 / math.sqrt(2.0)
# x-basis outcomes are recorded as bits: the +1 eigenvector of sigma_x is bit
# 0, the -1 eigenvector is bit 1 (mirroring the z-basis convention).
_AXIS_EIGENVECTORS: dict[str, tuple[np.ndarray, np.ndarray]] = {
    "z": (np.array([1.0, 0.0], dtype=complex), np.array([0.0, 1.0], dtype=complex)),
    "x": (
        np.array([_SQRT2_INV, _SQRT2_INV], dtype=complex),
        np.array([_SQRT2_INV, -_SQRT2_INV], dtype=complex),
    ),
}

ALL_STRINGS = tuple(format(i, "04b") for i in range(16))


@dataclass(frozen=True)
class LocalProtocol:
    """Fixed per-qubit measurement axes plus a total outcome classifier."""

    axes: tuple[str, str, str, str]
    classifier: Mapping[str, int]

    def __post_init__(self) -> None:
        if sorted(self.axes) != ["x", "x", "z", "z"]:
            raise ValueError(f"axes must contain two z and two x tags, got {self.axes}")
        if set(self.classifier) != set(ALL_STRINGS):
            raise ValueError("classifier must be total on all 16 outcome strings")
        if any(v not in (-1, +1) for v in self.classifier.values()):
            raise ValueError("classifier labels must be -1 or +1")

    def classify(self, bits: str) -> int:
        return self.classifier[bits]

    def classifier_json(self) -> str:
        """Classifier table as JSON (outcome string -> label), sorted by string."""
        return json.dumps({s: self.classifier[s] for s in ALL_STRINGS})


def _f_classifier(bits: str) -> int:
    # The four strings with differing z bits and differing x bits flag phi0.
    return -1 if (bits[0] != bits[1] and bits[2] != bits[3]) else +1


def local_protocol_for(setting: str) -> LocalProtocol:
    """Protocol measuring F (z on qubits 1,2; x on 3,4) or G (qubits 2,3 swapped)."""
    if setting == "F":
        table = {s: _f_classifier(s) for s in ALL_STRINGS}
        return LocalProtocol(("z", "z", "x", "x"), table)
    if setting == "G":
        # Same construction conjugated by the qubit 2 <-> 3 exchange.
        table = {s: _f_classifier(s[0] + s[2] + s[1] + s[3]) for s in ALL_STRINGS}
        return LocalProtocol(("z", "x", "z", "x"), table)
    raise ValueError(f"setting must be 'F' or 'G', got {setting!r}")


def protocol_eigenvectors(p: LocalProtocol) -> np.ndarray:
    """(16, 16) array whose row i is the product eigenvector of outcome string i."""
    vecs = np.empty((16, 16), dtype=complex)
    for i, bits in enumerate(ALL_STRINGS):
        v = np.array([1.0 + 0j])
        for axis, b in zip(p.axes, bits):
            v = np.kron(v, _AXIS_EIGENVECTORS[axis][int(b)])
        vecs[i] = v
    return vecs


def protocol_pvm(p: LocalProtocol) -> tuple[tuple[str, np.ndarray], ...]:
    """The 16 rank-1 projectors onto the protocol's product eigenbasis."""
    vecs = protocol_eigenvectors(p)
    return tuple(
        (bits, np.outer(vecs[i], vecs[i].conj())) for i, bits in enumerate(ALL_STRINGS)
    )


def coarse_grain(p: LocalProtocol) -> PVM:
    """Two-outcome PVM obtained by summing the rank-1 projectors per classifier label."""
    acc = {-1: np.zeros((16, 16), dtype=complex), +1: np.zeros((16, 16), dtype=complex)}
    for bits, proj in protocol_pvm(p):
        acc[p.classify(bits)] += proj
    return PVM(((-1, acc[-1]), (+1, acc[+1])))


def string_distribution(state: StateVector, p: LocalProtocol) -> dict[str, float]:
    """Probability of each 4-bit outcome string when measuring the protocol."""
    if state.num_qubits != 4:
        raise ValueError("protocol measurements act on 4-qubit states")
    amps = protocol_eigenvectors(p).conj() @ state.amps
    return {bits: float(abs(a) ** 2) for bits, a in zip(ALL_STRINGS, amps)}


def classified_distribution(state: StateVector, p: LocalProtocol) -> dict[int, float]:
    """Distribution over {-1, +1} after classifying the measured string."""
    out = {-1: 0.0, +1: 0.0}
    for bits, prob in string_distribution(state, p).items():
        out[p.classify(bits)] += prob
    return out
