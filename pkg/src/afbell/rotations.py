"""Haar-random SU(2) rotations applied collectively to one observer's qubits.

A physical rotation of one observer's apparatus lifts to the same single-qubit
special unitary on each of that observer's four qubits, i.e. the four-fold
Kronecker power U (x) U (x) U (x) U.  Determinism contract: every random draw
is a pure function of a 64-bit seed.  Per-trial seeds derive from a root seed
by XOR with the trial index followed by a 64-bit mixing permutation
(the splitmix64 finalizer), so results do not depend on execution order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .observables import PVM
from .qstate import StateVector

UNITARY_TOL = 1e-12

_MASK64 = (1 << 64) - 1
_MIX_MULT_1 = 0xBF58476D1CE4E5B9
_MIX_MULT_2 = 0x94D049BB133111EB
_SEQ_INCREMENT = 0x9E3779B97F4A7C15

# Stream tags XORed into a trial's base seed to derive independent substreams.
STREAM_ALICE = 0xA5A5A5A5A11CE001
STREAM_BOB = 0x5A5A5A5A0B0B0002
STREAM_SETTINGS = 0xC3C3C3C35E770003
STREAM_OUTCOME = 0x3C3C3C3C00DE0004


def mix64(x: int) -> int:
    """64-bit mixing permutation (splitmix64 finalizer)."""
    x &= _MASK64
    x ^= x >> 30
    x = (x * _MIX_MULT_1) & _MASK64
    x ^= x >> 27
    x = (x * _MIX_MULT_2) & _MASK64
    x ^= x >> 31
    return x


def mix64_array(x: np.ndarray) -> np.ndarray:
    """Vectorized mix64 over a uint64 array."""
    x = x.astype(np.uint64, copy=True)
    with np.errstate(over="ignore"):
        x ^= x >> np.uint64(30)
        x *= np.uint64(_MIX_MULT_1)
        x ^= x >> np.uint64(27)
        x *= np.uint64(_MIX_MULT_2)
        x ^= x >> np.uint64(31)
    return x


def split_seed(root_seed: int, index: int) -> int:
    """Per-trial seed: root XOR trial index, passed through mix64."""
    return mix64((root_seed ^ index) & _MASK64)


def _uniforms_batch(seeds: np.ndarray, count: int) -> np.ndarray:
    """(len(seeds), count) floats in (0, 1], one independent stream per seed."""
    steps = np.arange(1, count + 1, dtype=np.uint64) * np.uint64(_SEQ_INCREMENT)
    with np.errstate(over="ignore"):
        states = seeds.astype(np.uint64)[:, None] + steps[None, :]
    bits = mix64_array(states)
    return ((bits >> np.uint64(11)).astype(np.float64) + 1.0) * (2.0**-53)


def _normals_from_uniforms(u: np.ndarray) -> np.ndarray:
    """Box-Muller: (..., 4) uniforms in (0, 1] -> (..., 4) standard normals."""
    r1 = np.sqrt(-2.0 * np.log(u[..., 0]))
    r2 = np.sqrt(-2.0 * np.log(u[..., 2]))
    t1 = 2.0 * math.pi * u[..., 1]
    t2 = 2.0 * math.pi * u[..., 3]
    return np.stack(
        [r1 * np.cos(t1), r1 * np.sin(t1), r2 * np.cos(t2), r2 * np.sin(t2)], axis=-1
    )


def su2_from_quaternion(q: np.ndarray) -> np.ndarray:
    """Unit quaternion (w, x, y, z) -> SU(2) matrix w*I - i(x*sx + y*sy + z*sz)."""
    q = np.asarray(q, dtype=float)
    norm = np.linalg.norm(q)
    if norm == 0.0:
        raise ValueError("zero quaternion")
    w, x, y, z = q / norm
    return np.array(
        [[w - 1j * z, -y - 1j * x], [y - 1j * x, w + 1j * z]], dtype=complex
    )


def su2_from_axis_angle(axis: np.ndarray, angle: float) -> np.ndarray:
    """Rotation by angle about a 3-vector axis, lifted to SU(2)."""
    axis = np.asarray(axis, dtype=float)
    n = np.linalg.norm(axis)
    if n == 0.0:
        raise ValueError("zero rotation axis")
    half = angle / 2.0
    return su2_from_quaternion(
        np.concatenate([[math.cos(half)], math.sin(half) * axis / n])
    )


def sample_su2(rng_seed: int) -> np.ndarray:
    """Haar-distributed SU(2) matrix, a deterministic function of the seed.

    Four seed-derived standard normals form a quaternion that is normalized
    onto the unit 3-sphere; the uniform measure there is the Haar measure.
    Delegates to the batch sampler so scalar and batch draws agree bit for bit.
    """
    return sample_su2_batch(np.array([rng_seed & _MASK64], dtype=np.uint64))[0]


def sample_su2_batch(seeds: np.ndarray) -> np.ndarray:
    """(n, 2, 2) Haar SU(2) samples, matching sample_su2 seed-for-seed."""
    u = _uniforms_batch(np.asarray(seeds, dtype=np.uint64), 4)
    q = _normals_from_uniforms(u)
    q /= np.linalg.norm(q, axis=-1, keepdims=True)
    w, x, y, z = q[:, 0], q[:, 1], q[:, 2], q[:, 3]
    out = np.empty((len(q), 2, 2), dtype=complex)
    out[:, 0, 0] = w - 1j * z
    out[:, 0, 1] = -y - 1j * x
    out[:, 1, 0] = y - 1j * x
    out[:, 1, 1] = w + 1j * z
    return out


def is_special_unitary(u: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    u = np.asarray(u)
    if u.shape != (2, 2):
        return False
    return (
        np.max(np.abs(u @ u.conj().T - np.eye(2))) <= tol
        and abs(np.linalg.det(u) - 1.0) <= tol
    )


@dataclass(frozen=True)
class CollectiveRotation:
    """A single-qubit unitary applied identically to all four qubits of one side."""

    u: np.ndarray
    fold: int = 4

    def __post_init__(self) -> None:
        u = np.asarray(self.u, dtype=complex)
        if u.shape != (2, 2):
            raise ValueError(f"expected a 2x2 matrix, got shape {u.shape}")
        if np.max(np.abs(u @ u.conj().T - np.eye(2))) > 1e-10:
            raise ValueError("matrix is not unitary")
        if self.fold < 1:
            raise ValueError("fold must be positive")
        u = u.copy()
        u.setflags(write=False)
        object.__setattr__(self, "u", u)

    def matrix(self) -> np.ndarray:
        """Expanded 2^fold x 2^fold Kronecker power."""
        m = np.array([[1.0 + 0j]])
        for _ in range(self.fold):
            m = np.kron(m, self.u)
        return m

    @classmethod
    def identity(cls) -> "CollectiveRotation":
        return cls(np.eye(2, dtype=complex))

    @classmethod
    def sample(cls, rng_seed: int) -> "CollectiveRotation":
        return cls(sample_su2(rng_seed))

    def to_json(self) -> list[list[list[float]]]:
        """2x2 matrix as [[re, im], ...] rows for report emission."""
        return [[[c.real, c.imag] for c in row] for row in np.asarray(self.u)]


@dataclass(frozen=True)
class RotationPair:
    """Independent collective rotations for Alice's and Bob's four qubits."""

    r_alice: CollectiveRotation
    r_bob: CollectiveRotation

    @classmethod
    def sample(cls, seed_alice: int, seed_bob: int) -> "RotationPair":
        return cls(CollectiveRotation.sample(seed_alice), CollectiveRotation.sample(seed_bob))


def _apply_fourfold(u: np.ndarray, amps: np.ndarray) -> np.ndarray:
    """Apply a 2x2 matrix to each of the four qubit axes of a 16-amplitude block."""
    cube = amps.reshape(2, 2, 2, 2)
    for axis in range(4):
        cube = np.moveaxis(np.tensordot(u, cube, axes=([1], [axis])), 0, axis)
    return cube.reshape(16)


def apply_collective(r: CollectiveRotation, s: StateVector) -> StateVector:
    """Rotate a 4-qubit state by the four-fold power of r's single-qubit unitary."""
    if s.num_qubits != 4 or r.fold != 4:
        raise ValueError("apply_collective expects a 4-qubit state and fold 4")
    return StateVector(4, _apply_fourfold(r.u, s.amps))


def apply_pair(p: RotationPair, s: StateVector) -> StateVector:
    """Apply p.r_alice to qubits 1-4 and p.r_bob to qubits 5-8."""
    if s.num_qubits != 8:
        raise ValueError("apply_pair expects an 8-qubit state")
    grid = s.amps.reshape(16, 16)
    out = np.empty_like(grid)
    for col in range(16):
        out[:, col] = _apply_fourfold(p.r_alice.u, grid[:, col])
    for row in range(16):
        out[row, :] = _apply_fourfold(p.r_bob.u, out[row, :])
    return StateVector(8, out.reshape(256))


def rotate_pvm(r: CollectiveRotation, m: PVM) -> PVM:
    """Conjugate every projector by the expanded rotation: P -> R P R^dagger."""
    big = r.matrix()
    if big.shape[0] != m.dim:
        raise ValueError("rotation dimension does not match the PVM")
    big_dag = big.conj().T
    return PVM(tuple((label, big @ proj @ big_dag) for label, proj in m.outcomes))
