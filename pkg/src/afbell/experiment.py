"""Exact computation and seeded Monte Carlo sampling of the two-observer behavior.

Alice holds qubits 1-4 of the source state and Bob holds qubits 5-8; each side
measures F or G, possibly through an independently rotated setup.  The exact
path evaluates dense Born-rule sandwiches of (optionally rotated) PVMs.  The
sampling path draws, per trial, fresh Haar rotations for each side, computes
the trial's joint outcome distribution through those rotations, and samples
the outcome pair from it.  Every random quantity is a pure function of the
root seed and the trial index, so results are identical regardless of
execution order or chunk boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterator

import numpy as np

from .observables import PVM, build_F, build_G, local_protocol_for, protocol_eigenvectors
from .qstate import StateVector, build_eta, build_phi, build_psi
from .rotations import (
    STREAM_ALICE,
    STREAM_BOB,
    STREAM_OUTCOME,
    STREAM_SETTINGS,
    CollectiveRotation,
    mix64,
    mix64_array,
    rotate_pvm,
    sample_su2_batch,
)

# Index order of the outcome labels in every 3x3 table below.
LABEL_ORDER = (-1, +1, 0)

# Mass allowed on the never-occurring 0 outcome before a run aborts.
ZERO_OUTCOME_TOL = 1e-12

# Below this, an event's probability is numerical dust, not a real event.
ZERO_EVENT_TOL = 1e-14

_CHUNK = 8192

# Tags for deriving one rotation seed per (side, setting) in fixed-rotation
# mode; arbitrary fixed 64-bit constants.
_TAG_ALICE_F = 0x11111111A11CE00F
_TAG_ALICE_G = 0x22222222A11CE00A
_TAG_BOB_F = 0x33333333B0B0000F
_TAG_BOB_G = 0x44444444B0B0000A


class Setting(Enum):
    """One observer's choice of measurement."""

    F = "F"
    G = "G"

    def __str__(self) -> str:
        return self.value


SETTING_PAIRS = (
    (Setting.F, Setting.F),
    (Setting.F, Setting.G),
    (Setting.G, Setting.F),
    (Setting.G, Setting.G),
)

_SETTING_BY_CODE = (Setting.F, Setting.G)


def _label_index(label: int) -> int:
    try:
        return LABEL_ORDER.index(label)
    except ValueError:
        raise ValueError(f"unknown outcome label {label}") from None


def parse_policy(policy: str) -> tuple[str, tuple[Setting, Setting] | None]:
    """Parse a setting policy: 'uniform_random'/'uniform', 'fixed:XY', or 'cycle'."""
    if policy in ("uniform", "uniform_random"):
        return "uniform", None
    if policy == "cycle":
        return "cycle", None
    if policy.startswith("fixed:"):
        pair = policy[len("fixed:"):]
        if len(pair) == 2 and all(c in "FG" for c in pair):
            return "fixed", (Setting(pair[0]), Setting(pair[1]))
    raise ValueError(
        f"bad setting policy {policy!r}; expected uniform, cycle, or fixed:XY with X,Y in FG"
    )


@dataclass(frozen=True)
class SetupRotations:
    """Independent rotations of the four local setups (Alice/Bob times F/G)."""

    alice_f: CollectiveRotation
    alice_g: CollectiveRotation
    bob_f: CollectiveRotation
    bob_g: CollectiveRotation
    seeds: tuple[int, int, int, int] | None = None

    @classmethod
    def sample(cls, seed: int) -> "SetupRotations":
        """Four independently Haar-seeded rotations derived from one seed."""
        seeds = tuple(mix64(seed ^ tag) for tag in
                      (_TAG_ALICE_F, _TAG_ALICE_G, _TAG_BOB_F, _TAG_BOB_G))
        return cls(*(CollectiveRotation.sample(s) for s in seeds), seeds=seeds)

    @classmethod
    def identity(cls) -> "SetupRotations":
        ident = CollectiveRotation.identity()
        return cls(ident, ident, ident, ident)

    def for_side(self, side: str, setting: Setting) -> CollectiveRotation:
        if side == "A":
            return self.alice_f if setting is Setting.F else self.alice_g
        if side == "B":
            return self.bob_f if setting is Setting.F else self.bob_g
        raise ValueError(f"side must be 'A' or 'B', got {side!r}")


def joint_born(state: StateVector, pvm_a: PVM, pvm_b: PVM) -> dict[tuple[int, int], float]:
    """Dense Born rule for commuting side-by-side PVMs on an 8-qubit state."""
    if state.num_qubits != 8 or pvm_a.dim != 16 or pvm_b.dim != 16:
        raise ValueError("joint_born expects an 8-qubit state and 16-dim PVMs")
    amps = state.amps
    probs: dict[tuple[int, int], float] = {}
    for la, pa in pvm_a.outcomes:
        for lb, pb in pvm_b.outcomes:
            p = float(np.real(np.vdot(amps, np.kron(pa, pb) @ amps)))
            probs[(la, lb)] = max(p, 0.0)
    return probs


def sequential_joint(state: StateVector, pvm_a: PVM, pvm_b: PVM) -> dict[tuple[int, int], float]:
    """Joint distribution via sequential projection: measure A, project and
    renormalize (the post-measurement convention), then measure B."""
    amps = state.amps
    probs: dict[tuple[int, int], float] = {}
    eye = np.eye(pvm_b.dim)
    for la, pa in pvm_a.outcomes:
        collapsed = np.kron(pa, eye) @ amps
        p_a = float(np.real(np.vdot(collapsed, collapsed)))
        for lb, pb in pvm_b.outcomes:
            if p_a <= 0.0:
                probs[(la, lb)] = 0.0
                continue
            post = collapsed / math.sqrt(p_a)
            p_b = float(np.real(np.vdot(post, np.kron(np.eye(pvm_a.dim), pb) @ post)))
            probs[(la, lb)] = p_a * max(p_b, 0.0)
    return probs


@dataclass(frozen=True)
class ExactBehavior:
    """Joint probability tables P(outcome_a, outcome_b | setting_a, setting_b)."""

    tables: dict[tuple[Setting, Setting], np.ndarray]

    def __post_init__(self) -> None:
        fixed = {}
        for pair in SETTING_PAIRS:
            t = np.asarray(self.tables[pair], dtype=float)
            if t.shape != (3, 3):
                raise ValueError("each setting pair needs a 3x3 outcome table")
            if t.min() < -1e-13:
                raise ValueError(f"negative probability in table {pair}")
            if abs(t.sum() - 1.0) > 1e-12:
                raise ValueError(f"table {pair} sums to {t.sum()}, not 1")
            t = np.clip(t, 0.0, None)
            t.setflags(write=False)
            fixed[pair] = t
        object.__setattr__(self, "tables", fixed)

    def table(self, setting_a: Setting, setting_b: Setting) -> np.ndarray:
        """3x3 table indexed by LABEL_ORDER for both sides."""
        return self.tables[(setting_a, setting_b)]

    def prob(self, setting_a: Setting, setting_b: Setting,
             outcome_a: int, outcome_b: int) -> float:
        return float(
            self.table(setting_a, setting_b)[_label_index(outcome_a), _label_index(outcome_b)]
        )

    def marginal(self, side: str, own_setting: Setting, remote_setting: Setting) -> np.ndarray:
        """One side's outcome distribution, by LABEL_ORDER."""
        if side == "A":
            return self.table(own_setting, remote_setting).sum(axis=1)
        if side == "B":
            return self.table(remote_setting, own_setting).sum(axis=0)
        raise ValueError(f"side must be 'A' or 'B', got {side!r}")

    def zero_outcome_mass(self) -> float:
        """Largest total probability any setting pair gives the 0 label."""
        worst = 0.0
        for t in self.tables.values():
            worst = max(worst, float(t[2, :].sum() + t[:, 2].sum() - t[2, 2]))
        return worst

    def to_json_dict(self) -> dict:
        return {
            "outcome_order": list(LABEL_ORDER),
            "tables": {
                f"{sa.value}{sb.value}": self.table(sa, sb).tolist()
                for sa, sb in SETTING_PAIRS
            },
        }


def exact_behavior(rotations: SetupRotations | None = None) -> ExactBehavior:
    """All four setting pairs' joint outcome tables on the source state.

    With ``rotations`` supplied, each side's PVM for each setting is
    conjugated by that setup's collective rotation first; the tables are
    provably independent of the choice.
    """
    eta = build_eta()
    canonical = {Setting.F: build_F(), Setting.G: build_G()}
    tables = {}
    for sa, sb in SETTING_PAIRS:
        pvm_a, pvm_b = canonical[sa], canonical[sb]
        if rotations is not None:
            pvm_a = rotate_pvm(rotations.for_side("A", sa), pvm_a)
            pvm_b = rotate_pvm(rotations.for_side("B", sb), pvm_b)
        probs = joint_born(eta, pvm_a, pvm_b)
        t = np.zeros((3, 3))
        for (la, lb), p in probs.items():
            t[_label_index(la), _label_index(lb)] = p
        tables[(sa, sb)] = t
    return ExactBehavior(tables)


def conditional(behavior: ExactBehavior,
                target: tuple[str, Setting, int],
                given: tuple[str, Setting, int]) -> float:
    """P(target outcome | given outcome) for opposite sides of one setting pair."""
    t_side, t_setting, t_outcome = target
    g_side, g_setting, g_outcome = given
    if {t_side, g_side} != {"A", "B"}:
        raise ValueError("target and given must be on opposite sides")
    if t_side == "A":
        table = behavior.table(t_setting, g_setting)
        joint = table[_label_index(t_outcome), _label_index(g_outcome)]
    else:
        table = behavior.table(g_setting, t_setting)
        joint = table[_label_index(g_outcome), _label_index(t_outcome)]
    p_given = behavior.marginal(g_side, g_setting, t_setting)[_label_index(g_outcome)]
    if p_given <= ZERO_EVENT_TOL:
        raise ValueError("conditioning on a zero-probability event")
    return float(joint / p_given)


# ---------------------------------------------------------------------------
# Monte Carlo trials
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrialRecord:
    """One Monte Carlo event."""

    trial_index: int
    setting_a: Setting
    setting_b: Setting
    seed_a: int
    seed_b: int
    outcome_a: int
    outcome_b: int


class TrialLog:
    """Columnar sequence of TrialRecords (cheap at millions of trials)."""

    def __init__(self, trial: np.ndarray, setting_a: np.ndarray, setting_b: np.ndarray,
                 seed_a: np.ndarray, seed_b: np.ndarray,
                 outcome_a: np.ndarray, outcome_b: np.ndarray) -> None:
        self.trial = np.asarray(trial, dtype=np.uint64)
        self.setting_a = np.asarray(setting_a, dtype=np.int8)
        self.setting_b = np.asarray(setting_b, dtype=np.int8)
        self.seed_a = np.asarray(seed_a, dtype=np.uint64)
        self.seed_b = np.asarray(seed_b, dtype=np.uint64)
        self.outcome_a = np.asarray(outcome_a, dtype=np.int8)
        self.outcome_b = np.asarray(outcome_b, dtype=np.int8)
        n = len(self.trial)
        if any(len(col) != n for col in (self.setting_a, self.setting_b, self.seed_a,
                                         self.seed_b, self.outcome_a, self.outcome_b)):
            raise ValueError("column length mismatch")
        if np.any(self.outcome_a == 0) or np.any(self.outcome_b == 0):
            raise ValueError("outcome 0 must never appear in a trial log")

    def __len__(self) -> int:
        return len(self.trial)

    def __getitem__(self, i: int) -> TrialRecord:
        if not -len(self) <= i < len(self):
            raise IndexError(i)
        return TrialRecord(
            trial_index=int(self.trial[i]),
            setting_a=_SETTING_BY_CODE[self.setting_a[i]],
            setting_b=_SETTING_BY_CODE[self.setting_b[i]],
            seed_a=int(self.seed_a[i]),
            seed_b=int(self.seed_b[i]),
            outcome_a=int(self.outcome_a[i]),
            outcome_b=int(self.outcome_b[i]),
        )

    def __iter__(self) -> Iterator[TrialRecord]:
        for i in range(len(self)):
            yield self[i]

    CSV_HEADER = "trial,setting_a,setting_b,seed_a,seed_b,outcome_a,outcome_b"

    def to_csv(self, path, metadata: dict[str, str] | None = None) -> None:
        """Write the trial log as CSV, preceded by '# key: value' metadata lines."""
        with open(path, "w", newline="") as f:
            for key, value in (metadata or {}).items():
                f.write(f"# {key}: {value}\n")
            f.write(self.CSV_HEADER + "\n")
            letters = np.array(["F", "G"])
            for start in range(0, len(self), _CHUNK):
                stop = min(start + _CHUNK, len(self))
                rows = zip(
                    self.trial[start:stop],
                    letters[self.setting_a[start:stop]],
                    letters[self.setting_b[start:stop]],
                    self.seed_a[start:stop],
                    self.seed_b[start:stop],
                    self.outcome_a[start:stop],
                    self.outcome_b[start:stop],
                )
                f.write("".join(f"{t},{sa},{sb},{ka},{kb},{oa},{ob}\n"
                                for t, sa, sb, ka, kb, oa, ob in rows))


class JointStats:
    """Outcome-pair counts per setting pair; merging is commutative and associative."""

    def __init__(self, counts: dict[tuple[Setting, Setting], np.ndarray] | None = None) -> None:
        self.counts = {
            pair: np.zeros((3, 3), dtype=np.int64) for pair in SETTING_PAIRS
        }
        if counts:
            for pair, c in counts.items():
                c = np.asarray(c, dtype=np.int64)
                if c.shape != (3, 3) or c.min() < 0:
                    raise ValueError("counts must be nonnegative 3x3 tables")
                self.counts[pair] = c.copy()

    @classmethod
    def from_arrays(cls, setting_a: np.ndarray, setting_b: np.ndarray,
                    outcome_a: np.ndarray, outcome_b: np.ndarray) -> "JointStats":
        ia = (outcome_a == 1).astype(np.int64) + 2 * (outcome_a == 0).astype(np.int64)
        ib = (outcome_b == 1).astype(np.int64) + 2 * (outcome_b == 0).astype(np.int64)
        code = ((setting_a.astype(np.int64) * 2 + setting_b) * 3 + ia) * 3 + ib
        flat = np.bincount(code, minlength=36)
        stats = cls()
        for k, (sa, sb) in enumerate(SETTING_PAIRS):
            stats.counts[(sa, sb)] = flat[k * 9:(k + 1) * 9].reshape(3, 3)
        return stats

    @classmethod
    def from_records(cls, records) -> "JointStats":
        if isinstance(records, TrialLog):
            return cls.from_arrays(records.setting_a, records.setting_b,
                                   records.outcome_a, records.outcome_b)
        stats = cls()
        for r in records:
            i = _label_index(r.outcome_a)
            j = _label_index(r.outcome_b)
            stats.counts[(r.setting_a, r.setting_b)][i, j] += 1
        return stats

    def total(self, setting_a: Setting, setting_b: Setting) -> int:
        return int(self.counts[(setting_a, setting_b)].sum())

    def count(self, setting_a: Setting, setting_b: Setting,
              outcome_a: int, outcome_b: int) -> int:
        return int(self.counts[(setting_a, setting_b)][_label_index(outcome_a),
                                                       _label_index(outcome_b)])

    def frequency(self, setting_a: Setting, setting_b: Setting) -> np.ndarray:
        """Empirical 3x3 probability table (zeros when the pair has no trials)."""
        c = self.counts[(setting_a, setting_b)]
        n = c.sum()
        return c / n if n else np.zeros((3, 3))

    def merge(self, other: "JointStats") -> "JointStats":
        merged = JointStats()
        for pair in SETTING_PAIRS:
            merged.counts[pair] = self.counts[pair] + other.counts[pair]
        return merged


def _rotate_fourfold_batch(u: np.ndarray, vecs: np.ndarray) -> np.ndarray:
    """Apply each trial's 2x2 unitary to all four qubit axes of (n, k, 16) vectors."""
    n, k = vecs.shape[:2]
    cube = vecs.reshape(n, k, 2, 2, 2, 2)
    for axis in range(2, 6):
        cube = np.moveaxis(cube, axis, 5)
        cube = np.einsum("nij,nabcdj->nabcdi", u, cube)
        cube = np.moveaxis(cube, 5, axis)
    return cube.reshape(n, k, 16)


_BASIS_VECTORS = None  # lazy (2 settings, 2 outcomes, 16 amps)


def _basis_vectors() -> np.ndarray:
    global _BASIS_VECTORS
    if _BASIS_VECTORS is None:
        _BASIS_VECTORS = np.array([
            [build_phi(0).amps, build_phi(1).amps],
            [build_psi(0).amps, build_psi(1).amps],
        ])
    return _BASIS_VECTORS


def _pair_tables_batch(u_a: np.ndarray, u_b: np.ndarray,
                       code_a: np.ndarray, code_b: np.ndarray,
                       eta_grid: np.ndarray) -> np.ndarray:
    """(n, 2, 2) joint probabilities of the +-1 outcomes through rotated setups.

    Aborts if any trial puts more than ZERO_OUTCOME_TOL mass on the 0 label.
    """
    basis = _basis_vectors()
    alice = _rotate_fourfold_batch(u_a, basis[code_a])
    bob = _rotate_fourfold_batch(u_b, basis[code_b])
    row = np.einsum("nai,ij->naj", alice.conj(), eta_grid)
    amp = np.einsum("naj,nbj->nab", row, bob.conj())
    p2 = np.abs(amp) ** 2
    zero_mass = 1.0 - p2.sum(axis=(1, 2))
    worst = float(zero_mass.max())
    if worst > ZERO_OUTCOME_TOL:
        raise RuntimeError(
            f"outcome 0 acquired probability {worst:.3e} in a sampled trial"
        )
    return p2 / p2.sum(axis=(1, 2), keepdims=True)


def _string_tables_batch(u_a: np.ndarray, u_b: np.ndarray,
                         code_a: np.ndarray, code_b: np.ndarray,
                         eta_grid: np.ndarray) -> np.ndarray:
    """(n, 16, 16) joint probabilities over outcome-string pairs (protocol path)."""
    eigvecs = np.array([
        protocol_eigenvectors(local_protocol_for("F")),
        protocol_eigenvectors(local_protocol_for("G")),
    ])
    alice = _rotate_fourfold_batch(u_a, eigvecs[code_a])
    bob = _rotate_fourfold_batch(u_b, eigvecs[code_b])
    row = np.einsum("nai,ij->naj", alice.conj(), eta_grid)
    amp = np.einsum("naj,nbj->nab", row, bob.conj())
    p = np.abs(amp) ** 2
    return p / p.sum(axis=(1, 2), keepdims=True)


def _sample_rows(cum: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Index of the first cumulative entry exceeding each row's uniform draw."""
    return np.minimum((cum < u[:, None]).sum(axis=1), cum.shape[1] - 1)


def run_trials(n: int, root_seed: int, setting_policy: str = "uniform_random",
               fixed_rotations: bool = False,
               measurement_path: str = "pvm") -> tuple[TrialLog, JointStats]:
    """Run n seeded trials and return the trial log plus aggregated counts.

    measurement_path 'pvm' samples the outcome pair from the two-outcome joint
    table; 'protocol' samples a 16x16 outcome-string pair from the per-qubit
    protocol eigenbasis and classifies each side's string.  Both paths draw
    rotations and outcomes from the same per-trial seed streams.
    """
    if n < 1:
        raise ValueError("need at least one trial")
    if measurement_path not in ("pvm", "protocol"):
        raise ValueError(f"unknown measurement path {measurement_path!r}")
    kind, fixed_pair = parse_policy(setting_policy)
    root = root_seed & ((1 << 64) - 1)
    eta_grid = build_eta().amps.reshape(16, 16)

    fixed_setup = SetupRotations.sample(root) if fixed_rotations else None
    if measurement_path == "protocol":
        classify = np.array([
            [local_protocol_for("F").classify(format(i, "04b")) for i in range(16)],
            [local_protocol_for("G").classify(format(i, "04b")) for i in range(16)],
        ], dtype=np.int8)

    cols: dict[str, list[np.ndarray]] = {key: [] for key in
                                         ("trial", "sa", "sb", "ka", "kb", "oa", "ob")}
    for start in range(0, n, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, n), dtype=np.uint64)
        m = len(idx)
        base = mix64_array(np.uint64(root) ^ idx)

        if kind == "uniform":
            bits = mix64_array(base ^ np.uint64(STREAM_SETTINGS))
            code_a = (bits & np.uint64(1)).astype(np.int64)
            code_b = ((bits >> np.uint64(1)) & np.uint64(1)).astype(np.int64)
        elif kind == "fixed":
            code_a = np.full(m, 0 if fixed_pair[0] is Setting.F else 1, dtype=np.int64)
            code_b = np.full(m, 0 if fixed_pair[1] is Setting.F else 1, dtype=np.int64)
        else:  # cycle through FF, FG, GF, GG by trial index
            cyc = (idx % np.uint64(4)).astype(np.int64)
            code_a, code_b = cyc >> 1, cyc & 1

        if fixed_setup is not None:
            sa_f, sa_g, sb_f, sb_g = (np.uint64(s) for s in fixed_setup.seeds)
            seed_a = np.where(code_a == 0, sa_f, sa_g)
            seed_b = np.where(code_b == 0, sb_f, sb_g)
        else:
            seed_a = mix64_array(base ^ np.uint64(STREAM_ALICE))
            seed_b = mix64_array(base ^ np.uint64(STREAM_BOB))
        u_a = sample_su2_batch(seed_a)
        u_b = sample_su2_batch(seed_b)

        draw = (mix64_array(base ^ np.uint64(STREAM_OUTCOME))
                >> np.uint64(11)).astype(np.float64) * (2.0**-53)
        if measurement_path == "pvm":
            tables = _pair_tables_batch(u_a, u_b, code_a, code_b, eta_grid)
            cum = np.cumsum(tables.reshape(m, 4), axis=1)
            pick = _sample_rows(cum, draw * cum[:, -1])
            out_a = np.where((pick >> 1) == 0, -1, 1).astype(np.int8)
            out_b = np.where((pick & 1) == 0, -1, 1).astype(np.int8)
        else:
            tables = _string_tables_batch(u_a, u_b, code_a, code_b, eta_grid)
            cum = np.cumsum(tables.reshape(m, 256), axis=1)
            pick = _sample_rows(cum, draw * cum[:, -1])
            out_a = classify[code_a, pick >> 4]
            out_b = classify[code_b, pick & 15]

        cols["trial"].append(idx)
        cols["sa"].append(code_a.astype(np.int8))
        cols["sb"].append(code_b.astype(np.int8))
        cols["ka"].append(seed_a)
        cols["kb"].append(seed_b)
        cols["oa"].append(out_a)
        cols["ob"].append(out_b)

    log = TrialLog(*(np.concatenate(cols[key]) for key in
                     ("trial", "sa", "sb", "ka", "kb", "oa", "ob")))
    stats = JointStats.from_arrays(log.setting_a, log.setting_b,
                                   log.outcome_a, log.outcome_b)
    return log, stats


# ---------------------------------------------------------------------------
# Audit of the element-of-reality inference chain
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ChainValues:
    """The four numbers of the inference chain, in narrative order."""

    hardy_fraction: float | None   # P(1, 1 | G, G)
    cond_ab: float | None          # P(A: F=1 | B: G=1)
    cond_ba: float | None          # P(B: F=1 | A: G=1)
    joint_ff: float | None         # P(1, 1 | F, F)


@dataclass(frozen=True)
class EprAudit:
    """Exact and (optionally) sampled values of the inference chain."""

    exact: ChainValues
    empirical: ChainValues | None
    contradiction_witnessed: bool
    note: str


def _exact_chain(behavior: ExactBehavior) -> ChainValues:
    hardy = behavior.prob(Setting.G, Setting.G, 1, 1)
    joint_ff = behavior.prob(Setting.F, Setting.F, 1, 1)

    def _cond(target, given):
        try:
            return conditional(behavior, target, given)
        except ValueError:
            return None

    return ChainValues(
        hardy_fraction=hardy,
        cond_ab=_cond(("A", Setting.F, 1), ("B", Setting.G, 1)),
        cond_ba=_cond(("B", Setting.F, 1), ("A", Setting.G, 1)),
        joint_ff=joint_ff,
    )


def _empirical_chain(stats: JointStats) -> ChainValues:
    def _ratio(num, den):
        return num / den if den else None

    gg = stats.counts[(Setting.G, Setting.G)]
    ff = stats.counts[(Setting.F, Setting.F)]
    fg = stats.counts[(Setting.F, Setting.G)]
    gf = stats.counts[(Setting.G, Setting.F)]
    one = _label_index(1)
    return ChainValues(
        hardy_fraction=_ratio(gg[one, one], gg.sum()),
        cond_ab=_ratio(fg[one, one], fg[:, one].sum()),
        cond_ba=_ratio(gf[one, one], gf[one, :].sum()),
        joint_ff=_ratio(ff[one, one], ff.sum()),
    )


def epr_audit(trials, exact: ExactBehavior, tol: float = 1e-9) -> EprAudit:
    """Report the inference chain: a nonzero both-G fraction, two perfect
    conditionals, and a forbidden both-F event.

    ``trials`` may be a TrialLog, an iterable of TrialRecords, or None for an
    exact-only audit.
    """
    chain = _exact_chain(exact)
    empirical = None
    if trials is not None and (not hasattr(trials, "__len__") or len(trials)):
        empirical = _empirical_chain(JointStats.from_records(trials))

    witnessed = (
        chain.hardy_fraction is not None and chain.hardy_fraction > tol
        and chain.joint_ff is not None and chain.joint_ff <= tol
        and chain.cond_ab is not None and abs(chain.cond_ab - 1.0) <= tol
        and chain.cond_ba is not None and abs(chain.cond_ba - 1.0) <= tol
    )
    if witnessed:
        note = (
            f"contradiction witnessed: both-G fraction {chain.hardy_fraction:.6f} > 0 "
            "while certainty propagation forbids any both-F event"
        )
    else:
        note = "no contradiction witnessed"
    return EprAudit(exact=chain, empirical=empirical,
                    contradiction_witnessed=witnessed, note=note)


def stats_report(stats: JointStats, exact: ExactBehavior) -> dict:
    """JSON-ready summary keyed by setting pair: counts, frequencies, exact, deviations."""
    report: dict = {"outcome_order": list(LABEL_ORDER), "setting_pairs": {}}
    for sa, sb in SETTING_PAIRS:
        freq = stats.frequency(sa, sb)
        exact_t = exact.table(sa, sb)
        report["setting_pairs"][f"{sa.value}{sb.value}"] = {
            "trials": stats.total(sa, sb),
            "counts": stats.counts[(sa, sb)].tolist(),
            "empirical": freq.tolist(),
            "exact": exact_t.tolist(),
            "abs_deviation": np.abs(freq - exact_t).tolist(),
        }
    return report
