"""Exact-rational audit of local deterministic models against the observed behavior.

A local hidden-variable model is a probability distribution over deterministic
strategies, each assigning one outcome to every (side, setting) pair in
advance.  This module decides, in exact rational arithmetic with no floating
point anywhere, whether any such distribution satisfies a list of behavioral
constraints, and emits a machine-checkable certificate either way: a witness
distribution, or a derivation whose steps are set-inclusion and measure
statements over the finite strategy space.

Feasibility is decided by direct set-measure reasoning: probability-zero
constraints carve out a forbidden region, and a positive-probability event
contained in that region is an immediate contradiction.  Remaining positive
constraints are satisfied, when possible, by exhaustive search over small
candidate supports (atoms of the event algebra), which is exact and complete
because a satisfiable system of k constraints admits a solution supported on
at most k+1 atoms.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, NamedTuple

OUTCOME_VALUES = (-1, 0, 1)
TWO_VALUED = (-1, 1)

HARDY_VALUE = Fraction(9, 112)

KIND_EQUALS = "equals"
KIND_AT_LEAST = "at_least"

# Candidate-support enumeration guard; far above anything the audit needs.
_MAX_CANDIDATES = 500_000


class Strategy(NamedTuple):
    """Deterministic local assignments: one outcome per (side, setting)."""

    f_a: int
    g_a: int
    f_b: int
    g_b: int


def all_strategies(values: tuple[int, ...] = OUTCOME_VALUES) -> tuple[Strategy, ...]:
    """The full product strategy space, in lexicographic enumeration order."""
    return tuple(Strategy(*t) for t in itertools.product(values, repeat=4))


@dataclass(frozen=True)
class Constraint:
    """A required probability for an event over strategies."""

    name: str
    kind: str
    value: Fraction
    event: Callable[[Strategy], bool]
    description: str = ""

    def __post_init__(self) -> None:
        if self.kind not in (KIND_EQUALS, KIND_AT_LEAST):
            raise ValueError(f"unknown constraint kind {self.kind!r}")
        value = Fraction(self.value)
        if not 0 <= value <= 1:
            raise ValueError(f"constraint value {value} outside [0, 1]")
        object.__setattr__(self, "value", value)

    def event_set(self, strategies: tuple[Strategy, ...]) -> frozenset[Strategy]:
        return frozenset(s for s in strategies if self.event(s))


def quantum_constraints() -> list[Constraint]:
    """The constraints the quantum behavior imposes on any local model."""
    return [
        Constraint(
            name="ff_zero",
            kind=KIND_EQUALS,
            value=Fraction(0),
            event=lambda s: s.f_a == 1 and s.f_b == 1,
            description="both sides never obtain F=1 together",
        ),
        Constraint(
            name="gb_implies_fa",
            kind=KIND_EQUALS,
            value=Fraction(0),
            event=lambda s: s.g_b == 1 and s.f_a != 1,
            description="Bob obtaining G=1 makes Alice's F=1 certain",
        ),
        Constraint(
            name="ga_implies_fb",
            kind=KIND_EQUALS,
            value=Fraction(0),
            event=lambda s: s.g_a == 1 and s.f_b != 1,
            description="Alice obtaining G=1 makes Bob's F=1 certain",
        ),
        Constraint(
            name="gg_hardy",
            kind=KIND_EQUALS,
            value=HARDY_VALUE,
            event=lambda s: s.g_a == 1 and s.g_b == 1,
            description="both sides obtain G=1 in exactly 9/112 of the runs",
        ),
        Constraint(
            name="no_zero_outcome",
            kind=KIND_EQUALS,
            value=Fraction(0),
            event=lambda s: 0 in s,
            description="the third outcome never occurs on either side",
        ),
    ]


@dataclass(frozen=True)
class DerivationStep:
    """One machine-checkable statement in an infeasibility derivation.

    kinds:
      containment       event(target) is inside the union of the cited events
                        (target None means the whole strategy space is)
      zero_measure      the cited constraints force their events' union to
                        probability 0
      contradiction     the target constraint demands positive probability for
                        that event (target None: normalization demands total 1)
      basis_exhaustion  no candidate support solves the positive constraints
    """

    kind: str
    statement: str
    constraints_used: tuple[int, ...]
    target: int | None = None


@dataclass(frozen=True)
class FeasibilityCertificate:
    """Outcome of a feasibility decision, carrying its own evidence."""

    feasible: bool
    outcome_values: tuple[int, ...]
    witness: tuple[tuple[Strategy, Fraction], ...] | None = None
    derivation: tuple[DerivationStep, ...] | None = None

    def witness_dict(self) -> dict[Strategy, Fraction]:
        if self.witness is None:
            raise ValueError("certificate carries no witness")
        return dict(self.witness)


def _zero_and_positive(constraints: list[Constraint]) -> tuple[list[int], list[int]]:
    zero, positive = [], []
    for i, c in enumerate(constraints):
        if c.value == 0:
            if c.kind == KIND_EQUALS:
                zero.append(i)
            # 'at_least 0' is vacuous
        else:
            positive.append(i)
    return zero, positive


def _greedy_cover(target: frozenset[Strategy], zero_events: list[tuple[int, frozenset[Strategy]]]
                  ) -> tuple[int, ...]:
    """Indices of zero events covering the target set (greedy, deterministic)."""
    remaining = set(target)
    chosen: list[int] = []
    while remaining:
        idx, ev = max(zero_events, key=lambda p: (len(p[1] & remaining), -p[0]))
        gain = ev & remaining
        if not gain:
            raise RuntimeError("cover does not exist; caller must guarantee coverage")
        chosen.append(idx)
        remaining -= gain
    return tuple(sorted(chosen))


def _containment_derivation(constraints: list[Constraint], target_idx: int | None,
                            cover: tuple[int, ...]) -> tuple[DerivationStep, ...]:
    cover_names = ", ".join(constraints[j].name for j in cover)
    if target_idx is None:
        what = "every strategy"
        demand = "normalization requires total probability 1"
    else:
        c = constraints[target_idx]
        what = f"every strategy in the event of '{c.name}'"
        op = "=" if c.kind == KIND_EQUALS else ">="
        demand = f"constraint '{c.name}' requires probability {op} {c.value} > 0 for that event"
    return (
        DerivationStep(
            kind="containment",
            statement=f"{what} lies in one of the events of {{{cover_names}}}",
            constraints_used=cover,
            target=target_idx,
        ),
        DerivationStep(
            kind="zero_measure",
            statement="each of those events has probability 0, hence so does their union",
            constraints_used=cover,
        ),
        DerivationStep(
            kind="contradiction",
            statement=f"{demand}, but steps 1-2 force it to probability 0",
            constraints_used=(target_idx,) if target_idx is not None else (),
            target=target_idx,
        ),
    )


def _solve_restricted(matrix: list[list[Fraction]], rhs: list[Fraction],
                      support: tuple[int, ...]) -> dict[int, Fraction] | None:
    """Solve matrix[:, support] x = rhs exactly; free variables are set to 0."""
    rows, cols = len(matrix), len(support)
    aug = [[matrix[r][c] for c in support] + [rhs[r]] for r in range(rows)]
    pivot_cols: list[int] = []
    r = 0
    for c in range(cols):
        pr = next((i for i in range(r, rows) if aug[i][c] != 0), None)
        if pr is None:
            continue
        aug[r], aug[pr] = aug[pr], aug[r]
        inv = aug[r][c]
        aug[r] = [v / inv for v in aug[r]]
        for i in range(rows):
            if i != r and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [vi - f * vr for vi, vr in zip(aug[i], aug[r])]
        pivot_cols.append(c)
        r += 1
        if r == rows:
            break
    for i in range(r, rows):
        if aug[i][cols] != 0:
            return None
    solution = {v: Fraction(0) for v in support}
    for row, c in enumerate(pivot_cols):
        solution[support[c]] = aug[row][cols]
    return solution


def _solve_positive_system(constraints: list[Constraint], positive: list[int],
                           survivors: list[Strategy]
                           ) -> tuple[tuple[Strategy, Fraction], ...] | None:
    """Exact witness over atoms of the positive events, or None if none exists."""
    # Group surviving strategies by which positive events they belong to; any
    # representative of an atom is as good as any other, so keep the first.
    atom_reps: dict[int, Strategy] = {}
    for s in survivors:
        mask = 0
        for bit, i in enumerate(positive):
            if constraints[i].event(s):
                mask |= 1 << bit
        atom_reps.setdefault(mask, s)
    atoms = sorted(atom_reps.items())

    n_atoms = len(atoms)
    n_eq = len(positive) + 1
    slack_var: dict[int, int] = {}
    n_vars = n_atoms
    for row, i in enumerate(positive):
        if constraints[i].kind == KIND_AT_LEAST:
            slack_var[row] = n_vars
            n_vars += 1

    matrix = [[Fraction(0)] * n_vars for _ in range(n_eq)]
    rhs: list[Fraction] = []
    for row, i in enumerate(positive):
        for ai, (mask, _) in enumerate(atoms):
            if (mask >> row) & 1:
                matrix[row][ai] = Fraction(1)
        if row in slack_var:
            matrix[row][slack_var[row]] = Fraction(-1)
        rhs.append(constraints[i].value)
    for ai in range(n_atoms):
        matrix[n_eq - 1][ai] = Fraction(1)
    rhs.append(Fraction(1))

    candidates = sum(math.comb(n_vars, k) for k in range(1, n_eq + 1))
    if candidates > _MAX_CANDIDATES:
        raise ValueError(
            f"{len(positive)} overlapping positive constraints exceed the "
            "exhaustive-search budget of this audit"
        )
    for size in range(1, n_eq + 1):
        for support in itertools.combinations(range(n_vars), size):
            sol = _solve_restricted(matrix, rhs, support)
            if sol is None or any(v < 0 for v in sol.values()):
                continue
            masses: dict[Strategy, Fraction] = {}
            for var, mass in sol.items():
                if var < n_atoms and mass > 0:
                    masses[atoms[var][1]] = mass
            return tuple(sorted(masses.items()))
    return None


def check_feasibility(constraints: list[Constraint],
                      strategies: tuple[Strategy, ...] | None = None
                      ) -> FeasibilityCertificate:
    """Exact decision: does any strategy distribution satisfy all constraints?

    ``strategies`` defaults to the full 81-element space; a custom space
    should be a full product over an outcome alphabet (as from
    ``all_strategies``) so the certificate re-verifies against the same space.
    """
    space = strategies if strategies is not None else all_strategies()
    values = tuple(sorted({v for s in space for v in s})) or OUTCOME_VALUES
    zero, positive = _zero_and_positive(constraints)
    zero_events = [(i, constraints[i].event_set(space)) for i in zero]
    forbidden = frozenset().union(*(ev for _, ev in zero_events)) if zero_events else frozenset()
    survivors = [s for s in space if s not in forbidden]

    if not survivors:
        cover = _greedy_cover(frozenset(space), zero_events)
        return FeasibilityCertificate(
            feasible=False,
            outcome_values=values,
            derivation=_containment_derivation(constraints, None, cover),
        )

    for i in positive:
        event = constraints[i].event_set(space)
        if not (event - forbidden):
            cover = _greedy_cover(event, zero_events)
            return FeasibilityCertificate(
                feasible=False,
                outcome_values=values,
                derivation=_containment_derivation(constraints, i, cover),
            )

    if not positive:
        witness = ((survivors[0], Fraction(1)),)
        return FeasibilityCertificate(feasible=True, outcome_values=values, witness=witness)

    witness = _solve_positive_system(constraints, positive, survivors)
    if witness is not None:
        return FeasibilityCertificate(feasible=True, outcome_values=values, witness=witness)
    step = DerivationStep(
        kind="basis_exhaustion",
        statement=(
            "no nonnegative exact solution exists on any candidate support of "
            "the positive constraints' event atoms"
        ),
        constraints_used=tuple(positive),
    )
    return FeasibilityCertificate(feasible=False, outcome_values=values, derivation=(step,))


def max_hardy_fraction(other_constraints: list[Constraint],
                       strategies: tuple[Strategy, ...] | None = None) -> Fraction:
    """Largest P(g_a=1 and g_b=1) any local model allows under the constraints.

    Supports probability-zero equality constraints (the audit's class); all
    mass may be piled on a single surviving strategy, so the maximum is 1 if
    any survivor lies in the event and 0 otherwise.
    """
    for c in other_constraints:
        if not (c.kind == KIND_EQUALS and c.value == 0):
            raise ValueError(
                "max_hardy_fraction handles probability-zero equality constraints only"
            )
    space = strategies if strategies is not None else all_strategies()
    survivors = [s for s in space
                 if not any(c.event(s) for c in other_constraints)]
    hardy = any(s.g_a == 1 and s.g_b == 1 for s in survivors)
    return Fraction(1) if hardy else Fraction(0)


def _verify_derivation(derivation: tuple[DerivationStep, ...],
                       constraints: list[Constraint],
                       space: tuple[Strategy, ...]) -> bool:
    if len(derivation) == 1 and derivation[0].kind == "basis_exhaustion":
        # Recheck by re-deciding from scratch.
        return not check_feasibility(constraints, space).feasible

    if len(derivation) != 3:
        return False
    containment, zero_measure, contradiction = derivation
    if (containment.kind, zero_measure.kind, contradiction.kind) != (
            "containment", "zero_measure", "contradiction"):
        return False
    cover = containment.constraints_used
    if zero_measure.constraints_used != cover:
        return False
    if containment.target != contradiction.target:
        return False
    if any(not 0 <= j < len(constraints) for j in cover):
        return False
    # Step 2: every cited constraint pins its event to probability zero.
    if any(constraints[j].kind != KIND_EQUALS or constraints[j].value != 0 for j in cover):
        return False
    # Step 1: enumerate the containment claim.
    target = containment.target
    if target is None:
        covered = space
    else:
        if not 0 <= target < len(constraints):
            return False
        covered = [s for s in space if constraints[target].event(s)]
    for s in covered:
        if not any(constraints[j].event(s) for j in cover):
            return False
    # Step 3: the target demands strictly positive probability.
    if target is None:
        return True  # total probability 1 > 0 always contradicts an empty space
    return constraints[target].value > 0


def verify_certificate(c: FeasibilityCertificate, constraints: list[Constraint],
                       strategies: tuple[Strategy, ...] | None = None) -> bool:
    """Independently re-check a certificate with exact arithmetic."""
    if not isinstance(c, FeasibilityCertificate):
        raise TypeError("not a FeasibilityCertificate")
    space = strategies if strategies is not None else all_strategies(c.outcome_values)
    space_set = frozenset(space)

    if c.feasible:
        if c.witness is None:
            raise ValueError("malformed certificate: feasible but no witness")
        masses = dict(c.witness)
        if any(not isinstance(m, Fraction) for m in masses.values()):
            raise ValueError("malformed certificate: witness masses must be Fractions")
        if any(s not in space_set for s in masses):
            return False
        if any(m < 0 for m in masses.values()) or sum(masses.values()) != 1:
            return False
        for constraint in constraints:
            p = sum((m for s, m in masses.items() if constraint.event(s)), Fraction(0))
            if constraint.kind == KIND_EQUALS and p != constraint.value:
                return False
            if constraint.kind == KIND_AT_LEAST and p < constraint.value:
                return False
        return True

    if c.derivation is None or not c.derivation:
        raise ValueError("malformed certificate: infeasible but no derivation")
    return _verify_derivation(c.derivation, constraints, space)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def constraints_to_json_dict(constraints: list[Constraint],
                             strategies: tuple[Strategy, ...] | None = None) -> list[dict]:
    """Constraints with their explicit satisfying-strategy lists."""
    space = strategies if strategies is not None else all_strategies()
    return [
        {
            "index": i,
            "name": c.name,
            "kind": c.kind,
            "value": str(c.value),
            "description": c.description,
            "event": sorted([list(s) for s in c.event_set(space)]),
        }
        for i, c in enumerate(constraints)
    ]


def certificate_to_json_dict(c: FeasibilityCertificate,
                             constraints: list[Constraint]) -> dict:
    """Certificate plus constraint table, ready for json.dump."""
    space = all_strategies(c.outcome_values)
    out: dict = {
        "feasible": c.feasible,
        "outcome_values": list(c.outcome_values),
        "constraints": constraints_to_json_dict(constraints, space),
    }
    if c.witness is not None:
        out["witness"] = [
            {"strategy": list(s), "probability": str(m)} for s, m in c.witness
        ]
    if c.derivation is not None:
        out["derivation"] = [
            {
                "kind": step.kind,
                "statement": step.statement,
                "constraints_used": list(step.constraints_used),
                "target": step.target,
            }
            for step in c.derivation
        ]
    return out


def render_certificate(c: FeasibilityCertificate, constraints: list[Constraint]) -> str:
    """Plain-text rendering of the witness or derivation chain."""
    lines = []
    if c.feasible:
        lines.append("FEASIBLE: a local model reproduces the constraints")
        for s, m in c.witness or ():
            lines.append(f"  P(f_a={s.f_a:+d}, g_a={s.g_a:+d}, f_b={s.f_b:+d}, g_b={s.g_b:+d}) = {m}")
    else:
        lines.append("INFEASIBLE: no local model satisfies the constraints")
        for k, step in enumerate(c.derivation or (), start=1):
            cited = ", ".join(constraints[j].name for j in step.constraints_used)
            lines.append(f"  step {k} [{step.kind}] {step.statement}")
            if cited:
                lines.append(f"         uses: {cited}")
    return "\n".join(lines)
