"""Acceptance criteria, one test per criterion at its stated tolerance.

Each test prints a single line so the run doubles as a checklist:
    pytest tests/test_acceptance.py -v -s
"""

import math
import time
from fractions import Fraction

import numpy as np

from afbell.cli import main as cli_main
from afbell.experiment import (
    Setting,
    SetupRotations,
    conditional,
    exact_behavior,
    run_trials,
)
from afbell.lhv import (
    HARDY_VALUE,
    check_feasibility,
    max_hardy_fraction,
    quantum_constraints,
    verify_certificate,
)
from afbell.observables import (
    born_distribution,
    build_F,
    build_G,
    classified_distribution,
    coarse_grain,
    local_protocol_for,
    string_distribution,
)
from afbell.qstate import (
    ETA_EXPANSION_TABLES,
    StateVector,
    build_eta,
    build_phi,
    build_psi,
    distance,
    eta_from_table,
)
from afbell.rotations import (
    CollectiveRotation,
    RotationPair,
    apply_collective,
    apply_pair,
    split_seed,
)

HARDY = float(Fraction(9, 112))


def _report(criterion: str, detail: str) -> None:
    print(f"ACCEPTANCE {criterion}: PASS  ({detail})")


def test_criterion_1_exact_identity_suite():
    t0 = time.perf_counter()
    behavior = exact_behavior()
    dev_ff = behavior.prob(Setting.F, Setting.F, 1, 1)
    dev_ab = abs(conditional(behavior, ("A", Setting.F, 1), ("B", Setting.G, 1)) - 1.0)
    dev_ba = abs(conditional(behavior, ("B", Setting.F, 1), ("A", Setting.G, 1)) - 1.0)
    dev_gg = abs(behavior.prob(Setting.G, Setting.G, 1, 1) - HARDY)
    elapsed = time.perf_counter() - t0
    assert dev_ff < 1e-12
    assert dev_ab < 1e-12
    assert dev_ba < 1e-12
    assert dev_gg < 1e-12
    assert elapsed < 1.0
    _report("1 exact-identities",
            f"max deviation {max(dev_ff, dev_ab, dev_ba, dev_gg):.2e}, {elapsed:.2f}s")


def test_criterion_2_rotation_robustness():
    t0 = time.perf_counter()
    worst = 0.0
    for k in range(20):
        b = exact_behavior(SetupRotations.sample(split_seed(20260810, k)))
        worst = max(worst, b.prob(Setting.F, Setting.F, 1, 1))
        worst = max(worst, abs(
            conditional(b, ("A", Setting.F, 1), ("B", Setting.G, 1)) - 1.0))
        worst = max(worst, abs(
            conditional(b, ("B", Setting.F, 1), ("A", Setting.G, 1)) - 1.0))
        worst = max(worst, abs(b.prob(Setting.G, Setting.G, 1, 1) - HARDY))
    elapsed = time.perf_counter() - t0
    assert worst < 1e-10
    assert elapsed < 10.0
    _report("2 rotation-robustness",
            f"20 rotation 4-tuples, max deviation {worst:.2e}, {elapsed:.2f}s")


def test_criterion_3_state_invariance():
    eta = build_eta()
    states = [build_phi(0), build_phi(1), build_psi(0), build_psi(1)]
    worst_pair = 0.0
    worst_single = 0.0
    for k in range(100):
        pair = RotationPair.sample(split_seed(11, 2 * k), split_seed(11, 2 * k + 1))
        worst_pair = max(worst_pair, distance(apply_pair(pair, eta), eta))
        rot = CollectiveRotation.sample(split_seed(13, k))
        for s in states:
            worst_single = max(worst_single, distance(apply_collective(rot, s), s))
    assert worst_pair < 1e-10
    assert worst_single < 1e-10
    _report("3 state-invariance",
            f"100 seeded pairs (eta {worst_pair:.2e}) and singles ({worst_single:.2e})")


def test_criterion_4_expansion_consistency():
    eta = build_eta()
    worst = max(
        distance(eta, eta_from_table(a, b, ETA_EXPANSION_TABLES[(a, b)]))
        for (a, b) in (("phi", "psi"), ("psi", "phi"), ("psi", "psi"))
    )
    assert worst < 1e-12
    table = exact_behavior().table(Setting.G, Setting.G)
    expected = np.array(
        [[Fraction(49, 112), Fraction(27, 112), 0],
         [Fraction(27, 112), Fraction(9, 112), 0],
         [0, 0, 0]], dtype=float)
    dev = float(np.abs(table - expected).max())
    assert dev < 1e-12
    _report("4 expansion-consistency",
            f"reconstruction {worst:.2e}, (49,27,27,9)/112 table {dev:.2e}")


def test_criterion_5_local_protocol_equivalence():
    worst_string = 0.0
    for tag, minus_state, plus_state in (
        ("F", build_phi(0), build_phi(1)),
        ("G", build_psi(0), build_psi(1)),
    ):
        proto = local_protocol_for(tag)
        minus_strings = [s for s in proto.classifier if proto.classify(s) == -1]
        assert len(minus_strings) == 4
        assert len(proto.classifier) - len(minus_strings) == 12
        for bits, prob in string_distribution(minus_state, proto).items():
            target = 0.25 if proto.classify(bits) == -1 else 0.0
            worst_string = max(worst_string, abs(prob - target))
        for bits, prob in string_distribution(plus_state, proto).items():
            target = 1.0 / 12.0 if proto.classify(bits) == +1 else 0.0
            worst_string = max(worst_string, abs(prob - target))
    assert worst_string < 1e-12

    rng = np.random.default_rng(20260810)
    worst_dist = 0.0
    for tag, v0, v1, pvm in (
        ("F", build_phi(0), build_phi(1), build_F()),
        ("G", build_psi(0), build_psi(1), build_G()),
    ):
        proto = local_protocol_for(tag)
        coarse = coarse_grain(proto)
        for _ in range(100):
            c = rng.standard_normal(4)
            amps = (c[0] + 1j * c[1]) * v0.amps + (c[2] + 1j * c[3]) * v1.amps
            state = StateVector(4, amps / np.linalg.norm(amps))
            exact = born_distribution(state, pvm)
            fine = classified_distribution(state, proto)
            via_coarse = born_distribution(state, coarse)
            for label in (-1, +1):
                worst_dist = max(worst_dist, abs(fine[label] - exact[label]))
                worst_dist = max(worst_dist, abs(via_coarse[label] - exact[label]))
    assert worst_dist < 1e-12
    _report("5 protocol-equivalence",
            f"4/12 split exact, string probs {worst_string:.2e}, "
            f"100 span states {worst_dist:.2e}")


def test_criterion_6_monte_carlo_reproduction():
    t0 = time.perf_counter()
    _, stats_gg = run_trials(1_000_000, 424242, "fixed:GG")
    n = stats_gg.total(Setting.G, Setting.G)
    p_hat = stats_gg.count(Setting.G, Setting.G, 1, 1) / n
    bound = 3.0 * math.sqrt(HARDY * (1.0 - HARDY) / n)
    assert n == 1_000_000
    assert abs(p_hat - HARDY) < bound

    _, stats_ff = run_trials(100_000, 515151, "fixed:FF")
    ff_ones = stats_ff.count(Setting.F, Setting.F, 1, 1)
    assert ff_ones == 0

    _, stats_gf = run_trials(100_000, 616161, "fixed:GF")
    gf = stats_gf.counts[(Setting.G, Setting.F)]
    a_one_b_not_one = int(gf[1, 0] + gf[1, 2])
    assert a_one_b_not_one == 0
    assert int(gf[1, 1]) > 0
    elapsed = time.perf_counter() - t0
    assert elapsed < 60.0
    _report("6 monte-carlo",
            f"GG 1e6: {p_hat:.6f} in 9/112 +- {bound:.1e}; FF 1e5: 0 both-ones; "
            f"GF 1e5: A=1 implies B=1; {elapsed:.1f}s")


def test_criterion_7_lhv_infeasibility():
    t0 = time.perf_counter()
    constraints = quantum_constraints()
    cert = check_feasibility(constraints)
    assert not cert.feasible
    assert verify_certificate(cert, constraints)
    zeros = [c for c in constraints if c.value == 0]
    ceiling = max_hardy_fraction(zeros)
    assert ceiling == Fraction(0)
    assert ceiling < HARDY_VALUE == Fraction(9, 112)
    quantum_value = exact_behavior().prob(Setting.G, Setting.G, 1, 1)
    assert abs(quantum_value - float(HARDY_VALUE)) < 1e-12
    elapsed = time.perf_counter() - t0
    assert elapsed < 1.0
    _report("7 lhv-infeasibility",
            f"certificate verified, ceiling 0 < 9/112, {elapsed:.2f}s")


def test_criterion_8_no_signaling():
    worst = 0.0
    for behavior in (exact_behavior(),
                     exact_behavior(SetupRotations.sample(split_seed(88, 1)))):
        for side in ("A", "B"):
            for own in (Setting.F, Setting.G):
                m_f = behavior.marginal(side, own, Setting.F)
                m_g = behavior.marginal(side, own, Setting.G)
                worst = max(worst, float(np.abs(m_f - m_g).max()))
    assert worst < 1e-12
    _report("8 no-signaling", f"canonical and rotated, max deviation {worst:.2e}")


def test_criterion_9_determinism(tmp_path, capsys):
    args = ["sample", "--trials", "10000", "--seed", "0xFEEDFACE",
            "--policy", "uniform"]
    assert cli_main(args + ["--out", str(tmp_path / "run1")]) == 0
    assert cli_main(args + ["--out", str(tmp_path / "run2")]) == 0
    capsys.readouterr()
    log1 = (tmp_path / "run1" / "trials.csv").read_bytes()
    log2 = (tmp_path / "run2" / "trials.csv").read_bytes()
    assert log1 == log2
    _report("9 determinism", f"two cmd_sample runs byte-identical ({len(log1)} bytes)")
