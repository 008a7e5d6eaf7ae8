"""PVM structure, Born distributions, and the single-qubit protocol."""

import json

import numpy as np
import pytest

import oracles
from afbell.observables import (
    ALL_STRINGS,
    PVM,
    LocalProtocol,
    born_distribution,
    build_F,
    build_G,
    classified_distribution,
    coarse_grain,
    local_protocol_for,
    protocol_eigenvectors,
    protocol_pvm,
    string_distribution,
)
from afbell.qstate import StateVector, basis_state, build_phi, build_psi

TOL = 1e-12


def _pvm_ranks(m):
    return [int(round(np.trace(p).real)) for _, p in m.outcomes]


@pytest.mark.parametrize("builder", [build_F, build_G])
def test_pvm_structure(builder):
    m = builder()
    assert m.labels == (-1, +1, 0)
    assert _pvm_ranks(m) == [1, 1, 14]
    total = sum(p for _, p in m.outcomes)
    assert np.abs(total - np.eye(16)).max() < TOL
    for _, p in m.outcomes:
        assert np.abs(p - p.conj().T).max() < TOL
        assert np.abs(p @ p - p).max() < TOL


def test_pvm_rejects_non_projector():
    broken = np.eye(16) * 0.5
    with pytest.raises(ValueError):
        PVM(((1, broken),))


def test_born_on_eigenstates():
    f = build_F()
    assert born_distribution(build_phi(1), f) == pytest.approx(
        {-1: 0.0, +1: 1.0, 0: 0.0}, abs=TOL)
    assert born_distribution(build_phi(0), f) == pytest.approx(
        {-1: 1.0, +1: 0.0, 0: 0.0}, abs=TOL)
    g = build_G()
    assert born_distribution(build_psi(0), g) == pytest.approx(
        {-1: 1.0, +1: 0.0, 0: 0.0}, abs=TOL)


def test_born_cross_values():
    # Oracle: squared inner products from the coefficient dicts.
    p_plus = oracles.dict_inner(oracles.PHI1, oracles.PSI0) ** 2
    assert p_plus == pytest.approx(0.75, abs=TOL)
    f = build_F()
    assert born_distribution(build_psi(0), f) == pytest.approx(
        {-1: 0.25, +1: 0.75, 0: 0.0}, abs=TOL)
    assert born_distribution(build_psi(1), f) == pytest.approx(
        {-1: 0.75, +1: 0.25, 0: 0.0}, abs=TOL)
    g = build_G()
    assert born_distribution(build_phi(0), g)[+1] == pytest.approx(
        oracles.dict_inner(oracles.PSI1, oracles.PHI0) ** 2, abs=TOL)
    assert born_distribution(build_phi(0), g)[+1] == pytest.approx(0.75, abs=TOL)
    assert born_distribution(build_phi(1), g)[+1] == pytest.approx(0.25, abs=TOL)


def test_born_outside_the_span():
    # Oracle: |0000> has no overlap with either discriminated state.
    assert oracles.dict_inner({"0000": 1.0}, oracles.PHI0) == 0.0
    assert oracles.dict_inner({"0000": 1.0}, oracles.PHI1) == 0.0
    dist = born_distribution(basis_state(4, "0000"), build_F())
    assert dist == pytest.approx({-1: 0.0, +1: 0.0, 0: 1.0}, abs=TOL)


def test_born_validation():
    with pytest.raises(ValueError):
        born_distribution(basis_state(2, "00"), build_F())
    unnormalized = StateVector(4, np.ones(16, dtype=complex))
    with pytest.raises(ValueError):
        born_distribution(unnormalized, build_F())


def test_born_sums_to_one():
    rng = np.random.default_rng(5)
    for _ in range(20):
        amps = rng.standard_normal(16) + 1j * rng.standard_normal(16)
        state = StateVector(4, amps / np.linalg.norm(amps))
        for m in (build_F(), build_G()):
            dist = born_distribution(state, m)
            assert sum(dist.values()) == pytest.approx(1.0, abs=1e-11)
            assert all(p >= 0.0 for p in dist.values())


def test_protocol_axes_and_partition():
    f = local_protocol_for("F")
    assert f.axes == ("z", "z", "x", "x")
    g = local_protocol_for("G")
    assert g.axes == ("z", "x", "z", "x")
    for proto in (f, g):
        minus = [s for s in ALL_STRINGS if proto.classify(s) == -1]
        plus = [s for s in ALL_STRINGS if proto.classify(s) == +1]
        assert len(minus) == 4 and len(plus) == 12
        assert sorted(minus + plus) == sorted(ALL_STRINGS)
    assert [s for s in ALL_STRINGS if f.classify(s) == -1] == [
        "0101", "0110", "1001", "1010"]
    with pytest.raises(ValueError):
        local_protocol_for("H")


def test_protocol_example_strings():
    f = local_protocol_for("F")
    assert f.classify("0101") == -1  # z=01, x-bits 01
    assert f.classify("0000") == +1
    g = local_protocol_for("G")
    assert g.classify("0011") == -1  # differs on qubits (1,3) and (2,4)
    assert g.classify("0101") == +1


def test_protocol_eigenbasis_orthonormal():
    for tag in ("F", "G"):
        vecs = protocol_eigenvectors(local_protocol_for(tag))
        gram = vecs.conj() @ vecs.T
        assert np.abs(gram - np.eye(16)).max() < TOL
        fine = protocol_pvm(local_protocol_for(tag))
        assert len(fine) == 16
        total = sum(p for _, p in fine)
        assert np.abs(total - np.eye(16)).max() < TOL


def test_string_probabilities_on_discriminated_states():
    f = local_protocol_for("F")
    dist0 = string_distribution(build_phi(0), f)
    for bits, prob in dist0.items():
        target = 0.25 if f.classify(bits) == -1 else 0.0
        assert prob == pytest.approx(target, abs=TOL)
    dist1 = string_distribution(build_phi(1), f)
    for bits, prob in dist1.items():
        target = 1.0 / 12.0 if f.classify(bits) == +1 else 0.0
        assert prob == pytest.approx(target, abs=TOL)
    g = local_protocol_for("G")
    for bits, prob in string_distribution(build_psi(0), g).items():
        target = 0.25 if g.classify(bits) == -1 else 0.0
        assert prob == pytest.approx(target, abs=TOL)


def test_classified_distribution_on_span_members():
    f = local_protocol_for("F")
    assert classified_distribution(build_phi(0), f) == pytest.approx(
        {-1: 1.0, +1: 0.0}, abs=TOL)
    assert classified_distribution(build_psi(0), f) == pytest.approx(
        {-1: 0.25, +1: 0.75}, abs=TOL)


def test_coarse_grain_matches_pvm_on_span():
    rng = np.random.default_rng(17)
    for tag, v0, v1, pvm in (
        ("F", build_phi(0), build_phi(1), build_F()),
        ("G", build_psi(0), build_psi(1), build_G()),
    ):
        proto = local_protocol_for(tag)
        coarse = coarse_grain(proto)
        assert sorted(_pvm_ranks(coarse)) == [4, 12]
        for _ in range(100):
            c = rng.standard_normal(4)
            amps = (c[0] + 1j * c[1]) * v0.amps + (c[2] + 1j * c[3]) * v1.amps
            state = StateVector(4, amps / np.linalg.norm(amps))
            via_protocol = classified_distribution(state, proto)
            via_coarse = born_distribution(state, coarse)
            exact = born_distribution(state, pvm)
            for label in (-1, +1):
                assert abs(via_protocol[label] - exact[label]) < TOL
                assert abs(via_coarse[label] - exact[label]) < TOL
            assert exact[0] < TOL


def test_g_protocol_is_swapped_f_protocol():
    # Conjugating the F coarse projectors by the qubit 2<->3 permutation
    # must give the G coarse projectors.
    perm = np.zeros((16, 16))
    for i in range(16):
        bits = format(i, "04b")
        j = int(bits[0] + bits[2] + bits[1] + bits[3], 2)
        perm[j, i] = 1.0
    cf = coarse_grain(local_protocol_for("F"))
    cg = coarse_grain(local_protocol_for("G"))
    for label in (-1, +1):
        swapped = perm @ cf.projector(label) @ perm.T
        assert np.abs(swapped - cg.projector(label)).max() < TOL


def test_protocol_validation():
    with pytest.raises(ValueError):
        LocalProtocol(("z", "z", "z", "x"), {s: 1 for s in ALL_STRINGS})
    table = {s: 1 for s in ALL_STRINGS}
    table.pop("0000")
    with pytest.raises(ValueError):
        LocalProtocol(("z", "z", "x", "x"), table)
    bad = {s: (2 if s == "0000" else 1) for s in ALL_STRINGS}
    with pytest.raises(ValueError):
        LocalProtocol(("z", "z", "x", "x"), bad)


def test_classifier_json_roundtrip():
    f = local_protocol_for("F")
    table = json.loads(f.classifier_json())
    assert set(table) == set(ALL_STRINGS)
    assert table["0101"] == -1
    assert table["1111"] == 1
