import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from antisym.builder import OrbitalSet, build_full_measurement, build_full_recursive
from antisym.circuit import Circuit, LayoutError
from antisym.gates import Gate, Kind
from antisym.lowering import lower_circuit
from antisym.sim import (
    DensityMatrix,
    NoiseModel,
    StateVector,
    apply_depolarizing,
    fidelity,
    final_state,
    run_density,
    run_density_branches,
    run_statevector,
    sample_counts,
    superoperator,
)

from conftest import random_density, random_orbitals, random_state


def _pure(v):
    return DensityMatrix.from_state(np.asarray(v, dtype=complex))


def _mixture_of_branches(c, initial=None):
    recs = run_statevector(c, initial=initial)
    return sum(r.probability * np.outer(r.state.amplitudes, r.state.amplitudes.conj()) for r in recs)


# -- statevector -----------------------------------------------------------------------------


def test_h_measure_branches():
    c = Circuit(0, 1, n_ancilla=1, n_cbits=1, gates=[Gate(Kind.H, [0]), Gate(Kind.MEASURE, [0], cbit=0)])
    recs = run_statevector(c)
    assert sorted(r.outcome for r in recs) == [(0,), (1,)]
    assert all(abs(r.probability - 0.5) < 1e-12 for r in recs)


def test_recursive_single_branch_ancillas_clear():
    c = build_full_recursive(OrbitalSet.from_integers([0, 1, 2], 2))
    recs = run_statevector(c)
    assert len(recs) == 1
    st_ = recs[0].state
    for a in range(c.ancilla(0), c.n_qubits):
        assert st_.probability(a, 0) >= 1 - 1e-12


def test_conditions_and_reset():
    c = Circuit(
        0,
        1,
        n_ancilla=2,
        n_cbits=1,
        gates=[
            Gate(Kind.H, [0]),
            Gate(Kind.MEASURE, [0], cbit=0),
            Gate(Kind.X, [1], condition=[(0, 1)]),
            Gate(Kind.RESET, [0]),
        ],
    )
    for r in run_statevector(c):
        assert r.state.probability(0, 0) > 1 - 1e-12
        assert r.state.probability(1, r.outcome[0]) > 1 - 1e-12


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_norm_preserved(seed):
    rng = np.random.default_rng(seed)
    c = build_full_recursive(OrbitalSet.from_vectors(random_orbitals(rng, 2, 2)))
    out = final_state(c, StateVector(c.n_qubits, np.kron(np.eye(2)[0], random_state(rng, 4).amplitudes)))
    assert abs(out.norm - 1) < 1e-10


def test_sample_matches_enumerate():
    c = Circuit(
        0,
        1,
        n_ancilla=3,
        n_cbits=3,
        gates=[
            Gate(Kind.RY, [0], theta=1.1),
            Gate(Kind.MEASURE, [0], cbit=0),
            Gate(Kind.CRY, [1], [(0, 1)], theta=2.0),
            Gate(Kind.H, [2], condition=[(0, 0)]),
            Gate(Kind.MEASURE, [1], cbit=1),
            Gate(Kind.MEASURE, [2], cbit=2),
        ],
    )
    probs = {r.outcome: r.probability for r in run_statevector(c)}
    assert len(probs) == 4
    shots = 100_000
    hist = sample_counts(c, shots, seed=5)
    assert set(hist) <= set(probs)
    for k, p in probs.items():
        sigma = math.sqrt(shots * p * (1 - p))
        assert abs(hist.get(k, 0) - shots * p) <= 5 * sigma


def test_statevector_cap():
    with pytest.raises(LayoutError):
        run_statevector(Circuit(0, 1, n_ancilla=25))
    with pytest.raises(ValueError):
        run_statevector(Circuit(0, 1, n_ancilla=1), mode="guess")


# -- fidelity ------------------------------------------------------------------------------------


def test_fidelity_examples(rng):
    zero, one = _pure([1, 0]), _pure([0, 1])
    assert abs(fidelity(zero, zero) - 1) < 1e-12
    assert fidelity(zero, one) < 1e-12
    assert abs(fidelity(zero, DensityMatrix(1, np.eye(2) / 2)) - 0.5) < 1e-12
    a, b = random_density(rng, 3), random_density(rng, 3)
    assert abs(fidelity(a, b) - fidelity(b, a)) < 1e-9
    with pytest.raises(ValueError):
        fidelity(zero, DensityMatrix(2, np.eye(4) / 4))


# -- depolarizing ----------------------------------------------------------------------------


def test_noise_model_parameters():
    nm = NoiseModel(1e-3, 2e-2)
    assert nm.one_qubit_clifford == 2e-3
    assert abs(nm.two_qubit_clifford - 4e-3 / 3) < 1e-18
    assert nm.one_qubit_t == 4e-2
    assert nm.parameter(Gate(Kind.T, [0])) == 4e-2
    assert abs(nm.parameter(Gate(Kind.CNOT, [1], [(0, 1)])) - 4e-3 / 3) < 1e-18
    with pytest.raises(ValueError):
        NoiseModel(0.3, 0)


def test_depolarizing_examples(rng):
    rho = random_density(rng, 3)
    assert np.allclose(apply_depolarizing(rho, [0, 2], 0.0).matrix, rho.matrix)
    assert np.allclose(apply_depolarizing(rho, [0, 1, 2], 1.0).matrix, np.eye(8) / 8, atol=1e-12)
    with pytest.raises(ValueError):
        apply_depolarizing(rho, [0], 1.5)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0, 1), st.sampled_from([[0], [1], [0, 2], [2, 1, 0]]))
def test_depolarizing_cptp(seed, p, qs):
    rho = random_density(np.random.default_rng(seed), 3)
    out = apply_depolarizing(rho, qs, p).matrix
    assert abs(np.trace(out) - 1) <= 1e-10
    assert np.linalg.eigvalsh(out).min() >= -1e-9


def test_single_x_closed_form():
    p_inf = 0.05
    c = Circuit(0, 1, n_ancilla=1, gates=[Gate(Kind.X, [0])])
    rho = run_density(c, NoiseModel(p_inf, 0)).matrix
    p = 2 * p_inf
    expected = (1 - p) * np.diag([0, 1]) + p * np.eye(2) / 2
    assert np.allclose(rho, expected, atol=1e-14)


def test_superoperator_matches_kraus(rng):
    u = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))[0]
    p = 0.3
    rho = random_density(rng, 2).matrix
    s = superoperator(u, p)
    vec = rho.reshape(-1, order="F")
    out = (s @ vec).reshape(4, 4, order="F")
    mixed = u @ rho @ u.conj().T
    assert np.allclose(out, (1 - p) * mixed + p * np.trace(mixed) * np.eye(4) / 4, atol=1e-12)


# -- density vs statevector --------------------------------------------------------------------------


@pytest.mark.parametrize(
    "builder,ints,eta",
    [
        (build_full_recursive, [0, 1], 1),
        (build_full_recursive, [0, 1, 2], 2),
        (build_full_measurement, [0, 1, 2], 2),
    ],
)
def test_zero_noise_density_matches_statevector(builder, ints, eta):
    c = builder(OrbitalSet.from_integers(ints, eta))
    rho = run_density(c, NoiseModel())
    assert fidelity(rho, DensityMatrix(c.n_qubits, _mixture_of_branches(c))) >= 1 - 1e-10
    assert abs(rho.trace - 1) < 1e-10


def test_zero_noise_lowered_study_circuit():
    orbs = OrbitalSet.from_integers([0, 1, 2], 3)
    c = lower_circuit(build_full_measurement(orbs)).circuit
    particles = range(9)
    rho = run_density(c, keep_wires=particles)
    recs = run_statevector(c)
    ref = sum(r.probability * r.state.reduced(particles).matrix for r in recs)
    assert fidelity(rho, ref) >= 1 - 1e-10


def test_noisy_density_is_valid_and_ordered():
    c = lower_circuit(build_full_measurement(OrbitalSet.from_integers([0, 1, 2], 2))).circuit
    target = run_density(c, keep_wires=range(6))
    best = run_density(c, NoiseModel(5e-6, 5e-4), keep_wires=range(6))
    worst = run_density(c, NoiseModel(3e-3, 2e-2), keep_wires=range(6))
    for rho in (best, worst):
        rho.check()
    assert fidelity(worst, target) < fidelity(best, target)


def test_branches_probabilities(rng):
    c = build_full_measurement(OrbitalSet.from_vectors(random_orbitals(rng, 3, 2)))
    br = run_density_branches(c, NoiseModel(1e-3, 1e-3), keep_bits=range(c.n_cbits))
    assert abs(sum(b.probability for b in br) - 1) < 1e-9
    assert all(b.probability >= 0 for b in br)


def test_density_cap():
    with pytest.raises(LayoutError):
        run_density(Circuit(0, 1, n_ancilla=13))


def test_reduced_state_matches_partial_trace(rng):
    psi = random_state(rng, 3)
    full = np.outer(psi.amplitudes, psi.amplitudes.conj()).reshape([2] * 6)
    # keep wires 0 and 2: trace wire 1 (axes 1 and 4)
    red = np.einsum("abcdbf->acdf", full).reshape(4, 4)
    assert np.allclose(psi.reduced([0, 2]).matrix, red, atol=1e-12)
