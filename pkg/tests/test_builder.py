import math
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from antisym.builder import (
    OrbitalSet,
    OrthogonalityError,
    basis_orbital,
    build_full_measurement,
    build_full_recursive,
    build_measurement_step,
    build_recursive_step,
    dense_orbital,
    phase_correction,
    schedule_corrections,
    step_bits,
)
from antisym.circuit import Circuit, LayoutError, unitary_of
from antisym.gates import Kind
from antisym.resources import builder_counts, tally_structure
from antisym.sim import StateVector, final_state, run_statevector
from antisym.verify import antisymmetrizer_oracle, overlap_up_to_global_phase, particle_state, swap_particles

from conftest import random_orbitals

# correction schedule per outcome, ket strings with c_1 rightmost
TABLE_I_N3 = {"00": (), "01": (1,), "10": (2,), "11": (3,)}
TABLE_I_N4 = {
    "000": (),
    "001": (1,),
    "010": (2,),
    "100": (3,),
    "011": (1, 2),
    "101": (1, 3),
    "110": (2, 3),
    "111": (4,),
}


def _output(c: Circuit):
    rec = run_statevector(c)
    assert len(rec) == 1
    return particle_state(rec[0].state, c)


# -- orbitals ---------------------------------------------------------------------------


def test_basis_orbitals():
    assert basis_orbital(0, 3).gates == ()
    assert [(g.kind, g.targets) for g in basis_orbital(2, 2).gates] == [(Kind.X, (1,))]
    assert sorted(g.targets[0] for g in basis_orbital(5, 3).gates) == [0, 2]
    with pytest.raises(ValueError):
        basis_orbital(4, 2)


def test_dense_orbital_basis_vector_is_empty():
    assert dense_orbital(np.eye(4)[0]).gates == ()


def test_dense_orbital_plus_state():
    c = dense_orbital(np.array([1, 1]) / math.sqrt(2))
    assert [g.kind for g in c.gates] == [Kind.RY]
    assert abs(c.gates[0].theta - math.pi / 2) < 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_dense_orbital_prepares_vector(eta, seed):
    v = random_orbitals(np.random.default_rng(seed), 1, eta)[0]
    out = final_state(dense_orbital(v)).amplitudes
    assert overlap_up_to_global_phase(out, v) >= 1 - 1e-10


def test_dense_orbital_rejects_unnormalized():
    with pytest.raises(ValueError):
        dense_orbital(np.array([1.0, 1.0]))


def test_orthogonality_enforced():
    with pytest.raises(OrthogonalityError):
        OrbitalSet.from_integers([1, 1], 2)
    v = np.array([1, 1]) / math.sqrt(2)
    with pytest.raises(OrthogonalityError):
        OrbitalSet.from_vectors([v, np.array([1, 0])])


def test_sorted_by_cost_sign(rng):
    vecs = random_orbitals(rng, 3, 2)
    vecs[0] = np.eye(4)[3]  # cheapest orbital first; the sort moves it back
    vecs = [vecs[0]] + [v - np.vdot(vecs[0], v) * vecs[0] for v in vecs[1:]]
    q, _ = np.linalg.qr(np.array(vecs).T)
    orbs = OrbitalSet.from_vectors([q[:, i] for i in range(3)])
    s, sign = orbs.sorted_by_cost()
    a = antisymmetrizer_oracle(orbs).amplitudes
    b = antisymmetrizer_oracle(s).amplitudes
    k = np.argmax(np.abs(a))
    assert abs(b[k] / a[k] - sign) < 1e-9


# -- Algorithm 1 -----------------------------------------------------------------------------


def test_two_particles_singlet():
    c = build_full_recursive(OrbitalSet.from_integers([0, 1], 1))
    v, p0 = _output(c)
    # (|01> - |10>)/sqrt(2) over (p2 p1)
    expected = np.array([0, -1, 1, 0]) / math.sqrt(2)
    assert overlap_up_to_global_phase(v, expected) >= 1 - 1e-12
    assert p0 >= 1 - 1e-12


def test_n1_is_just_u1():
    u = dense_orbital(np.array([0.6, 0.8]))
    c = build_full_recursive(OrbitalSet(1, (u,)))
    assert c.gates == u.gates


def test_mid_circuit_state_n3():
    orbs = OrbitalSet.from_integers([0, 1, 2], 2)
    prev = build_full_recursive(OrbitalSet(2, orbs.circuits[:2]))
    full = build_recursive_step(prev, orbs.circuits[2])
    last_cswap = max(i for i, g in enumerate(full.gates) if g.kind is Kind.CSWAP)
    mid = full.with_gates(full.gates[: last_cswap + 1])
    psi = final_state(mid).amplitudes.reshape(2**2, 2**6)  # (a2 a1) x particles
    phi = [np.eye(4)[r] for r in (0, 1, 2)]

    def prod(i, j, k):  # particle 1 holds phi_i, 2 holds phi_j, 3 holds phi_k
        return np.kron(phi[k - 1], np.kron(phi[j - 1], phi[i - 1]))

    s = 1 / math.sqrt(6)
    assert np.allclose(psi[0], s * (prod(1, 2, 3) - prod(2, 1, 3)), atol=1e-12)
    assert np.allclose(psi[1], -s * (prod(3, 2, 1) - prod(3, 1, 2)), atol=1e-12)  # a1 set
    assert np.allclose(psi[2], -s * (prod(1, 3, 2) - prod(2, 3, 1)), atol=1e-12)  # a2 set
    assert np.allclose(psi[3], 0, atol=1e-12)


@pytest.mark.parametrize("n,eta", [(2, 1), (3, 2), (4, 2), (3, 3)])
def test_recursive_matches_oracle_integers(n, eta):
    orbs = OrbitalSet.from_integers(list(range(n))[::-1], eta)
    v, p0 = _output(build_full_recursive(orbs))
    assert overlap_up_to_global_phase(v, antisymmetrizer_oracle(orbs)) >= 1 - 1e-10
    assert p0 >= 1 - 1e-10


def test_recursive_random_n4_eta2(rng):
    orbs = OrbitalSet.from_vectors(random_orbitals(rng, 4, 2))
    v, p0 = _output(build_full_recursive(orbs))
    assert overlap_up_to_global_phase(v, antisymmetrizer_oracle(orbs)) >= 1 - 1e-10
    assert p0 >= 1 - 1e-10


def test_exchange_antisymmetry(rng):
    orbs = OrbitalSet.from_vectors(random_orbitals(rng, 3, 2))
    v, _ = _output(build_full_recursive(orbs))
    for i, j in [(1, 2), (1, 3), (2, 3)]:
        assert np.allclose(swap_particles(v, 3, 2, i, j), -v, atol=1e-10)


@pytest.mark.parametrize("n,eta", [(1, 1), (2, 1), (3, 2), (4, 3), (6, 3), (9, 4)])
def test_structural_counts(n, eta):
    orbs = OrbitalSet.from_integers(range(n), eta)
    c = build_full_recursive(orbs, opaque=True)
    assert tally_structure(c) == builder_counts(n, eta)


def test_structural_counts_frozen():
    assert builder_counts(3, 2).as_tuple() == (6, 3, 6, 3)
    assert builder_counts(1, 5).as_tuple() == (1, 0, 0, 0)
    assert builder_counts(4, 3).as_tuple() == (10, 6, 18, 6)


def test_step_layout_mismatch():
    prev = build_full_recursive(OrbitalSet.from_integers([0, 1], 2))
    with pytest.raises(LayoutError):
        build_recursive_step(prev, basis_orbital(2, 3))


# -- phase correction ------------------------------------------------------------------------


def test_phase_correction_action(rng):
    vecs = random_orbitals(rng, 4, 2)
    u = dense_orbital(vecs[0])
    m = unitary_of(phase_correction(u))
    phi = final_state(u).amplitudes
    assert np.allclose(m @ phi, -phi, atol=1e-10)
    for chi in vecs[1:]:
        assert np.allclose(m @ chi, chi, atol=1e-10)


def test_phase_correction_equals_reflection(rng):
    v = random_orbitals(rng, 1, 3)[0]
    u = dense_orbital(v)
    phi = final_state(u).amplitudes
    expected = np.eye(8) - 2 * np.outer(phi, phi.conj())
    assert np.allclose(unitary_of(phase_correction(u)), expected, atol=1e-10)


# -- schedule ---------------------------------------------------------------------------------


@pytest.mark.parametrize("table,n", [(TABLE_I_N3, 3), (TABLE_I_N4, 4)])
def test_table_i(table, n):
    for ket, fix in table.items():
        s = schedule_corrections(ket, n)
        assert s.corrected_particles == fix, ket
        assert len(s.corrected_particles) <= n // 2


@pytest.mark.parametrize("n", range(2, 9))
def test_schedule_bound(n):
    for bits in product((0, 1), repeat=n - 1):
        s = schedule_corrections(bits, n)
        assert len(s.corrected_particles) <= n // 2
        assert s.sign_flipped_globally == (sum(bits) > n // 2)


def test_schedule_tie_takes_le_branch():
    s = schedule_corrections("0011", 5)  # popcount 2 == floor(5/2)
    assert s.corrected_particles == (1, 2) and not s.sign_flipped_globally


def test_schedule_errors():
    with pytest.raises(ValueError):
        schedule_corrections("01", 4)
    with pytest.raises(ValueError):
        schedule_corrections("0a", 3)


# -- Algorithm 2 --------------------------------------------------------------------------------


def test_step_bits():
    assert step_bits(2) == [0]
    assert step_bits(3) == [1, 2]
    assert step_bits(4) == [3, 4, 5]


def _pre_correction(orbs):
    """Step-2 circuit with the conditioned fixes removed."""
    c = build_full_measurement(orbs)
    return c.with_gates([g for g in c.gates if not g.condition])


def test_n2_outcome_0_antisymmetric_outcome_1_symmetric():
    orbs = OrbitalSet.from_integers([0, 1], 1)
    phi1, phi2 = np.eye(2)
    anti = (np.kron(phi2, phi1) - np.kron(phi1, phi2)) / math.sqrt(2)
    sym = (np.kron(phi2, phi1) + np.kron(phi1, phi2)) / math.sqrt(2)
    c = _pre_correction(orbs)
    recs = {r.outcome: r for r in run_statevector(c)}
    v0, _ = particle_state(recs[(0,)].state, c)
    v1, _ = particle_state(recs[(1,)].state, c)
    assert overlap_up_to_global_phase(v0, anti) >= 1 - 1e-12
    assert overlap_up_to_global_phase(v1, sym) >= 1 - 1e-12


@pytest.mark.parametrize("reuse", [True, False])
@pytest.mark.parametrize("n,eta", [(2, 1), (3, 2), (4, 2)])
def test_measurement_every_branch(n, eta, reuse, rng):
    orbs = OrbitalSet.from_vectors(random_orbitals(rng, n, eta))
    c = build_full_measurement(orbs, reuse_ancillas=reuse)
    target = antisymmetrizer_oracle(orbs)
    recs = run_statevector(c)
    assert len(recs) == 2 ** (n * (n - 1) // 2)
    assert abs(sum(r.probability for r in recs) - 1) <= 1e-9
    for r in recs:
        v, _ = particle_state(r.state, c)
        assert overlap_up_to_global_phase(v, target) >= 1 - 1e-10


def test_measurement_n3_four_step3_outcomes():
    orbs = OrbitalSet.from_integers([0, 1, 2], 2)
    recs = run_statevector(build_full_measurement(orbs))
    pats = {tuple(r.outcome[b] for b in step_bits(3)) for r in recs}
    assert pats == {(0, 0), (0, 1), (1, 0), (1, 1)}


def test_fresh_ancillas_layout():
    orbs = OrbitalSet.from_integers([0, 1, 2, 3], 2)
    assert build_full_measurement(orbs, reuse_ancillas=False).n_ancilla == 6
    assert build_full_measurement(orbs, reuse_ancillas=True).n_ancilla == 3
    assert not any(g.kind is Kind.RESET for g in build_full_measurement(orbs, reuse_ancillas=False).gates)
