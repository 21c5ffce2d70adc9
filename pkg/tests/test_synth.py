import math
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from antisym.builder import OrbitalSet, build_full_measurement
from antisym.experiments import synthesized
from antisym.gates import ry_matrix, rz_matrix
from antisym.lowering import lower_circuit
from antisym.sim import run_statevector
from antisym.synth import (
    RS_REFERENCE,
    ANCILLA_ANGLE,
    SynthesisCache,
    SynthesisError,
    cliffords,
    operator_norm_distance,
    simplify_word,
    synthesize_ry,
    synthesize_rz,
    rs_reference,
    word_matrix,
)

ANGLE = 2 * math.acos(math.sqrt(1 / 3))


def _random_unitary(rng):
    z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def test_exact_angles():
    r = synthesize_rz(math.pi / 4, 0.01)
    assert r.word == ("T",) and r.error < 1e-12
    r = synthesize_rz(math.pi / 2, 0.01)
    assert r.word == ("S",) and r.error < 1e-12
    assert synthesize_rz(0.0, 0.1).word == ()


def test_ry_zero_is_empty():
    assert synthesize_ry(0.0, 0.1).word == ()


def test_reference_angle():
    assert abs(ANCILLA_ANGLE - ANGLE) < 1e-15
    assert rs_reference(0.1) == (0.1, 8, 28)
    assert rs_reference(0.2) is None
    assert len(RS_REFERENCE) == 7


def test_ry_at_reference_point():
    t0 = time.perf_counter()
    r = synthesize_ry(ANGLE, 0.1)
    assert time.perf_counter() - t0 < 60
    assert r.error <= 0.1
    assert abs(operator_norm_distance(ry_matrix(ANGLE), r.matrix()) - r.error) < 1e-12
    # frozen search result; the reference word has 8 T / 28 gates
    assert (r.t_count, r.total_count) == (7, 20)


def test_ry_error_equals_rz_error():
    rz = synthesize_rz(ANGLE, 0.1)
    ry = synthesize_ry(ANGLE, 0.1)
    assert abs(rz.error - ry.error) < 1e-12


@pytest.mark.parametrize("eps,t", [(9e-3, 21), (5e-3, 26)])
def test_tighter_targets(eps, t):
    r = synthesize_ry(ANGLE, eps, floor=eps)
    assert r.error <= eps and r.t_count == t


def test_floor_and_budget():
    with pytest.raises(ValueError):
        synthesize_rz(0.3, 1e-4)
    with pytest.raises(ValueError):
        synthesize_rz(0.3, 0.0)
    with pytest.raises(SynthesisError) as e:
        synthesize_rz(0.3, 1e-3, floor=1e-3, max_t=3)
    assert e.value.best_error > 1e-3


def test_determinism():
    a = synthesize_rz(1.234, 0.05, cache=SynthesisCache())
    b = synthesize_rz(1.234, 0.05, cache=SynthesisCache())
    assert a == b


def test_word_counts_match():
    r = synthesize_rz(0.777, 0.02)
    assert r.t_count == sum(g in ("T", "TDG") for g in r.word)
    assert r.total_count == len(r.word)
    assert set(r.word) <= {"H", "T", "TDG", "S", "SDG", "X", "Z"}


def test_cache_file(tmp_path):
    path = tmp_path / "cache.txt"
    first = synthesize_rz(0.4321, 0.05, cache=SynthesisCache(path))
    assert path.read_text().startswith("z ")
    again = SynthesisCache(path).get("z", 0.4321, 0.05)
    assert again == first


def test_distance_examples():
    i2, x = np.eye(2), np.array([[0, 1], [1, 0]])
    assert operator_norm_distance(i2, i2) < 1e-15
    assert abs(operator_norm_distance(i2, x) - math.sqrt(2)) < 1e-12
    assert operator_norm_distance(rz_matrix(0.3), np.exp(0.7j) * rz_matrix(0.3)) < 1e-12


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_distance_metric_properties(seed):
    rng = np.random.default_rng(seed)
    a, b, c = (_random_unitary(rng) for _ in range(3))
    dab, dba = operator_norm_distance(a, b), operator_norm_distance(b, a)
    assert abs(dab - dba) < 1e-12
    assert dab <= operator_norm_distance(a, c) + operator_norm_distance(c, b) + 1e-12
    # brute-force phase minimization agrees
    phis = np.linspace(0, 2 * np.pi, 4001)
    brute = min(np.linalg.norm(a - np.exp(1j * p) * b, 2) for p in phis)
    assert dab <= brute + 1e-12 and brute - dab < 5e-3


def test_distance_rejects_nonunitary():
    with pytest.raises(ValueError):
        operator_norm_distance(np.eye(2), np.array([[1, 1], [0, 1]]))


def test_clifford_group():
    assert len(cliffords()) == 24


def test_simplify_preserves_matrix():
    w = ("H", "H", "S", "SDG", "T", "T", "X", "X", "Z")
    s = simplify_word(w)
    assert len(s) < len(w)
    assert operator_norm_distance(word_matrix(w), word_matrix(s)) < 1e-12


def test_substitution_infidelity_bound():
    orbs = OrbitalSet.from_integers([0, 1, 2], 3)
    exact = lower_circuit(build_full_measurement(orbs)).circuit
    approx, err = synthesized(exact, 0.1)
    assert err <= 0.1
    ref = {r.outcome: r for r in run_statevector(exact)}
    for r in run_statevector(approx):
        if r.outcome not in ref:
            continue
        ov = abs(np.vdot(ref[r.outcome].state.amplitudes, r.state.amplitudes)) ** 2
        assert 1 - ov <= 4 * 0.1**2
