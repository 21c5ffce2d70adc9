"""Reference antisymmetrizer and the pairwise swap-test measurement."""

from __future__ import annotations

import math
from itertools import combinations, permutations
from typing import Sequence

import numpy as np

from .builder import OrbitalSet, _perm_sign
from .circuit import Circuit, LayoutError
from .gates import Gate, Kind
from .sim import StateVector

ORACLE_MAX_N = 7


def product_state(vectors: Sequence[np.ndarray]) -> np.ndarray:
    """``phi_1 (x) ... (x) phi_N`` with particle 1 in the least significant bits."""
    psi = np.ones(1, dtype=complex)
    for v in vectors:
        psi = np.kron(np.asarray(v, dtype=complex), psi)
    return psi


def antisymmetrize(psi: np.ndarray, n: int, eta: int) -> np.ndarray:
    """Signed permutation sum over particle registers, scaled by 1/sqrt(N!)."""
    d = 2**eta
    t = np.asarray(psi, dtype=complex).reshape((d,) * n)
    out = np.zeros_like(t)
    for perm in permutations(range(n)):
        out += _perm_sign(perm) * np.transpose(t, perm)
    return out.reshape(-1) / math.sqrt(math.factorial(n))


def antisymmetrizer_oracle(orbitals: OrbitalSet) -> StateVector:
    """Normalized ``A(phi_1 ... phi_N)`` by explicit permutation sum."""
    n = orbitals.n
    if n > ORACLE_MAX_N:
        raise ValueError(f"oracle limited to N <= {ORACLE_MAX_N} (N! terms)")
    orbitals.check()
    psi = antisymmetrize(product_state(orbitals.vectors), n, orbitals.eta)
    return StateVector(n * orbitals.eta, psi / np.linalg.norm(psi))


def swap_particles(psi: np.ndarray, n: int, eta: int, i: int, j: int) -> np.ndarray:
    """Exchange particle registers ``i`` and ``j`` (1-based)."""
    d = 2**eta
    t = np.asarray(psi).reshape((d,) * n)
    # particle k sits on tensor axis n - k
    return np.swapaxes(t, n - i, n - j).reshape(-1)


def overlap_up_to_global_phase(a: StateVector | np.ndarray, b: StateVector | np.ndarray) -> float:
    va = a.amplitudes if isinstance(a, StateVector) else np.asarray(a, dtype=complex).reshape(-1)
    vb = b.amplitudes if isinstance(b, StateVector) else np.asarray(b, dtype=complex).reshape(-1)
    if va.shape != vb.shape:
        raise ValueError(f"dimension mismatch {va.shape} vs {vb.shape}")
    return float(min(1.0, abs(np.vdot(va, vb))))


def particle_state(state: StateVector, c: Circuit) -> tuple[np.ndarray, float]:
    """Particle-register amplitudes and the probability that the ancillas read all zero.

    The first value conditions on the most likely ancilla pattern, which is the
    right projection whenever the ancillas are left in a basis state (as after
    measurement or exact uncomputation).
    """
    npq = c.n_particles * c.eta
    extra = c.n_qubits - npq
    m = state.amplitudes.reshape(2**extra, 2**npq)
    weights = np.sum(np.abs(m) ** 2, axis=1)
    k = int(np.argmax(weights))
    v = m[k] / math.sqrt(weights[k])
    return v, float(weights[0])


# -- pairwise swap tests -------------------------------------------------------------


def pair_order(n: int) -> list[tuple[int, int]]:
    return list(combinations(range(1, n + 1), 2))


def antisym_probability_circuit(n: int, eta: int, sequential: bool = False) -> Circuit:
    """Swap test on every particle pair; antisymmetric input reads all ones.

    Pair ``k`` of :func:`pair_order` writes classical bit ``k``.  The default
    uses one test ancilla per pair.  With ``sequential`` a single ancilla is
    measured and reset between tests.
    """
    if n < 2:
        raise LayoutError("the antisymmetry test needs at least two particles")
    pairs = pair_order(n)
    n_anc = 1 if sequential else len(pairs)
    c = Circuit(n, eta, n_ancilla=n_anc, n_cbits=len(pairs))
    gates = []
    for k, (i, j) in enumerate(pairs):
        a = c.ancilla(0 if sequential else k)
        if sequential and k:
            gates.append(Gate(Kind.RESET, [a]))
        gates.append(Gate(Kind.H, [a]))
        for qi, qj in zip(c.particle(i), c.particle(j)):
            gates.append(Gate(Kind.CSWAP, [qi, qj], [(a, 1)]))
        gates.append(Gate(Kind.H, [a]))
        gates.append(Gate(Kind.MEASURE, [a], cbit=k))
    return c.with_gates(gates)


def antisymmetry_probability(psi: StateVector | np.ndarray, n: int, eta: int) -> float:
    """Probability that every pairwise swap test reads 1 (exact, by enumeration)."""
    from .sim import run_statevector

    v = psi.amplitudes if isinstance(psi, StateVector) else np.asarray(psi, dtype=complex)
    c = antisym_probability_circuit(n, eta, sequential=True)
    init = np.kron(np.array([1, 0], dtype=complex), v)
    recs = run_statevector(c, initial=StateVector(c.n_qubits, init))
    return sum(r.probability for r in recs if all(r.outcome))


def pair_probabilities(psi: StateVector | np.ndarray, n: int, eta: int) -> dict[tuple[int, int], float]:
    """Probability of reading 1 on each pair's swap test run in isolation.

    Closed form ``(1 - Re<psi|SWAP_ij|psi>) / 2``.
    """
    v = psi.amplitudes if isinstance(psi, StateVector) else np.asarray(psi, dtype=complex)
    return {
        (i, j): float((1 - np.vdot(v, swap_particles(v, n, eta, i, j)).real) / 2)
        for i, j in pair_order(n)
    }
