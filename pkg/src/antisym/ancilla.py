"""Preparation of the ancilla superpositions Y_n and their unsigned cousins.

``Y_n = (|0...0> - sum_j X_j |0...0>) / sqrt(n + 1)``.  Qubit ``j`` flipped
corresponds to basis index ``2**j``.  Circuits returned here live on a bare
layout ``Circuit(0, 1, n_ancilla=n[, n_work=1])`` and are placed onto host
wires with :func:`antisym.circuit.place`.
"""

from __future__ import annotations

import math

import numpy as np

from .circuit import Circuit
from .gates import Gate, Kind, g_angle, g_matrix


def g_gate(p: float, target: int = 0) -> Gate:
    """``G(p)`` as the rotation Ry(theta) with cos(theta/2) = sqrt(p)."""
    return Gate(Kind.RY, [target], theta=g_angle(p))


def _b_gates(p: float, a: int, b: int) -> list[Gate]:
    return [
        Gate(Kind.CRY, [b], [(a, 1)], theta=g_angle(p)),
        Gate(Kind.CNOT, [a], [(b, 1)]),
    ]


def b_block(p: float) -> Circuit:
    """Controlled-G(p) from qubit 0 onto qubit 1, then a CNOT back from 1 onto 0."""
    g_matrix(p)  # range check
    return Circuit(0, 1, n_ancilla=2, gates=_b_gates(p, 0, 1))


def prepare_Y(n: int, signed: bool = True, clifford_base: bool = False) -> Circuit:
    """Linear-depth preparation of ``Y_n`` (or ``Ỹ_n`` when ``signed`` is false).

    One Ry followed by ``n - 1`` controlled rotations in the W-state chain,
    then Z on every qubit for the signs.  With ``clifford_base`` the ``n = 1``
    case uses H instead of the equivalent Ry(pi/2).
    """
    if n < 1:
        raise ValueError(f"Y_n needs n >= 1, got {n}")
    if n == 1 and clifford_base:
        gates = [Gate(Kind.H, [0])]
    else:
        gates = [g_gate(1 / (n + 1), 0)]
        for j in range(n - 1):
            gates += _b_gates(1 / (n - j), j, j + 1)
    if signed:
        gates += [Gate(Kind.Z, [j]) for j in range(n)]
    return Circuit(0, 1, n_ancilla=n, gates=gates)


def _is_pow2(m: int) -> bool:
    return m > 0 and m & (m - 1) == 0


def prepare_Y_tilde_pow2(n: int) -> Circuit:
    """Rotation-free ``Ỹ_n`` for ``n + 1`` a power of two, using one work qubit.

    Doubling step ``Ỹ_k -> Ỹ_{2k+1}``: the work qubit in |+> moves the k-qubit
    pattern onto k fresh partner qubits and marks an extra qubit; the extra
    qubit is cleared whenever a partner is set, and the work qubit is then
    recomputed from the parity of partners and extra, returning it to |0>.
    """
    if n < 1 or not _is_pow2(n + 1):
        raise ValueError(f"n + 1 must be a power of two, got n={n}")
    w = n
    gates = [Gate(Kind.H, [0])]
    k = 1
    while k < n:
        partners = list(range(k, 2 * k))
        extra = 2 * k
        gates.append(Gate(Kind.H, [w]))
        gates.append(Gate(Kind.CNOT, [extra], [(w, 1)]))
        for j, q in enumerate(partners):
            gates.append(Gate(Kind.CSWAP, [j, q], [(w, 1)]))
        for q in partners:
            gates.append(Gate(Kind.CNOT, [extra], [(q, 1)]))
        gates.append(Gate(Kind.CNOT, [w], [(extra, 1)]))
        for q in partners:
            gates.append(Gate(Kind.CNOT, [w], [(q, 1)]))
        k = 2 * k + 1
    return Circuit(0, 1, n_ancilla=n, n_work=1, gates=gates)


def y_state(n: int, signed: bool = True) -> np.ndarray:
    """Reference amplitudes of ``Y_n`` built directly from the definition."""
    if n < 1:
        raise ValueError(f"Y_n needs n >= 1, got {n}")
    psi = np.zeros(2**n, dtype=complex)
    amp = 1 / math.sqrt(n + 1)
    psi[0] = amp
    for j in range(n):
        psi[1 << j] = -amp if signed else amp
    return psi
