"""Recursive antisymmetrization circuits.

Two variants are built step by step, from ``A(phi_1)`` up to ``A(phi_1...phi_N)``:

* the deterministic recursion, whose ancillas are uncomputed coherently
  (``build_recursive_step`` / ``build_full_recursive``);
* the measurement-based recursion, which measures the ancillas in the X basis
  and fixes the resulting relative signs with classically conditioned
  ``P(U)`` blocks (``build_measurement_step`` / ``build_full_measurement``).

Orbital preparations ``U_n`` act on a single particle register
(``Circuit(1, eta)``).  With ``opaque=True`` each ``U_n`` / ``U_n^dag`` is
emitted as one labelled dense-unitary gate, which keeps structural counts
readable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from typing import Sequence

import numpy as np

from .ancilla import prepare_Y
from .circuit import Circuit, LayoutError, inverse, place, unitary_of
from .gates import Gate, Kind

ORTHO_TOL = 1e-10


class OrthogonalityError(ValueError):
    pass


# -- orbitals --------------------------------------------------------------------


def basis_orbital(r: int, eta: int) -> Circuit:
    """X gates writing the integer ``r`` into an ``eta``-qubit register."""
    if eta < 1 or not 0 <= r < 2**eta:
        raise ValueError(f"integer {r} does not fit in {eta} qubits")
    return Circuit(1, eta, gates=[Gate(Kind.X, [k]) for k in range(eta) if r >> k & 1])


def _multiplexor(kind: Kind, target: int, controls: Sequence[int], angles) -> list[Gate]:
    """Uniformly controlled rotation via the Gray-code CNOT pattern.

    ``angles[s]`` applies when control ``controls[j]`` holds bit ``j`` of ``s``.
    """
    angles = np.asarray(angles, dtype=float)
    if np.allclose(angles, 0, atol=1e-14):
        return []
    k = len(controls)
    if k == 0:
        return [Gate(kind, [target], theta=float(angles[0]))]
    m = 1 << k
    gray = [i ^ (i >> 1) for i in range(m)]
    s = np.arange(m)
    theta = [
        float(np.sum(angles * np.array([(-1) ** bin(g & x).count("1") for x in s]))) / m
        for g in gray
    ]
    out = []
    for i in range(m):
        if abs(theta[i]) > 1e-14:
            out.append(Gate(kind, [target], theta=theta[i]))
        changed = gray[i] ^ gray[(i + 1) % m]
        out.append(Gate(Kind.CNOT, [target], [(controls[changed.bit_length() - 1], 1)]))
    return out


def dense_orbital(amplitudes) -> Circuit:
    """Multiplexed Ry/Rz tree that prepares ``amplitudes`` (up to global phase)."""
    a = np.asarray(amplitudes, dtype=complex).reshape(-1)
    eta = int(round(math.log2(a.size))) if a.size else 0
    if a.size < 2 or 2**eta != a.size:
        raise ValueError("amplitude vector length must be a power of two >= 2")
    if abs(np.linalg.norm(a) - 1) > 1e-10:
        raise ValueError(f"amplitude vector has norm {np.linalg.norm(a):.12g}, expected 1")
    gates: list[Gate] = []
    mag = np.abs(a)
    # magnitudes, most significant qubit first
    for h in range(eta - 1, -1, -1):
        blocks = mag.reshape(-1, 2, 1 << h)  # (prefix above h, bit h, rest)
        n0 = np.linalg.norm(blocks[:, 0, :], axis=1)
        n1 = np.linalg.norm(blocks[:, 1, :], axis=1)
        gates += _multiplexor(Kind.RY, h, list(range(h + 1, eta)), 2 * np.arctan2(n1, n0))
    # phases, least significant qubit first
    phi = np.where(mag > 1e-15, np.angle(a), 0.0)
    for h in range(eta):
        pairs = phi.reshape(-1, 2)
        gates += _multiplexor(Kind.RZ, h, list(range(h + 1, eta)), pairs[:, 1] - pairs[:, 0])
        phi = pairs.mean(axis=1)
    return Circuit(1, eta, gates=gates)


def _orbital_vector(u: Circuit) -> np.ndarray:
    from .sim import final_state

    return final_state(u).amplitudes


def orbital_cost(u: Circuit) -> tuple[int, int]:
    """Sort key for preparation cost: (rotations and multi-qubit gates, total gates)."""
    heavy = sum(1 for g in u.gates if g.kind not in (Kind.X, Kind.Z, Kind.H, Kind.S, Kind.SDG))
    return heavy, len(u.gates)


@dataclass(frozen=True)
class OrbitalSet:
    """``N`` orthonormal single-particle states with their preparation circuits."""

    eta: int
    circuits: tuple[Circuit, ...]
    vectors: tuple[np.ndarray, ...] = field(default=(), compare=False)

    def __post_init__(self):
        circuits = tuple(self.circuits)
        for u in circuits:
            if u.layout != (1, self.eta, 0, 0, 0):
                raise LayoutError("orbital circuits must act on one bare particle register")
        vectors = tuple(self.vectors) or tuple(_orbital_vector(u) for u in circuits)
        object.__setattr__(self, "circuits", circuits)
        object.__setattr__(self, "vectors", tuple(np.asarray(v, dtype=complex) for v in vectors))
        self.check()

    @classmethod
    def from_integers(cls, integers: Sequence[int], eta: int) -> "OrbitalSet":
        vecs = []
        for r in integers:
            v = np.zeros(2**eta, dtype=complex)
            v[r] = 1
            vecs.append(v)
        return cls(eta, tuple(basis_orbital(r, eta) for r in integers), tuple(vecs))

    @classmethod
    def from_vectors(cls, vectors) -> "OrbitalSet":
        vecs = [np.asarray(v, dtype=complex) for v in vectors]
        if not vecs:
            raise ValueError("need at least one orbital")
        eta = int(round(math.log2(vecs[0].size)))
        return cls(eta, tuple(dense_orbital(v) for v in vecs))

    @property
    def n(self) -> int:
        return len(self.circuits)

    def check(self, tol: float = ORTHO_TOL) -> None:
        for i, v in enumerate(self.vectors):
            if v.size != 2**self.eta:
                raise ValueError(f"orbital {i + 1} has {v.size} amplitudes, expected {2**self.eta}")
            if abs(np.linalg.norm(v) - 1) > tol:
                raise OrthogonalityError(f"orbital {i + 1} is not normalized")
        for i in range(self.n):
            for j in range(i):
                ov = abs(np.vdot(self.vectors[j], self.vectors[i]))
                if ov > tol:
                    raise OrthogonalityError(
                        f"orbitals {j + 1} and {i + 1} overlap by {ov:.3e} (must be orthogonal)"
                    )

    def sorted_by_cost(self) -> tuple["OrbitalSet", int]:
        """Most expensive orbital first; returns the set and the permutation sign.

        The first orbital is prepared once while the last is applied ``2N - 1``
        times, so costly orbitals belong at the front.  The reordered
        antisymmetric state equals the original times the returned sign.
        """
        order = sorted(range(self.n), key=lambda i: orbital_cost(self.circuits[i]), reverse=True)
        sign = _perm_sign(order)
        return (
            OrbitalSet(self.eta, tuple(self.circuits[i] for i in order), tuple(self.vectors[i] for i in order)),
            sign,
        )


def _perm_sign(perm: Sequence[int]) -> int:
    perm = list(perm)
    sign = 1
    for i in range(len(perm)):
        while perm[i] != i:
            j = perm[i]
            perm[i], perm[j] = perm[j], perm[i]
            sign = -sign
    return sign


# -- gate helpers -------------------------------------------------------------------


def _mcx(controls, target: int) -> Gate:
    kind = {1: Kind.CNOT, 2: Kind.TOFFOLI}.get(len(controls), Kind.MCX)
    return Gate(kind, [target], controls)


def _mcz(controls, target: int) -> Gate:
    if not controls:
        return Gate(Kind.Z, [target])
    kind = {1: Kind.CZ, 2: Kind.CCZ}.get(len(controls), Kind.MCZ)
    return Gate(kind, [target], controls)


def _opaque(u: Circuit, label: str) -> Circuit:
    return u.with_gates([Gate(Kind.UNITARY, list(range(u.eta)), matrix=unitary_of(u), label=label)])


def _u_gates(host: Circuit, u: Circuit, particle: int, dagger: bool = False) -> list[Gate]:
    v = inverse(u) if dagger else u
    return place(v, host, host.particle(particle))


def _prepare(u: Circuit, n: int, opaque: bool) -> Circuit:
    return _opaque(u, f"U{n}") if opaque else u


def phase_correction(u: Circuit, opaque: bool = False, label: str = "U") -> Circuit:
    """``P(U) = U (1 - 2|0..0><0..0|) U^dag`` on one particle register.

    Realized as U^dag, X on qubit 0, Z on qubit 0 controlled on the other
    qubits being |0>, X on qubit 0, then U.
    """
    if u.n_particles != 1:
        raise LayoutError("phase_correction() expects a one-particle circuit")
    u = _opaque(u, label) if opaque else u
    eta = u.eta
    core = [
        Gate(Kind.X, [0]),
        _mcz([(k, 0) for k in range(1, eta)], 0),
        Gate(Kind.X, [0]),
    ]
    return u.with_gates(inverse(u).gates + tuple(core) + u.gates)


# -- correction schedule ------------------------------------------------------------


@dataclass(frozen=True)
class CorrectionSchedule:
    outcome: tuple[int, ...]
    corrected_particles: tuple[int, ...]
    sign_flipped_globally: bool


def _parse_outcome(outcome) -> tuple[int, ...]:
    if isinstance(outcome, str):
        s = outcome.strip().strip("|>⟩")
        if set(s) - {"0", "1"}:
            raise ValueError(f"outcome {outcome!r} is not a bit string")
        return tuple(int(ch) for ch in reversed(s))
    return tuple(int(b) for b in outcome)


def schedule_corrections(outcome, n: int) -> CorrectionSchedule:
    """Particles that need ``P(U_n)`` after the ancillas of step ``n`` read ``outcome``.

    ``outcome`` is either a sequence ``(c_1, ..., c_{n-1})`` or a ket string
    such as ``"101"`` whose rightmost character is ``c_1``.
    """
    bits = _parse_outcome(outcome)
    if len(bits) != n - 1 or any(b not in (0, 1) for b in bits):
        raise ValueError(f"step {n} needs {n - 1} outcome bits, got {bits}")
    if sum(bits) <= n // 2:
        fix = tuple(i + 1 for i, b in enumerate(bits) if b)
        return CorrectionSchedule(bits, fix, False)
    fix = tuple(i + 1 for i, b in enumerate(bits) if not b) + (n,)
    return CorrectionSchedule(bits, fix, True)


# -- Algorithm 1 --------------------------------------------------------------------


def _cswaps(host: Circuit, n: int, anc: Sequence[int]) -> list[Gate]:
    last = host.particle(n)
    out = []
    for i in range(1, n):
        for q_i, q_n in zip(host.particle(i), last):
            out.append(Gate(Kind.CSWAP, [q_i, q_n], [(anc[i - 1], 1)]))
    return out


def _start(prev: Circuit, u: Circuit, n_ancilla: int, n_cbits: int | None = None) -> Circuit:
    n = prev.n_particles + 1
    if u.layout != (1, prev.eta, 0, 0, 0):
        raise LayoutError("U_N must act on one bare particle register of the same width")
    return prev.resized(
        n_particles=n,
        n_ancilla=max(prev.n_ancilla, n_ancilla),
        n_cbits=prev.n_cbits if n_cbits is None else max(prev.n_cbits, n_cbits),
    )


def build_recursive_step(prev: Circuit, u_n: Circuit, opaque: bool = False) -> Circuit:
    """Extend a circuit preparing ``A(phi_1..phi_{N-1})`` to ``A(phi_1..phi_N)``."""
    n = prev.n_particles + 1
    host = _start(prev, u_n, n - 1)
    u = _prepare(u_n, n, opaque)
    anc = [host.ancilla(j) for j in range(n - 1)]
    gates = _u_gates(host, u, n)
    gates += place(prepare_Y(n - 1, clifford_base=True), host, anc)
    gates += _cswaps(host, n, anc)
    for i in range(1, n):
        wires = host.particle(i)
        gates += _u_gates(host, u, i, dagger=True)
        gates.append(_mcx([(w, 0) for w in wires], anc[i - 1]))
        gates += _u_gates(host, u, i)
    return host.append(gates)


def _first(orbitals: "OrbitalSet", opaque: bool) -> Circuit:
    u1 = _prepare(orbitals.circuits[0], 1, opaque)
    return Circuit(1, orbitals.eta, gates=u1.gates)


def build_full_recursive(orbitals: OrbitalSet, opaque: bool = False) -> Circuit:
    """Deterministic antisymmetrization of every orbital in ``orbitals``."""
    c = _first(orbitals, opaque)
    for n in range(2, orbitals.n + 1):
        c = build_recursive_step(c, orbitals.circuits[n - 1], opaque)
    return c


# -- Algorithm 2 --------------------------------------------------------------------


def step_bits(n: int) -> list[int]:
    """Classical bits written by step ``n`` (one per ancilla measurement)."""
    start = (n - 1) * (n - 2) // 2
    return list(range(start, start + n - 1))


def build_measurement_step(
    prev: Circuit,
    u_n: Circuit,
    reuse_ancillas: bool = True,
    opaque: bool = False,
) -> Circuit:
    """Measurement-based step: X-basis ancilla readout plus conditioned ``P(U_N)``.

    With ``reuse_ancillas`` the ancillas measured in the previous step are
    reset and reused; otherwise each step takes fresh ancilla wires.
    """
    n = prev.n_particles + 1
    bits = step_bits(n)
    first_anc = 0 if reuse_ancillas else (n - 1) * (n - 2) // 2
    host = _start(prev, u_n, first_anc + n - 1, bits[-1] + 1)
    u = _prepare(u_n, n, opaque)
    anc = [host.ancilla(first_anc + j) for j in range(n - 1)]
    gates: list[Gate] = []
    gates += _u_gates(host, u, n)
    if reuse_ancillas:
        gates += [Gate(Kind.RESET, [a]) for a in anc[: n - 2]]
    gates += place(prepare_Y(n - 1, clifford_base=True), host, anc)
    gates += _cswaps(host, n, anc)
    for a, b in zip(anc, bits):
        gates.append(Gate(Kind.H, [a]))
        gates.append(Gate(Kind.MEASURE, [a], cbit=b))
    fix = phase_correction(u_n, opaque=opaque, label=f"U{n}")
    for outcome in product((0, 1), repeat=n - 1):
        sched = schedule_corrections(outcome, n)
        cond = list(zip(bits, outcome))
        for p in sched.corrected_particles:
            gates += [g.replace(condition=cond) for g in place(fix, host, host.particle(p))]
    return host.append(gates)


def build_full_measurement(
    orbitals: OrbitalSet, reuse_ancillas: bool = True, opaque: bool = False
) -> Circuit:
    c = _first(orbitals, opaque)
    for n in range(2, orbitals.n + 1):
        c = build_measurement_step(c, orbitals.circuits[n - 1], reuse_ancillas, opaque)
    return c
