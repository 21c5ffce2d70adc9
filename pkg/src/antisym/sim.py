"""State-vector and density-matrix simulation.

Both simulators follow the wire convention of :mod:`antisym.circuit`
(qubit 0 is the least significant bit).  Classical bits start at 0.
Mid-circuit measurements are handled by explicit branch enumeration; the
density simulator merges branches as soon as the bits that distinguish them
are no longer read.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from . import _kernel
from .circuit import Circuit, LayoutError, apply_gate
from .gates import T_LIKE, Gate, Kind, support_matrix, target_matrix

STATEVECTOR_CAP = 24
DENSITY_CAP = 12
_PRUNE = 1e-14


class SimulationError(RuntimeError):
    pass


@dataclass(frozen=True)
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if a.size != 2**self.n_qubits:
            raise ValueError(f"{a.size} amplitudes for {self.n_qubits} qubits")
        object.__setattr__(self, "amplitudes", a)

    @classmethod
    def zero(cls, n: int) -> "StateVector":
        a = np.zeros(2**n, dtype=complex)
        a[0] = 1
        return cls(n, a)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probability(self, wire: int, value: int) -> float:
        t = self.amplitudes.reshape((2,) * self.n_qubits)
        idx = [slice(None)] * self.n_qubits
        idx[self.n_qubits - 1 - wire] = value
        return float(np.sum(np.abs(t[tuple(idx)]) ** 2))

    def reduced(self, wires: Iterable[int]) -> "DensityMatrix":
        """Reduced density matrix on ``wires`` (kept in ascending wire order)."""
        return DensityMatrix.from_state(self).reduced(wires)


@dataclass(frozen=True)
class BranchRecord:
    outcome: tuple[int, ...]
    probability: float
    state: StateVector


def _satisfied(g: Gate, bits) -> bool:
    return all(bits[b] == v for b, v in g.condition)


def run_statevector(
    c: Circuit,
    mode: str = "enumerate",
    seed: int | None = None,
    initial: StateVector | None = None,
    max_qubits: int = STATEVECTOR_CAP,
) -> list[BranchRecord]:
    """Simulate ``c`` gate by gate.

    ``mode="enumerate"`` follows every measurement outcome with non-zero
    probability and returns one record per branch; ``mode="sample"`` draws a
    single trajectory from ``seed`` and returns it as the only record (its
    ``probability`` is the probability of the sampled path).
    """
    n = c.n_qubits
    if n > max_qubits:
        raise LayoutError(f"{n} qubits exceeds the state-vector cap of {max_qubits}")
    if mode not in ("enumerate", "sample"):
        raise ValueError(f"unknown mode {mode!r}")
    rng = np.random.default_rng(seed)
    psi = (initial or StateVector.zero(n)).amplitudes
    if psi.size != 2**n:
        raise ValueError("initial state does not match the circuit width")
    branches = [([0] * c.n_cbits, 1.0, psi.copy().reshape((2,) * n))]
    for g in c.gates:
        nxt = []
        for bits, prob, t in branches:
            if not _satisfied(g, bits):
                nxt.append((bits, prob, t))
                continue
            if g.kind in (Kind.MEASURE, Kind.RESET):
                ax = n - 1 - g.targets[0]
                outs = []
                for v in (0, 1):
                    idx = [slice(None)] * n
                    idx[ax] = v
                    p = float(np.sum(np.abs(t[tuple(idx)]) ** 2))
                    outs.append(p)
                if mode == "sample":
                    choices = [int(rng.random() >= outs[0] / (outs[0] + outs[1]))]
                else:
                    choices = [v for v in (0, 1) if outs[v] > _PRUNE]
                for v in choices:
                    u = t if len(choices) == 1 else t.copy()
                    _kernel.project(u, ax, v)
                    u /= math.sqrt(outs[v])
                    b = list(bits)
                    if g.kind is Kind.MEASURE:
                        b[g.cbit] = v
                    elif v == 1:
                        _kernel.apply_matrix(u, target_matrix(Gate(Kind.X, [0])), [ax])
                    nxt.append((b, prob * outs[v], u))
            else:
                apply_gate(t, g, n)
                nxt.append((bits, prob, t))
        branches = nxt
    return [BranchRecord(tuple(b), p, StateVector(n, t.reshape(-1))) for b, p, t in branches]


def final_state(c: Circuit, initial: StateVector | None = None) -> StateVector:
    """Output state of a circuit that has no measurements."""
    recs = run_statevector(c, initial=initial)
    if len(recs) != 1 or any(g.kind is Kind.MEASURE for g in c.gates):
        raise SimulationError("final_state() needs a measurement-free circuit")
    return recs[0].state


def sample_counts(c: Circuit, shots: int, seed: int | None = None) -> dict[tuple[int, ...], int]:
    """Histogram of classical outcomes over independent sampled trajectories."""
    rng = np.random.default_rng(seed)
    out: dict[tuple[int, ...], int] = {}
    for _ in range(shots):
        rec = run_statevector(c, "sample", seed=int(rng.integers(2**63)))[0]
        out[rec.outcome] = out.get(rec.outcome, 0) + 1
    return out


# ----------------------------------------------------------------------------
# density matrices


@dataclass(frozen=True)
class DensityMatrix:
    n_qubits: int
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        d = 2**self.n_qubits
        if m.shape != (d, d):
            raise ValueError(f"matrix shape {m.shape} does not match {self.n_qubits} qubits")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_state(cls, psi: StateVector | np.ndarray) -> "DensityMatrix":
        a = psi.amplitudes if isinstance(psi, StateVector) else np.asarray(psi, dtype=complex)
        n = int(round(math.log2(a.size)))
        return cls(n, np.outer(a, a.conj()))

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def check(self, tol: float = 1e-10, eig_tol: float = 1e-9) -> None:
        m = self.matrix
        if np.abs(m - m.conj().T).max() > tol:
            raise SimulationError("density matrix is not Hermitian")
        if abs(self.trace - 1) > tol:
            raise SimulationError(f"density matrix trace {self.trace} != 1")
        w = np.linalg.eigvalsh(m)
        if w.min() < -eig_tol:
            raise SimulationError(f"density matrix has eigenvalue {w.min():.3e}")

    def reduced(self, wires: Iterable[int]) -> "DensityMatrix":
        """Partial trace keeping ``wires``; the lowest kept wire becomes qubit 0."""
        keep = sorted(set(wires))
        n = self.n_qubits
        if any(not 0 <= w < n for w in keep):
            raise LayoutError("wire outside density matrix")
        br = _Branch([], list(range(n - 1, -1, -1)), self.matrix.reshape((2,) * (2 * n)).copy())
        return DensityMatrix(len(keep), br.to_matrix(keep))

    def probability(self, wire: int, value: int) -> float:
        n = self.n_qubits
        idx = np.arange(2**n)
        sel = ((idx >> wire) & 1) == value
        return float(np.real(np.diag(self.matrix)[sel].sum()))


def _sqrt_psd(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    w = np.clip(w, 0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def fidelity(rho: DensityMatrix | np.ndarray, sigma: DensityMatrix | np.ndarray) -> float:
    """Uhlmann fidelity (tr sqrt(sqrt(sigma) rho sqrt(sigma)))**2.

    Evaluated as the squared nuclear norm of sqrt(rho) sqrt(sigma), which is
    symmetric in its arguments.
    """
    r = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    s = sigma.matrix if isinstance(sigma, DensityMatrix) else np.asarray(sigma)
    if r.shape != s.shape:
        raise ValueError(f"dimension mismatch {r.shape} vs {s.shape}")
    sv = np.linalg.svd(_sqrt_psd(r) @ _sqrt_psd(s), compute_uv=False)
    return float(min(1.0, max(0.0, np.sum(sv) ** 2)))


@dataclass(frozen=True)
class NoiseModel:
    """Per-class depolarizing noise.

    ``T``/``T^dag`` gates use ``t_infidelity``; every other gate uses
    ``clifford_infidelity``.  A gate on ``k`` wires is followed by a
    ``k``-qubit depolarizing channel of parameter ``r * 2**k / (2**k - 1)``,
    i.e. ``2r`` for one qubit and ``4r/3`` for two.
    """

    clifford_infidelity: float = 0.0
    t_infidelity: float = 0.0

    def __post_init__(self):
        for name in ("clifford_infidelity", "t_infidelity"):
            v = getattr(self, name)
            if not 0 <= v <= 0.25:
                raise ValueError(f"{name}={v} outside [0, 0.25]")

    @property
    def one_qubit_clifford(self) -> float:
        return 2 * self.clifford_infidelity

    @property
    def two_qubit_clifford(self) -> float:
        return 4 / 3 * self.clifford_infidelity

    @property
    def one_qubit_t(self) -> float:
        return 2 * self.t_infidelity

    def parameter(self, g: Gate) -> float:
        r = self.t_infidelity if g.kind in T_LIKE else self.clifford_infidelity
        d = 2 ** len(g.wires)
        return min(1.0, r * d / (d - 1))

    @property
    def is_noiseless(self) -> bool:
        return self.clifford_infidelity == 0 and self.t_infidelity == 0


def _depolarize(t: np.ndarray, row_axes, col_axes, p: float) -> None:
    """In place: t <- (1-p) t + p * Tr_S(t) (x) I/2^k on the support S."""
    if p == 0:
        return
    if not 0 <= p <= 1:
        raise ValueError(f"depolarizing parameter {p} outside [0, 1]")
    k = len(row_axes)
    slices = []
    for s in range(2**k):
        idx = [slice(None)] * t.ndim
        for j in range(k):
            bit = (s >> j) & 1
            idx[row_axes[j]] = bit
            idx[col_axes[j]] = bit
        slices.append(tuple(idx))
    red = sum(t[ix] for ix in slices)
    t *= 1 - p
    red *= p / 2**k
    for ix in slices:
        t[ix] += red


def apply_depolarizing(state: DensityMatrix, qubits: Iterable[int], p: float) -> DensityMatrix:
    """Depolarizing channel of parameter ``p`` on ``qubits``."""
    if not 0 <= p <= 1:
        raise ValueError(f"depolarizing parameter {p} outside [0, 1]")
    n = state.n_qubits
    qs = list(qubits)
    if any(not 0 <= q < n for q in qs):
        raise LayoutError("qubit outside density matrix")
    t = state.matrix.copy().reshape((2,) * (2 * n))
    _depolarize(t, [n - 1 - q for q in qs], [2 * n - 1 - q for q in qs], p)
    return DensityMatrix(n, t.reshape(2**n, 2**n))


# -- branch-enumerating density simulation ------------------------------------


class _Branch:
    """Unnormalised density tensor over the currently active wires."""

    __slots__ = ("bits", "active", "t")

    def __init__(self, bits, active, t):
        self.bits = bits
        self.active = active
        self.t = t

    @property
    def m(self):
        return len(self.active)

    def copy(self):
        return _Branch(list(self.bits), list(self.active), self.t.copy())

    def activate(self, w):
        if w in self.active:
            return
        m = self.m
        zero = np.zeros((2, 2), dtype=complex)
        zero[0, 0] = 1
        t = np.multiply.outer(self.t, zero)
        self.t = np.ascontiguousarray(np.moveaxis(t, 2 * m, m))
        self.active.append(w)

    def discard(self, w):
        pos = self.active.index(w)
        self.t = np.trace(self.t, axis1=pos, axis2=self.m + pos)
        self.active.pop(pos)

    def rows(self, wires):
        return [self.active.index(w) for w in wires]

    def cols(self, wires):
        m = self.m
        return [m + self.active.index(w) for w in wires]

    def trace(self) -> float:
        m = self.m
        return float(np.real(np.einsum(self.t.reshape(2**m, 2**m), [0, 0], [])))

    def apply(self, wires, superop: np.ndarray):
        """Apply a superoperator on ``wires`` (see :func:`superoperator`)."""
        m = self.m
        pos = [self.active.index(w) for w in wires]
        bits = [2 * m - 1 - q for q in pos] + [m - 1 - q for q in pos]
        _kernel.apply_sparse(self.t, bits, superop)

    def block(self, w, v, keep_wire: bool):
        """Project ``w`` onto ``|v>``; drop the wire unless ``keep_wire``."""
        r, c = self.rows([w])[0], self.cols([w])[0]
        if keep_wire:
            t = self.t.copy()
            _kernel.project(t, r, v)
            _kernel.project(t, c, v)
            return _Branch(list(self.bits), list(self.active), t)
        idx = [slice(None)] * self.t.ndim
        idx[r] = v
        idx[c] = v
        active = [x for x in self.active if x != w]
        return _Branch(list(self.bits), active, self.t[tuple(idx)].copy())

    def reset(self, w):
        r, c = self.rows([w])[0], self.cols([w])[0]

        def ix(a, b):
            idx = [slice(None)] * self.t.ndim
            idx[r] = a
            idx[c] = b
            return tuple(idx)

        self.t[ix(0, 0)] += self.t[ix(1, 1)]
        self.t[ix(1, 1)] = 0
        self.t[ix(0, 1)] = 0
        self.t[ix(1, 0)] = 0

    def to_matrix(self, wires) -> np.ndarray:
        for w in wires:
            self.activate(w)
        for w in [x for x in self.active if x not in wires]:
            self.discard(w)
        m = self.m
        # axis order -> descending wire order so that C-order flattening puts wire 0 last
        order = sorted(range(m), key=lambda i: -self.active[i])
        perm = order + [m + i for i in order]
        return np.transpose(self.t, perm).reshape(2**m, 2**m)


@dataclass(frozen=True)
class DensityBranch:
    outcome: tuple[int, ...]
    probability: float
    state: DensityMatrix


def run_density_branches(
    c: Circuit,
    noise: NoiseModel | None = None,
    initial: DensityMatrix | StateVector | None = None,
    keep_wires: Iterable[int] | None = None,
    keep_bits: Iterable[int] | None = None,
    postselect: Mapping[int, int] | None = None,
    max_qubits: int = DENSITY_CAP,
) -> list[DensityBranch]:
    """Noisy simulation with branch enumeration.

    Each unitary gate is followed by a depolarizing channel on its wires
    (measurement and reset are noiseless).  Branches that differ only in
    classical bits outside ``keep_bits`` and never read again are summed.
    Wires outside ``keep_wires`` are traced out after their last use, and
    wires are only brought into the simulation when first touched.
    ``postselect`` discards branches whose measured bit disagrees; the
    returned probabilities are then unnormalised.
    """
    n = c.n_qubits
    if n > max_qubits:
        raise LayoutError(f"{n} qubits exceeds the density cap of {max_qubits}")
    noise = noise or NoiseModel()
    keep_wires = list(range(n)) if keep_wires is None else sorted(set(keep_wires))
    keep_bits = set(range(c.n_cbits)) if keep_bits is None else set(keep_bits)
    postselect = dict(postselect or {})
    gates, params = _fuse(c.gates, noise)

    last_touch = {}
    last_read = {}
    for i, g in enumerate(gates):
        for w in g.wires:
            last_touch[w] = i
        for b, _ in g.condition:
            last_read[b] = i

    if initial is None:
        t = np.ones((), dtype=complex)
        branch = _Branch([0] * c.n_cbits, [], t)
    else:
        rho = initial if isinstance(initial, DensityMatrix) else DensityMatrix.from_state(initial)
        if rho.n_qubits != n:
            raise ValueError("initial state does not match the circuit width")
        t = rho.matrix.astype(complex).reshape((2,) * (2 * n))
        active = list(range(n - 1, -1, -1))
        branch = _Branch([0] * c.n_cbits, active, t.copy())
    branches = [branch]

    for i, g in enumerate(gates):
        sop = None if g.kind in (Kind.MEASURE, Kind.RESET) else superoperator(support_matrix(g), params[i])
        dead_after = [w for w in g.wires if last_touch[w] == i and w not in keep_wires]
        nxt = []
        for br in branches:
            if not _satisfied(g, br.bits):
                nxt.append(br)
                continue
            for w in g.wires:
                br.activate(w)
            w0 = g.targets[0]
            if g.kind is Kind.MEASURE:
                for v in (0, 1):
                    if postselect.get(g.cbit, v) != v:
                        continue
                    nb = br.block(w0, v, keep_wire=w0 not in dead_after)
                    if nb.trace() <= _PRUNE:
                        continue
                    nb.bits[g.cbit] = v
                    nxt.append(nb)
                continue
            if g.kind is Kind.RESET:
                br.reset(w0)
            else:
                br.apply(g.wires, sop)
            for w in dead_after:
                br.discard(w)
            nxt.append(br)
        branches = _merge(nxt, i, last_read, keep_bits)

    out = []
    for br in branches:
        mat = br.to_matrix(keep_wires)
        p = float(np.real(np.trace(mat)))
        k = len(keep_wires)
        state = DensityMatrix(k, mat / p) if p > 0 else DensityMatrix(k, mat)
        out.append(DensityBranch(tuple(br.bits), p, state))
    return out


def superoperator(u: np.ndarray, p: float = 0.0) -> np.ndarray:
    """``rho -> D_p(U rho U^dag)`` on k qubits as a 4**k matrix.

    Index ``r + (c << k)`` addresses the row bits ``r`` and column bits ``c``
    of the support.
    """
    d = u.shape[0]
    s = np.kron(u.conj(), u)
    if p:
        eye = np.eye(d).reshape(-1)  # vec of the identity in (r, c) order
        s = (1 - p) * s + (p / d) * np.outer(eye, eye) @ s
    return s


def _fuse(gates, noise: NoiseModel) -> tuple[list[Gate], list[float]]:
    """Merge runs of unconditioned one-qubit gates on a wire into one gate.

    Depolarizing noise commutes with unitaries on its support, so a run
    ``U_1, ..., U_r`` with parameters ``p_j`` becomes ``U_r...U_1`` followed by
    one channel with ``1 - prod(1 - p_j)``.
    """
    out: list[Gate] = []
    ps: list[float] = []
    pending: dict[int, tuple[np.ndarray, float, Gate]] = {}

    def flush(w):
        u, keep, g = pending.pop(w)
        if g is not None:
            out.append(g)
        else:
            out.append(Gate(Kind.UNITARY, [w], matrix=u, label="fused"))
        ps.append(1 - keep)

    for g in gates:
        if len(g.wires) == 1 and g.is_unitary and g.kind not in (Kind.MEASURE, Kind.RESET):
            w = g.wires[0]
            u = target_matrix(g)
            keep = 1 - noise.parameter(g)
            if w in pending:
                u0, k0, _ = pending[w]
                pending[w] = (u @ u0, k0 * keep, None)
            else:
                pending[w] = (u, keep, g)
            continue
        for w in g.wires:
            if w in pending:
                flush(w)
        out.append(g)
        ps.append(0.0 if g.kind in (Kind.MEASURE, Kind.RESET) else noise.parameter(g))
    for w in list(pending):
        flush(w)
    return out, ps


def _merge(branches, i, last_read, keep_bits):
    if len(branches) < 2:
        return branches
    groups: dict = {}
    for br in branches:
        key = tuple(
            v if (b in keep_bits or last_read.get(b, -1) > i) else 0 for b, v in enumerate(br.bits)
        )
        if key in groups:
            acc = groups[key]
            if acc.active != br.active:
                for w in br.active:
                    acc.activate(w)
                for w in acc.active:
                    br.activate(w)
                perm = [br.active.index(w) for w in acc.active]
                m = acc.m
                br.t = np.transpose(br.t, perm + [m + p for p in perm])
            acc.t += br.t
        else:
            br.bits = list(key)
            groups[key] = br
    return list(groups.values())


def run_density(
    c: Circuit,
    noise: NoiseModel | None = None,
    initial: DensityMatrix | StateVector | None = None,
    keep_wires: Iterable[int] | None = None,
    max_qubits: int = DENSITY_CAP,
) -> DensityMatrix:
    """Probability-weighted mixture over all measurement branches."""
    branches = run_density_branches(
        c, noise, initial=initial, keep_wires=keep_wires, keep_bits=(), max_qubits=max_qubits
    )
    total = sum(b.probability * b.state.matrix for b in branches)
    k = branches[0].state.n_qubits
    return DensityMatrix(k, total)
