"""Gate kinds, the immutable ``Gate`` instruction, and gate matrices.

Wires are flat integers; qubit 0 is the least significant bit of a basis
index.  A control is a ``(wire, value)`` pair: ``value=1`` is the usual
closed (filled-dot) control, ``value=0`` an open control on ``|0>``.
"""

from __future__ import annotations

import math
from enum import Enum
from typing import NamedTuple

import numpy as np

UNITARY_TOL = 1e-12


class Kind(str, Enum):
    X = "X"
    Y = "Y"
    Z = "Z"
    H = "H"
    S = "S"
    SDG = "SDG"
    T = "T"
    TDG = "TDG"
    SX = "SX"
    SXDG = "SXDG"
    CNOT = "CNOT"
    CZ = "CZ"
    SWAP = "SWAP"
    RY = "RY"
    RZ = "RZ"
    CRY = "CRY"
    TOFFOLI = "TOFFOLI"
    CCZ = "CCZ"
    MCX = "MCX"
    MCZ = "MCZ"
    CSWAP = "CSWAP"
    MEASURE = "MEASURE"
    RESET = "RESET"
    UNITARY = "UNITARY"


ONE_QUBIT = frozenset(
    {Kind.X, Kind.Y, Kind.Z, Kind.H, Kind.S, Kind.SDG, Kind.T, Kind.TDG, Kind.SX, Kind.SXDG}
)
CLIFFORD_1Q = ONE_QUBIT - {Kind.T, Kind.TDG}
CLIFFORD = CLIFFORD_1Q | {Kind.CNOT, Kind.CZ, Kind.SWAP}
T_LIKE = frozenset({Kind.T, Kind.TDG})
ROTATIONS = frozenset({Kind.RY, Kind.RZ, Kind.CRY})
PARAMETRIC = ROTATIONS
NON_UNITARY = frozenset({Kind.MEASURE, Kind.RESET})

# (number of targets, number of controls or None for "any")
_ARITY = {
    **{k: (1, 0) for k in ONE_QUBIT},
    Kind.RY: (1, 0),
    Kind.RZ: (1, 0),
    Kind.CNOT: (1, 1),
    Kind.CZ: (1, 1),
    Kind.SWAP: (2, 0),
    Kind.CRY: (1, None),
    Kind.TOFFOLI: (1, 2),
    Kind.CCZ: (1, 2),
    Kind.MCX: (1, None),
    Kind.MCZ: (1, None),
    Kind.CSWAP: (2, 1),
    Kind.MEASURE: (1, 0),
    Kind.RESET: (1, 0),
}

_ADJOINT = {
    Kind.S: Kind.SDG,
    Kind.SDG: Kind.S,
    Kind.T: Kind.TDG,
    Kind.TDG: Kind.T,
    Kind.SX: Kind.SXDG,
    Kind.SXDG: Kind.SX,
}


class Control(NamedTuple):
    wire: int
    value: int = 1


class GateError(ValueError):
    pass


class Gate:
    """One circuit instruction.

    ``condition`` is a conjunction of ``(cbit, value)`` requirements; the gate
    acts only when every listed classical bit holds its value.
    """

    __slots__ = ("kind", "targets", "controls", "theta", "cbit", "condition", "matrix", "label")

    def __init__(
        self,
        kind: Kind | str,
        targets,
        controls=(),
        theta: float | None = None,
        cbit: int | None = None,
        condition=(),
        matrix=None,
        label: str | None = None,
    ):
        kind = Kind(kind)
        targets = tuple(int(t) for t in targets)
        controls = tuple(Control(int(w), int(v)) for w, v in controls)
        condition = tuple((int(b), int(v)) for b, v in condition)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "controls", controls)
        object.__setattr__(self, "theta", None if theta is None else float(theta))
        object.__setattr__(self, "cbit", None if cbit is None else int(cbit))
        object.__setattr__(self, "condition", condition)
        if matrix is not None:
            matrix = np.array(matrix, dtype=complex)
            matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "label", label)
        self._validate()

    def __setattr__(self, name, value):
        raise AttributeError("Gate is immutable")

    def _validate(self):
        k = self.kind
        wires = self.targets + tuple(c.wire for c in self.controls)
        if len(set(wires)) != len(wires):
            raise GateError(f"{k.value}: targets and controls must be distinct wires")
        if any(w < 0 for w in wires):
            raise GateError(f"{k.value}: negative wire index")
        if any(v not in (0, 1) for _, v in self.controls):
            raise GateError(f"{k.value}: control value must be 0 or 1")
        if any(v not in (0, 1) for _, v in self.condition):
            raise GateError(f"{k.value}: condition value must be 0 or 1")
        if k is Kind.UNITARY:
            m = self.matrix
            if m is None or not self.targets:
                raise GateError("UNITARY needs targets and a matrix")
            d = 2 ** len(self.targets)
            if m.shape != (d, d):
                raise GateError(f"UNITARY matrix shape {m.shape} does not match {len(self.targets)} targets")
            if np.linalg.norm(m.conj().T @ m - np.eye(d), 2) > UNITARY_TOL:
                raise GateError("UNITARY matrix is not unitary")
            return
        if self.matrix is not None:
            raise GateError(f"{k.value} does not take a matrix")
        n_t, n_c = _ARITY[k]
        if len(self.targets) != n_t:
            raise GateError(f"{k.value} takes {n_t} target(s), got {len(self.targets)}")
        if n_c is not None and len(self.controls) != n_c:
            raise GateError(f"{k.value} takes {n_c} control(s), got {len(self.controls)}")
        if k is Kind.CRY and not self.controls:
            raise GateError("CRY needs at least one control")
        if (k in PARAMETRIC) != (self.theta is not None):
            raise GateError(f"{k.value}: angle given where not allowed or missing")
        if k is Kind.MEASURE and self.cbit is None:
            raise GateError("MEASURE needs a classical bit")
        if k is not Kind.MEASURE and self.cbit is not None:
            raise GateError(f"{k.value} does not write a classical bit")

    # -- properties -----------------------------------------------------

    @property
    def wires(self) -> tuple[int, ...]:
        """Controls first, then targets."""
        return tuple(c.wire for c in self.controls) + self.targets

    @property
    def is_unitary(self) -> bool:
        return self.kind not in NON_UNITARY and not self.condition

    def adjoint(self) -> "Gate":
        if self.kind in NON_UNITARY:
            raise GateError(f"{self.kind.value} has no adjoint")
        if self.condition:
            raise GateError("classically conditioned gates have no adjoint")
        kind = _ADJOINT.get(self.kind, self.kind)
        theta = -self.theta if self.theta is not None else None
        matrix = self.matrix.conj().T if self.matrix is not None else None
        label = _dagger_label(self.label) if self.label is not None else None
        return Gate(kind, self.targets, self.controls, theta=theta, matrix=matrix, label=label)

    def remap(self, mapping) -> "Gate":
        """Return the gate with every wire sent through ``mapping``."""
        return Gate(
            self.kind,
            [mapping(t) for t in self.targets],
            [(mapping(w), v) for w, v in self.controls],
            theta=self.theta,
            cbit=self.cbit,
            condition=self.condition,
            matrix=self.matrix,
            label=self.label,
        )

    def replace(self, **kw) -> "Gate":
        fields = dict(
            kind=self.kind,
            targets=self.targets,
            controls=self.controls,
            theta=self.theta,
            cbit=self.cbit,
            condition=self.condition,
            matrix=self.matrix,
            label=self.label,
        )
        fields.update(kw)
        return Gate(**fields)

    # -- equality -------------------------------------------------------

    def _key(self):
        m = None if self.matrix is None else self.matrix.tobytes()
        return (self.kind, self.targets, self.controls, self.theta, self.cbit, self.condition, m, self.label)

    def __eq__(self, other):
        if not isinstance(other, Gate):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        parts = [self.kind.value]
        if self.theta is not None:
            parts[0] += f"({self.theta:.6g})"
        parts.append(f"t={list(self.targets)}")
        if self.controls:
            parts.append("c=" + ",".join(f"{w}{'+' if v else '-'}" for w, v in self.controls))
        if self.label:
            parts.append(self.label)
        if self.cbit is not None:
            parts.append(f"->c{self.cbit}")
        if self.condition:
            parts.append("if " + ",".join(f"c{b}={v}" for b, v in self.condition))
        return f"Gate({' '.join(parts)})"


def _dagger_label(label: str) -> str:
    return label[: -len("^dag")] if label.endswith("^dag") else label + "^dag"


# -- matrices -----------------------------------------------------------

_S2 = 1 / math.sqrt(2)
_W = np.exp(1j * math.pi / 4)

FIXED_MATRICES = {
    Kind.X: np.array([[0, 1], [1, 0]], dtype=complex),
    Kind.Y: np.array([[0, -1j], [1j, 0]], dtype=complex),
    Kind.Z: np.array([[1, 0], [0, -1]], dtype=complex),
    Kind.H: np.array([[_S2, _S2], [_S2, -_S2]], dtype=complex),
    Kind.S: np.array([[1, 0], [0, 1j]], dtype=complex),
    Kind.SDG: np.array([[1, 0], [0, -1j]], dtype=complex),
    Kind.T: np.array([[1, 0], [0, _W]], dtype=complex),
    Kind.TDG: np.array([[1, 0], [0, np.conj(_W)]], dtype=complex),
    Kind.SX: 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]], dtype=complex),
    Kind.SXDG: 0.5 * np.array([[1 - 1j, 1 + 1j], [1 + 1j, 1 - 1j]], dtype=complex),
    Kind.SWAP: np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex),
}
for _m in FIXED_MATRICES.values():
    _m.setflags(write=False)


def ry_matrix(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz_matrix(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def target_matrix(gate: Gate) -> np.ndarray:
    """Matrix applied to the targets when all controls are satisfied.

    Multi-target matrices use the first target as the least significant bit.
    """
    k = gate.kind
    if k in FIXED_MATRICES:
        return FIXED_MATRICES[k]
    if k in (Kind.CNOT, Kind.TOFFOLI, Kind.MCX):
        return FIXED_MATRICES[Kind.X]
    if k in (Kind.CZ, Kind.CCZ, Kind.MCZ):
        return FIXED_MATRICES[Kind.Z]
    if k is Kind.CSWAP:
        return FIXED_MATRICES[Kind.SWAP]
    if k in (Kind.RY, Kind.CRY):
        return ry_matrix(gate.theta)
    if k is Kind.RZ:
        return rz_matrix(gate.theta)
    if k is Kind.UNITARY:
        return gate.matrix
    raise GateError(f"{k.value} has no matrix")


def support_matrix(gate: Gate) -> np.ndarray:
    """Full unitary on ``gate.wires`` (controls first = least significant)."""
    u = target_matrix(gate)
    nc = len(gate.controls)
    if nc == 0:
        return np.array(u)
    dt = u.shape[0]
    full = np.eye(dt * 2**nc, dtype=complex)
    active = sum(v << i for i, (_, v) in enumerate(gate.controls))
    # basis index = control bits (low) + target bits (high)
    idx = [active + (j << nc) for j in range(dt)]
    full[np.ix_(idx, idx)] = u
    return full


def g_matrix(p: float) -> np.ndarray:
    """The real rotation [[sqrt(p), -sqrt(1-p)], [sqrt(1-p), sqrt(p)]]."""
    if not 0 < p < 1:
        raise ValueError(f"probability must lie in (0, 1), got {p}")
    a, b = math.sqrt(p), math.sqrt(1 - p)
    return np.array([[a, -b], [b, a]], dtype=complex)


def g_angle(p: float) -> float:
    """Ry angle with cos(theta/2) = sqrt(p)."""
    if not 0 < p < 1:
        raise ValueError(f"probability must lie in (0, 1), got {p}")
    return 2.0 * math.acos(math.sqrt(p))
