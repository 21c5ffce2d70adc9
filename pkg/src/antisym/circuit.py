"""Circuit container, register layout, composition, inversion and text I/O.

Register layout (flat wire indices)::

    particle i (1-based), qubit k   ->  (i - 1) * eta + k
    antisymmetrization ancilla j    ->  n_particles * eta + j
    work ancilla j                  ->  n_particles * eta + n_ancilla + j

Circuit order is application order: ``unitary_of(compose(a, b)) ==
unitary_of(b) @ unitary_of(a)``.
"""

from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable

import numpy as np

from . import _kernel
from .gates import (
    CLIFFORD,
    ROTATIONS,
    T_LIKE,
    Control,
    Gate,
    GateError,
    Kind,
    target_matrix,
)


class Register(str, Enum):
    PARTICLE = "particle"
    ANCILLA = "ancilla"
    WORK = "work"


@dataclass(frozen=True)
class QubitRef:
    register: Register
    index: int
    offset: int = 0


class LayoutError(ValueError):
    pass


@dataclass(frozen=True)
class Circuit:
    n_particles: int
    eta: int
    n_ancilla: int = 0
    n_work: int = 0
    n_cbits: int = 0
    gates: tuple[Gate, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.n_particles < 0 or self.eta < 1 or self.n_ancilla < 0 or self.n_work < 0 or self.n_cbits < 0:
            raise LayoutError("register sizes must be non-negative and eta >= 1")
        n = self.n_qubits
        for g in self.gates:
            if any(w >= n for w in g.wires):
                raise LayoutError(f"{g!r} touches a wire outside the {n}-qubit layout")
            bits = [b for b, _ in g.condition] + ([g.cbit] if g.cbit is not None else [])
            if any(b >= self.n_cbits for b in bits):
                raise LayoutError(f"{g!r} refers to a classical bit outside 0..{self.n_cbits - 1}")

    # -- layout -----------------------------------------------------------

    @property
    def layout(self) -> tuple[int, int, int, int, int]:
        return (self.n_particles, self.eta, self.n_ancilla, self.n_work, self.n_cbits)

    @property
    def n_qubits(self) -> int:
        return self.n_particles * self.eta + self.n_ancilla + self.n_work

    def particle(self, i: int) -> list[int]:
        """Wires of particle ``i`` (1-based), least significant first."""
        if not 1 <= i <= self.n_particles:
            raise LayoutError(f"particle {i} outside 1..{self.n_particles}")
        return list(range((i - 1) * self.eta, i * self.eta))

    def ancilla(self, j: int) -> int:
        if not 0 <= j < self.n_ancilla:
            raise LayoutError(f"ancilla {j} outside 0..{self.n_ancilla - 1}")
        return self.n_particles * self.eta + j

    def work(self, j: int) -> int:
        if not 0 <= j < self.n_work:
            raise LayoutError(f"work ancilla {j} outside 0..{self.n_work - 1}")
        return self.n_particles * self.eta + self.n_ancilla + j

    def wire(self, ref: QubitRef) -> int:
        if ref.register is Register.PARTICLE:
            if not 0 <= ref.offset < self.eta:
                raise LayoutError(f"offset {ref.offset} outside particle width {self.eta}")
            return self.particle(ref.index)[ref.offset]
        if ref.offset != 0:
            raise LayoutError("ancilla registers are one qubit wide")
        if ref.register is Register.ANCILLA:
            return self.ancilla(ref.index)
        return self.work(ref.index)

    def ref(self, wire: int) -> QubitRef:
        np_eta = self.n_particles * self.eta
        if wire < np_eta:
            return QubitRef(Register.PARTICLE, wire // self.eta + 1, wire % self.eta)
        if wire < np_eta + self.n_ancilla:
            return QubitRef(Register.ANCILLA, wire - np_eta)
        if wire < self.n_qubits:
            return QubitRef(Register.WORK, wire - np_eta - self.n_ancilla)
        raise LayoutError(f"wire {wire} outside layout")

    # -- construction helpers -------------------------------------------------

    def append(self, *gates: Gate | Iterable[Gate]) -> "Circuit":
        flat: list[Gate] = []
        for g in gates:
            if isinstance(g, Gate):
                flat.append(g)
            else:
                flat.extend(g)
        return dataclasses.replace(self, gates=self.gates + tuple(flat))

    def with_gates(self, gates: Iterable[Gate]) -> "Circuit":
        return dataclasses.replace(self, gates=tuple(gates))

    def resized(
        self,
        n_particles: int | None = None,
        n_ancilla: int | None = None,
        n_work: int | None = None,
        n_cbits: int | None = None,
    ) -> "Circuit":
        """Same gates on a larger layout, wires re-addressed by register."""
        new = Circuit(
            self.n_particles if n_particles is None else n_particles,
            self.eta,
            self.n_ancilla if n_ancilla is None else n_ancilla,
            self.n_work if n_work is None else n_work,
            self.n_cbits if n_cbits is None else n_cbits,
        )
        if new.n_particles < self.n_particles or new.n_ancilla < self.n_ancilla or new.n_work < self.n_work:
            raise LayoutError("resized() cannot shrink registers")
        if new.n_cbits < self.n_cbits:
            raise LayoutError("resized() cannot drop classical bits")
        mapping = lambda w: new.wire(self.ref(w))  # noqa: E731
        return new.with_gates(g.remap(mapping) for g in self.gates)

    def on_particle(self, i: int, n_particles: int, **layout) -> "Circuit":
        """Embed a single-register circuit (``n_particles == 1``) onto particle ``i``."""
        if self.n_particles != 1 or self.n_ancilla or self.n_work or self.n_cbits:
            raise LayoutError("on_particle() expects a bare one-particle circuit")
        host = Circuit(n_particles, self.eta, **layout)
        base = host.particle(i)[0]
        return host.with_gates(g.remap(lambda w: w + base) for g in self.gates)

    def __len__(self):
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    @property
    def is_unitary(self) -> bool:
        return all(g.is_unitary for g in self.gates)


def place(sub: Circuit, host: Circuit, wires: Iterable[int], bits: Iterable[int] = ()) -> list[Gate]:
    """Gates of ``sub`` with wire ``k`` sent to ``wires[k]`` (and cbit ``k`` to ``bits[k]``)."""
    wires = list(wires)
    bits = list(bits)
    if len(wires) != sub.n_qubits:
        raise LayoutError(f"need {sub.n_qubits} host wires, got {len(wires)}")
    if len(bits) < sub.n_cbits:
        raise LayoutError(f"need {sub.n_cbits} host classical bits, got {len(bits)}")
    if any(not 0 <= w < host.n_qubits for w in wires) or len(set(wires)) != len(wires):
        raise LayoutError("host wires must be distinct and inside the host layout")
    out = []
    for g in sub.gates:
        g = g.remap(lambda w: wires[w])
        if g.cbit is not None or g.condition:
            g = g.replace(
                cbit=None if g.cbit is None else bits[g.cbit],
                condition=[(bits[b], v) for b, v in g.condition],
            )
        out.append(g)
    return out


def empty_like(c: Circuit) -> Circuit:
    return dataclasses.replace(c, gates=())


def compose(a: Circuit, b: Circuit) -> Circuit:
    """Gates of ``a`` followed by gates of ``b`` on an identical layout."""
    if a.layout != b.layout:
        raise LayoutError(f"layout mismatch: {a.layout} vs {b.layout}")
    return a.append(b.gates)


def inverse(c: Circuit) -> Circuit:
    if not c.is_unitary:
        raise GateError("only measurement-free, unconditioned circuits can be inverted")
    return c.with_gates(g.adjoint() for g in reversed(c.gates))


# -- dense matrices ---------------------------------------------------------

DEFAULT_UNITARY_CAP = 12


def unitary_of(c: Circuit, max_qubits: int = DEFAULT_UNITARY_CAP) -> np.ndarray:
    if not c.is_unitary:
        raise GateError("unitary_of() needs a circuit without measurement, reset or conditions")
    n = c.n_qubits
    if n > max_qubits:
        raise LayoutError(f"{n} qubits exceeds the dense-matrix cap of {max_qubits}")
    dim = 2**n
    t = np.eye(dim, dtype=complex).reshape((2,) * n + (dim,))
    for g in c.gates:
        apply_gate(t, g, n)
    return t.reshape(dim, dim)


def apply_gate(t: np.ndarray, g: Gate, n: int) -> None:
    """Apply a unitary gate to a state tensor whose first ``n`` axes are qubits."""
    ax = lambda w: n - 1 - w  # noqa: E731
    _kernel.apply_matrix(
        t,
        target_matrix(g),
        [ax(w) for w in g.targets],
        [ax(w) for w, _ in g.controls],
        [v for _, v in g.controls],
    )


# -- gate counting ------------------------------------------------------------


@dataclass(frozen=True)
class GateCounts:
    clifford: int = 0
    t_like: int = 0
    rotations: int = 0
    measurements: int = 0
    two_qubit: int = 0
    resets: int = 0
    other: int = 0

    def __add__(self, other: "GateCounts") -> "GateCounts":
        return GateCounts(*(x + y for x, y in zip(dataclasses.astuple(self), dataclasses.astuple(other))))

    @property
    def total(self) -> int:
        return self.clifford + self.t_like + self.rotations + self.other

    def report(self) -> str:
        return "\n".join(f"{k}={v}" for k, v in dataclasses.asdict(self).items())


def counts(c: Circuit | Iterable[Gate], include_conditioned: bool = True) -> GateCounts:
    """Tally gates by class.

    Multi-qubit non-Clifford gates (Toffoli, CSWAP, MCX, opaque unitaries)
    land in ``other``; ``two_qubit`` counts every gate acting on exactly two
    wires regardless of class.
    """
    tally = dict(clifford=0, t_like=0, rotations=0, measurements=0, two_qubit=0, resets=0, other=0)
    for g in c:
        if g.condition and not include_conditioned:
            continue
        k = g.kind
        if k is Kind.MEASURE:
            tally["measurements"] += 1
            continue
        if k is Kind.RESET:
            tally["resets"] += 1
            continue
        if k in CLIFFORD:
            tally["clifford"] += 1
        elif k in T_LIKE:
            tally["t_like"] += 1
        elif k in ROTATIONS:
            tally["rotations"] += 1
        else:
            tally["other"] += 1
        if len(g.wires) == 2:
            tally["two_qubit"] += 1
    return GateCounts(**tally)


# -- text format -----------------------------------------------------------------


class CircuitParseError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


def _fmt(x: float) -> str:
    return format(x, ".17g")


def gate_to_text(g: Gate) -> str:
    head = g.kind.value
    if g.theta is not None:
        head += f"({_fmt(g.theta)})"
    parts = [head, "targets=" + ",".join(map(str, g.targets))]
    if g.controls:
        parts.append("controls=" + ",".join(f"{w}:{'+' if v else '-'}" for w, v in g.controls))
    if g.cbit is not None:
        parts.append(f"cbit={g.cbit}")
    if g.label is not None:
        parts.append(f"label={g.label}")
    if g.matrix is not None:
        flat = g.matrix.reshape(-1)
        parts.append("matrix=" + ",".join(f"{_fmt(z.real)}:{_fmt(z.imag)}" for z in flat))
    if g.condition:
        parts.append("cond=" + ",".join(f"{b}={v}" for b, v in g.condition))
    return " ".join(parts)


def to_text(c: Circuit) -> str:
    header = (
        f"circuit N={c.n_particles} eta={c.eta} ancilla={c.n_ancilla} "
        f"work={c.n_work} cbits={c.n_cbits}"
    )
    return "\n".join([header, *(gate_to_text(g) for g in c.gates)]) + "\n"


_HEADER = re.compile(
    r"^circuit\s+N=(\d+)\s+eta=(\d+)\s+ancilla=(\d+)\s+work=(\d+)\s+cbits=(\d+)\s*$"
)
_HEAD = re.compile(r"^([A-Za-z]+)(?:\(([^)]*)\))?$")


def _ints(s: str, lineno: int, what: str) -> list[int]:
    try:
        return [int(x) for x in s.split(",") if x != ""]
    except ValueError:
        raise CircuitParseError(lineno, f"bad {what} list {s!r}") from None


def from_text(text: str) -> Circuit:
    header = None
    gates: list[Gate] = []
    lines: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if header is None:
            m = _HEADER.match(line)
            if not m:
                raise CircuitParseError(lineno, f"expected circuit header, got {line!r}")
            header = tuple(int(x) for x in m.groups())
            continue
        gates.append(_parse_gate(line, lineno))
        lines.append(lineno)
    if header is None:
        raise CircuitParseError(1, "missing circuit header")
    n, eta, anc, work, cbits = header
    try:
        return Circuit(n, eta, anc, work, cbits, tuple(gates))
    except (LayoutError, GateError) as exc:
        # report the first gate that does not fit the layout on its own
        for g, lineno in zip(gates, lines):
            try:
                Circuit(n, eta, anc, work, cbits, (g,))
            except (LayoutError, GateError) as bad:
                raise CircuitParseError(lineno, str(bad)) from None
        raise CircuitParseError(1, str(exc)) from None


def _parse_gate(line: str, lineno: int) -> Gate:
    tokens = line.split()
    m = _HEAD.match(tokens[0])
    if not m:
        raise CircuitParseError(lineno, f"malformed gate token {tokens[0]!r}")
    name, arg = m.groups()
    try:
        kind = Kind(name)
    except ValueError:
        raise CircuitParseError(lineno, f"unknown gate {name!r}") from None
    theta = None
    if arg is not None:
        try:
            theta = float(arg)
        except ValueError:
            raise CircuitParseError(lineno, f"bad angle {arg!r}") from None
    kw: dict = {"targets": [], "controls": [], "condition": []}
    for tok in tokens[1:]:
        key, sep, val = tok.partition("=")
        if not sep:
            raise CircuitParseError(lineno, f"expected key=value, got {tok!r}")
        if key == "targets":
            kw["targets"] = _ints(val, lineno, "target")
        elif key == "controls":
            ctl = []
            for item in val.split(","):
                w, _, pol = item.partition(":")
                if pol not in ("+", "-"):
                    raise CircuitParseError(lineno, f"bad control {item!r}")
                ctl.append(Control(_ints(w, lineno, "control")[0], 1 if pol == "+" else 0))
            kw["controls"] = ctl
        elif key == "cbit":
            kw["cbit"] = _ints(val, lineno, "cbit")[0]
        elif key == "label":
            kw["label"] = val
        elif key == "matrix":
            try:
                vals = [complex(float(re_), float(im)) for re_, im in (z.split(":") for z in val.split(","))]
            except ValueError:
                raise CircuitParseError(lineno, "bad matrix entries") from None
            d = int(round(len(vals) ** 0.5))
            kw["matrix"] = np.array(vals).reshape(d, d)
        elif key == "cond":
            cond = []
            for item in val.split(","):
                b, _, v = item.partition("=")
                cond.append((_ints(b, lineno, "cond")[0], _ints(v, lineno, "cond")[0]))
            kw["condition"] = cond
        else:
            raise CircuitParseError(lineno, f"unknown field {key!r}")
    try:
        return Gate(kind, theta=theta, **kw)
    except GateError as exc:
        raise CircuitParseError(lineno, str(exc)) from None
