"""Rewriting circuits into Clifford+T.

Target gate set: one-qubit Cliffords, T, T^dag, CNOT, measurement and reset,
plus ``RZ`` (and the ``SX``/``SXDG`` basis change around it) for rotations that
are left for synthesis.  Every rule preserves the unitary exactly or, for the
phase-Toffoli, inside a matched compute/uncompute pair.

The ``lower_*`` helpers return circuits on a bare layout
``Circuit(0, 1, n_ancilla=k)``; wire order is documented per helper.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .circuit import Circuit, GateCounts, counts
from .gates import CLIFFORD_1Q, T_LIKE, Gate, GateError, Kind

_EXACT_HALF = math.pi / 2  # Ry angle of G(1/2)


@dataclass(frozen=True)
class LoweringOptions:
    """``toffoli_style`` picks the standalone Toffoli form ("exact" or "phase").

    The phase form is only sound inside compute/uncompute pairs, so
    ``lower_circuit`` rejects it for standalone Toffolis unless
    ``allow_phase_toffoli`` is set.  With ``keep_rotations`` false every
    rotation is replaced by a synthesized word within ``epsilon``.
    """

    toffoli_style: str = "exact"
    keep_rotations: bool = True
    epsilon: float | None = None
    allow_phase_toffoli: bool = False
    cancel_x_pairs: bool = True

    def __post_init__(self):
        if self.toffoli_style not in ("exact", "phase"):
            raise ValueError(f"unknown toffoli_style {self.toffoli_style!r}")
        if self.toffoli_style == "phase" and not self.allow_phase_toffoli:
            raise ValueError("standalone phase-Toffolis change the unitary; set allow_phase_toffoli")
        if not self.keep_rotations and self.epsilon is None:
            raise ValueError("synthesizing rotations needs an epsilon")


class Lowered(NamedTuple):
    circuit: Circuit
    counts: GateCounts


def _g(kind, *wires, controls=(), theta=None):
    return Gate(kind, list(wires), controls, theta=theta)


def _cx(c, t):
    return Gate(Kind.CNOT, [t], [(c, 1)])


# -- rules on explicit wires -------------------------------------------------------


def _ccz(c1, c2, t) -> list[Gate]:
    return [
        _cx(c2, t), _g(Kind.TDG, t), _cx(c1, t), _g(Kind.T, t),
        _cx(c2, t), _g(Kind.TDG, t), _cx(c1, t), _g(Kind.T, c2), _g(Kind.T, t),
        _cx(c1, c2), _g(Kind.T, c1), _g(Kind.TDG, c2), _cx(c1, c2),
    ]  # fmt: skip


def _toffoli(c1, c2, t) -> list[Gate]:
    return [_g(Kind.H, t), *_ccz(c1, c2, t), _g(Kind.H, t)]


def _phase_toffoli(c1, c2, t) -> list[Gate]:
    return [
        _g(Kind.H, t), _g(Kind.T, t), _cx(c2, t), _g(Kind.TDG, t),
        _cx(c1, t), _g(Kind.T, t), _cx(c2, t), _g(Kind.TDG, t), _g(Kind.H, t),
    ]  # fmt: skip


def _adjoint(gates: list[Gate]) -> list[Gate]:
    return [g.adjoint() for g in reversed(gates)]


def _ladder(controls: list[int], work: list[int], core) -> list[Gate]:
    """AND-ladder of phase-Toffolis into ``work``, ``core(c, w)`` in the middle, uncompute."""
    need = len(controls) - 2
    if len(work) < need:
        raise GateError(f"{len(controls)} controls need {need} work ancillas, got {len(work)}")
    up = _phase_toffoli(controls[0], controls[1], work[0])
    for k in range(2, len(controls) - 1):
        up += _phase_toffoli(controls[k], work[k - 2], work[k - 1])
    return up + core(controls[-1], work[need - 1]) + _adjoint(up)


def _mcx(controls, t, work) -> list[Gate]:
    n = len(controls)
    if n == 0:
        return [_g(Kind.X, t)]
    if n == 1:
        return [_cx(controls[0], t)]
    if n == 2:
        return _toffoli(controls[0], controls[1], t)
    return _ladder(list(controls), list(work), lambda c, w: _toffoli(c, w, t))


def _mcz(controls, t, work) -> list[Gate]:
    n = len(controls)
    if n == 0:
        return [_g(Kind.Z, t)]
    if n == 1:
        return [_g(Kind.H, t), _cx(controls[0], t), _g(Kind.H, t)]
    if n == 2:
        return _ccz(controls[0], controls[1], t)
    return _ladder(list(controls), list(work), lambda c, w: _ccz(c, w, t))


def _cswap(c, a, b) -> list[Gate]:
    return [_cx(b, a), *_toffoli(c, a, b), _cx(b, a)]


def _controlled_h(c, t) -> list[Gate]:
    return [
        _g(Kind.S, t), _g(Kind.H, t), _g(Kind.T, t), _cx(c, t),
        _g(Kind.TDG, t), _g(Kind.H, t), _g(Kind.SDG, t),
    ]  # fmt: skip


def _ry(theta, t) -> list[Gate]:
    # Ry(theta) = SXdg . Rz(theta) . SX
    return [_g(Kind.SX, t), _g(Kind.RZ, t, theta=theta), _g(Kind.SXDG, t)]


def _is_angle(theta: float, target: float) -> bool:
    return abs(math.remainder(theta - target, 4 * math.pi)) < 1e-12


def _controlled_ry(theta, c, t) -> list[Gate]:
    if _is_angle(theta, 0.0):
        return []
    if _is_angle(theta, _EXACT_HALF):
        return [*_controlled_h(c, t), _cx(c, t)]
    return [_g(Kind.RY, t, theta=theta / 2), _cx(c, t), _g(Kind.RY, t, theta=-theta / 2), _cx(c, t)]


# -- public single-rule builders --------------------------------------------------------


def _bare(n: int, gates) -> Circuit:
    return Circuit(0, 1, n_ancilla=n, gates=gates)


def lower_toffoli(ccz: bool = False) -> Circuit:
    """Exact Toffoli (controls 0, 1; target 2) with 7 T-like gates."""
    return _bare(3, _ccz(0, 1, 2) if ccz else _toffoli(0, 1, 2))


def lower_toffoli_phase() -> Circuit:
    """Toffoli up to a diagonal phase (controls 0, 1; target 2), 4 T-like gates."""
    return _bare(3, _phase_toffoli(0, 1, 2))


def lower_mcx(n_c: int, z: bool = False) -> Circuit:
    """Controls ``0..n_c-1``, target ``n_c``, work ancillas ``n_c+1 ..``."""
    if n_c < 1:
        raise ValueError("need at least one control")
    work = list(range(n_c + 1, n_c + 1 + max(0, n_c - 2)))
    gates = (_mcz if z else _mcx)(list(range(n_c)), n_c, work)
    return _bare(n_c + 1 + len(work), gates)


def lower_cswap() -> Circuit:
    """Control 0, swapped pair 1 and 2."""
    return _bare(3, _cswap(0, 1, 2))


def lower_controlled_h() -> Circuit:
    """Control 0, target 1."""
    return _bare(2, _controlled_h(0, 1))


def lower_controlled_ry(theta: float) -> Circuit:
    """Control 0, target 1; G(1/2) takes the exact controlled-H route."""
    return _bare(2, _controlled_ry(theta, 0, 1))


# -- whole circuits -------------------------------------------------------------------------


def _work_needed(c: Circuit) -> int:
    need = 0
    for g in c.gates:
        if g.kind in (Kind.MCX, Kind.MCZ):
            need = max(need, len(g.controls) - 2)
    return need


def _rule(g: Gate, work: list[int], opts: LoweringOptions) -> list[Gate]:
    k = g.kind
    ctl = [w for w, _ in g.controls]
    t = g.targets
    if k in CLIFFORD_1Q or k in T_LIKE or k is Kind.CNOT or k in (Kind.MEASURE, Kind.RESET):
        return [g]
    if k is Kind.RZ:
        return [g] if abs(g.theta) > 1e-15 else []
    if k is Kind.RY:
        return _ry(g.theta, t[0]) if abs(g.theta) > 1e-15 else []
    if k is Kind.CZ:
        return _mcz(ctl, t[0], work)
    if k is Kind.SWAP:
        a, b = t
        return [_cx(a, b), _cx(b, a), _cx(a, b)]
    if k is Kind.TOFFOLI:
        if opts.toffoli_style == "phase":
            return _phase_toffoli(ctl[0], ctl[1], t[0])
        return _toffoli(ctl[0], ctl[1], t[0])
    if k is Kind.CCZ:
        return _ccz(ctl[0], ctl[1], t[0])
    if k is Kind.MCX:
        return _mcx(ctl, t[0], work)
    if k is Kind.MCZ:
        return _mcz(ctl, t[0], work)
    if k is Kind.CSWAP:
        return _cswap(ctl[0], t[0], t[1])
    if k is Kind.CRY:
        if len(ctl) != 1:
            raise GateError("only singly controlled Ry can be lowered")
        return [h for x in _controlled_ry(g.theta, ctl[0], t[0]) for h in _rule(x, work, opts)]
    raise GateError(f"no Clifford+T rule for {k.value}")


def _expand(g: Gate, work: list[int], opts: LoweringOptions) -> list[Gate]:
    opened = [w for w, v in g.controls if v == 0]
    core = g.replace(controls=[(w, 1) for w, _ in g.controls], condition=()) if opened else g.replace(condition=())
    flips = [Gate(Kind.X, [w]) for w in opened]
    out = flips + _rule(core, work, opts) + flips
    if g.condition:
        out = [x.replace(condition=g.condition) for x in out]
    return out


def cancel_x_pairs(gates: list[Gate]) -> list[Gate]:
    """Drop pairs of uncontrolled X gates on one wire with nothing between them.

    Pairs must carry the same classical condition, and no measurement may
    rewrite a bit of that condition in between.
    """
    out: list[Gate | None] = []
    pending: dict[int, int] = {}
    for g in gates:
        if g.kind is Kind.MEASURE:
            for w, i in list(pending.items()):
                if any(b == g.cbit for b, _ in out[i].condition):
                    del pending[w]
        if g.kind is Kind.X and not g.controls:
            w = g.targets[0]
            i = pending.pop(w, None)
            if i is not None and out[i].condition == g.condition:
                out[i] = None
                continue
            pending[w] = len(out)
            out.append(g)
            continue
        for w in g.wires:
            pending.pop(w, None)
        out.append(g)
    return [g for g in out if g is not None]


def _synthesize(gates: list[Gate], epsilon: float) -> list[Gate]:
    from .synth import synthesize_rz

    out = []
    for g in gates:
        if g.kind is not Kind.RZ:
            out.append(g)
            continue
        res = synthesize_rz(g.theta, epsilon)
        for name in res.word:
            out.append(Gate(Kind(name), g.targets, condition=g.condition))
    return out


def lower_circuit(c: Circuit, opts: LoweringOptions | None = None) -> Lowered:
    """Rewrite every gate of ``c`` into the Clifford+T set (plus kept rotations).

    Work ancillas for multi-controlled gates are appended to the work
    register as needed and are returned to |0>.
    """
    opts = opts or LoweringOptions()
    need = _work_needed(c)
    host = c.resized(n_work=max(c.n_work, need)) if need > c.n_work else c
    work = [host.work(j) for j in range(need)]
    gates: list[Gate] = []
    for g in host.gates:
        gates += _expand(g, work, opts)
    if opts.cancel_x_pairs:
        gates = cancel_x_pairs(gates)
    if not opts.keep_rotations:
        gates = _synthesize(gates, opts.epsilon)
    out = host.with_gates(gates)
    return Lowered(out, counts(out))
