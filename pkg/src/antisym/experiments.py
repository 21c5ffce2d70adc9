"""The three-particle noise study: fidelity and antisymmetry probability.

The measurement-based circuit for three particles in ``eta = 3`` qubits is
lowered to Clifford+T, its single Z rotation is synthesized to a chosen
error, and the circuit is run through the branch-enumerating density
simulator.  Fidelity compares the noisy particle-register state against the
exact antisymmetric state.  The antisymmetry probability comes from running
the pairwise swap tests (themselves noisy) on that noisy state.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from . import _kernel
from .builder import OrbitalSet, build_full_measurement
from .circuit import Circuit, counts
from .gates import Gate, Kind
from .lowering import lower_circuit
from .sim import DENSITY_CAP, DensityMatrix, NoiseModel, fidelity, run_density, run_density_branches
from .synth import synthesize_rz
from .verify import antisym_probability_circuit, antisymmetrizer_oracle

log = logging.getLogger(__name__)

CLIFFORD_TIERS = (5e-6, 9e-4, 3e-3)
T_TIERS = (5e-4, 6e-3, 2e-2)
NAMED_TIERS = {"best": (5e-6, 5e-4), "moderate": (9e-4, 6e-3), "worst": (3e-3, 2e-2)}
RS_ERRORS = (1e-1, 9e-3, 1e-3)

CSV_COLUMNS = (
    "clifford_infidelity",
    "t_infidelity",
    "rs_error",
    "synth_error",
    "t_count",
    "clifford_count",
    "fidelity",
    "antisym_probability",
)


@dataclass(frozen=True)
class StudyRow:
    clifford_infidelity: float
    t_infidelity: float
    rs_error: float
    synth_error: float
    t_count: int
    clifford_count: int
    fidelity: float
    antisym_probability: float

    def csv(self) -> str:
        vals = asdict(self)
        return ",".join(
            str(vals[c]) if isinstance(vals[c], int) else format(vals[c], ".10g") for c in CSV_COLUMNS
        )


@dataclass(frozen=True)
class StudyConfig:
    integers: tuple[int, ...] = (0, 1, 2)
    eta: int = 3
    clifford_infidelities: tuple[float, ...] = CLIFFORD_TIERS
    t_infidelities: tuple[float, ...] = T_TIERS
    rs_errors: tuple[float, ...] = RS_ERRORS
    include_zero_noise: bool = True
    reuse_ancillas: bool = True
    threads: int = 1
    extra_points: tuple[tuple[float, float, float], ...] = field(default=())


def synthesized(c: Circuit, rs_error: float) -> tuple[Circuit, float]:
    """Replace every RZ by its Clifford+T word; returns the worst word error.

    ``rs_error == 0`` keeps the exact rotations.
    """
    if rs_error == 0:
        return c, 0.0
    out, worst = [], 0.0
    for g in c.gates:
        if g.kind is not Kind.RZ:
            out.append(g)
            continue
        res = synthesize_rz(g.theta, rs_error, floor=rs_error)
        worst = max(worst, res.error)
        out += [Gate(Kind(name), g.targets, condition=g.condition) for name in res.word]
    return c.with_gates(out), worst


def study_circuits(orbitals: OrbitalSet, reuse_ancillas: bool = True) -> tuple[Circuit, Circuit]:
    """Lowered preparation circuit (rotations kept) and lowered swap-test circuit."""
    prep = lower_circuit(build_full_measurement(orbitals, reuse_ancillas=reuse_ancillas)).circuit
    test = lower_circuit(antisym_probability_circuit(orbitals.n, orbitals.eta, sequential=True)).circuit
    return prep, test


def evaluate(
    prep: Circuit,
    test: Circuit,
    target: DensityMatrix,
    noise: NoiseModel,
) -> tuple[float, float]:
    """(fidelity, antisymmetry probability) of one noisy run."""
    particles = list(range(prep.n_particles * prep.eta))
    rho = run_density(prep, noise, keep_wires=particles)
    f = fidelity(rho, target)
    init = DensityMatrix(test.n_qubits, _pad(rho.matrix, test.n_qubits - rho.n_qubits))
    ones = {b: 1 for b in range(test.n_cbits)}
    branches = run_density_branches(test, noise, initial=init, keep_wires=(), postselect=ones)
    p = sum(b.probability for b in branches)
    return f, float(p)


def _pad(rho: np.ndarray, extra: int) -> np.ndarray:
    zero = np.zeros((2**extra, 2**extra), dtype=complex)
    zero[0, 0] = 1
    return np.kron(zero, rho)


def _point(prep, test, target, rs, c_inf, t_inf):
    circ, err = synthesized(prep, rs)
    tally = counts(circ, include_conditioned=False)
    f, p = evaluate(circ, test, target, NoiseModel(c_inf, t_inf))
    log.info("point clifford=%g t=%g rs=%g -> F=%.6f P=%.6f", c_inf, t_inf, rs, f, p)
    return StudyRow(c_inf, t_inf, rs, err, tally.t_like, tally.clifford, f, p)


def study_points(cfg: StudyConfig) -> list[tuple[float, float, float]]:
    pts = [
        (rs, c, t)
        for rs in cfg.rs_errors
        for c in cfg.clifford_infidelities
        for t in cfg.t_infidelities
    ]
    if cfg.include_zero_noise:
        pts.append((0.0, 0.0, 0.0))
    pts += list(cfg.extra_points)
    return sorted(set(pts))


def run_noise_study(cfg: StudyConfig | None = None) -> list[StudyRow]:
    cfg = cfg or StudyConfig()
    orbitals = OrbitalSet.from_integers(cfg.integers, cfg.eta)
    prep, test = study_circuits(orbitals, cfg.reuse_ancillas)
    width = max(prep.n_qubits, test.n_qubits)
    if width > DENSITY_CAP:
        raise ValueError(f"noise study needs {width} qubits, density simulation is capped at {DENSITY_CAP}")
    psi = antisymmetrizer_oracle(orbitals)
    target = DensityMatrix.from_state(psi)
    pts = study_points(cfg)
    _kernel.set_threads(cfg.threads)
    rows = [_point(prep, test, target, *p) for p in pts]
    return sorted(rows, key=lambda r: (r.clifford_infidelity, r.t_infidelity, r.rs_error))


def rows_to_csv(rows: Sequence[StudyRow]) -> str:
    return "\n".join([",".join(CSV_COLUMNS), *(r.csv() for r in rows)]) + "\n"


def check_findings(rows: Sequence[StudyRow], tol: float = 0.02) -> dict[str, bool]:
    """The three qualitative findings, evaluated on a finished sweep."""
    by = {(r.clifford_infidelity, r.t_infidelity, r.rs_error): r for r in rows}
    eps = sorted({r.rs_error for r in rows if r.rs_error > 0})
    out = {}
    best_eps = []
    for name in ("moderate", "worst"):
        c, t = NAMED_TIERS[name]
        fs = {e: by[(c, t, e)].fidelity for e in eps if (c, t, e) in by}
        if fs:
            best_eps.append(max(fs, key=fs.get) == max(eps))
    out["largest_rs_error_wins"] = bool(best_eps) and all(best_eps)
    out["antisym_below_fidelity"] = all(r.antisym_probability <= r.fidelity + tol for r in rows)
    mono = True
    noisy = [r for r in rows if r.rs_error > 0]
    for r in noisy:
        for s in noisy:
            if s.rs_error != r.rs_error:
                continue
            if s.t_infidelity == r.t_infidelity and s.clifford_infidelity > r.clifford_infidelity:
                mono &= s.fidelity <= r.fidelity + 1e-12
            if s.clifford_infidelity == r.clifford_infidelity and s.t_infidelity > r.t_infidelity:
                mono &= s.fidelity <= r.fidelity + 1e-12
    out["fidelity_monotone"] = mono
    return out


def exact_row_ok(rows: Sequence[StudyRow], tol: float = 1e-9) -> bool:
    zero = [r for r in rows if r.rs_error == 0 and r.clifford_infidelity == 0 and r.t_infidelity == 0]
    return bool(zero) and all(
        math.isclose(r.fidelity, 1, abs_tol=tol) and math.isclose(r.antisym_probability, 1, abs_tol=tol)
        for r in zero
    )
