"""Command-line front end.

Every subcommand reads one JSON config (``--config``) and writes its main
result to ``--out`` or stdout.  ``--seed`` overrides a config ``seed`` and
``--threads`` sets the simulator's thread count.

    antisym build --config configs/build_measurement_n3.json --out n3.circ
    antisym noise-study --config configs/noise_study.json --out sweep.csv
    antisym resources --config configs/resources.json
    antisym verify --config configs/verify_n3.json
    antisym synth --config configs/synth_ancilla_angle.json
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import asdict
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import _kernel
from .builder import OrbitalSet, build_full_measurement, build_full_recursive
from .circuit import Circuit, counts, from_text, to_text
from .experiments import StudyConfig, check_findings, exact_row_ok, rows_to_csv, run_noise_study
from .gates import Kind
from .lowering import LoweringOptions, lower_circuit
from .resources import (
    QUOTED_HYBRID_COMPARATORS,
    hybrid_cost,
    resource_rows,
    rows_to_csv as resources_csv,
    rows_to_text as resources_text,
    scaling_text,
)
from .sim import run_statevector
from .synth import RS_REFERENCE, ANCILLA_ANGLE, SynthesisCache, synthesize_ry, synthesize_rz, rs_reference
from .verify import antisymmetrizer_oracle, overlap_up_to_global_phase, pair_probabilities, particle_state

log = logging.getLogger("antisym")


class ConfigError(ValueError):
    def __init__(self, field: str, message: str):
        super().__init__(f"config field {field!r}: {message}")
        self.field = field


# -- config helpers -------------------------------------------------------------------------


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise ConfigError("<root>", f"invalid JSON in {path}: {e}") from None
    if not isinstance(data, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    return data


def _check_keys(cfg: dict, allowed: set[str]) -> None:
    extra = sorted(set(cfg) - allowed)
    if extra:
        raise ConfigError(extra[0], f"unknown field (allowed: {', '.join(sorted(allowed))})")


def _get(cfg: dict, key: str, kind: type | tuple, default: Any = None, check: Callable | None = None, why: str = ""):
    if key not in cfg:
        return default
    v = cfg[key]
    if kind in (float, int) and isinstance(v, bool) or not isinstance(v, kind):
        names = kind.__name__ if isinstance(kind, type) else "/".join(k.__name__ for k in kind)
        raise ConfigError(key, f"expected {names}, got {type(v).__name__}")
    if check is not None and not check(v):
        raise ConfigError(key, why or f"invalid value {v!r}")
    return v


def _number_list(cfg: dict, key: str, default, positive: bool = False) -> tuple[float, ...]:
    v = _get(cfg, key, list, None)
    if v is None:
        return tuple(default)
    out = []
    for x in v:
        if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
            raise ConfigError(key, f"entries must be finite numbers, got {x!r}")
        if x < 0 or (positive and x == 0):
            raise ConfigError(key, f"entries must be {'positive' if positive else 'nonnegative'}, got {x!r}")
        out.append(float(x))
    return tuple(out)


def _amplitude(x, field: str) -> complex:
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return complex(x)
    if isinstance(x, list) and len(x) == 2 and all(isinstance(y, (int, float)) for y in x):
        return complex(x[0], x[1])
    raise ConfigError(field, f"amplitudes are numbers or [re, im] pairs, got {x!r}")


def _random_orbitals(n: int, eta: int, seed: int) -> list[np.ndarray]:
    rng = np.random.default_rng(seed)
    d = 2**eta
    z = rng.normal(size=(d, n)) + 1j * rng.normal(size=(d, n))
    q, _ = np.linalg.qr(z)
    return [q[:, i] for i in range(n)]


ORBITAL_KEYS = {"n", "eta", "integers", "orbitals", "orbital_files", "random_orbitals", "seed"}


def orbitals_from_config(cfg: dict, seed: int | None = None) -> OrbitalSet:
    sources = [k for k in ("integers", "orbitals", "orbital_files", "random_orbitals") if k in cfg]
    if len(sources) != 1:
        raise ConfigError("integers", "give exactly one of integers, orbitals, orbital_files, random_orbitals")
    src = sources[0]
    if src == "integers":
        eta = _get(cfg, "eta", int, None, lambda e: e >= 1, "eta must be >= 1")
        if eta is None:
            raise ConfigError("eta", "required with integers")
        ints = _get(cfg, "integers", list)
        for r in ints:
            if isinstance(r, bool) or not isinstance(r, int) or not 0 <= r < 2**eta:
                raise ConfigError("integers", f"entries must be integers in [0, {2**eta}), got {r!r}")
        orbs = OrbitalSet.from_integers(ints, eta)
    elif src == "random_orbitals":
        spec = _get(cfg, "random_orbitals", dict)
        n, eta = spec.get("n"), spec.get("eta")
        if not isinstance(n, int) or not isinstance(eta, int) or n < 1 or eta < 1 or n > 2**eta:
            raise ConfigError("random_orbitals", "needs integers n >= 1, eta >= 1 with n <= 2^eta")
        s = seed if seed is not None else _get(cfg, "seed", int, 0)
        orbs = OrbitalSet.from_vectors(_random_orbitals(n, eta, s))
    else:
        if src == "orbitals":
            raw = _get(cfg, "orbitals", list)
            vecs = [np.array([_amplitude(x, "orbitals") for x in v], dtype=complex) for v in raw]
        else:
            files = _get(cfg, "orbital_files", list)
            vecs = []
            for f in files:
                a = np.atleast_2d(np.loadtxt(f, dtype=float, ndmin=2))
                vecs.append(a[:, 0] + (1j * a[:, 1] if a.shape[1] > 1 else 0))
        if not vecs:
            raise ConfigError(src, "needs at least one orbital")
        sizes = {v.size for v in vecs}
        if len(sizes) != 1 or vecs[0].size & (vecs[0].size - 1) or vecs[0].size < 2:
            raise ConfigError(src, "all orbitals need the same power-of-two length >= 2")
        orbs = OrbitalSet.from_vectors(vecs)
        if "eta" in cfg and cfg["eta"] != orbs.eta:
            raise ConfigError("eta", f"orbitals have {vecs[0].size} amplitudes, so eta is {orbs.eta}")
    if "n" in cfg and cfg["n"] != orbs.n:
        raise ConfigError("n", f"declares {cfg['n']} particles but {orbs.n} orbitals were given")
    return orbs


# -- subcommands ----------------------------------------------------------------------------


def _write(path: str, text: str) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(text)


def _emit(text: str, out: str | None) -> None:
    if out:
        _write(out, text)
    else:
        sys.stdout.write(text)


def cmd_build(cfg: dict, args) -> int:
    _check_keys(cfg, ORBITAL_KEYS | {"variant", "reuse_ancillas", "sort_by_cost", "lower", "toffoli_style", "epsilon"})
    orbs = orbitals_from_config(cfg, args.seed)
    variant = _get(cfg, "variant", str, "recursive", lambda v: v in ("recursive", "measurement"),
                   "must be 'recursive' or 'measurement'")
    sign = 1
    if _get(cfg, "sort_by_cost", bool, False):
        orbs, sign = orbs.sorted_by_cost()
    if variant == "recursive":
        c = build_full_recursive(orbs)
    else:
        c = build_full_measurement(orbs, reuse_ancillas=_get(cfg, "reuse_ancillas", bool, True))
    if _get(cfg, "lower", bool, True):
        eps = _get(cfg, "epsilon", (int, float), None, lambda e: e > 0, "must be positive")
        opts = LoweringOptions(
            toffoli_style=_get(cfg, "toffoli_style", str, "exact", lambda v: v == "exact",
                               "only 'exact' is valid for whole circuits"),
            keep_rotations=eps is None,
            epsilon=eps,
        )
        c = lower_circuit(c, opts).circuit
    report = {
        "variant": variant,
        "n_particles": c.n_particles,
        "eta": c.eta,
        "n_qubits": c.n_qubits,
        "n_cbits": c.n_cbits,
        "sign": sign,
        "counts": asdict(counts(c)),
        "counts_unconditioned": asdict(counts(c, include_conditioned=False)),
    }
    if args.out:
        _write(args.out, to_text(c))
        print(json.dumps(report, indent=2))
    else:
        sys.stdout.write(to_text(c))
        print(json.dumps(report), file=sys.stderr)
    return 0


def cmd_noise_study(cfg: dict, args) -> int:
    _check_keys(cfg, {"integers", "eta", "clifford_infidelities", "t_infidelities", "rs_errors",
                      "include_zero_noise", "reuse_ancillas", "seed"})
    defaults = StudyConfig()
    ints = _get(cfg, "integers", list, list(defaults.integers))
    eta = _get(cfg, "eta", int, defaults.eta, lambda e: e >= 1, "eta must be >= 1")
    orbitals_from_config({"integers": ints, "eta": eta})  # validates
    study = StudyConfig(
        integers=tuple(ints),
        eta=eta,
        clifford_infidelities=_number_list(cfg, "clifford_infidelities", defaults.clifford_infidelities),
        t_infidelities=_number_list(cfg, "t_infidelities", defaults.t_infidelities),
        rs_errors=_number_list(cfg, "rs_errors", defaults.rs_errors, positive=True),
        include_zero_noise=_get(cfg, "include_zero_noise", bool, True),
        reuse_ancillas=_get(cfg, "reuse_ancillas", bool, True),
        threads=args.threads,
    )
    for key in ("clifford_infidelities", "t_infidelities"):
        if any(x > 0.25 for x in getattr(study, key)):
            raise ConfigError(key, "infidelities must lie in [0, 0.25]")
    rows = run_noise_study(study)
    _emit(rows_to_csv(rows), args.out)
    findings = check_findings(rows)
    if study.include_zero_noise:
        findings["zero_noise_row_exact"] = exact_row_ok(rows)
    for k, v in findings.items():
        print(f"{k}: {'yes' if v else 'no'}", file=sys.stderr)
    return 0


def cmd_resources(cfg: dict, args) -> int:
    _check_keys(cfg, {"n_min", "n_max", "format", "hybrid", "scaling"})
    lo = _get(cfg, "n_min", int, 2, lambda v: v >= 2, "must be >= 2")
    hi = _get(cfg, "n_max", int, 40, lambda v: v >= lo, "must be >= n_min")
    fmt = _get(cfg, "format", str, "csv", lambda v: v in ("csv", "text"), "must be 'csv' or 'text'")
    rows = resource_rows(lo, hi)
    text = resources_csv(rows) if fmt == "csv" else resources_text(rows)
    hybrid = _get(cfg, "hybrid", list, [])
    for pair in hybrid:
        if not (isinstance(pair, list) and len(pair) == 2 and all(isinstance(x, int) for x in pair)):
            raise ConfigError("hybrid", f"entries are [N, split] pairs, got {pair!r}")
        try:
            comp, ctrl = hybrid_cost(*pair)
        except ValueError as e:
            raise ConfigError("hybrid", str(e)) from None
        text += f"# hybrid N={pair[0]} split={pair[1]}: {comp} comparators + {ctrl} C^eta X gates\n"
        quoted = QUOTED_HYBRID_COMPARATORS.get(pair[1])
        if quoted is not None and quoted != comp:
            text += f"#   note: {quoted} comparators is the quoted figure; the odd-even mergesort formula gives {comp}\n"
    if _get(cfg, "scaling", bool, False):
        text += "".join(f"# {line}\n" for line in scaling_text().splitlines())
    _emit(text, args.out)
    return 0


def _verify_report(c: Circuit, orbs: OrbitalSet) -> dict:
    if (c.n_particles, c.eta) != (orbs.n, orbs.eta):
        raise ValueError(
            f"circuit has {c.n_particles} particles of {c.eta} qubits, orbitals give {orbs.n} of {orbs.eta}"
        )
    target = antisymmetrizer_oracle(orbs)
    records = run_statevector(c)
    branches = []
    for r in records:
        v, p0 = particle_state(r.state, c)
        branches.append(
            {
                "outcome": "".join(map(str, reversed(r.outcome))),
                "probability": r.probability,
                "overlap": overlap_up_to_global_phase(v, target.amplitudes),
                "ancilla_zero_probability": p0,
                "state": v,
            }
        )
    best = max(branches, key=lambda b: b["probability"])
    pairs = pair_probabilities(best["state"], orbs.n, orbs.eta) if orbs.n > 1 else {}
    for b in branches:
        del b["state"]
    return {
        # measured ancillas keep their outcome bits, so ancilla-zero only certifies unitary circuits
        "measures_ancillas": any(g.kind is Kind.MEASURE for g in c.gates),
        "min_overlap": min(b["overlap"] for b in branches),
        "ancilla_zero_probability": sum(b["probability"] * b["ancilla_zero_probability"] for b in branches),
        "pair_probabilities": {f"{i},{j}": p for (i, j), p in pairs.items()},
        "branches": branches,
    }


def cmd_verify(cfg: dict, args) -> int:
    _check_keys(cfg, ORBITAL_KEYS | {"circuit"})
    path = _get(cfg, "circuit", str)
    if path is None:
        raise ConfigError("circuit", "required (path to a circuit text file)")
    c = from_text(Path(path).read_text())
    orbs = orbitals_from_config({k: v for k, v in cfg.items() if k != "circuit"}, args.seed)
    _emit(json.dumps(_verify_report(c, orbs), indent=2) + "\n", args.out)
    return 0


def cmd_synth(cfg: dict, args) -> int:
    _check_keys(cfg, {"theta", "axis", "epsilon", "floor", "max_t", "cache"})
    theta = cfg.get("theta", "ancilla")
    if theta == "ancilla":
        theta = ANCILLA_ANGLE
    elif isinstance(theta, bool) or not isinstance(theta, (int, float)) or not math.isfinite(theta):
        raise ConfigError("theta", "must be a finite number or 'ancilla'")
    axis = _get(cfg, "axis", str, "y", lambda v: v in ("y", "z"), "must be 'y' or 'z'")
    eps = _get(cfg, "epsilon", (int, float), 0.1, lambda e: e > 0, "must be positive")
    floor = _get(cfg, "floor", (int, float), min(eps, 5e-3), lambda f: 0 < f <= eps, "must be in (0, epsilon]")
    max_t = _get(cfg, "max_t", int, 40, lambda m: m >= 0, "must be >= 0")
    cache = SynthesisCache(cfg["cache"]) if "cache" in cfg else None
    fn = synthesize_ry if axis == "y" else synthesize_rz
    res = fn(float(theta), float(eps), floor=floor, max_t=max_t, cache=cache)
    report = {
        "axis": axis,
        "theta": res.theta,
        "epsilon": res.epsilon,
        "error": res.error,
        "t_count": res.t_count,
        "total_count": res.total_count,
        "word": " ".join(res.word),
    }
    ref = rs_reference(eps) if math.isclose(theta, ANCILLA_ANGLE) else None
    if ref is not None:
        report["reference"] = {"error": ref[0], "t_count": ref[1], "total_count": ref[2]}
    elif math.isclose(theta, ANCILLA_ANGLE):
        report["reference_rows"] = [list(r) for r in RS_REFERENCE]
    _emit(json.dumps(report, indent=2) + "\n", args.out)
    return 0


COMMANDS = {
    "build": cmd_build,
    "noise-study": cmd_noise_study,
    "resources": cmd_resources,
    "verify": cmd_verify,
    "synth": cmd_synth,
}


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="antisym", description="Recursive antisymmetrization circuits.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="JSON config file")
        s.add_argument("--out", help="output file (default: stdout)")
        s.add_argument("--seed", type=int, default=None, help="overrides the config seed")
        s.add_argument("--threads", type=int, default=1, help="simulator threads")
        s.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv: list[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.threads < 1:
            raise ConfigError("--threads", "must be >= 1")
        if args.seed is not None and not 0 <= args.seed < 2**64:
            raise ConfigError("--seed", "must be an unsigned 64-bit integer")
        _kernel.set_threads(args.threads)
        cfg = load_config(args.config)
        return COMMANDS[args.command](cfg, args)
    except (ValueError, RuntimeError, OSError, KeyError) as e:
        print(f"antisym {args.command}: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
