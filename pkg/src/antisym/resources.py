"""Closed-form resource counts and comparisons with sorting-based methods.

Sorting-based antisymmetrization pays one integer comparator per comparison
of odd-even mergesort (array padded to a power of two).  The recursive
construction pays one ``C^eta X`` per ancilla it uncomputes.  Everything here
is exact integer or rational arithmetic.
"""

from __future__ import annotations

import csv
import io
import re
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .circuit import Circuit
from .gates import Kind

# Scaling rows kept as documentation; big-O claims are not computed.
SCALING_ORDERED_INPUT = (
    ("Abrams & Lloyd", "O(N^2 log^2 N_s)"),
    ("Berry et al. (odd-even mergesort)", "O(N log^2 N log N_s)"),
    ("recursive antisymmetrization", "O(N^2 log N_s)"),
)
SCALING_ORBITAL_INPUT = (
    ("Babbush et al.", "O(N N_s)"),
    ("recursive antisymmetrization", "O(N^2 sqrt(N_s))"),
)

# Comparator count quoted in the literature for the 64-particle sort of the
# N=65 hybrid example; the closed form gives n_comp(64) = 543.
QUOTED_HYBRID_COMPARATORS = {64: 606}

TABLE_COLUMNS = ("N", "n_comp", "n_ctrl", "comp_over_ctrl", "crossover", "avg_corrections", "corrections_over_ctrl")


def _ceil_log2(n: int) -> int:
    return (n - 1).bit_length()


def n_comp(n: int) -> int:
    """Odd-even mergesort comparators for ``n`` integers padded to ``2^m``."""
    if n < 2:
        raise ValueError(f"n_comp needs N >= 2, got {n}")
    m = _ceil_log2(n)
    # 2^(m-2) (m^2 - m + 4) - 1, kept integral for m = 1
    return (((m * m - m + 4) << m) >> 2) - 1


def n_ctrl(n: int) -> int:
    """Multi-controlled X gates used by the unitary recursive construction."""
    if n < 1:
        raise ValueError(f"n_ctrl needs N >= 1, got {n}")
    return n * (n - 1) // 2


def crossover_set(max_n: int) -> list[int]:
    """Particle counts up to ``max_n`` where sorting needs at least as many comparators."""
    if max_n < 2:
        raise ValueError(f"max_N must be >= 2, got {max_n}")
    return [n for n in range(2, max_n + 1) if n_comp(n) >= n_ctrl(n)]


def hybrid_cost(n: int, split: int) -> tuple[int, int]:
    """Sort up to ``split`` particles, then add the rest recursively.

    Returns ``(comparators, C^eta X gates)``; adding particle ``k`` costs
    ``k - 1`` controlled gates.
    """
    if not 2 <= split <= n:
        raise ValueError(f"split must satisfy 2 <= split <= N, got split={split}, N={n}")
    return n_comp(split), sum(k - 1 for k in range(split + 1, n + 1))


def _step_numerator(n: int) -> int:
    """``sum_k min(k, n-k) C(n-1, k)``, binomials built incrementally."""
    total, b = 0, 1
    for k in range(n):
        total += min(k, n - k) * b
        b = b * (n - 1 - k) // (k + 1)
    return total


def avg_phase_corrections(n: int) -> Fraction:
    """Expected number of phase corrections of the measurement variant, exactly."""
    if n < 2:
        raise ValueError(f"avg_phase_corrections needs N >= 2, got {n}")
    # common denominator 2^(N-1)
    num = sum(_step_numerator(k) << (n - k) for k in range(2, n + 1))
    return Fraction(num, 1 << (n - 1))


@dataclass(frozen=True)
class BuilderCounts:
    u_blocks: int
    u_dagger_blocks: int
    cswaps: int
    cetax: int

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.u_blocks, self.u_dagger_blocks, self.cswaps, self.cetax)


def builder_counts(n: int, eta: int) -> BuilderCounts:
    """Structural counts of the unitary recursive construction."""
    if n < 1:
        raise ValueError(f"builder_counts needs N >= 1, got {n}")
    pairs = n * (n - 1) // 2
    return BuilderCounts(n * (n + 1) // 2, pairs, eta * pairs, pairs)


_U_LABEL = re.compile(r"^U\d+(\^dag)?$")


def tally_structure(c: Circuit) -> BuilderCounts:
    """Read the same counts off a circuit built with opaque orbital blocks."""
    labels = Counter(g.label for g in c.gates if g.kind is Kind.UNITARY and g.label and _U_LABEL.match(g.label))
    u = sum(v for k, v in labels.items() if not k.endswith("^dag"))
    ud = sum(v for k, v in labels.items() if k.endswith("^dag"))
    particle = set(range(c.n_particles * c.eta))
    cswaps = sum(1 for g in c.gates if g.kind is Kind.CSWAP)
    cetax = sum(
        1
        for g in c.gates
        if g.kind in (Kind.CNOT, Kind.TOFFOLI, Kind.MCX)
        and len(g.controls) == c.eta
        and all(w in particle for w, _ in g.controls)
        and g.targets[0] not in particle
    )
    return BuilderCounts(u, ud, cswaps, cetax)


# -- tables ---------------------------------------------------------------------------------


def resource_rows(n_min: int, n_max: int) -> list[dict]:
    if n_min < 2 or n_max < n_min:
        raise ValueError(f"need 2 <= n_min <= n_max, got {n_min}..{n_max}")
    rows = []
    for n in range(n_min, n_max + 1):
        comp, ctrl = n_comp(n), n_ctrl(n)
        corr = avg_phase_corrections(n)
        rows.append(
            {
                "N": n,
                "n_comp": comp,
                "n_ctrl": ctrl,
                "comp_over_ctrl": comp / ctrl,
                "crossover": comp >= ctrl,
                "avg_corrections": float(corr),
                "corrections_over_ctrl": float(corr / ctrl),
            }
        )
    return rows


def _cell(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return format(v, ".6f")
    return str(v)


def rows_to_csv(rows: Sequence[dict], columns: Sequence[str] = TABLE_COLUMNS) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(r[c]) for c in columns])
    return buf.getvalue()


def rows_to_text(rows: Sequence[dict], columns: Sequence[str] = TABLE_COLUMNS) -> str:
    cells = [list(columns)] + [[_cell(r[c]) for c in columns] for r in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(columns))]
    return "\n".join("  ".join(s.rjust(w) for s, w in zip(row, widths)) for row in cells) + "\n"


def scaling_text() -> str:
    out = ["T-gate scaling, ordered integer input:"]
    out += [f"  {name:<36} {cost}" for name, cost in SCALING_ORDERED_INPUT]
    out.append("T-gate scaling, orbital product input:")
    out += [f"  {name:<36} {cost}" for name, cost in SCALING_ORBITAL_INPUT]
    return "\n".join(out) + "\n"
