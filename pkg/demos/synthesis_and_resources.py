"""Rotation synthesis for the ancilla angle, and sorting-network comparisons.

The only non-Clifford rotation of the three-particle circuit is
Ry(2 arccos sqrt(1/3)).  A meet-in-the-middle search finds short Clifford+T
words for it; the published Ross-Selinger counts are shown alongside.
"""

import time

from antisym.resources import avg_phase_corrections, crossover_set, hybrid_cost, n_comp, n_ctrl
from antisym.synth import ANCILLA_ANGLE, synthesize_ry, rs_reference

for eps in (1e-1, 9e-3):
    t0 = time.perf_counter()
    res = synthesize_ry(ANCILLA_ANGLE, eps, floor=eps)
    ref = rs_reference(eps)
    print(f"eps={eps:g}: {res.t_count} T / {res.total_count} gates, error {res.error:.3g} "
          f"({time.perf_counter() - t0:.1f} s); reference {ref[1]} T / {ref[2]} gates")

print()
print("sorting needs at least as many comparators as C^eta X gates for N in", crossover_set(40))
for n in (64, 65):
    print(f"N={n}: {n_comp(n)} comparators vs {n_ctrl(n)} C^eta X, ratio {n_comp(n) / n_ctrl(n):.3f}")
comp, ctrl = hybrid_cost(65, 64)
print(f"hybrid for 65 particles: sort 64 ({comp} comparators) then {ctrl} C^eta X; direct sort {n_comp(65)}")
for n in (10, 50, 200):
    r = avg_phase_corrections(n) / n_ctrl(n)
    print(f"mean phase fixes / N(N-1)/2 at N={n}: {float(r):.4f}")
