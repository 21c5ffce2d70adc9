"""Measurement-based antisymmetrization of three particles, branch by branch.

Every ancilla readout is equally likely.  Each outcome selects which
particles receive a phase fix; when more than half would need one, the
complementary set is fixed instead, costing only a global sign.
"""

from antisym.builder import OrbitalSet, build_full_measurement, schedule_corrections
from antisym.sim import run_statevector
from antisym.verify import antisymmetrizer_oracle, overlap_up_to_global_phase, particle_state

orbitals = OrbitalSet.from_integers([0, 1, 2], eta=2)
circuit = build_full_measurement(orbitals)
target = antisymmetrizer_oracle(orbitals)

for outcome in ("00", "01", "10", "11"):
    s = schedule_corrections(outcome, 3)
    print(f"step 3 readout {outcome}: fix particles {list(s.corrected_particles)}"
          f"{' (global sign flipped)' if s.sign_flipped_globally else ''}")

print()
total = 0.0
for rec in run_statevector(circuit):
    v, _ = particle_state(rec.state, circuit)
    total += rec.probability
    bits = "".join(map(str, reversed(rec.outcome)))  # ket order, c_1 rightmost
    print(f"c={bits}  p={rec.probability:.4f}  overlap={overlap_up_to_global_phase(v, target):.12f}")
print(f"probabilities sum to {total:.12f}")
