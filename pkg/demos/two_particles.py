"""Two fermions on one qubit each, built by hand and checked against the permutation sum.

Particle 1 starts in |0>, particle 2 in |1>.  One ancilla prepared in |->
controls a swap; the ancilla is then uncomputed by asking whether particle 1
now holds particle 2's orbital.
"""

from antisym.builder import OrbitalSet, build_full_recursive
from antisym.circuit import counts, to_text
from antisym.sim import final_state
from antisym.verify import antisymmetrizer_oracle, overlap_up_to_global_phase, particle_state

orbitals = OrbitalSet.from_integers([0, 1], eta=1)
circuit = build_full_recursive(orbitals)
print(to_text(circuit))

psi = final_state(circuit)
particles, p_clean = particle_state(psi, circuit)
target = antisymmetrizer_oracle(orbitals)

print("particle amplitudes:", particles.round(6))
print("oracle amplitudes:  ", target.amplitudes.round(6))
print("overlap with oracle:", overlap_up_to_global_phase(particles, target))
print("ancilla returned to |0> with probability", round(p_clean, 12))
print("gate tally before lowering:", counts(circuit))
