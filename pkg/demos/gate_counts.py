"""Clifford+T tallies for the circuits of the three-particle noise study.

Three particles in eta = 3 qubits holding |0>, |1>, |2>.  Conditioned phase
fixes are listed separately since only some branches execute them.
"""

from antisym.builder import OrbitalSet, build_full_measurement, build_full_recursive, phase_correction
from antisym.builder import basis_orbital
from antisym.circuit import counts
from antisym.lowering import lower_circuit

orbitals = OrbitalSet.from_integers([0, 1, 2], eta=3)

meas = lower_circuit(build_full_measurement(orbitals)).circuit
rec = lower_circuit(build_full_recursive(orbitals)).circuit
fix = lower_circuit(phase_correction(basis_orbital(2, 3))).circuit

always = counts(meas, include_conditioned=False)
every = counts(meas)
print(f"measurement variant: {always.clifford} Clifford, {always.t_like} T-like "
      f"({every.clifford - always.clifford} Clifford, {every.t_like - always.t_like} T-like more "
      f"if every conditioned fix ran), {meas.n_qubits} qubits")
c = counts(rec)
print(f"unitary variant:     {c.clifford} Clifford, {c.t_like} T-like, {rec.n_qubits} qubits")
c = counts(fix)
print(f"one phase fix P(U):  {c.clifford} Clifford, {c.t_like} T-like")
