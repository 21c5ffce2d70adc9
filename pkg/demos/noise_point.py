"""One point of the noise study, at moderate hardware noise.

Clifford infidelity 9e-4 and T infidelity 6e-3, with the ancilla rotation
synthesized at three accuracies.  Coarser synthesis means fewer noisy gates,
which wins here.
"""

from antisym.experiments import StudyConfig, rows_to_csv, run_noise_study

cfg = StudyConfig(clifford_infidelities=(9e-4,), t_infidelities=(6e-3,), include_zero_noise=False)
rows = run_noise_study(cfg)
print(rows_to_csv(rows), end="")
best = max(rows, key=lambda r: r.fidelity)
print(f"highest fidelity {best.fidelity:.4f} at synthesis error {best.rs_error:g}")
