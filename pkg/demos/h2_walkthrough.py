"""Step through the hybrid subspace algorithm by hand on H2 / STO-3G.

Run with ``python3 demos/h2_walkthrough.py``.
"""

import numpy as np

from subspectra import (
    EmulatorConfig,
    ExcitationOperator,
    TimeGrid,
    accumulate_loschmidt,
    apply_excitation,
    assemble_correlator,
    born_sample,
    build_hamiltonian,
    enumerate_sector,
    extract_peaks,
    format_det,
    fourier_spectrum,
    full_spectrum,
    ground_state,
    load_fixture,
    measure_many,
    project_and_propagate,
)

table = load_fixture("h2_sto3g")
sector = enumerate_sector(table.norb, table.n_up, table.n_down)
H = build_hamiltonian(table, sector.dets)
e0, psi0 = ground_state(H, sector)
print(f"{len(sector)} determinants, E0 = {e0:.10f} Ha")

op = ExcitationOperator.parse("+1.u -0.u")
psi_A, a_norm2 = apply_excitation(op, psi0)
print(f"A = {op}, <A^dag A> = {a_norm2:.6f}")

cfg = EmulatorConfig(shots_per_step=4096, seed=0)
samples = born_sample(psi_A, cfg.n_samples, cfg.seed)
weights = dict(zip(samples.dets, samples.frequencies.tolist()))
subspaces = measure_many(sorted(weights), H, psi_A.sector, cfg)
for x, s in subspaces.items():
    print(f"  x = {format_det(x, table.norb)}  weight {weights[x]:.4f}  dim S_x = {s.dim}")

grid = TimeGrid()
estimators = {
    x: project_and_propagate(x, subspaces[x].members, table).estimator_series(psi_A, grid) for x in weights
}
series = accumulate_loschmidt(weights, estimators, grid, "stochastic", cfg.n_samples)
series = assemble_correlator(series, e0, a_norm2)

spec = extract_peaks(fourier_spectrum(series, omega_max=3.0), threshold=5e-3)
ref = full_spectrum(H, psi_A, e0=e0, a_norm2=a_norm2)
gaps, w = ref.levels()
print("extracted peaks (Ha):", " ".join(f"{p.omega:.4f}" for p in spec.peaks))
print("exact gaps (Ha):     ", " ".join(f"{g:.4f}" for g, x in zip(gaps, w) if x > 5e-3))
print(f"resolution pi/T = {np.pi / grid.t_max_long:.2e} Ha")
