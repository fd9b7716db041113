"""Golden-rule calibration with counter-rotating dressing included."""
import time
import numpy as np

from fermiline.model import ModelParams, Discretization, validate
from fermiline.hilbert import enumerate_basis, build_hamiltonian
from fermiline.dynamics import TimeGrid, evolve, initial_state, standard_observables

t0 = time.time()
K = 0.01
gamma = np.pi * K
t_max = 1.2 / gamma
params = ModelParams(omega_a=1.0, omega_b=1.0, k_a=K, k_b=0.0, x_a=0.0, x_b=np.pi)
L = 2.0 * (np.pi + t_max) * 1.06
disc = Discretization(modes=300, omega_max=10.0, box_length=L, n_max=2, t_max=t_max)
cfg = validate(params, disc)
print("active:", cfg.n_active, "delta_omega:", 2 * np.pi / L)
basis = enumerate_basis(cfg.n_active, 2)
h = build_hamiltonian(cfg, basis)
print("dim:", basis.dim, "nnz:", h.nnz)
g = TimeGrid(t_max=t_max, steps=500)
traj = evolve(h, initial_state(basis), g, store_snapshots=False,
              diag_observables=standard_observables(basis))
p = traj.series["p_e_a"]
t = g.times
win = (t > 0.25 / gamma) & (t < 1.15 / gamma)
slope = np.polyfit(t[win], np.log(p[win]), 1)[0]
print(f"fit {-slope:.5f} vs pi*K*Omega {gamma:.5f}: rel {abs(-slope-gamma)/gamma:.3%}")
print("norm drift:", traj.norm_drift, "energy drift:", traj.energy_drift)
print(f"[{time.time()-t0:.0f}s]")
