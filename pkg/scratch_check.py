"""Early physics validation: conventions, golden rule, cancellation."""
import time

import numpy as np

from fermiline.model import ModelParams, Discretization, validate, decouple
from fermiline.hilbert import enumerate_basis, build_hamiltonian
from fermiline.dynamics import TimeGrid, evolve, initial_state, standard_observables
from fermiline import perturbation as pt

np.set_printoptions(precision=4)

# --- 1. ordered_exp vs reference ---
grid = TimeGrid(t_max=2.0, steps=40)
rng = np.random.default_rng(0)
freqs = rng.uniform(-3, 3, size=(5, 3))
fast = pt.ordered_exp_integrals(freqs, grid)
for i in range(5):
    ref = pt.reference_ordered_exp(freqs[i], grid.t_max)
    print("J3 fast vs ref:", abs(fast[i, -1] - ref))

# degenerate freqs
freqs_deg = np.array([[0.0, 0.0, 0.0], [1.0, -1.0, 0.0], [2.0, -2.0, 2.0]])
fast = pt.ordered_exp_integrals(freqs_deg, grid)
print("J3(0,0,0; t) vs t^3/6:", abs(fast[0, -1] - grid.t_max**3 / 6))
for i in (1, 2):
    print("deg vs ref:", abs(fast[i, -1] - pt.reference_ordered_exp(freqs_deg[i], grid.t_max)))

# --- 2. single-qubit golden rule (small, quick version) ---
t0 = time.time()
gamma_target = np.pi * 0.01
t_max = 1.5 / gamma_target
params = ModelParams(omega_a=1.0, omega_b=1.0, k_a=0.01, k_b=0.0, x_a=0.0, x_b=np.pi)
disc = Discretization(modes=700, omega_max=12.0, box_length=2.0 * (np.pi + t_max) * 1.05,
                      n_max=1, t_max=t_max)
cfg = validate(params, disc)
print("active modes:", cfg.n_active, "delta_omega:", cfg.mode_omega[2] - cfg.mode_omega[0])
basis = enumerate_basis(cfg.n_active, 1)
h = build_hamiltonian(cfg, basis)
print("dim:", basis.dim, "nnz:", h.nnz, "herm exact:", (h.matrix - h.matrix.getH()).nnz == 0)
g = TimeGrid(t_max=t_max, steps=400)
traj = evolve(h, initial_state(basis), g, store_snapshots=False,
              diag_observables=standard_observables(basis))
p = traj.series["p_e_a"]
t = g.times
win = (t > 0.3 / gamma_target) & (t < 1.4 / gamma_target)
slope = np.polyfit(t[win], np.log(p[win]), 1)[0]
print(f"golden rule: fit {-slope:.5f} vs target {gamma_target:.5f} "
      f"rel err {abs(-slope - gamma_target) / gamma_target:.3%}  ({time.time()-t0:.1f}s)")
print("norm drift:", traj.norm_drift, "energy drift:", traj.energy_drift)

# --- 3. M1 background vs ED (d_a = 0) ---
t0 = time.time()
params = ModelParams(omega_a=1.0, omega_b=1.0, k_a=0.0, k_b=0.0225, x_a=0.0, x_b=np.pi)
disc = Discretization(modes=128, omega_max=20.0, box_length=8 * np.pi, n_max=2, t_max=2 * np.pi)
cfg = validate(params, disc)
print("active modes:", cfg.n_active)
basis = enumerate_basis(cfg.n_active, 2)
h = build_hamiltonian(cfg, basis)
g = TimeGrid(t_max=2 * np.pi, steps=160)
traj = evolve(h, initial_state(basis), g, store_snapshots=False,
              diag_observables=standard_observables(basis))
curves = pt.prob_curves(cfg, g, include_interference=False)
ed = traj.series["p_e_b"]
m1 = curves.background
print("ED p_e_b end:", ed[-1], "M1^2 end:", m1[-1], "rel:", abs(ed[-1] - m1[-1]) / ed[-1])
print("max rel diff (t>1):", np.max(np.abs(ed[20:] - m1[20:]) / ed[20:]), f"({time.time()-t0:.1f}s)")

# --- 4. cancellation + ED differential (the core check) ---
t0 = time.time()
K = 0.0225
params = ModelParams(omega_a=1.0, omega_b=1.0, k_a=K, k_b=K, x_a=0.0, x_b=np.pi)
disc = Discretization(modes=512, omega_max=30.0, box_length=8 * np.pi, n_max=2, t_max=2 * np.pi)
cfg = validate(params, disc)
print("active modes:", cfg.n_active)
g = TimeGrid(t_max=2 * np.pi, steps=256)
curves = pt.prob_curves(cfg, g)
pre, post = pt.prefront_suppression(curves, cfg)
pre_x = np.max(curves.joint_r[cfg.params.v * g.times <= 0.95 * np.pi])
print(f"PT cancellation: pre {pre:.3e} post {post:.3e} ratio {pre/post:.3e}")
print(f"  |x|^2 only: pre {pre_x:.3e} ratio {pre_x/post:.3e}  ({time.time()-t0:.1f}s)")

# ED differential at the same parameters
t0 = time.time()
basis = enumerate_basis(cfg.n_active, 2)
h_full = build_hamiltonian(cfg, basis)
print("dim:", basis.dim, "nnz:", h_full.nnz)
obs = standard_observables(basis)
traj_full = evolve(h_full, initial_state(basis), g, store_snapshots=False, diag_observables=obs)
cfg0 = decouple(cfg, "a")
h0 = build_hamiltonian(cfg0, basis)
traj0 = evolve(h0, initial_state(basis), g, store_snapshots=False, diag_observables=obs)
dp = traj_full.series["p_e_b"] - traj0.series["p_e_b"]
vt = cfg.params.v * g.times
pre_ed = np.max(np.abs(dp[vt <= 0.95 * np.pi]))
post_ed = np.max(np.abs(dp[(vt >= np.pi) & (vt <= 2 * np.pi)]))
print(f"ED differential: pre {pre_ed:.3e} post {post_ed:.3e} ratio {pre_ed/post_ed:.3e} ({time.time()-t0:.1f}s)")

# PT vs ED overlay
num = np.linalg.norm(dp - curves.total)
den = max(np.linalg.norm(dp), np.linalg.norm(curves.total))
print("PT vs ED rel L2:", num / den)

# joint probability comparison
joint_ed = traj_full.series["p_eb_ga"]
joint_pt = curves.joint_r + curves.pair_background
print("joint ED end:", joint_ed[-1], "PT end:", joint_pt[-1],
      "rel:", abs(joint_ed[-1] - joint_pt[-1]) / joint_ed[-1])
print("joint pre-front ED max:", np.max(joint_ed[vt <= 0.95 * np.pi]))
