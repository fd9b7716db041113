"""Calibrate acceptance criteria 2, 3, 4, 5 numbers."""
import time
import numpy as np

from fermiline.model import ModelParams, Discretization, validate
from fermiline.dynamics import TimeGrid
from fermiline import perturbation as pt
from fermiline import causality as ca

t0 = time.time()

# --- criterion 3: interference cancellation (perturbative route) ---
params = ModelParams(omega_a=1.0, omega_b=1.0, k_a=0.0225, k_b=0.0225, x_a=0.0, x_b=np.pi)
disc = Discretization(modes=512, omega_max=30.0, box_length=8 * np.pi, n_max=2, t_max=2 * np.pi)
cfg = validate(params, disc)
g = TimeGrid(t_max=2 * np.pi, steps=256)
curves = pt.prob_curves(cfg, g)
pre, post = pt.prefront_suppression(curves, cfg)
print(f"[3] full: pre {pre:.3e} post {post:.3e} ratio {pre/post:.3e}")
curves_no_i = pt.prob_curves(cfg, g, include_interference=False)
pre_n, post_n = pt.prefront_suppression(curves_no_i, cfg)
print(f"[3] omitted: pre {pre_n:.3e} post {post_n:.3e} ratio {pre_n/post_n:.3e}")

# doubled rung
disc2 = Discretization(modes=1024, omega_max=60.0, box_length=8 * np.pi, n_max=2, t_max=2 * np.pi)
cfg2 = validate(params, disc2)
curves2 = pt.prob_curves(cfg2, g)
pre2, post2 = pt.prefront_suppression(curves2, cfg2)
print(f"[3] doubled: ratio {pre2/post2:.3e} (was {pre/post:.3e})  [{time.time()-t0:.0f}s]")

# --- criterion 5: rise time at Fig 2c parameters, perturbative route ---
t0 = time.time()
params5 = ModelParams(omega_a=1.0, omega_b=1.0, k_a=0.20, k_b=0.04, x_a=0.0, x_b=2 * np.pi)
t_max5 = 2.2 * 2 * np.pi
disc5 = Discretization(modes=1024, omega_max=30.0, box_length=2.05 * (2 * np.pi + t_max5),
                       n_max=2, t_max=t_max5)
cfg5 = validate(params5, disc5)
g5 = TimeGrid(t_max=t_max5, steps=440)
curves5 = pt.prob_curves(cfg5, g5)
r = 2 * np.pi
res, peak, tf_, rise, thr = ca.front_statistics(g5.times, curves5.total, 1.0, r)
print(f"[5] active={cfg5.n_active} front t*={tf_} (r={r:.3f}) rise={rise}")
print(f"[5] rise in ns at 1 GHz: {rise / (2 * np.pi):.3f} (target 1, factor 2)")
vt = g5.times
win = (vt >= 0.9 * r) & (vt <= 1.5 * r)
ratio_bg = np.max(np.abs(curves5.total[win])) / np.median(curves5.background[win])
print(f"[5] signal/background near front: {ratio_bg:.2f} (need [0.2, 5]) [{time.time()-t0:.0f}s]")

# --- criterion 2: spacelike correlations, both routes, three separations ---
for om_r in (np.pi / 2, np.pi, 2 * np.pi):
    t0 = time.time()
    p2 = ModelParams(omega_a=1.0, omega_b=1.0, k_a=0.0225, k_b=0.0225, x_a=0.0, x_b=om_r)
    t_max2 = 0.92 * om_r
    L2 = max(2.0 * (om_r + t_max2) * 1.04, 4 * om_r)
    d2 = Discretization(modes=600, omega_max=20.0, box_length=L2, n_max=2, t_max=t_max2)
    c2 = validate(p2, d2)
    steps2 = max(int(t_max2 / 0.04), 40)
    g2 = TimeGrid(t_max=t_max2, steps=steps2)
    curves2b = pt.prob_curves(c2, g2, include_interference=False)
    prefront = c2.params.v * g2.times < om_r
    pt_joint = np.max(curves2b.joint_r[prefront])
    # ED joint
    from fermiline.hilbert import enumerate_basis, build_hamiltonian
    from fermiline.dynamics import evolve, initial_state, standard_observables
    basis = enumerate_basis(c2.n_active, 2)
    traj = evolve(build_hamiltonian(c2, basis), initial_state(basis), g2,
                  store_snapshots=False, diag_observables=standard_observables(basis))
    ed_joint = np.max(traj.series["p_eb_ga"][prefront])
    print(f"[2] om_r={om_r:.2f} active={c2.n_active} dim={basis.dim} "
          f"PT joint {pt_joint:.3e} ED joint {ed_joint:.3e} [{time.time()-t0:.0f}s]")

# --- criterion 4: PT vs ED at K = 0.0025 and half ---
for K in (0.0025, 0.00125):
    t0 = time.time()
    p4 = ModelParams(omega_a=1.0, omega_b=1.0, k_a=K, k_b=K, x_a=0.0, x_b=np.pi)
    d4 = Discretization(modes=512, omega_max=30.0, box_length=8 * np.pi, n_max=2, t_max=2 * np.pi)
    c4 = validate(p4, d4)
    g4 = TimeGrid(t_max=2 * np.pi, steps=256)
    overlay = ca.compare_perturbative(c4, g4)
    print(f"[4] K={K}: rel L2 {overlay.rel_l2_distance:.4f} [{time.time()-t0:.0f}s]")
