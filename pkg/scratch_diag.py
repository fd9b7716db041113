"""Diagnose the interference term against the ED truth."""
import numpy as np

from fermiline.model import ModelParams, Discretization, validate, decouple
from fermiline.hilbert import enumerate_basis, build_hamiltonian
from fermiline.dynamics import TimeGrid, evolve, initial_state, standard_observables
from fermiline import perturbation as pt

K = 0.0025  # small coupling so 4th order dominates
params = ModelParams(omega_a=1.0, omega_b=1.0, k_a=K, k_b=K, x_a=0.0, x_b=np.pi)
disc = Discretization(modes=512, omega_max=30.0, box_length=8 * np.pi, n_max=2, t_max=2 * np.pi)
cfg = validate(params, disc)
g = TimeGrid(t_max=2 * np.pi, steps=128)

# tiny-M cross-check of the fast exchange-emit path against the expm reference
cfg_tiny = validate(params, Discretization(modes=8, omega_max=30.0, box_length=8 * np.pi,
                                           n_max=2, t_max=2 * np.pi))
g_tiny = TimeGrid(t_max=2.0, steps=16)
dm3 = pt.amp_exchange_emit(cfg_tiny, g_tiny)
for k_idx in (0, 3):
    for step in (7, 16):
        ref = pt.reference_exchange_emit(cfg_tiny, k_idx, g_tiny.times[step])
        print(f"dm3 fast-vs-ref k={k_idx} t={g_tiny.times[step]:.2f}: "
              f"{abs(dm3[k_idx, step] - ref):.2e} (|ref| {abs(ref):.2e})")
xr = pt.amp_exchange(cfg_tiny, g_tiny)
print("x fast-vs-ref:", abs(xr[16] - pt.reference_exchange(cfg_tiny, g_tiny.t_max)))

# ED truth at small K
basis = enumerate_basis(cfg.n_active, 2)
obs = standard_observables(basis)
h_full = build_hamiltonian(cfg, basis)
traj_full = evolve(h_full, initial_state(basis), g, store_snapshots=False, diag_observables=obs)
h0 = build_hamiltonian(decouple(cfg, "a"), basis)
traj0 = evolve(h0, initial_state(basis), g, store_snapshots=False, diag_observables=obs)
dp = traj_full.series["p_e_b"] - traj0.series["p_e_b"]

curves = pt.prob_curves(cfg, g)
u = curves.emit_a
v = curves.counter_b
uv_cross = np.abs(np.sum(np.conj(u) * v, axis=0)) ** 2

i_needed = dp - curves.joint_r - uv_cross
i_have = curves.interference
t = g.times
for i in range(8, 129, 24):
    print(f"t={t[i]:5.2f} dp={dp[i]: .3e} |x|^2={curves.joint_r[i]: .3e} "
          f"|<u,v>|^2={uv_cross[i]: .3e} I_needed={i_needed[i]: .3e} I_have={i_have[i]: .3e} "
          f"ratio={i_have[i]/i_needed[i] if abs(i_needed[i])>1e-18 else np.nan: .3f}")

vt = t
pre = vt <= 0.95 * np.pi
post = (vt >= np.pi) & (vt <= 2 * np.pi)
print("ED ratio:", np.max(np.abs(dp[pre])) / np.max(np.abs(dp[post])))
tot2 = curves.joint_r + uv_cross + i_have
print("PT(x2+uv+I) ratio:", np.max(np.abs(tot2[pre])) / np.max(np.abs(tot2[post])))
print("PT(x2+I) ratio:", np.max(np.abs(curves.total[pre])) / np.max(np.abs(curves.total[post])))
num = np.linalg.norm(dp - tot2); den = max(np.linalg.norm(dp), np.linalg.norm(tot2))
print("PT(with uv) vs ED rel L2:", num / den)
num = np.linalg.norm(dp - curves.total); den = max(np.linalg.norm(dp), np.linalg.norm(curves.total))
print("PT(spec)    vs ED rel L2:", num / den)
