"""Soft-cutoff behavior of the differential front at criterion-1 coupling."""
import time
import numpy as np

from fermiline.model import ModelParams, Discretization, validate, decouple
from fermiline.hilbert import enumerate_basis, build_hamiltonian
from fermiline.dynamics import TimeGrid, evolve, initial_state, standard_observables
from fermiline import perturbation as pt


def run_dp(K, modes, omega_max, n_max, L, steps, t_max, cutoff="sharp", omega_soft=None,
           label=""):
    params = ModelParams(omega_a=1.0, omega_b=1.0, k_a=K, k_b=K, x_a=0.0, x_b=np.pi)
    disc = Discretization(modes=modes, omega_max=omega_max, box_length=L,
                          n_max=n_max, t_max=t_max, cutoff=cutoff, omega_soft=omega_soft)
    cfg = validate(params, disc)
    basis = enumerate_basis(cfg.n_active, n_max)
    g = TimeGrid(t_max=t_max, steps=steps)
    obs = standard_observables(basis)
    t0 = time.time()
    tf = evolve(build_hamiltonian(cfg, basis), initial_state(basis), g,
                store_snapshots=False, diag_observables=obs)
    t0b = evolve(build_hamiltonian(decouple(cfg, "a"), basis), initial_state(basis), g,
                 store_snapshots=False, diag_observables=obs)
    dp = tf.series["p_e_b"] - t0b.series["p_e_b"]
    vt = g.times
    pre = vt <= 0.95 * np.pi
    post = (vt >= np.pi) & (vt <= min(2 * np.pi, t_max))
    pre_max = np.max(np.abs(dp[pre]))
    post_max = np.max(np.abs(dp[post]))
    # crude front time: first |dp| above 5x pre-front residual
    thresh = 5 * pre_max
    above = np.nonzero(np.abs(dp) >= thresh)[0]
    tstar = vt[above[0]] if above.size else np.nan
    print(f"{label} modes={cfg.n_active} wmax={omega_max} wc={omega_soft} "
          f"ratio {pre_max/post_max:.3e} pre {pre_max:.2e} post {post_max:.2e} "
          f"t*={tstar:.3f} (dt={g.times[1]:.3f}) ({time.time()-t0:.0f}s)")
    return vt, dp


K = 0.0225
# soft cutoff, physical regulator scan, mask at 30
for wc in (30.0, 15.0, 10.0):
    run_dp(K, 512, 30.0, 2, 8 * np.pi, 256, 2 * np.pi, "soft", wc, label=f"soft wc={wc}")
