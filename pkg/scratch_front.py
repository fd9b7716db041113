"""Where does the ED pre-front residual live, and what controls it?"""
import time
import numpy as np

from fermiline.model import ModelParams, Discretization, validate, decouple
from fermiline.hilbert import enumerate_basis, build_hamiltonian
from fermiline.dynamics import TimeGrid, evolve, initial_state, standard_observables
from fermiline import perturbation as pt


def run_dp(K, modes, omega_max, n_max, L, steps, t_max, cutoff="sharp"):
    params = ModelParams(omega_a=1.0, omega_b=1.0, k_a=K, k_b=K, x_a=0.0, x_b=np.pi)
    disc = Discretization(modes=modes, omega_max=omega_max, box_length=L,
                          n_max=n_max, t_max=t_max, cutoff=cutoff)
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
    imax = np.argmax(np.abs(dp[pre]))
    print(f"K={K} modes={cfg.n_active} wmax={omega_max} n_max={n_max} {cutoff}: "
          f"pre {pre_max:.3e} at vt={vt[pre][imax]:.2f} post {post_max:.3e} "
          f"ratio {pre_max/post_max:.3e} dim {basis.dim} ({time.time()-t0:.0f}s)")
    return g.times, dp


# profile of the residual at moderate discretization, criterion-1 coupling
t, dp = run_dp(0.0225, 256, 20.0, 2, 8 * np.pi, 192, 2 * np.pi)
vt = t
for lo, hi in [(0.0, 0.5), (0.5, 1.0), (1.0, 1.5), (1.5, 2.0), (2.0, 2.5), (2.5, 2.985)]:
    m = (vt >= lo) & (vt <= hi)
    print(f"  vt in [{lo},{hi}]: max|dp| {np.max(np.abs(dp[m])):.3e}")

# does the cutoff control it?
run_dp(0.0225, 512, 40.0, 2, 8 * np.pi, 192, 2 * np.pi)
# does the truncation control it? (smaller grid so n_max=3 is feasible)
run_dp(0.0225, 128, 10.0, 2, 8 * np.pi, 192, 2 * np.pi)
run_dp(0.0225, 128, 10.0, 3, 8 * np.pi, 192, 2 * np.pi)
# does the coupling control the *ratio*?
run_dp(0.0025, 256, 20.0, 2, 8 * np.pi, 192, 2 * np.pi)
