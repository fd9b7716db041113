"""State preparation, Schrodinger propagation and observable extraction.

The propagator is a short-iterative Lanczos stepper: per time step it
builds a Krylov space of the hermitian Hamiltonian, exponentiates the
small tridiagonal projection (via its eigendecomposition) and monitors the
standard residual-style error estimate. Only the accuracy and unitarity
bounds are contractual; cross-checks against an independent dense/Taylor
exponential live in the tests.

Initial states are bare product states: the default "only A excited"
state is the uncoupled |e_A g_B vacuum>, not the dressed ground state with
A flipped. Dressed preparation is an experiment-design concern.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse.linalg as spla

from .errors import ConfigError, ConvergenceError, PropagationError
from .hilbert import (
    FockBasis,
    SparseOperator,
    annihilation_operator,
    build_hamiltonian,
    enumerate_basis,
    projector_diagonal,
)
from .model import RunConfig

#: Default per-step accuracy target of the propagator.
DEFAULT_TOL = 1e-10

#: Norm drift budget for a full trajectory.
NORM_DRIFT_BOUND = 1e-9


@dataclass(frozen=True)
class TimeGrid:
    """Uniform output grid t = 0 .. t_max with `steps` intervals."""

    t_max: float
    steps: int

    def __post_init__(self):
        if self.steps < 1:
            raise ConfigError([f"steps must be >= 1, got {self.steps}"])
        if not self.t_max > 0:
            raise ConfigError([f"t_max must be > 0, got {self.t_max}"])

    @property
    def dt(self) -> float:
        return self.t_max / self.steps

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, self.steps + 1)


@dataclass
class Trajectory:
    """Propagation output: snapshots and/or streamed diagonal observables."""

    grid: TimeGrid
    snapshots: np.ndarray | None
    norms: np.ndarray
    energies: np.ndarray
    series: dict = field(default_factory=dict)

    @property
    def norm_drift(self) -> float:
        return float(np.max(np.abs(1.0 - self.norms)))

    @property
    def energy_drift(self) -> float:
        return float(np.max(np.abs(self.energies - self.energies[0])))


@dataclass(frozen=True)
class ObservableSeries:
    """The standard probability curves on a time grid."""

    grid: TimeGrid
    p_e_a: np.ndarray
    p_e_b: np.ndarray
    p_eb_ga: np.ndarray
    n_photons: np.ndarray

    def __post_init__(self):
        tol = 1e-8
        for name in ("p_e_a", "p_e_b", "p_eb_ga"):
            v = getattr(self, name)
            if np.any(v < -tol) or np.any(v > 1 + tol):
                raise ValueError(f"{name} leaves [0, 1]: range {v.min()}..{v.max()}")
        if np.any(self.p_eb_ga > self.p_e_b + tol):
            raise ValueError("joint probability exceeds p_e_b")

    def columns(self) -> dict:
        return {
            "t": self.grid.times,
            "p_e_a": self.p_e_a,
            "p_e_b": self.p_e_b,
            "p_eb_ga": self.p_eb_ga,
            "n_photons": self.n_photons,
        }


def initial_state(basis: FockBasis, kind="ea_gb_vacuum", amplitudes=None) -> np.ndarray:
    """Bare product initial states, or a user-supplied amplitude vector."""
    psi = np.zeros(basis.dim, dtype=complex)
    if amplitudes is not None or kind == "custom":
        if amplitudes is None:
            raise ConfigError(["custom initial state requires amplitudes"])
        amplitudes = np.asarray(amplitudes, dtype=complex)
        if amplitudes.shape != (basis.dim,):
            raise ConfigError(
                [f"amplitudes have shape {amplitudes.shape}, expected ({basis.dim},)"]
            )
        norm = np.linalg.norm(amplitudes)
        if abs(norm - 1.0) > 1e-12:
            raise ConfigError([f"custom amplitudes are not normalized: |psi| = {norm}"])
        return amplitudes.copy()
    if kind == "ea_gb_vacuum":
        psi[basis.rank((1, 0, ()))] = 1.0
    elif kind == "ga_gb_vacuum":
        psi[basis.rank((0, 0, ()))] = 1.0
    else:
        raise ConfigError([f"unknown initial state kind {kind!r}"])
    return psi


def standard_observables(basis: FockBasis) -> dict:
    """Diagonals of the observables every run reports."""
    return {
        "p_e_a": projector_diagonal(basis, "e_a"),
        "p_e_b": projector_diagonal(basis, "e_b"),
        "p_eb_ga": projector_diagonal(basis, "eb_ga"),
        "n_photons": projector_diagonal(basis, "photon_number"),
    }


def _lanczos_expstep(matvec, psi, dt, tol, max_krylov):
    """One exp(-i dt H) application. Returns (psi_next, err, m, <H>)."""
    dim = psi.shape[0]
    beta0 = np.linalg.norm(psi)
    V = np.empty((max_krylov + 1, dim), dtype=complex)
    V[0] = psi / beta0
    alphas = np.empty(max_krylov)
    betas = np.empty(max_krylov)
    energy = None
    err = np.inf
    y = None
    m = 0
    for j in range(max_krylov):
        w = matvec(V[j])
        a = float(np.real(np.vdot(V[j], w)))
        if j == 0:
            energy = a
        w -= a * V[j]
        if j > 0:
            w -= betas[j - 1] * V[j - 1]
        # full reorthogonalization keeps the norm drift at rounding level
        w -= V[: j + 1].T @ (np.conj(V[: j + 1]) @ w)
        b = np.linalg.norm(w)
        alphas[j] = a
        m = j + 1

        evals, evecs = sla.eigh_tridiagonal(alphas[:m], betas[: m - 1])
        y = evecs @ (np.exp(-1j * dt * evals) * evecs[0, :])
        err = abs(b * dt * y[-1])
        if err <= tol or b < 1e-14 * max(1.0, abs(a)):
            break
        betas[j] = b
        V[j + 1] = w / b
    if err > tol:
        raise PropagationError(
            f"Lanczos step did not reach tol = {tol} within {max_krylov} "
            f"matvecs (achieved error estimate {err:.3e}); refine the grid "
            f"or raise max_krylov",
            achieved=err,
        )
    psi_next = beta0 * (y @ V[:m])
    return psi_next, err, m, energy


def evolve(
    h: SparseOperator,
    psi0: np.ndarray,
    grid: TimeGrid,
    tol: float = DEFAULT_TOL,
    max_krylov: int = 64,
    store_snapshots: bool = True,
    diag_observables: dict | None = None,
) -> Trajectory:
    """Propagate psi0 over the grid under exp(-i H t).

    diag_observables maps names to real diagonal arrays; their expectation
    values are accumulated per step, which keeps memory bounded when
    snapshots are disabled.
    """
    if not h.hermitian:
        raise ConfigError(["evolve requires a hermitian Hamiltonian"])
    norm0 = np.linalg.norm(psi0)
    if abs(norm0 - 1.0) > 1e-9:
        raise ConfigError([f"initial state is not unit norm: |psi| = {norm0}"])

    nt = grid.steps + 1
    psi = psi0.astype(complex, copy=True)
    snapshots = np.empty((nt, psi.size), dtype=complex) if store_snapshots else None
    norms = np.empty(nt)
    energies = np.empty(nt)
    series = {
        name: np.empty(nt) for name in (diag_observables or {})
    }

    matvec = h.matrix.__matmul__

    def record(i, psi, energy=None):
        norms[i] = np.linalg.norm(psi)
        if energy is None:
            energy = float(np.real(np.vdot(psi, matvec(psi))) / norms[i] ** 2)
        energies[i] = energy
        if snapshots is not None:
            snapshots[i] = psi
        prob = np.abs(psi) ** 2
        for name, diag in (diag_observables or {}).items():
            series[name][i] = float(prob @ diag)

    record(0, psi)
    for i in range(1, nt):
        psi, _, _, energy = _lanczos_expstep(matvec, psi, grid.dt, tol, max_krylov)
        record(i, psi, energy=energy)

    traj = Trajectory(
        grid=grid, snapshots=snapshots, norms=norms, energies=energies, series=series
    )
    if traj.norm_drift > NORM_DRIFT_BOUND:
        raise PropagationError(
            f"norm drift {traj.norm_drift:.3e} exceeds the bound {NORM_DRIFT_BOUND}",
            achieved=traj.norm_drift,
        )
    return traj


def observables(traj: Trajectory, basis: FockBasis) -> ObservableSeries:
    """Probability curves, from snapshots or from streamed series."""
    names = ("p_e_a", "p_e_b", "p_eb_ga", "n_photons")
    if all(name in traj.series for name in names):
        values = {name: traj.series[name] for name in names}
    elif traj.snapshots is not None:
        diags = standard_observables(basis)
        prob = np.abs(traj.snapshots) ** 2
        values = {name: prob @ diag for name, diag in diags.items()}
    else:
        raise ConfigError(
            ["trajectory has neither snapshots nor streamed standard observables"]
        )
    return ObservableSeries(grid=traj.grid, **values)


def photon_density(
    traj: Trajectory, basis: FockBasis, cfg: RunConfig, n_cells: int | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Coarse-grained photon density over the box, one row per snapshot.

    Cells are uniform over [0, L). With the default n_cells = 2 * modes the
    discrete plane-wave orthogonality is exact, so each row sums to the
    total photon number. Intended for small mode counts (it assembles the
    one-body mode density matrix per snapshot).
    """
    if traj.snapshots is None:
        raise ConfigError(["photon_density requires stored snapshots"])
    M = basis.modes
    if n_cells is None:
        n_cells = 2 * M
    L = cfg.disc.box_length
    centers = (np.arange(n_cells) + 0.5) * (L / n_cells)

    ann = [annihilation_operator(basis, n) for n in range(M)]
    dens = np.empty((traj.snapshots.shape[0], n_cells))
    dx = L / n_cells
    # density(x) = sum_{n,m} <b_n^dag b_m> e^{i(k_m - k_n) x} dx / L
    kdiff = np.subtract.outer(cfg.mode_k, cfg.mode_k)  # k_n - k_m
    cell_phase = np.exp(-1j * kdiff[None, :, :] * centers[:, None, None])
    for it, psi in enumerate(traj.snapshots):
        lowered = np.stack([a @ psi for a in ann])
        rho1 = np.conj(lowered) @ lowered.T  # rho1[n, m] = <b_n^dag b_m>
        dens[it] = np.real(np.einsum("xnm,nm->x", cell_phase, rho1)) * dx / L
    return centers, dens


@dataclass(frozen=True)
class GroundDressing:
    """Photon content of the interacting ground state."""

    photon_probability: float
    mean_photons: float
    energy: float


def ground_dressing(
    cfg: RunConfig, tol: float = 1e-10, maxiter: int | None = None
) -> GroundDressing:
    """Lowest eigenvector of H restricted to the even-excitation sector.

    Returns 1 - |<bare vacuum|ground>|^2 and the mean photon number. The
    interaction changes the total excitation number only in steps of two,
    so the bare vacuum sector is the even one.
    """
    basis = enumerate_basis(cfg.n_active, cfg.disc.n_max)
    if cfg.params.k_a == 0.0 and cfg.params.k_b == 0.0:
        return GroundDressing(0.0, 0.0, -(cfg.params.omega_a + cfg.params.omega_b) / 2)

    h = build_hamiltonian(cfg, basis)
    photons = basis.photon_counts()
    qubit_exc = (
        projector_diagonal(basis, "e_a") + projector_diagonal(basis, "e_b")
    )
    even = ((photons + qubit_exc) % 2) == 0
    idx = np.nonzero(even)[0]
    sub = h.matrix[idx][:, idx]

    v0 = np.zeros(idx.size)
    vac = basis.rank((0, 0, ()))
    vac_sub = int(np.searchsorted(idx, vac))
    v0[vac_sub] = 1.0
    try:
        evals, evecs = spla.eigsh(
            sub, k=1, which="SA", tol=tol, v0=v0, maxiter=maxiter
        )
    except spla.ArpackNoConvergence as exc:
        raise ConvergenceError(
            f"ground-state iteration did not converge (maxiter = {maxiter})"
        ) from exc
    ground = evecs[:, 0]
    ground /= np.linalg.norm(ground)
    overlap = abs(ground[vac_sub]) ** 2
    mean_n = float(np.real(np.vdot(ground, photons[idx] * ground)))
    return GroundDressing(
        photon_probability=float(1.0 - overlap),
        mean_photons=mean_n,
        energy=float(evals[0]),
    )
