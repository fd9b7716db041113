"""Physical parameters, unit conventions and discretization of the 1-D line.

Conventions used throughout the package (natural units):

* ``hbar = 1``. The propagation speed ``v`` and the field normalization
  constant ``N`` are carried as explicit fields but default to 1; only the
  product ``d**2 * N`` is physical, so fixing ``N = 1`` loses no generality.
* Qubit J couples to the line with strength ruled by the dimensionless
  ratio ``K_J = 4 d_J**2 N / v`` (equivalently ``K = 2 (g / omega)**2``),
  so the dipole constant is ``d_J = sqrt(K_J v / (4 N))``.
* The line is quantized in a periodic box of length ``L``. Wavenumbers are
  ``k_n = +-n * 2 pi / L`` for ``n = 1 .. M/2`` and frequencies
  ``omega_n = v |k_n|``. The ``k = 0`` mode carries zero coupling weight
  (weights scale like ``sqrt(omega)``), so excluding it is exact.
* An angular-frequency cutoff ``omega_max`` truncates the coupling. With the
  default sharp cutoff, modes above ``omega_max`` have exactly zero weight
  and are excluded from the interacting mode list, which is exact for the
  same reason as ``k = 0``. The optional soft cutoff keeps every mode with
  weight ``exp(-omega / omega_soft)``.

SI values enter and leave only through :func:`to_natural_units` and
:class:`UnitScales`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError

TWO_PI = 2.0 * math.pi

#: Relative slack used when comparing mode frequencies against the cutoff,
#: so a mode sitting exactly at omega_max stays active.
_CUTOFF_REL_TOL = 1e-12


@dataclass(frozen=True)
class ModelParams:
    """Two qubits coupled to the 1-D line, natural units.

    omega_a / omega_b are angular frequencies in radians per natural time
    unit, k_a / k_b the dimensionless coupling ratios, x_a / x_b the fixed
    qubit positions in units of v per reference frequency.
    """

    omega_a: float
    omega_b: float
    k_a: float
    k_b: float
    x_a: float = 0.0
    x_b: float = math.pi
    v: float = 1.0
    field_norm: float = 1.0

    @property
    def separation(self) -> float:
        return abs(self.x_b - self.x_a)

    @property
    def d_a(self) -> float:
        return dipole_from_coupling(self.k_a, v=self.v, field_norm=self.field_norm)

    @property
    def d_b(self) -> float:
        return dipole_from_coupling(self.k_b, v=self.v, field_norm=self.field_norm)


@dataclass(frozen=True)
class Discretization:
    """Mode grid, cutoff and truncation controls for one run.

    modes is the total mode count (M/2 right-movers plus M/2 left-movers
    before the cutoff is applied), box_length the quantization box L with
    mode spacing 2 pi / L, n_max the total photon-number truncation and
    t_max the largest time the run is allowed to simulate.

    cutoff is "sharp" (default) or "soft"; omega_soft defaults to omega_max
    when the soft cutoff is selected. n_max >= 2 is required by any
    operation probing fourth-order exchange physics (enforced by those
    operations, not here, since free-theory and single-excitation runs
    legitimately use smaller truncations).
    """

    modes: int
    omega_max: float
    box_length: float
    n_max: int
    t_max: float
    cutoff: str = "sharp"
    omega_soft: float | None = None


@dataclass(frozen=True)
class RunConfig:
    """A validated parameter set with every derived grid quantity populated.

    mode_k, mode_omega and mode_weight are aligned arrays over the active
    modes; mode_weight is sqrt(N * omega_n * delta_k * w_cut(omega_n)), so
    the coupling amplitude of qubit J to mode n is d_J * mode_weight[n].
    Modes are ordered by |k| ascending, the +k branch before the -k branch.
    """

    params: ModelParams
    disc: Discretization
    delta_k: float
    mode_k: np.ndarray
    mode_omega: np.ndarray
    mode_weight: np.ndarray

    @property
    def n_active(self) -> int:
        return int(self.mode_k.size)

    def coupling_weight(self, qubit: str) -> np.ndarray:
        """Per-mode coupling amplitude d_J * sqrt(N omega delta_k w)."""
        d = self.params.d_a if qubit == "a" else self.params.d_b
        return d * self.mode_weight

    def qubit_omega(self, qubit: str) -> float:
        return self.params.omega_a if qubit == "a" else self.params.omega_b

    def qubit_position(self, qubit: str) -> float:
        return self.params.x_a if qubit == "a" else self.params.x_b


def dipole_from_coupling(k_ratio: float, v: float = 1.0, field_norm: float = 1.0) -> float:
    """Dipole constant from the dimensionless coupling ratio.

    d = hbar * sqrt(K v / (4 N)); with hbar = v = N = 1 this is sqrt(K)/2.
    """
    if k_ratio < 0:
        raise ConfigError(f"coupling ratio must be >= 0, got {k_ratio}")
    return math.sqrt(k_ratio * v / (4.0 * field_norm))


def coupling_from_dipole(d: float, v: float = 1.0, field_norm: float = 1.0) -> float:
    """Inverse of :func:`dipole_from_coupling`: K = 4 d^2 N / (hbar^2 v)."""
    return 4.0 * d * d * field_norm / v


def collect_violations(params: ModelParams, disc: Discretization) -> list[str]:
    """Every violated invariant of (params, disc), with offending values."""
    bad = []
    if not params.omega_a > 0:
        bad.append(f"omega_a must be > 0, got {params.omega_a}")
    if not params.omega_b > 0:
        bad.append(f"omega_b must be > 0, got {params.omega_b}")
    if params.k_a < 0:
        bad.append(f"k_a must be >= 0, got {params.k_a}")
    if params.k_b < 0:
        bad.append(f"k_b must be >= 0, got {params.k_b}")
    if not params.v > 0:
        bad.append(f"v must be > 0, got {params.v}")
    if not params.field_norm > 0:
        bad.append(f"field_norm must be > 0, got {params.field_norm}")
    if not params.separation > 0:
        bad.append(
            f"qubit separation must be > 0, got x_a = {params.x_a}, x_b = {params.x_b}"
        )

    if disc.modes < 2 or disc.modes % 2 != 0:
        bad.append(f"modes must be even and >= 2, got {disc.modes}")
    if disc.n_max < 0:
        bad.append(f"n_max must be >= 0, got {disc.n_max}")
    if not disc.t_max > 0:
        bad.append(f"t_max must be > 0, got {disc.t_max}")
    if disc.cutoff not in ("sharp", "soft"):
        bad.append(f"cutoff must be 'sharp' or 'soft', got {disc.cutoff!r}")
    if disc.omega_soft is not None and not disc.omega_soft > 0:
        bad.append(f"omega_soft must be > 0, got {disc.omega_soft}")

    omega_floor = 10.0 * max(params.omega_a, params.omega_b)
    if disc.omega_max < omega_floor:
        bad.append(
            f"omega_max = {disc.omega_max} is below the resolution floor "
            f"10 * max(omega_a, omega_b) = {omega_floor}"
        )
    horizon = 2.0 * (params.separation + params.v * disc.t_max)
    if disc.box_length < horizon:
        bad.append(
            f"box_length = {disc.box_length} violates the horizon rule: "
            f"minimum admissible L = 2 (r + v t_max) = {horizon}"
        )
    return bad


def validate(params_or_cfg, disc: Discretization | None = None) -> RunConfig:
    """Check all invariants and populate the derived mode grid.

    Accepts either (ModelParams, Discretization) or an existing RunConfig;
    re-validating a RunConfig is the identity. Raises ConfigError carrying
    the complete list of violated invariants.
    """
    if isinstance(params_or_cfg, RunConfig):
        cfg = params_or_cfg
        bad = collect_violations(cfg.params, cfg.disc)
        if bad:
            raise ConfigError(bad)
        return cfg

    params = params_or_cfg
    if disc is None:
        raise TypeError("validate(params, disc) requires a Discretization")
    bad = collect_violations(params, disc)
    if bad:
        raise ConfigError(bad)

    delta_k = TWO_PI / disc.box_length
    half = disc.modes // 2
    n = np.arange(1, half + 1, dtype=float)
    # |k| ascending, +k before -k at each magnitude.
    k = np.empty(disc.modes)
    k[0::2] = n * delta_k
    k[1::2] = -n * delta_k
    omega = params.v * np.abs(k)

    active = omega <= disc.omega_max * (1.0 + _CUTOFF_REL_TOL)
    if disc.cutoff == "sharp":
        weight_factor = np.ones(int(active.sum()))
    else:
        omega_soft = disc.omega_soft if disc.omega_soft is not None else disc.omega_max
        weight_factor = np.exp(-omega[active] / omega_soft)

    k = k[active]
    omega = omega[active]
    if k.size == 0:
        raise ConfigError(
            [
                f"no active modes: smallest mode frequency {params.v * delta_k} "
                f"exceeds omega_max = {disc.omega_max}"
            ]
        )
    weight = np.sqrt(params.field_norm * omega * delta_k * weight_factor)

    cfg = RunConfig(
        params=params,
        disc=disc,
        delta_k=delta_k,
        mode_k=k,
        mode_omega=omega,
        mode_weight=weight,
    )
    cfg.mode_k.setflags(write=False)
    cfg.mode_omega.setflags(write=False)
    cfg.mode_weight.setflags(write=False)
    return cfg


def decouple(cfg: RunConfig, qubit: str = "a") -> RunConfig:
    """The same configuration with one qubit's coupling switched off."""
    if qubit == "a":
        params = replace(cfg.params, k_a=0.0)
    else:
        params = replace(cfg.params, k_b=0.0)
    return validate(params, cfg.disc)


# ---------------------------------------------------------------------------
# SI boundary


@dataclass(frozen=True)
class SIParams:
    """Laboratory-frame description of the two-qubit line system.

    Frequencies are cyclic (Hz); the coupling ratios are dimensionless and
    pass through unchanged.
    """

    f_a_hz: float
    f_b_hz: float
    k_a: float
    k_b: float
    separation_m: float
    v_m_per_s: float


@dataclass(frozen=True)
class UnitScales:
    """Conversion factors between natural units and SI.

    Natural units are defined by the reference angular frequency
    omega_ref = 2 pi f_a: times are measured in 1/omega_ref, lengths in
    v/omega_ref, and the propagation speed is 1.
    """

    omega_ref_rad_per_s: float
    v_m_per_s: float

    def time_natural(self, t_s: float) -> float:
        return self.omega_ref_rad_per_s * t_s

    def time_si(self, t_nat: float) -> float:
        return t_nat / self.omega_ref_rad_per_s

    def length_natural(self, x_m: float) -> float:
        return x_m * self.omega_ref_rad_per_s / self.v_m_per_s

    def length_si(self, x_nat: float) -> float:
        return x_nat * self.v_m_per_s / self.omega_ref_rad_per_s

    def frequency_natural(self, omega_rad_per_s: float) -> float:
        return omega_rad_per_s / self.omega_ref_rad_per_s


def to_natural_units(si: SIParams) -> tuple[ModelParams, UnitScales]:
    """Map an SI parameter record onto natural units (v = 1, omega_a = 1).

    Returns the ModelParams together with the UnitScales needed to map
    results back to the laboratory frame.
    """
    bad = []
    for name in ("f_a_hz", "f_b_hz", "separation_m", "v_m_per_s"):
        if not getattr(si, name) > 0:
            bad.append(f"{name} must be > 0, got {getattr(si, name)}")
    for name in ("k_a", "k_b"):
        if getattr(si, name) < 0:
            bad.append(f"{name} must be >= 0, got {getattr(si, name)}")
    if bad:
        raise ConfigError(bad)

    omega_ref = TWO_PI * si.f_a_hz
    scales = UnitScales(omega_ref_rad_per_s=omega_ref, v_m_per_s=si.v_m_per_s)
    params = ModelParams(
        omega_a=TWO_PI * si.f_a_hz / omega_ref,
        omega_b=TWO_PI * si.f_b_hz / omega_ref,
        k_a=si.k_a,
        k_b=si.k_b,
        x_a=0.0,
        x_b=scales.length_natural(si.separation_m),
        v=1.0,
        field_norm=1.0,
    )
    return params, scales


def from_natural_units(params: ModelParams, scales: UnitScales) -> SIParams:
    """Inverse of :func:`to_natural_units` (round-trips to machine precision)."""
    return SIParams(
        f_a_hz=params.omega_a * scales.omega_ref_rad_per_s / TWO_PI,
        f_b_hz=params.omega_b * scales.omega_ref_rad_per_s / TWO_PI,
        k_a=params.k_a,
        k_b=params.k_b,
        separation_m=scales.length_si(params.separation),
        v_m_per_s=scales.v_m_per_s,
    )
