"""Excitation-truncated Fock basis and sparse operators over it.

Basis enumeration order (deterministic, relied on by the index arithmetic
here and by the observables): qubit sector major with
s = 2*s_A + s_B in 0..3 (0 = gg, 1 = gB excited, 2 = gA... see below),
then graded by total photon number j = 0..n_max, then photon
configurations in lexicographic order of the nondecreasing mode-index
tuple. Explicitly

    s = 2 * s_A + s_B   with s_J = 1 for the excited state,

so s = 1 is (A ground, B excited) and s = 2 is (A excited, B ground).
Grading keeps every photon sector a contiguous index range inside each
qubit block, which makes projectors and truncation bookkeeping cheap.

The Hamiltonian is H0 + HI with

    H0 = omega_A/2 sz_A + omega_B/2 sz_B + sum_n omega_n b_n^dag b_n
    HI = sum_J d_J sx_J V(x_J),
    V(x) = p * sum_n w_n e^{i k_n x} b_n + conj(p) * sum_n w_n e^{-i k_n x} b_n^dag,

where w_n is the per-mode weight from the run configuration and p is the
global phase convention of the field operator (p = i by default; every
observable is independent of this choice, which the tests enforce).
Creation out of the top photon sector is dropped, implementing the
truncation.
"""

from __future__ import annotations

import itertools
import math
import struct
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError, ResourceLimitError
from .model import RunConfig

#: Hard ceiling on the basis dimension unless callers raise it explicitly.
DEFAULT_MAX_DIM = 2_000_000

#: Global phase convention of the field operator (the +i of the
#: annihilation part). Tests verify observables do not depend on it.
FIELD_PHASE = 1j


@dataclass(frozen=True)
class FockBasis:
    """Enumeration of (qubit sector, photon configuration) basis states."""

    modes: int
    n_max: int
    dim: int
    photon_dim: int
    sector_dims: tuple[int, ...]
    sector_offsets: tuple[int, ...]
    # sector-2 pairs (m <= n) in enumeration order; None when n_max < 2
    pairs: np.ndarray | None
    # sectors j >= 3 as (count, j) arrays of nondecreasing mode tuples
    high_sectors: tuple[np.ndarray, ...]

    def qubit_sector(self, index: int) -> int:
        return index // self.photon_dim

    def rank(self, state) -> int:
        """Dense index of (s_a, s_b, occupied-mode tuple, nondecreasing)."""
        s_a, s_b, occ = state
        occ = tuple(occ)
        j = len(occ)
        if j > self.n_max:
            raise ValueError(f"{j} photons exceeds n_max = {self.n_max}")
        if any(occ[i] > occ[i + 1] for i in range(j - 1)):
            raise ValueError("occupied modes must be nondecreasing")
        s = 2 * int(s_a) + int(s_b)
        if j == 0:
            c = 0
        elif j == 1:
            c = occ[0]
        elif j == 2:
            c = pair_rank(self.modes, occ[0], occ[1])
        else:
            table = self.high_sectors[j - 3]
            hit = np.nonzero((table == np.asarray(occ)).all(axis=1))[0]
            if hit.size == 0:
                raise ValueError(f"no such configuration {occ}")
            c = int(hit[0])
        return s * self.photon_dim + self.sector_offsets[j] + c

    def unrank(self, index: int):
        """Inverse of :meth:`rank`."""
        if not 0 <= index < self.dim:
            raise ValueError(f"index {index} outside basis of dimension {self.dim}")
        s, rem = divmod(index, self.photon_dim)
        j = int(np.searchsorted(self._offset_array, rem, side="right")) - 1
        c = rem - self.sector_offsets[j]
        if j == 0:
            occ = ()
        elif j == 1:
            occ = (int(c),)
        elif j == 2:
            occ = tuple(int(v) for v in self.pairs[c])
        else:
            occ = tuple(int(v) for v in self.high_sectors[j - 3][c])
        return (s >> 1, s & 1, occ)

    @property
    def _offset_array(self) -> np.ndarray:
        return np.asarray(self.sector_offsets)

    def photon_counts(self) -> np.ndarray:
        """Total photon number of every basis state (the grading)."""
        per_block = np.concatenate(
            [np.full(self.sector_dims[j], j, dtype=float) for j in range(self.n_max + 1)]
        )
        return np.tile(per_block, 4)


def pair_rank(modes: int, m: int, n: int) -> int:
    """Rank of the two-photon configuration (m <= n) in enumeration order."""
    return m * modes - (m * (m - 1)) // 2 + (n - m)


def basis_dimension(modes: int, n_max: int) -> int:
    return 4 * sum(math.comb(modes + j - 1, j) for j in range(n_max + 1))


def enumerate_basis(modes: int, n_max: int, max_dim: int = DEFAULT_MAX_DIM) -> FockBasis:
    """Build the truncated basis; refuses to exceed max_dim states."""
    if modes < 1:
        raise ConfigError(f"modes must be >= 1, got {modes}")
    if n_max < 0:
        raise ConfigError(f"n_max must be >= 0, got {n_max}")
    dim = basis_dimension(modes, n_max)
    if dim > max_dim:
        raise ResourceLimitError(
            f"basis dimension {dim} exceeds the cap {max_dim} "
            f"(modes = {modes}, n_max = {n_max})"
        )
    sector_dims = tuple(math.comb(modes + j - 1, j) for j in range(n_max + 1))
    sector_offsets = tuple(int(x) for x in np.cumsum((0,) + sector_dims[:-1]))
    photon_dim = sum(sector_dims)

    pairs = None
    if n_max >= 2:
        m_idx, n_idx = np.triu_indices(modes)
        pairs = np.column_stack([m_idx, n_idx]).astype(np.int64)

    high = []
    for j in range(3, n_max + 1):
        table = np.array(
            list(itertools.combinations_with_replacement(range(modes), j)),
            dtype=np.int64,
        )
        high.append(table)

    return FockBasis(
        modes=modes,
        n_max=n_max,
        dim=dim,
        photon_dim=photon_dim,
        sector_dims=sector_dims,
        sector_offsets=sector_offsets,
        pairs=pairs,
        high_sectors=tuple(high),
    )


@dataclass(frozen=True)
class SparseOperator:
    """CSR matrix plus the hermiticity promise."""

    matrix: sp.csr_matrix
    hermitian: bool

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def nnz(self) -> int:
        return self.matrix.nnz


def apply(op: SparseOperator, psi: np.ndarray) -> np.ndarray:
    """Matrix-vector product with a dimension check."""
    if psi.shape != (op.dim,):
        raise ValueError(f"state has shape {psi.shape}, operator dimension {op.dim}")
    return op.matrix @ psi


def _check_match(cfg: RunConfig, basis: FockBasis) -> None:
    if basis.modes != cfg.n_active or basis.n_max != cfg.disc.n_max:
        raise ConfigError(
            [
                f"basis (modes = {basis.modes}, n_max = {basis.n_max}) does not "
                f"match configuration (active modes = {cfg.n_active}, "
                f"n_max = {cfg.disc.n_max})"
            ]
        )


def _diagonal_energies(cfg: RunConfig, basis: FockBasis) -> np.ndarray:
    omega = cfg.mode_omega
    per_sector = [np.zeros(1)]
    if basis.n_max >= 1:
        per_sector.append(omega.copy())
    if basis.n_max >= 2:
        per_sector.append(omega[basis.pairs].sum(axis=1))
    for j in range(3, basis.n_max + 1):
        per_sector.append(omega[basis.high_sectors[j - 3]].sum(axis=1))
    photon = np.concatenate(per_sector)

    half_a, half_b = 0.5 * cfg.params.omega_a, 0.5 * cfg.params.omega_b
    diag = np.empty(basis.dim)
    for s in range(4):
        s_a, s_b = s >> 1, s & 1
        qubit = (s_a - 0.5) * 2 * half_a + (s_b - 0.5) * 2 * half_b
        block = slice(s * basis.photon_dim, (s + 1) * basis.photon_dim)
        diag[block] = photon + qubit
    return diag


def _creation_transitions(basis: FockBasis):
    """Directed photon-creation transitions within one qubit block.

    Yields (src_config_index, dst_config_index, mode_index, bose_factor)
    arrays for each sector step j -> j+1, with config indices absolute
    within the photon block.
    """
    M = basis.modes
    out = []
    if basis.n_max >= 1:
        src = np.zeros(M, dtype=np.int64)
        dst = basis.sector_offsets[1] + np.arange(M, dtype=np.int64)
        mode = np.arange(M, dtype=np.int64)
        out.append((src, dst, mode, np.ones(M)))
    if basis.n_max >= 2:
        m = np.repeat(np.arange(M, dtype=np.int64), M)
        n = np.tile(np.arange(M, dtype=np.int64), M)
        lo, hi = np.minimum(m, n), np.maximum(m, n)
        src = basis.sector_offsets[1] + m
        dst = basis.sector_offsets[2] + lo * M - (lo * (lo - 1)) // 2 + (hi - lo)
        bose = np.where(m == n, math.sqrt(2.0), 1.0)
        out.append((src, dst, n, bose))
    for j in range(3, basis.n_max + 1):
        table_lo = (
            basis.pairs if j == 3 else basis.high_sectors[j - 4]
        )  # sector j-1 configs
        table_hi = basis.high_sectors[j - 3]
        lookup = {tuple(row): idx for idx, row in enumerate(table_hi)}
        src_l, dst_l, mode_l, bose_l = [], [], [], []
        for c, occ in enumerate(table_lo):
            occ = tuple(occ)
            for n_mode in range(M):
                new = tuple(sorted(occ + (n_mode,)))
                dst_c = lookup[new]
                count = new.count(n_mode)
                src_l.append(basis.sector_offsets[j - 1] + c)
                dst_l.append(basis.sector_offsets[j] + dst_c)
                mode_l.append(n_mode)
                bose_l.append(math.sqrt(count))
        out.append(
            (
                np.asarray(src_l, dtype=np.int64),
                np.asarray(dst_l, dtype=np.int64),
                np.asarray(mode_l, dtype=np.int64),
                np.asarray(bose_l),
            )
        )
    return out


def build_hamiltonian(
    cfg: RunConfig,
    basis: FockBasis,
    rwa: bool = False,
    phase: complex = FIELD_PHASE,
) -> SparseOperator:
    """Assemble H = H0 + HI as an exactly hermitian sparse matrix.

    rwa=True drops the counter-rotating vertices (qubit raising with photon
    creation and lowering with annihilation); it exists as a conserved-
    excitation cross-check, never as the production default.
    """
    _check_match(cfg, basis)
    diag = _diagonal_energies(cfg, basis)

    rows = [np.arange(basis.dim, dtype=np.int64)]
    cols = [np.arange(basis.dim, dtype=np.int64)]
    vals = [diag.astype(complex)]

    create_coeff = {
        "a": np.conj(phase) * cfg.coupling_weight("a") * np.exp(-1j * cfg.mode_k * cfg.params.x_a),
        "b": np.conj(phase) * cfg.coupling_weight("b") * np.exp(-1j * cfg.mode_k * cfg.params.x_b),
    }
    transitions = _creation_transitions(basis)

    for qubit, flip_bit in (("a", 2), ("b", 1)):
        coeff = create_coeff[qubit]
        if not np.any(coeff):
            continue
        for s in range(4):
            s_flipped = s ^ flip_bit
            qubit_excites = bool(s_flipped & flip_bit)
            # creation + qubit raising is counter-rotating
            if rwa and qubit_excites:
                continue
            for src, dst, mode, bose in transitions:
                rows.append(s_flipped * basis.photon_dim + dst)
                cols.append(s * basis.photon_dim + src)
                vals.append(coeff[mode] * bose)

    row = np.concatenate(rows)
    col = np.concatenate(cols)
    val = np.concatenate(vals)

    # mirror the strictly off-diagonal entries to enforce exact hermiticity
    off = row != col
    row_full = np.concatenate([row, col[off]])
    col_full = np.concatenate([col, row[off]])
    val_full = np.concatenate([val, np.conj(val[off])])

    mat = sp.coo_matrix(
        (val_full, (row_full, col_full)), shape=(basis.dim, basis.dim)
    ).tocsr()
    return SparseOperator(matrix=mat, hermitian=True)


def apply_hamiltonian_matrix_free(
    cfg: RunConfig,
    basis: FockBasis,
    psi: np.ndarray,
    rwa: bool = False,
    phase: complex = FIELD_PHASE,
) -> np.ndarray:
    """H @ psi recomputed from the basis rules, without a stored matrix.

    Deliberately independent of :func:`build_hamiltonian` (mode-by-mode
    loops instead of batched transition arrays) so the two can be used as
    mutual oracles.
    """
    _check_match(cfg, basis)
    out = _diagonal_energies(cfg, basis).astype(complex) * psi
    transitions = _creation_transitions(basis)
    for qubit, flip_bit in (("a", 2), ("b", 1)):
        d = cfg.params.d_a if qubit == "a" else cfg.params.d_b
        if d == 0.0:
            continue
        x_j = cfg.qubit_position(qubit)
        coeff_all = np.conj(phase) * d * cfg.mode_weight * np.exp(-1j * cfg.mode_k * x_j)
        for s in range(4):
            s_f = s ^ flip_bit
            excites = bool(s_f & flip_bit)
            base_s = s * basis.photon_dim
            base_f = s_f * basis.photon_dim
            for src, dst, mode, bose in transitions:
                for n_mode in range(basis.modes):
                    sel = mode == n_mode
                    if not np.any(sel):
                        continue
                    c = coeff_all[n_mode]
                    amp = c * bose[sel]
                    if not (rwa and excites):
                        out[base_f + dst[sel]] += amp * psi[base_s + src[sel]]
                    if not (rwa and not excites):
                        # annihilation is the conjugate transition
                        out[base_f + src[sel]] += np.conj(amp) * psi[base_s + dst[sel]]
    return out


_PROJECTOR_SECTORS = {
    "e_a": (2, 3),
    "g_a": (0, 1),
    "e_b": (1, 3),
    "g_b": (0, 2),
    "eb_ga": (1,),
}


def projector(basis: FockBasis, which: str) -> SparseOperator:
    """Diagonal projector (or the photon-number operator) on the basis.

    which is one of e_a, g_a, e_b, g_b, eb_ga (B excited and A ground) or
    photon_number.
    """
    if which == "photon_number":
        diag = basis.photon_counts()
    elif which in _PROJECTOR_SECTORS:
        diag = np.zeros(basis.dim)
        for s in _PROJECTOR_SECTORS[which]:
            diag[s * basis.photon_dim : (s + 1) * basis.photon_dim] = 1.0
    else:
        raise ConfigError(
            [f"unknown projector {which!r}; expected one of "
             f"{sorted(_PROJECTOR_SECTORS) + ['photon_number']}"]
        )
    return SparseOperator(matrix=sp.diags(diag.astype(complex)).tocsr(), hermitian=True)


def projector_diagonal(basis: FockBasis, which: str) -> np.ndarray:
    """The diagonal of :func:`projector` as a plain real array."""
    if which == "photon_number":
        return basis.photon_counts()
    if which not in _PROJECTOR_SECTORS:
        raise ConfigError([f"unknown projector {which!r}"])
    diag = np.zeros(basis.dim)
    for s in _PROJECTOR_SECTORS[which]:
        diag[s * basis.photon_dim : (s + 1) * basis.photon_dim] = 1.0
    return diag


def annihilation_operator(basis: FockBasis, mode: int) -> sp.csr_matrix:
    """Sparse b_mode on the truncated basis (acts within each qubit block)."""
    if not 0 <= mode < basis.modes:
        raise ValueError(f"mode {mode} outside 0..{basis.modes - 1}")
    rows, cols, vals = [], [], []
    for src, dst, mode_idx, bose in _creation_transitions(basis):
        sel = mode_idx == mode
        # b is the adjoint of the creation map: src <- dst with the factor
        rows.append(src[sel])
        cols.append(dst[sel])
        vals.append(bose[sel])
    if rows:
        row = np.concatenate(rows)
        col = np.concatenate(cols)
        val = np.concatenate(vals).astype(complex)
    else:
        row = col = np.empty(0, dtype=np.int64)
        val = np.empty(0, dtype=complex)
    block = sp.coo_matrix((val, (row, col)), shape=(basis.photon_dim, basis.photon_dim))
    return sp.kron(sp.identity(4, format="csr"), block.tocsr(), format="csr")


# ---------------------------------------------------------------------------
# Operator interchange format

_DUMP_MAGIC = b"FLOP"
_DUMP_HEADER = struct.Struct("<4sqqB")  # magic, dimension, nnz, hermitian flag


def dump_operator(op: SparseOperator, path) -> None:
    """Write header (dimension, nnz, hermitian flag) + COO triplets.

    Little-endian throughout: int64 rows, int64 columns, complex128 values,
    stored as three contiguous arrays in that order.
    """
    coo = op.matrix.tocoo()
    order = np.lexsort((coo.col, coo.row))
    with open(path, "wb") as fh:
        fh.write(_DUMP_HEADER.pack(_DUMP_MAGIC, op.dim, coo.nnz, int(op.hermitian)))
        fh.write(coo.row[order].astype("<i8").tobytes())
        fh.write(coo.col[order].astype("<i8").tobytes())
        fh.write(coo.data[order].astype("<c16").tobytes())


def load_operator(path) -> SparseOperator:
    with open(path, "rb") as fh:
        magic, dim, nnz, herm = _DUMP_HEADER.unpack(fh.read(_DUMP_HEADER.size))
        if magic != _DUMP_MAGIC:
            raise ValueError(f"not an operator dump: bad magic {magic!r}")
        row = np.frombuffer(fh.read(8 * nnz), dtype="<i8")
        col = np.frombuffer(fh.read(8 * nnz), dtype="<i8")
        val = np.frombuffer(fh.read(16 * nnz), dtype="<c16")
    mat = sp.coo_matrix((val, (row, col)), shape=(dim, dim)).tocsr()
    return SparseOperator(matrix=mat, hermitian=bool(herm))
