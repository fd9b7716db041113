import math

import numpy as np
import pytest

from fermiline.errors import ConfigError, ResourceLimitError
from fermiline.hilbert import (
    SparseOperator,
    apply,
    apply_hamiltonian_matrix_free,
    basis_dimension,
    build_hamiltonian,
    dump_operator,
    enumerate_basis,
    load_operator,
    projector,
    projector_diagonal,
)

from conftest import make_cfg


class TestBasis:
    def test_hand_counted_dimension(self):
        # two modes, up to two photons: 1 + 2 + 3 photon configs, times 4
        basis = enumerate_basis(2, 2)
        assert basis.dim == 24

    def test_vacuum_only(self):
        assert enumerate_basis(37, 0).dim == 4

    def test_binomial_dimension(self):
        assert basis_dimension(256, 2) == 132612
        basis = enumerate_basis(256, 2)
        assert basis.dim == 132612

    def test_rank_unrank_bijection_small(self):
        basis = enumerate_basis(3, 3)
        for i in range(basis.dim):
            state = basis.unrank(i)
            assert basis.rank(state) == i

    def test_enumeration_order(self):
        basis = enumerate_basis(2, 2)
        # qubit sector major, graded by photon number, lexicographic pairs
        assert basis.unrank(0) == (0, 0, ())
        assert basis.unrank(1) == (0, 0, (0,))
        assert basis.unrank(2) == (0, 0, (1,))
        assert basis.unrank(3) == (0, 0, (0, 0))
        assert basis.unrank(4) == (0, 0, (0, 1))
        assert basis.unrank(5) == (0, 0, (1, 1))
        assert basis.unrank(6) == (0, 1, ())

    def test_dimension_cap(self):
        with pytest.raises(ResourceLimitError):
            enumerate_basis(4000, 2)


class TestHamiltonian:
    def test_free_theory_is_diagonal(self):
        cfg = make_cfg(k_a=0.0, k_b=0.0, modes=16, t_max=1.0, box_length=20.0)
        basis = enumerate_basis(cfg.n_active, cfg.disc.n_max)
        h = build_hamiltonian(cfg, basis)
        off = h.matrix - __import__("scipy.sparse", fromlist=["diags"]).diags(
            h.matrix.diagonal()
        )
        assert abs(off).max() == 0.0

    def test_hermiticity_exact(self):
        cfg = make_cfg(modes=12, t_max=1.0, box_length=12.0)
        basis = enumerate_basis(cfg.n_active, cfg.disc.n_max)
        h = build_hamiltonian(cfg, basis)
        assert (h.matrix - h.matrix.getH()).nnz == 0

    def test_resonant_rwa_block_splitting(self):
        # single coupled qubit, one resonant mode pair; the 2x2 block
        # |e,0> / |g,1_k> splits by twice the coupling element
        cfg = make_cfg(
            k_a=0.04, k_b=0.0, modes=2, omega_max=12.0,
            box_length=2 * math.pi, t_max=0.4, separation=math.pi / 2,
        )
        assert cfg.n_active == 2
        assert cfg.mode_omega[0] == pytest.approx(1.0)  # resonant by construction
        basis = enumerate_basis(2, cfg.disc.n_max)
        h = build_hamiltonian(cfg, basis, rwa=True).matrix.toarray()
        i_e0 = basis.rank((1, 0, ()))
        i_g1 = basis.rank((0, 0, (0,)))
        coupling = cfg.params.d_a * cfg.mode_weight[0]
        assert abs(h[i_e0, i_g1]) == pytest.approx(coupling, rel=1e-12)
        block = h[np.ix_([i_e0, i_g1], [i_e0, i_g1])]
        evals = np.linalg.eigvalsh(block)
        assert evals[1] - evals[0] == pytest.approx(2 * coupling, rel=1e-12)

    def test_counter_rotating_present_by_default(self):
        cfg = make_cfg(modes=8, t_max=1.0, box_length=12.0)
        basis = enumerate_basis(cfg.n_active, cfg.disc.n_max)
        h = build_hamiltonian(cfg, basis).matrix
        # |g g vacuum> couples to |e_B, 1 photon>: counter-rotating vertex
        col = h[:, basis.rank((0, 0, ()))].toarray().ravel()
        i = basis.rank((0, 1, (2,)))
        assert abs(col[i]) > 0

    def test_rwa_flag_drops_counter_terms(self):
        cfg = make_cfg(modes=8, t_max=1.0, box_length=12.0)
        basis = enumerate_basis(cfg.n_active, cfg.disc.n_max)
        h = build_hamiltonian(cfg, basis, rwa=True).matrix
        col = h[:, basis.rank((0, 0, ()))].toarray().ravel()
        col[basis.rank((0, 0, ()))] = 0.0
        assert np.all(col == 0.0)

    def test_basis_mismatch_rejected(self):
        cfg = make_cfg(modes=8, t_max=1.0, box_length=12.0)
        with pytest.raises(ConfigError):
            build_hamiltonian(cfg, enumerate_basis(4, cfg.disc.n_max))

    def test_matrix_free_agrees_with_stored(self, rng):
        cfg = make_cfg(modes=10, t_max=1.0, box_length=12.0)
        basis = enumerate_basis(cfg.n_active, cfg.disc.n_max)
        h = build_hamiltonian(cfg, basis)
        psi = rng.normal(size=basis.dim) + 1j * rng.normal(size=basis.dim)
        psi /= np.linalg.norm(psi)
        direct = h.matrix @ psi
        free = apply_hamiltonian_matrix_free(cfg, basis, psi)
        np.testing.assert_allclose(free, direct, atol=1e-12)

    def test_matrix_free_agrees_under_rwa(self, rng):
        cfg = make_cfg(modes=6, t_max=1.0, box_length=12.0)
        basis = enumerate_basis(cfg.n_active, cfg.disc.n_max)
        h = build_hamiltonian(cfg, basis, rwa=True)
        psi = rng.normal(size=basis.dim) + 1j * rng.normal(size=basis.dim)
        direct = h.matrix @ psi
        free = apply_hamiltonian_matrix_free(cfg, basis, psi, rwa=True)
        np.testing.assert_allclose(free, direct, atol=1e-12)

    def test_generic_sector_path_n_max_3(self, rng):
        # n_max = 3 exercises the generic (dict-based) transition builder
        cfg = make_cfg(modes=4, n_max=3, t_max=1.0, box_length=12.0)
        basis = enumerate_basis(cfg.n_active, 3)
        h = build_hamiltonian(cfg, basis)
        assert (h.matrix - h.matrix.getH()).nnz == 0
        psi = rng.normal(size=basis.dim) + 1j * rng.normal(size=basis.dim)
        np.testing.assert_allclose(
            apply_hamiltonian_matrix_free(cfg, basis, psi), h.matrix @ psi, atol=1e-12
        )


class TestApply:
    def test_identity(self, rng):
        import scipy.sparse as sp

        op = SparseOperator(matrix=sp.identity(10, format="csr", dtype=complex), hermitian=True)
        psi = rng.normal(size=10) + 0j
        np.testing.assert_array_equal(apply(op, psi), psi)

    def test_column_extraction(self):
        cfg = make_cfg(modes=6, t_max=1.0, box_length=12.0)
        basis = enumerate_basis(cfg.n_active, cfg.disc.n_max)
        h = build_hamiltonian(cfg, basis)
        e3 = np.zeros(basis.dim, dtype=complex)
        e3[3] = 1.0
        np.testing.assert_array_equal(apply(h, e3), h.matrix[:, 3].toarray().ravel())

    def test_composition_associativity(self, rng):
        cfg = make_cfg(modes=6, t_max=1.0, box_length=12.0)
        basis = enumerate_basis(cfg.n_active, cfg.disc.n_max)
        h = build_hamiltonian(cfg, basis)
        psi = rng.normal(size=basis.dim) + 1j * rng.normal(size=basis.dim)
        twice = apply(h, apply(h, psi))
        h2 = SparseOperator(matrix=(h.matrix @ h.matrix).tocsr(), hermitian=True)
        np.testing.assert_allclose(apply(h2, psi), twice, rtol=1e-12, atol=1e-12)

    def test_dimension_mismatch(self):
        cfg = make_cfg(modes=6, t_max=1.0, box_length=12.0)
        basis = enumerate_basis(cfg.n_active, cfg.disc.n_max)
        h = build_hamiltonian(cfg, basis)
        with pytest.raises(ValueError):
            apply(h, np.zeros(3, dtype=complex))


class TestProjectors:
    def test_completeness(self):
        basis = enumerate_basis(5, 2)
        total = projector_diagonal(basis, "e_a") + projector_diagonal(basis, "g_a")
        np.testing.assert_array_equal(total, np.ones(basis.dim))

    def test_joint_is_product(self):
        basis = enumerate_basis(5, 2)
        joint = projector_diagonal(basis, "eb_ga")
        product = projector_diagonal(basis, "e_b") * projector_diagonal(basis, "g_a")
        np.testing.assert_array_equal(joint, product)

    def test_trace_half_dimension(self):
        basis = enumerate_basis(7, 2)
        p = projector(basis, "e_b")
        assert p.matrix.diagonal().sum() == basis.dim / 2

    def test_photon_number_grading(self):
        basis = enumerate_basis(3, 2)
        n = projector_diagonal(basis, "photon_number")
        for i in range(basis.dim):
            assert n[i] == len(basis.unrank(i)[2])

    def test_unknown_selector(self):
        with pytest.raises(ConfigError):
            projector(enumerate_basis(2, 1), "e_c")


class TestDumpFormat:
    def test_roundtrip(self, tmp_path):
        cfg = make_cfg(modes=6, t_max=1.0, box_length=12.0)
        basis = enumerate_basis(cfg.n_active, cfg.disc.n_max)
        h = build_hamiltonian(cfg, basis)
        path = tmp_path / "h.op"
        dump_operator(h, path)
        back = load_operator(path)
        assert back.hermitian == h.hermitian
        assert back.dim == h.dim
        assert (back.matrix - h.matrix).nnz == 0

    def test_rejects_garbage(self, tmp_path):
        path = tmp_path / "bad.op"
        path.write_bytes(b"NOPE" + b"\x00" * 32)
        with pytest.raises(ValueError):
            load_operator(path)
