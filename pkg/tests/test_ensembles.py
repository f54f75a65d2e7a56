"""Ensemble samplers: structure, variance profiles, determinism, I/O."""

import math

import numpy as np
import pytest

from heavyedge.ensembles import (
    circulant_regular_adjacency,
    matching_regular_adjacency,
    plant_spike,
    read_matrix_market,
    sample_covariance_factor,
    sample_sparse_wigner,
    sample_weighted_regular,
    symmetrize_covariance,
    write_matrix_market,
)
from heavyedge.errors import (
    DuplicateSiteError,
    InvalidParameterError,
    RetryCapExceededError,
)
from heavyedge.tail_laws import GaussianLaw, build_crossover_law

LAW = build_crossover_law(2.0, 6.0, 3.0)


class TestWigner:
    def test_dense_limit_every_site(self):
        s = sample_sparse_wigner(40, 40.0, LAW, np.random.default_rng(0))
        assert s.kind == "dense_wigner"
        a = s.materialize()
        assert np.array_equal(a, a.T)
        assert np.count_nonzero(a) == 40 * 40  # continuous law: no zeros

    def test_sparse_site_count_within_binomial(self):
        n = 1000
        p_n = n**0.5
        rng = np.random.default_rng(123)
        s = sample_sparse_wigner(n, p_n, LAW, rng)
        m = n * (n + 1) / 2
        expected = m * p_n / n
        sd = math.sqrt(m * (p_n / n) * (1 - p_n / n))
        assert abs(s.nnz_upper - expected) < 3.0 * sd
        assert expected == pytest.approx(15827.0, rel=1e-3)

    def test_entry_variance_quarter_profile(self):
        # Var[(Xi)_ij] = (p/n)(1/p) = 1/n regardless of p_n
        n = 120
        rng = np.random.default_rng(5)
        reps = 400
        acc = np.zeros((n, n))
        acc2 = np.zeros((n, n))
        for _ in range(reps):
            a = sample_sparse_wigner(n, n**0.6, LAW, rng).materialize()
            acc += a
            acc2 += a * a
        var = acc2 / reps - (acc / reps) ** 2
        mean_var = var[np.triu_indices(n, 1)].mean()
        assert mean_var == pytest.approx(1.0 / n, rel=0.05)

    def test_symmetry_exact_sparse(self):
        s = sample_sparse_wigner(300, 17.0, LAW, np.random.default_rng(2))
        a = s.materialize()
        assert np.array_equal(a, a.T)
        assert np.all(s.rows <= s.cols)

    def test_seed_determinism(self):
        a = sample_sparse_wigner(200, 14.0, LAW, np.random.default_rng(77))
        b = sample_sparse_wigner(200, 14.0, LAW, np.random.default_rng(77))
        assert np.array_equal(a.rows, b.rows)
        assert np.array_equal(a.cols, b.cols)
        assert np.array_equal(a.vals, b.vals)

    def test_p_out_of_range(self):
        with pytest.raises(InvalidParameterError):
            sample_sparse_wigner(10, 0.0, LAW, np.random.default_rng(0))
        with pytest.raises(InvalidParameterError):
            sample_sparse_wigner(10, 11.0, LAW, np.random.default_rng(0))


class TestRegularGraphs:
    def test_circulant_small_case(self):
        adj = circulant_regular_adjacency(5, 3)
        pairs = set(zip(adj.rows.tolist(), adj.cols.tolist()))
        # row 0 neighbors {4, 0, 1} -> upper pairs (0,0), (0,1), (0,4)
        assert (0, 0) in pairs and (0, 1) in pairs and (0, 4) in pairs
        assert np.all(adj.degrees() == 3)

    def test_circulant_every_row_sum(self):
        for n, k in [(10, 5), (31, 7), (9, 9)]:
            adj = circulant_regular_adjacency(n, k)
            assert np.all(adj.degrees() == k)

    def test_circulant_complete_with_loops(self):
        adj = circulant_regular_adjacency(9, 9)
        assert len(adj.rows) == 9 * 10 // 2

    def test_circulant_parity_error(self):
        with pytest.raises(InvalidParameterError):
            circulant_regular_adjacency(10, 4)

    def test_matching_row_sums_exact(self):
        rng = np.random.default_rng(0)
        for n, k in [(20, 3), (50, 6), (100, 9)]:
            adj = matching_regular_adjacency(n, k, rng)
            assert np.all(adj.degrees() == k)
            assert np.all(adj.rows < adj.cols)  # no loops

    def test_matching_uniform_over_three(self):
        # n=4, k=1: the three perfect matchings should be equally likely
        rng = np.random.default_rng(42)
        counts = {}
        trials = 1500
        for _ in range(trials):
            adj = matching_regular_adjacency(4, 1, rng)
            key = tuple(sorted(zip(adj.rows.tolist(), adj.cols.tolist())))
            counts[key] = counts.get(key, 0) + 1
        assert len(counts) == 3
        p = 1.0 / 3.0
        sd = math.sqrt(trials * p * (1 - p))
        for c in counts.values():
            assert abs(c - trials * p) < 3.0 * sd

    def test_matching_retry_cap(self):
        with pytest.raises(RetryCapExceededError):
            matching_regular_adjacency(4, 3, np.random.default_rng(1), retry_cap=2)

    def test_weighted_regular_variance(self):
        rng = np.random.default_rng(8)
        k = 21
        adj = circulant_regular_adjacency(400, k)
        s = sample_weighted_regular(adj, LAW, rng)
        assert s.scale == pytest.approx(1.0 / math.sqrt(k))
        # row second-moment sums ~ 1 in expectation
        a = s.materialize()
        row_sq = (a * a).sum(axis=1)
        assert row_sq.mean() == pytest.approx(1.0, abs=0.05)

    def test_weighted_regular_symmetric(self):
        adj = matching_regular_adjacency(60, 5, np.random.default_rng(3))
        a = sample_weighted_regular(adj, LAW, np.random.default_rng(4)).materialize()
        assert np.array_equal(a, a.T)


class TestCovariance:
    def test_block_identity_small(self):
        fac = sample_covariance_factor(3, 2, LAW, np.random.default_rng(1))
        sym = symmetrize_covariance(fac)
        e = sym.materialize()
        lam_e = np.linalg.eigvalsh(e)[-1]
        lam_w = np.linalg.eigvalsh(fac.dense @ fac.dense.T / 3.0)[-1]
        assert lam_e**2 == pytest.approx(lam_w, abs=1e-12)

    def test_zero_diagonal_blocks(self):
        fac = sample_covariance_factor(4, 6, LAW, np.random.default_rng(2))
        e = symmetrize_covariance(fac).materialize()
        assert np.all(e[:4, :4] == 0.0)
        assert np.all(e[4:, 4:] == 0.0)
        assert np.array_equal(e, e.T)

    def test_square_gaussian_edge_near_four(self):
        fac = sample_covariance_factor(1000, 1000, GaussianLaw(), np.random.default_rng(9))
        lam = np.linalg.eigvalsh(fac.dense @ fac.dense.T / 1000.0)[-1]
        assert 3.7 < lam < 4.3  # Marchenko-Pastur edge (1+sqrt(1))^2 = 4

    def test_spectrum_symmetric_pm(self):
        fac = sample_covariance_factor(30, 50, LAW, np.random.default_rng(11))
        e = symmetrize_covariance(fac).materialize()
        w = np.linalg.eigvalsh(e)
        assert np.max(np.abs(np.sort(w) + np.sort(-w))) < 1e-10


class TestPlantSpike:
    def test_two_by_two_block_spectrum(self):
        from heavyedge.ensembles import EnsembleSample

        zero = EnsembleSample(kind="dense_wigner", shape=(6, 6), scale=1.0,
                              dense=np.zeros((6, 6)))
        spiked = plant_spike(zero, [(1, 2, 3.0)])
        w = np.linalg.eigvalsh(spiked.materialize())
        assert w[-1] == pytest.approx(3.0, abs=1e-12)
        assert w[0] == pytest.approx(-3.0, abs=1e-12)
        assert np.max(np.abs(w[1:-1])) < 1e-12

    def test_differs_exactly_at_sites(self):
        s = sample_sparse_wigner(50, 50.0, LAW, np.random.default_rng(4))
        planted = plant_spike(s, [(3, 7, 2.0), (10, 10, -1.0)])
        diff = planted.materialize() - s.materialize()
        nz = np.argwhere(diff != 0.0)
        assert {tuple(x) for x in nz} == {(3, 7), (7, 3), (10, 10)}

    def test_duplicate_sites_rejected(self):
        s = sample_sparse_wigner(20, 20.0, LAW, np.random.default_rng(4))
        with pytest.raises(DuplicateSiteError):
            plant_spike(s, [(1, 2, 1.0), (2, 1, 5.0)])

    def test_plant_into_sparse_triplets(self):
        s = sample_sparse_wigner(200, 10.0, LAW, np.random.default_rng(5))
        planted = plant_spike(s, [(0, 1, 9.0)])
        a = planted.materialize()
        assert a[0, 1] == 9.0 and a[1, 0] == 9.0
        base = s.materialize()
        base[0, 1] = base[1, 0] = 9.0
        assert np.array_equal(a, base)


class TestMatrixMarket:
    def test_symmetric_roundtrip(self, tmp_path):
        s = sample_sparse_wigner(80, 9.0, LAW, np.random.default_rng(6))
        path = tmp_path / "sample.mtx"
        write_matrix_market(s, str(path))
        back = read_matrix_market(str(path))
        assert np.allclose(back.materialize(), s.materialize(), atol=1e-12)

    def test_rectangular_roundtrip(self, tmp_path):
        fac = sample_covariance_factor(7, 5, LAW, np.random.default_rng(6))
        path = tmp_path / "factor.mtx"
        write_matrix_market(fac, str(path))
        back = read_matrix_market(str(path))
        assert np.allclose(back.materialize(), fac.dense, atol=1e-12)
