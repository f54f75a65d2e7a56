"""Split algorithm: exactness identities, law equality, structural counts."""

import math

import numpy as np
import pytest

from heavyedge.decomposition import (
    ExactT1Law,
    extreme_entries,
    reassemble,
    split_sample,
    structural_check,
)
from heavyedge.ensembles import EnsembleSample, plant_spike, sample_sparse_wigner
from heavyedge.errors import InvalidParameterError
from heavyedge.spectral import operator_norm
from heavyedge.tail_laws import build_crossover_law

LAW6 = build_crossover_law(2.0, 6.0, 3.0)  # mu = 1/2
LAW4 = build_crossover_law(2.0, 4.0, 3.0)  # mu = 1


def make_split(n=600, mu=0.5, seed=0, **kw):
    rng = np.random.default_rng(seed)
    return split_sample(n, float(n) ** mu, LAW6 if mu == 0.5 else LAW4, rng, **kw)


class TestSplitIdentities:
    def test_reassembly_site_values(self):
        split = make_split(seed=3, q_override=1.0)
        rebuilt = reassemble(split)
        # S-sites carry the small draw, L-sites the large draw exactly
        assert np.array_equal(
            rebuilt.vals[~split.is_large], split.small_part.vals[~split.is_large]
        )
        assert np.array_equal(rebuilt.vals[split.is_large], split.large_part.vals)
        # nonzero exactly at kept sites
        assert np.all(rebuilt.vals != 0.0)

    def test_cut_readds_exactly(self):
        split = make_split(seed=4, q_override=1.0, cut_level=0.25)
        hi, lo = split.cut
        merged = np.zeros_like(split.large_part.vals)
        above = np.abs(split.large_part.vals) >= split.cut_level
        merged[above] = hi.vals
        merged[~above] = lo.vals
        assert np.array_equal(merged, split.large_part.vals)
        assert len(hi.vals) + len(lo.vals) == len(split.large_part.vals)

    def test_small_entries_below_bound_hard(self):
        split = make_split(seed=5)
        assert np.all(np.abs(split.small_part.vals) < split.small_entry_bound)
        split_o = make_split(seed=5, q_override=0.8)
        assert np.all(np.abs(split_o.small_part.vals) < 0.8 * split_o.small_part.scale)
        assert split_o.q_overridden

    def test_label_frequency_binomial(self):
        split = make_split(n=800, seed=6, q_override=1.0)
        p_large = float(LAW6.tail_prob(1.0))
        nk = len(split.rows)
        observed = split.is_large.mean()
        sd = math.sqrt(p_large * (1 - p_large) / nk)
        assert abs(observed - p_large) < 4.0 * sd

    def test_law_equality_ks(self):
        # Reassembled entries (unscaled) must follow the unconditional law.
        rng = np.random.default_rng(7)
        split = split_sample(1000, 1000.0**0.8, LAW6, rng, q_override=1.0)
        entries = reassemble(split).vals / split.small_part.scale
        x = np.sort(entries)
        m = len(x)
        cdf = LAW6.cdf(x)
        ks = max(
            np.max(np.arange(1, m + 1) / m - cdf),
            np.max(cdf - np.arange(0, m) / m),
        )
        assert m > 50000
        assert ks < 1.63 / math.sqrt(m)

    def test_moment_match(self):
        split = make_split(n=1000, seed=8, q_override=1.0)
        entries = reassemble(split).vals / split.small_part.scale
        for p in (1, 2, 3, 4):
            emp = np.mean(entries**p)
            se = np.std(entries**p, ddof=1) / math.sqrt(len(entries))
            assert abs(emp - LAW6.moment(p)) < 4.0 * se + 1e-12

    def test_compensator_norm_when_rows_clean(self):
        # On the event that no row holds two L-sites, the compensator norm is
        # bounded by the small-entry threshold.
        found = 0
        for seed in range(12):
            split = make_split(n=400, seed=seed)
            report = structural_check(reassemble(split))
            comp = split.compensator
            if len(comp.vals) == 0:
                continue
            per_row = np.zeros(split.n, dtype=int)
            np.add.at(per_row, comp.rows, 1)
            off = comp.rows != comp.cols
            np.add.at(per_row, comp.cols[off], 1)
            if per_row.max() <= 1:
                found += 1
                norm = operator_norm(comp.operator(), rng=np.random.default_rng(0))
                assert norm <= split.small_entry_bound + 1e-12
        assert found > 0

    def test_invalid_parameters(self):
        with pytest.raises(InvalidParameterError):
            make_split(cut_level=-1.0)
        rng = np.random.default_rng(0)
        with pytest.raises(InvalidParameterError):
            split_sample(100, 0.0, LAW6, rng)


class TestStructuralCheck:
    def test_zero_matrix_all_counts_zero(self):
        zero = EnsembleSample(kind="dense_wigner", shape=(50, 50), scale=1.0,
                              dense=np.zeros((50, 50)))
        report = structural_check(zero)
        assert report.diagonal_above_threshold == 0
        assert report.rows_with_two_above_threshold == 0
        assert report.entries_above_delta == 0
        assert report.clean

    def test_planted_huge_entry_counts_one(self):
        zero = EnsembleSample(kind="dense_wigner", shape=(50, 50), scale=1.0,
                              dense=np.zeros((50, 50)))
        planted = plant_spike(zero, [(3, 9, 10.0)])
        report = structural_check(planted, delta=0.5)
        assert report.entries_above_delta == 1
        assert report.rows_with_two_above_threshold == 0

    def test_two_large_in_one_row_detected(self):
        zero = EnsembleSample(kind="dense_wigner", shape=(50, 50), scale=1.0,
                              dense=np.zeros((50, 50)))
        planted = plant_spike(zero, [(3, 9, 10.0), (3, 20, 10.0)])
        report = structural_check(planted)
        assert report.rows_with_two_above_threshold == 1

    def test_rare_event_fraction_decreasing_in_n(self):
        # Monte Carlo trend: fraction of trials with a doubly-loaded row
        # should not grow as n doubles (mu = 1/2 regime).
        fractions = {}
        for n in (250, 500, 1000):
            hits = 0
            trials = 60
            for seed in range(trials):
                rng = np.random.default_rng((n, seed))
                sample = sample_sparse_wigner(n, float(n) ** 0.5, LAW6, rng)
                report = structural_check(sample)
                hits += report.rows_with_two_above_threshold > 0
            fractions[n] = hits / trials
        assert fractions[1000] <= fractions[250] + 0.1


class TestExtremeEntries:
    def test_sorted_and_thresholded(self):
        s = sample_sparse_wigner(300, 300.0, LAW4, np.random.default_rng(1))
        top = extreme_entries(s, 0.2)
        mags = np.abs(top)
        assert np.all(mags >= 0.2)
        assert np.all(np.diff(mags) <= 1e-15)

    def test_empty_when_cutoff_above_max(self):
        s = sample_sparse_wigner(100, 100.0, LAW4, np.random.default_rng(2))
        _, _, vals = s.upper_entries()
        top = extreme_entries(s, np.abs(vals).max() + 1.0)
        assert len(top) == 0

    def test_expected_count_above_threshold(self):
        # mean count above c0 approaches (c/2) c0^-4 at mu = 1
        n, trials, c0 = 700, 80, 1.0
        counts = []
        for seed in range(trials):
            s = sample_sparse_wigner(n, float(n), LAW4, np.random.default_rng(seed))
            counts.append(len(extreme_entries(s, c0)))
        mean = np.mean(counts)
        expected = n * (n + 1) / 2.0 * (1.0 / n) * float(LAW4.tail_prob(c0 * math.sqrt(n)))
        se = np.std(counts, ddof=1) / math.sqrt(trials)
        assert abs(mean - expected) < 3.0 * se
        assert expected == pytest.approx(0.5 * 2.0 * c0**-4, rel=0.01)

    def test_exact_t1_product_cdf(self):
        law = ExactT1Law(500, 500.0, LAW4)
        # closed product formula, checked against direct evaluation
        x = 1.3
        site = (1.0 / 500.0) * float(LAW4.tail_prob(x * math.sqrt(500.0)))
        want = (1.0 - site) ** (500 * 501 / 2.0)
        assert law.cdf(x) == pytest.approx(want, rel=1e-12)
        t = np.linspace(0.05, 4.0, 300)
        vals = law.cdf(t)
        assert np.all(np.diff(vals) >= -1e-15)
        assert vals[-1] < 1.0
