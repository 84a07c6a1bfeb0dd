import numpy as np
import pytest

from scma_vlc import (
    enumerate_superimposed,
    epd_ellipses,
    load_fixture,
    logsumexp_gradient,
    logsumexp_objective,
    pairwise_report,
    red,
    stack_codebook_set,
)
from scma_vlc.errors import CapacityError, DomainError, UnsupportedError
from scma_vlc.metrics import CHI2_2_Q95

from conftest import random_codebook_set


class TestRed:
    def test_reduces_to_euclidean(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            a = rng.uniform(0, 10, size=4)
            b = rng.uniform(0, 10, size=4)
            assert abs(red(a, b, 0.0) - np.sum((a - b) ** 2)) < 1e-12

    def test_known_value(self):
        # Unit differences, geometric-mean denominators 2 and 2.
        assert abs(red(np.array([1.0, 0.0]), np.array([0.0, 1.0]), 3.0) - 1.0) < 1e-15

    def test_symmetry(self):
        a = np.array([1.0, 2.0, 3.0, 4.0])
        b = np.array([4.0, 3.0, 2.0, 1.0])
        assert red(a, b, 5.0) == red(b, a, 5.0)

    def test_shrinks_with_shot_noise(self):
        a = np.array([2.0, 5.0])
        b = np.array([3.0, 1.0])
        assert red(a, b, 5.0) < red(a, b, 1.0) < red(a, b, 0.0)

    def test_rejects_negative(self):
        with pytest.raises(DomainError):
            red(np.array([-1.0, 0.0]), np.array([0.0, 1.0]), 1.0)

    def test_rejects_shape_mismatch(self):
        with pytest.raises(DomainError):
            red(np.array([1.0]), np.array([1.0, 2.0]), 1.0)


class TestStackedVector:
    def test_points_match_enumeration(self, ls_j3):
        sv = stack_codebook_set(ls_j3)
        c = enumerate_superimposed(ls_j3)
        np.testing.assert_allclose(sv.points(), c.points, atol=1e-12)

    def test_l_layout(self, ls_j3):
        sv = stack_codebook_set(ls_j3)
        manual = np.concatenate([b.C.reshape(-1) for b in ls_j3.books])
        np.testing.assert_array_equal(sv.L, manual)

    def test_replace_keeps_map(self, ls_j3):
        sv = stack_codebook_set(ls_j3)
        doubled = sv.replace(2.0 * sv.L)
        np.testing.assert_allclose(doubled.points(), 2.0 * sv.points())


class TestPairwiseReport:
    def test_pair_count(self, ls_j3):
        rep = pairwise_report(enumerate_superimposed(ls_j3), 5.0)
        assert rep.pair_count == 64 * 63 // 2

    def test_matches_bruteforce(self):
        cb = random_codebook_set(3, seed=7)
        c = enumerate_superimposed(cb)
        rep = pairwise_report(c, 5.0)
        ds = [
            red(c.points[i], c.points[j], 5.0)
            for i in range(64)
            for j in range(i + 1, 64)
        ]
        assert abs(rep.d_min - min(ds)) < 1e-12
        assert abs(rep.d_max - max(ds)) < 1e-12

    def test_histogram(self, ls_j3):
        rep = pairwise_report(enumerate_superimposed(ls_j3), 5.0, bins=10)
        counts, edges = rep.histogram
        assert counts.sum() == rep.pair_count
        assert len(edges) == 11

    def test_pair_budget(self, ls_j3):
        with pytest.raises(CapacityError):
            pairwise_report(enumerate_superimposed(ls_j3), 5.0, pair_budget=100)


class TestLogsumexpObjective:
    def test_softmin_brackets_dmin(self, ls_j3):
        sv = stack_codebook_set(ls_j3)
        rep = pairwise_report(enumerate_superimposed(ls_j3), 5.0)
        for beta in (1.0, 10.0, 30.0):
            f = logsumexp_objective(sv, beta, 5.0)
            assert -rep.d_min <= f <= -rep.d_min + np.log(rep.pair_count) / beta

    def test_sharpens_toward_dmin(self, ls_j3):
        sv = stack_codebook_set(ls_j3)
        rep = pairwise_report(enumerate_superimposed(ls_j3), 5.0)
        gaps = [
            logsumexp_objective(sv, beta, 5.0) + rep.d_min for beta in (1.0, 10.0, 30.0)
        ]
        assert gaps[0] > gaps[1] > gaps[2] >= 0

    def test_rejects_bad_beta(self, ls_j3):
        sv = stack_codebook_set(ls_j3)
        with pytest.raises(DomainError):
            logsumexp_objective(sv, 0.0, 5.0)

    def test_no_overflow_at_large_beta(self, ls_j3):
        sv = stack_codebook_set(ls_j3)
        assert np.isfinite(logsumexp_objective(sv, 1e4, 5.0))


class TestLogsumexpGradient:
    @pytest.mark.parametrize("beta", [1.0, 10.0, 30.0])
    def test_matches_finite_differences(self, beta):
        cb = random_codebook_set(3, seed=11)
        sv = stack_codebook_set(cb)
        g = logsumexp_gradient(sv, beta, 5.0)
        h = 1e-6
        for i in range(0, sv.L.size, 5):
            up, dn = sv.L.copy(), sv.L.copy()
            up[i] += h
            dn[i] -= h
            fd = (
                logsumexp_objective(sv.replace(up), beta, 5.0)
                - logsumexp_objective(sv.replace(dn), beta, 5.0)
            ) / (2 * h)
            assert abs(g[i] - fd) < 1e-5 * max(1.0, abs(fd))

    def test_zero_at_scaled_symmetric_point(self):
        # Doubling all entries changes every distance, so the gradient is
        # nonzero at generic points; sanity-check shape and finiteness only.
        cb = random_codebook_set(4, seed=3)
        sv = stack_codebook_set(cb)
        g = logsumexp_gradient(sv, 10.0, 5.0)
        assert g.shape == sv.L.shape
        assert np.all(np.isfinite(g))


class TestEpdEllipses:
    def test_axes_from_variances(self, ls_j3):
        p = ls_j3.params
        book = ls_j3.books[0]
        ellipses = epd_ellipses(book, p.sigma2, p.varsigma2)
        assert len(ellipses) == p.M
        for m, e in enumerate(ellipses):
            np.testing.assert_array_equal(e.center, book.C[:, m])
            var = p.varsigma2 * p.sigma2 * e.center + p.sigma2
            np.testing.assert_allclose(e.semi_axes, np.sqrt(CHI2_2_Q95 * var))
            np.testing.assert_array_equal(e.axis_directions, np.eye(2))

    def test_awgn_circles(self, ls_j3):
        ellipses = epd_ellipses(ls_j3.books[0], 0.01, 0.0)
        for e in ellipses:
            assert abs(e.semi_axes[0] - e.semi_axes[1]) < 1e-15

    def test_confidence_quantile(self, ls_j3):
        e95 = epd_ellipses(ls_j3.books[0], 0.01, 5.0, confidence=0.95)[0]
        e50 = epd_ellipses(ls_j3.books[0], 0.01, 5.0, confidence=0.5)[0]
        ratio = (e95.semi_axes[0] / e50.semi_axes[0]) ** 2
        assert abs(ratio - CHI2_2_Q95 / (-2 * np.log(0.5))) < 1e-3

    def test_requires_2d(self):
        from scma_vlc.model import Codebook

        book = Codebook(C=np.ones((3, 4)), user_index=1)
        with pytest.raises(UnsupportedError):
            epd_ellipses(book, 0.01, 5.0)

    def test_bad_confidence(self, ls_j3):
        with pytest.raises(DomainError):
            epd_ellipses(ls_j3.books[0], 0.01, 5.0, confidence=1.0)
