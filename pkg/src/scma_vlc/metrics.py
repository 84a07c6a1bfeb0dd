"""Distance geometry of the superimposed constellation.

Implements the shot-noise-rotated squared distance between superimposed
codewords, brute-force min/max scans, the smoothed maxi-min objective with
its analytic gradient, and equal-probability-density ellipse analytics.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb, log

import numpy as np
import scipy.sparse as sp

from .errors import CapacityError, DomainError, UnsupportedError
from .model import Codebook, CodebookSet, SuperConstellation, enumerate_superimposed

# 95% quantile of the chi-square distribution with 2 degrees of freedom,
# as conventionally quoted to 4 significant digits.
CHI2_2_Q95 = 5.991

DEFAULT_PAIR_BUDGET = comb(4096, 2)

# Pair blocks processed at a time in large scans (bounds peak memory).
_PAIR_CHUNK = 500_000


@dataclass(frozen=True)
class StackedVector:
    """Stacked constellation entries plus the linear map to superimposed points.

    L concatenates vec(C_1), ..., vec(C_J) (row-major N x M blocks).
    coefficient_map is a sparse (P*K) x (N*M*J) matrix A with gains as
    coefficients, so A @ L reshaped to (P, K) reproduces the superimposed
    constellation exactly.
    """

    L: np.ndarray
    coefficient_map: sp.csr_matrix
    n_points: int
    K: int

    def points(self) -> np.ndarray:
        return (self.coefficient_map @ self.L).reshape(self.n_points, self.K)

    def replace(self, L: np.ndarray) -> "StackedVector":
        return StackedVector(
            L=L, coefficient_map=self.coefficient_map,
            n_points=self.n_points, K=self.K,
        )


@dataclass(frozen=True)
class DistanceReport:
    d_min: float
    d_max: float
    pair_count: int
    histogram: tuple[np.ndarray, np.ndarray] | None = None


@dataclass(frozen=True)
class EpdEllipse:
    """Coordinate-aligned equal-probability-density ellipse of one 2D point."""

    center: np.ndarray
    semi_axes: np.ndarray
    axis_directions: np.ndarray
    confidence: float


def stack_codebook_set(cb_set: CodebookSet) -> StackedVector:
    """Build the StackedVector of a codebook set (L entries and coefficient map)."""
    p = cb_set.params
    constellation = enumerate_superimposed(cb_set)
    L = np.concatenate([b.C.reshape(-1) for b in cb_set.books])
    A = coefficient_map(cb_set, constellation.index_tuples)
    return StackedVector(L=L, coefficient_map=A, n_points=len(constellation.points), K=p.K)


def coefficient_map(cb_set: CodebookSet, index_tuples: np.ndarray) -> sp.csr_matrix:
    """Sparse map from stacked constellation entries to flattened superimposed points."""
    p = cb_set.params
    total = index_tuples.shape[0]
    rows, cols, data = [], [], []
    for j in range(p.J):
        offset = j * p.N * p.M
        support = np.flatnonzero(cb_set.graph.F[:, j])
        for n, k in enumerate(support):
            rows.append(np.arange(total) * p.K + k)
            cols.append(offset + n * p.M + (index_tuples[:, j] - 1))
            data.append(np.full(total, cb_set.gains[j][k]))
    A = sp.coo_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
        shape=(total * p.K, p.N * p.M * p.J),
    )
    return A.tocsr()


def red(s_i: np.ndarray, s_j: np.ndarray, varsigma2: float) -> float:
    """Rotated squared distance between two superimposed codewords.

    Each squared component difference is divided by the geometric mean of the
    two points' shot-noise factors (varsigma2 * s + 1); varsigma2 = 0 recovers
    the plain squared Euclidean distance.
    """
    s_i = np.asarray(s_i, dtype=float)
    s_j = np.asarray(s_j, dtype=float)
    if s_i.shape != s_j.shape:
        raise DomainError("points must have equal length")
    if np.any(s_i < 0) or np.any(s_j < 0):
        raise DomainError("superimposed codewords must be componentwise nonnegative")
    g = np.sqrt((varsigma2 * s_i + 1.0) * (varsigma2 * s_j + 1.0))
    d = s_i - s_j
    return float(np.sum(d * d / g))


def _pair_distances(points: np.ndarray, varsigma2: float,
                    ii: np.ndarray, jj: np.ndarray) -> np.ndarray:
    g = varsigma2 * points + 1.0
    diff = points[ii] - points[jj]
    return np.sum(diff * diff / np.sqrt(g[ii] * g[jj]), axis=1)


def pairwise_report(
    constellation: SuperConstellation,
    varsigma2: float,
    bins: int | None = None,
    pair_budget: int = DEFAULT_PAIR_BUDGET,
) -> DistanceReport:
    """d_min/d_max of the rotated distance over all unordered point pairs."""
    points = constellation.points
    P = len(points)
    n_pairs = P * (P - 1) // 2
    if n_pairs > pair_budget:
        raise CapacityError(f"{n_pairs} pairs exceed the budget {pair_budget}")
    ii, jj = np.triu_indices(P, k=1)
    d_min, d_max = np.inf, -np.inf
    hist_counts = hist_edges = None
    all_d = [] if bins is not None else None
    for lo in range(0, n_pairs, _PAIR_CHUNK):
        hi = min(lo + _PAIR_CHUNK, n_pairs)
        d = _pair_distances(points, varsigma2, ii[lo:hi], jj[lo:hi])
        d_min = min(d_min, float(d.min()))
        d_max = max(d_max, float(d.max()))
        if all_d is not None:
            all_d.append(d)
    if all_d is not None:
        hist_counts, hist_edges = np.histogram(np.concatenate(all_d), bins=bins)
    histogram = (hist_counts, hist_edges) if bins is not None else None
    return DistanceReport(d_min=d_min, d_max=d_max, pair_count=n_pairs, histogram=histogram)


def _check_stacked(L: StackedVector, beta: float):
    if beta <= 0:
        raise DomainError("beta must be > 0")
    if np.any(L.L < 0):
        raise DomainError("stacked constellation entries must be nonnegative")


def _all_pair_distances(points: np.ndarray, varsigma2: float) -> np.ndarray:
    """Distances of all unordered pairs, computed in memory-bounded chunks."""
    P = len(points)
    ii, jj = np.triu_indices(P, k=1)
    n_pairs = len(ii)
    d = np.empty(n_pairs)
    for lo in range(0, n_pairs, _PAIR_CHUNK):
        hi = min(lo + _PAIR_CHUNK, n_pairs)
        d[lo:hi] = _pair_distances(points, varsigma2, ii[lo:hi], jj[lo:hi])
    return d


def logsumexp_objective(L: StackedVector, beta: float, varsigma2: float) -> float:
    """Smoothed soft-minimum of all pairwise rotated distances.

    Returns (1/beta) * ln sum_{i<j} exp(-beta * d_ij); the exponent is shifted
    by the minimum distance before summation so beta * d overflow cannot occur.
    """
    _check_stacked(L, beta)
    d = _all_pair_distances(L.points(), varsigma2)
    d_min = d.min()
    return float(np.log(np.sum(np.exp(-beta * (d - d_min)))) / beta - d_min)


def logsumexp_gradient(L: StackedVector, beta: float, varsigma2: float) -> np.ndarray:
    """Analytic gradient of logsumexp_objective with respect to the entries of L.

    Softmin pair weights are chained through the per-point distance derivative
    and the linear coefficient map.
    """
    _check_stacked(L, beta)
    points = L.points()
    P, K = L.n_points, L.K
    ii, jj = np.triu_indices(P, k=1)
    n_pairs = len(ii)
    g = varsigma2 * points + 1.0

    d = _all_pair_distances(points, varsigma2)
    w = np.exp(-beta * (d - d.min()))
    w /= w.sum()

    grad_s = np.zeros((P, K))
    for lo in range(0, n_pairs, _PAIR_CHUNK):
        hi = min(lo + _PAIR_CHUNK, n_pairs)
        ic, jc, wc = ii[lo:hi], jj[lo:hi], w[lo:hi, None]
        diff = points[ic] - points[jc]
        gi, gj = g[ic], g[jc]
        root = np.sqrt(gi * gj)
        # d(d_ij)/ds_i^k and /ds_j^k of the rotated distance.
        ddi = 2.0 * diff / root - 0.5 * varsigma2 * diff * diff / (gi * root)
        ddj = -2.0 * diff / root - 0.5 * varsigma2 * diff * diff / (gj * root)
        np.add.at(grad_s, ic, -wc * ddi)
        np.add.at(grad_s, jc, -wc * ddj)
    return np.asarray(L.coefficient_map.T @ grad_s.reshape(-1)).reshape(-1)


def epd_ellipses(
    book: Codebook, sigma2: float, varsigma2: float, confidence: float = 0.95
) -> list[EpdEllipse]:
    """Equal-probability-density ellipse of each 2D constellation point.

    The IDGN covariance is diagonal, so the axes are coordinate aligned; the
    semi-axis along dimension n is sqrt(q * (varsigma2*sigma2*c_n + sigma2))
    with q the chi-square(2) quantile at the requested confidence.
    """
    if book.C.shape[0] != 2:
        raise UnsupportedError("EPD ellipses are defined for 2D constellations (N = 2)")
    if not 0 < confidence < 1:
        raise DomainError("confidence must be in (0, 1)")
    q = CHI2_2_Q95 if confidence == 0.95 else -2.0 * log(1.0 - confidence)
    out = []
    for m in range(book.C.shape[1]):
        center = book.C[:, m].copy()
        var = varsigma2 * sigma2 * center + sigma2
        out.append(
            EpdEllipse(
                center=center,
                semi_axes=np.sqrt(q * var),
                axis_directions=np.eye(2),
                confidence=confidence,
            )
        )
    return out
