"""Multi-user detection on the SCMA factor graph.

Max-Log message passing with input-dependent per-resource noise variance,
a linear-domain sum-product variant and a brute-force joint MAP oracle.
The core routines operate on batches of received vectors (axis 0 = frame);
the public single-vector functions wrap a batch of one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .errors import CapacityError, DimensionError, DomainError
from .errors import UnderflowError as BeliefUnderflowError
from .model import DEFAULT_MAX_POINTS, CodebookSet, enumerate_superimposed

DEFAULT_ITERS = 6

_FIXPOINT_TOL = 1e-12


@dataclass
class OpCounts:
    exponential: int = 0
    multiplication: int = 0
    addition: int = 0
    comparison: int = 0


@dataclass
class DecoderState:
    """Messages, beliefs and decisions for one received vector.

    Message tables are keyed by (k, j) with 1-based resource/user indices and
    exist exactly for the edges of the factor graph.
    """

    rn_to_vn: dict[tuple[int, int], np.ndarray]
    vn_to_rn: dict[tuple[int, int], np.ndarray]
    beliefs: np.ndarray   # (J, M) log-domain
    llrs: np.ndarray      # (J, b)
    hard_bits: np.ndarray  # (J, b)
    op_counts: OpCounts | None = None


@dataclass
class _Tables:
    """Precomputed per-resource combination tables for one codebook set."""

    params: object
    edges: list[tuple[int, int]]          # (k, j) 0-based
    neighbors: list[list[int]]            # per RN, 0-based users
    vn_resources: list[list[int]]         # per VN, 0-based resources
    combos: list[np.ndarray]              # per RN, (M^d, d) symbol indices (0-based)
    combo_sum: list[np.ndarray]           # per RN, (M^d,) superimposed intensity
    rho2: list[np.ndarray]                # per RN, (M^d,)
    bit_masks: np.ndarray                 # (b, M) bit value of each symbol
    counts: OpCounts | None = None


def _build_tables(cb_set: CodebookSet) -> _Tables:
    p = cb_set.params
    neighbors = [[j - 1 for j in ns] for ns in cb_set.graph.rn_neighbors]
    vn_resources = [[k - 1 for k in ks] for ks in cb_set.graph.vn_neighbors]
    edges = [(k, j) for k in range(p.K) for j in neighbors[k]]
    combos, sums, rho2 = [], [], []
    for k in range(p.K):
        js = neighbors[k]
        combo = np.array(list(product(range(p.M), repeat=len(js))), dtype=np.int64)
        combo = combo.reshape(p.M ** len(js), len(js))
        total = np.zeros(len(combo))
        for pos, j in enumerate(js):
            n = cb_set.graph.vn_neighbors[j].index(k + 1)  # row of C_j on resource k
            vals = cb_set.gains[j][k] * cb_set.books[j].C[n, :]
            total += vals[combo[:, pos]]
        combos.append(combo)
        sums.append(total)
        r2 = p.sigma2 + p.varsigma2 * p.sigma2 * total
        if np.any(r2 <= 0):
            raise DomainError("nonpositive per-RN variance; intensities must be >= 0")
        rho2.append(r2)
    b = p.bits_per_symbol
    masks = np.array(
        [[(m >> (b - 1 - i)) & 1 for m in range(p.M)] for i in range(b)], dtype=np.uint8
    )
    return _Tables(
        params=p, edges=edges, neighbors=neighbors, vn_resources=vn_resources,
        combos=combos, combo_sum=sums, rho2=rho2, bit_masks=masks,
    )


def _rn_metrics(Y: np.ndarray, tables: _Tables, include_logdet: bool,
                force_awgn: bool = False) -> list[np.ndarray]:
    """Per-RN channel metric (T, M^d): Gaussian log-likelihood of y_k per combo."""
    p = tables.params
    metrics = []
    for k in range(p.K):
        rho2 = np.full_like(tables.rho2[k], p.sigma2) if force_awgn else tables.rho2[k]
        m = -((Y[:, k, None] - tables.combo_sum[k][None, :]) ** 2) / (2.0 * rho2[None, :])
        if include_logdet:
            m = m - 0.5 * np.log(2.0 * np.pi * rho2)[None, :]
        metrics.append(m)
    return metrics


def _llrs_from_beliefs(beliefs: np.ndarray, bit_masks: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-bit LLR = max belief over bit-0 symbols minus max over bit-1 symbols."""
    T, J, M = beliefs.shape
    b = bit_masks.shape[0]
    llrs = np.empty((T, J, b))
    for i in range(b):
        zero = bit_masks[i] == 0
        llrs[:, :, i] = beliefs[:, :, zero].max(axis=2) - beliefs[:, :, ~zero].max(axis=2)
    hard = (llrs <= 0).astype(np.uint8)  # LLR tie decides bit 1
    return llrs, hard


def max_log_mpa_batch(
    Y: np.ndarray,
    cb_set: CodebookSet,
    n_iters: int = DEFAULT_ITERS,
    include_logdet: bool = False,
    count_ops: bool = False,
    early_exit: bool = True,
    force_awgn: bool = False,
    tables: _Tables | None = None,
):
    """Max-Log message passing over a batch of received vectors.

    Returns (beliefs (T,J,M), llrs (T,J,b), hard bits (T,J,b), messages,
    OpCounts or None). Counting disables the fixpoint early exit so counters
    reflect exactly n_iters iterations.
    """
    p = cb_set.params
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    if Y.shape[1] != p.K:
        raise DimensionError(f"received vectors must have length K={p.K}")
    if n_iters < 1:
        raise DomainError("n_iters must be >= 1")
    if tables is None:
        tables = _build_tables(cb_set)
    T = Y.shape[0]
    metrics = _rn_metrics(Y, tables, include_logdet, force_awgn=force_awgn)
    counts = OpCounts() if count_ops else None

    log_prior = -np.log(p.M)
    vn = {e: np.full((T, p.M), log_prior) for e in tables.edges}
    rn = {e: np.zeros((T, p.M)) for e in tables.edges}

    for _ in range(n_iters):
        delta = 0.0
        # RN updates from current VN messages.
        for k, j in tables.edges:
            js = tables.neighbors[k]
            combo = tables.combos[k]
            pos_j = js.index(j)
            ext = metrics[k].copy()
            for pos, r in enumerate(js):
                if r != j:
                    ext += vn[(k, r)][:, combo[:, pos]]
            shaped = ext.reshape(T, *([p.M] * len(js)))
            axes = tuple(a + 1 for a in range(len(js)) if a != pos_j)
            new = shaped.max(axis=axes) if axes else shaped
            if counts is not None:
                d = len(js)
                counts.comparison += p.M**d
                counts.multiplication += 4 * p.M**d
                counts.addition += (3 * d + 1) * p.M**d * d
            delta = max(delta, float(np.abs(new - rn[(k, j)]).max()))
            rn[(k, j)] = new
        # VN updates from the just-computed RN messages.
        for j in range(p.J):
            ks = tables.vn_resources[j]
            for k in ks:
                msg = np.full((T, p.M), log_prior)
                for d in ks:
                    if d != k:
                        msg += rn[(d, j)]
                delta = max(delta, float(np.abs(msg - vn[(k, j)]).max()))
                vn[(k, j)] = msg
        if early_exit and counts is None and delta < _FIXPOINT_TOL:
            break

    beliefs = np.full((T, p.J, p.M), log_prior)
    for j in range(p.J):
        for k in tables.vn_resources[j]:
            beliefs[:, j, :] += rn[(k, j)]
    llrs, hard = _llrs_from_beliefs(beliefs, tables.bit_masks)
    return beliefs, llrs, hard, (rn, vn), counts


def _single_state(beliefs, llrs, hard, messages, counts) -> DecoderState:
    rn, vn = messages
    return DecoderState(
        rn_to_vn={(k + 1, j + 1): v[0].copy() for (k, j), v in rn.items()},
        vn_to_rn={(k + 1, j + 1): v[0].copy() for (k, j), v in vn.items()},
        beliefs=beliefs[0],
        llrs=llrs[0],
        hard_bits=hard[0],
        op_counts=counts,
    )


def max_log_mpa(
    y: np.ndarray,
    cb_set: CodebookSet,
    n_iters: int = DEFAULT_ITERS,
    include_logdet: bool = False,
    count_ops: bool = False,
    early_exit: bool = True,
    force_awgn: bool = False,
) -> DecoderState:
    """Decode one received vector with Max-Log message passing.

    include_logdet adds the -0.5*ln(2*pi*rho^2) normalizer to the RN channel
    metric, making the metric the exact Gaussian log-likelihood; force_awgn
    replaces every per-RN variance by the thermal variance sigma2.
    """
    out = max_log_mpa_batch(
        np.asarray(y, dtype=float)[None, :], cb_set, n_iters,
        include_logdet=include_logdet, count_ops=count_ops,
        early_exit=early_exit, force_awgn=force_awgn,
    )
    return _single_state(*out)


def mpa_linear(
    y: np.ndarray,
    cb_set: CodebookSet,
    n_iters: int = DEFAULT_ITERS,
) -> DecoderState:
    """Linear-domain sum-product decoding with the full IDGN Gaussian likelihood.

    Channel factors are max-shifted per resource before exponentiation and
    every message is renormalized, so underflow only occurs if a belief sum
    is exactly zero.
    """
    p = cb_set.params
    Y = np.atleast_2d(np.asarray(y, dtype=float))
    if Y.shape[1] != p.K:
        raise DimensionError(f"received vectors must have length K={p.K}")
    if n_iters < 0:
        raise DomainError("n_iters must be >= 0")
    tables = _build_tables(cb_set)
    T = Y.shape[0]
    log_metrics = _rn_metrics(Y, tables, include_logdet=True)
    # Max-shift per (frame, RN) keeps the largest factor at 1.
    phis = [np.exp(m - m.max(axis=1, keepdims=True)) for m in log_metrics]

    vn = {e: np.full((T, p.M), 1.0 / p.M) for e in tables.edges}
    rn = {e: np.full((T, p.M), 1.0 / p.M) for e in tables.edges}

    for _ in range(n_iters):
        for k, j in tables.edges:
            js = tables.neighbors[k]
            combo = tables.combos[k]
            pos_j = js.index(j)
            term = phis[k].copy()
            for pos, r in enumerate(js):
                if r != j:
                    term *= vn[(k, r)][:, combo[:, pos]]
            shaped = term.reshape(T, *([p.M] * len(js)))
            axes = tuple(a + 1 for a in range(len(js)) if a != pos_j)
            new = shaped.sum(axis=axes) if axes else shaped
            norm = new.sum(axis=1, keepdims=True)
            if np.any(norm == 0):
                raise BeliefUnderflowError("all RN message mass vanished")
            rn[(k, j)] = new / norm
        for j in range(p.J):
            ks = tables.vn_resources[j]
            for k in ks:
                msg = np.full((T, p.M), 1.0 / p.M)
                for d in ks:
                    if d != k:
                        msg *= rn[(d, j)]
                norm = msg.sum(axis=1, keepdims=True)
                if np.any(norm == 0):
                    raise BeliefUnderflowError("all VN message mass vanished")
                vn[(k, j)] = msg / norm

    marg = np.full((T, p.J, p.M), 1.0 / p.M)
    for j in range(p.J):
        for k in tables.vn_resources[j]:
            marg[:, j, :] *= rn[(k, j)]
    norm = marg.sum(axis=2, keepdims=True)
    if np.any(norm == 0):
        raise BeliefUnderflowError("all beliefs vanished")
    marg = marg / norm
    with np.errstate(divide="ignore"):
        beliefs = np.log(marg)
    llrs, hard = _llrs_from_beliefs(beliefs, tables.bit_masks)
    return _single_state(beliefs, llrs, hard, (rn, vn), None)


def loglik_table(Y: np.ndarray, cb_set: CodebookSet,
                 max_points: int = DEFAULT_MAX_POINTS) -> tuple[np.ndarray, object]:
    """Exact joint Gaussian log-likelihood of each superimposed point, batched.

    Returns ((T, M^J) log-likelihoods, the enumerated constellation).
    """
    p = cb_set.params
    if p.M**p.J > max_points:
        raise CapacityError(f"M^J = {p.M ** p.J} exceeds the limit {max_points}")
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    constellation = enumerate_superimposed(cb_set, max_points=max_points)
    s = constellation.points
    nu = constellation.covariances
    diff = Y[:, None, :] - s[None, :, :]
    ll = -0.5 * np.sum(diff * diff / nu[None, :, :] + np.log(2.0 * np.pi * nu)[None, :, :],
                       axis=2)
    return ll, constellation


def joint_map_bruteforce(
    y: np.ndarray, cb_set: CodebookSet, max_points: int = DEFAULT_MAX_POINTS
) -> tuple[tuple[int, ...], np.ndarray]:
    """Exhaustive joint MAP over all M^J tuples under the full IDGN likelihood.

    Ties are broken toward the lowest tuple index. Returns the 1-based symbol
    tuple and the concatenated bit labels.
    """
    ll, constellation = loglik_table(np.asarray(y, dtype=float)[None, :], cb_set, max_points)
    i = int(np.argmax(ll[0]))
    return tuple(int(m) for m in constellation.index_tuples[i]), constellation.bit_labels[i].copy()


def op_counts(M: int, d_f: int, K: int, n_iters: int, variant: str) -> OpCounts:
    """Closed-form RN-update operation counts for a regular degree-d_f graph."""
    if variant not in ("mpa", "max_log"):
        raise ValueError(f"variant must be 'mpa' or 'max_log', got {variant!r}")
    base = M**d_f * K * d_f * n_iters
    if variant == "mpa":
        return OpCounts(
            exponential=base,
            multiplication=(d_f + 3) * base,
            addition=(2 * d_f + 2) * base,
            comparison=0,
        )
    return OpCounts(
        exponential=0,
        multiplication=4 * base,
        addition=(3 * d_f + 1) * base * d_f,
        comparison=base,
    )
