"""IDGN channel sampling, Monte Carlo BER estimation and the union-bound BER."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .decoder import DEFAULT_ITERS, _build_tables, max_log_mpa_batch
from .designer import DesignConfig, design
from .errors import CapacityError, ConfigError, DomainError
from .model import (
    DEFAULT_MAX_POINTS,
    CodebookSet,
    SystemParams,
    enumerate_superimposed,
    scale_codebook_set,
)

DEFAULT_MIN_BIT_ERRORS = 200
_FRAME_BLOCK = 4096

# Chunk of constellation points processed at once in the union bound.
_BOUND_CHUNK = 128


@dataclass(frozen=True)
class TrialStream:
    """Deterministic normal-deviate stream: (seed, stream_id) fixes the sequence."""

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        return np.random.Generator(
            np.random.PCG64(np.random.SeedSequence([self.seed, self.stream_id]))
        )


@dataclass(frozen=True)
class BerPoint:
    pe: float
    bits_sent: int
    bit_errors: int
    ber_sim: float
    ber_analytical: float
    per_user_ber: np.ndarray
    ci95_halfwidth: float


def qfunc(x):
    """Gaussian tail probability Q(x) = 0.5 * erfc(x / sqrt(2))."""
    return 0.5 * erfc(np.asarray(x, dtype=float) / np.sqrt(2.0))


def add_idgn(
    s: np.ndarray,
    sigma2: float,
    varsigma2: float,
    stream: TrialStream,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Sample y = s + sqrt(s)*Z1 + Z0 with Z1 ~ N(0, varsigma2*sigma2), Z0 ~ N(0, sigma2).

    Componentwise: y_k ~ N(s_k, sigma2 * (1 + varsigma2 * s_k)). Pass `rng` to
    continue an already-open generator instead of restarting the stream.
    """
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise DomainError("signal intensities must be nonnegative")
    if rng is None:
        rng = stream.generator()
    z1 = rng.standard_normal(s.shape) * np.sqrt(varsigma2 * sigma2)
    z0 = rng.standard_normal(s.shape) * np.sqrt(sigma2)
    return s + np.sqrt(s) * z1 + z0


def pep_idgn(s_i: np.ndarray, s_j: np.ndarray, sigma2: float, varsigma2: float) -> float:
    """Pairwise error probability of deciding s_j when s_i was sent.

    Uses the transmitted point's variances, so the function is intentionally
    asymmetric in its arguments when intensities differ.
    """
    s_i = np.asarray(s_i, dtype=float)
    s_j = np.asarray(s_j, dtype=float)
    if np.any(s_i < 0) or np.any(s_j < 0):
        raise DomainError("superimposed codewords must be nonnegative")
    nu = varsigma2 * sigma2 * s_i + sigma2
    arg = np.sqrt(np.sum((s_i - s_j) ** 2 / (2.0 * nu)))
    return float(qfunc(arg))


def analytical_ber(cb_set: CodebookSet, max_points: int = DEFAULT_MAX_POINTS) -> float:
    """Union-bound BER: bit-weighted pairwise error probabilities over all pairs."""
    p = cb_set.params
    if p.M**p.J > max_points:
        raise CapacityError(f"M^J = {p.M ** p.J} exceeds the limit {max_points}")
    constellation = enumerate_superimposed(cb_set, max_points=max_points)
    s = constellation.points
    bits = constellation.bit_labels.astype(np.int64)
    nu = constellation.covariances
    P = len(s)
    total = 0.0
    for lo in range(0, P, _BOUND_CHUNK):
        hi = min(lo + _BOUND_CHUNK, P)
        diff = s[lo:hi, None, :] - s[None, :, :]
        args = np.sqrt(np.sum(diff * diff / (2.0 * nu[lo:hi, None, :]), axis=2))
        pep = qfunc(args)
        hd = np.sum(bits[lo:hi, None, :] != bits[None, :, :], axis=2)
        block = pep * hd
        idx = np.arange(lo, hi)
        block[idx - lo, idx] = 0.0  # exclude i' == i
        total += float(block.sum())
    n_bits = p.J * p.bits_per_symbol
    return total / (n_bits * P)


def simulate_ber(
    cb_set: CodebookSet,
    n_iters: int = DEFAULT_ITERS,
    min_bit_errors: int | None = DEFAULT_MIN_BIT_ERRORS,
    max_frames: int | None = 1_000_000,
    seed: int = 0,
    include_logdet: bool = False,
    compute_analytical: bool = True,
    add_noise: bool = True,
) -> BerPoint:
    """Seeded Monte Carlo BER of Max-Log decoding over the IDGN channel.

    Frames run in blocks with per-block deterministic streams, stopping once
    min_bit_errors errors have accumulated or max_frames frames were sent.
    """
    if min_bit_errors is None and max_frames is None:
        raise ConfigError("need at least one stopping bound (min_bit_errors/max_frames)")
    p = cb_set.params
    b = p.bits_per_symbol
    tables = _build_tables(cb_set)
    # Per-user codeword tables (M, K) for fast superposition.
    user_tables = [
        (np.diag(cb_set.gains[j]) @ cb_set.mappings[j].V @ cb_set.books[j].C).T
        for j in range(p.J)
    ]
    label_table = np.array(
        [[(m >> (b - 1 - i)) & 1 for i in range(b)] for m in range(p.M)], dtype=np.uint8
    )

    frames = 0
    errors = 0
    per_user_errors = np.zeros(p.J, dtype=np.int64)
    block_id = 0
    while True:
        if max_frames is not None and frames >= max_frames:
            break
        if min_bit_errors is not None and errors >= min_bit_errors:
            break
        T = _FRAME_BLOCK
        if max_frames is not None:
            T = min(T, max_frames - frames)
        stream = TrialStream(seed=seed, stream_id=block_id)
        rng = stream.generator()
        syms = rng.integers(0, p.M, size=(T, p.J))  # 0-based symbols
        s = np.zeros((T, p.K))
        for j in range(p.J):
            s += user_tables[j][syms[:, j]]
        y = add_idgn(s, p.sigma2, p.varsigma2, stream, rng=rng) if add_noise else s
        _, _, hard, _, _ = max_log_mpa_batch(
            y, cb_set, n_iters, include_logdet=include_logdet, tables=tables
        )
        sent_bits = label_table[syms]  # (T, J, b)
        bad = hard != sent_bits
        errors += int(bad.sum())
        per_user_errors += bad.sum(axis=(0, 2))
        frames += T
        block_id += 1

    bits_sent = frames * p.J * b
    ber = errors / bits_sent if bits_sent else 0.0
    ci = 1.96 * np.sqrt(max(ber * (1.0 - ber), 0.0) / bits_sent) if bits_sent else 0.0
    ana = analytical_ber(cb_set) if compute_analytical else float("nan")
    return BerPoint(
        pe=p.Pe,
        bits_sent=bits_sent,
        bit_errors=errors,
        ber_sim=ber,
        ber_analytical=ana,
        per_user_ber=per_user_errors / (frames * b) if frames else np.zeros(p.J),
        ci95_halfwidth=float(ci),
    )


def sweep(
    pe_list,
    cb_set: CodebookSet | None = None,
    design_params: SystemParams | None = None,
    design_config: DesignConfig | None = None,
    mode: str = "scale",
    n_iters: int = DEFAULT_ITERS,
    min_bit_errors: int | None = DEFAULT_MIN_BIT_ERRORS,
    max_frames: int | None = 1_000_000,
    seed: int = 0,
) -> list[BerPoint]:
    """Simulated + analytical BER across a power sweep.

    mode='scale' rescales cb_set to each power level; mode='redesign' runs the
    designer afresh at each level using design_params/design_config.
    """
    pe_list = list(pe_list)
    if not pe_list:
        raise ConfigError("pe_list must be nonempty")
    if any(pe <= 0 for pe in pe_list):
        raise ConfigError("power levels must be positive")
    if any(b <= a for a, b in zip(pe_list, pe_list[1:])):
        raise ConfigError("pe_list must be strictly increasing")
    if mode not in ("scale", "redesign"):
        raise ConfigError(f"mode must be 'scale' or 'redesign', got {mode!r}")
    if mode == "scale" and cb_set is None:
        raise ConfigError("scale mode needs a codebook set")
    if mode == "redesign" and design_params is None:
        raise ConfigError("redesign mode needs design parameters")

    points = []
    for pe in pe_list:
        if mode == "scale":
            current = scale_codebook_set(cb_set, pe)
        else:
            dp = design_params
            params = SystemParams(
                J=dp.J, K=dp.K, M=dp.M, N=dp.N,
                sigma2=dp.sigma2, varsigma2=dp.varsigma2, Pe=pe,
            )
            current = design(params, design_config or DesignConfig()).set
        points.append(
            simulate_ber(
                current, n_iters=n_iters, min_bit_errors=min_bit_errors,
                max_frames=max_frames, seed=seed,
            )
        )
    return points
