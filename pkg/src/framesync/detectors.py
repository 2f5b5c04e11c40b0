"""
Frame-synchronization test statistics.

Five detectors are provided: the exact likelihood-ratio test, its
max-term approximation, the reduced-grid variant of the approximation,
the blind variant that plugs in an estimated channel matrix, and the
classic correlator.  The likelihood family scores a window by comparing
the data-only explanation of the post-processed samples against the
sync-word explanation; large values favour the data-only hypothesis.
The correlator reports raw correlation energy, so large values favour
the sync-word hypothesis.  Orientation is carried explicitly on every
statistic so downstream ROC code never guesses.

Candidate symbol blocks are enumerated by integer index (base-``N_s``
digit expansion); per-window costs stay polynomial because both the
log-sum and the minimisation factor across blocks of the window, which
is exact for the product-structured candidate sets used throughout.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb

import numpy as np

from .frame import H0, H1, SyncWord

__all__ = [
    "CandidateIndexing",
    "GridSets",
    "HardDecision",
    "DetectorStatistic",
    "ResourceError",
    "ORIENT_H0",
    "ORIENT_H1",
    "DETECTOR_IDS",
    "DETECTOR_ORIENTATION",
    "build_D_matrices",
    "lrt_log_statistic",
    "alrt_statistic",
    "hard_decision",
    "grid_set_sizes",
    "build_grid_sets",
    "ralrt_statistic",
    "salrt_statistic",
    "correlator_statistic",
    "decide",
]

#: orientation labels: which hypothesis large statistic values favour
ORIENT_H0 = "h0"
ORIENT_H1 = "h1"

DETECTOR_IDS = ("lrt", "alrt", "ralrt", "salrt", "correlator")
DETECTOR_ORIENTATION = {
    "lrt": ORIENT_H0,
    "alrt": ORIENT_H0,
    "ralrt": ORIENT_H0,
    "salrt": ORIENT_H0,
    "correlator": ORIENT_H1,
}

#: default cap on materialised candidate enumerations
DEFAULT_CAP = 2**20


class ResourceError(RuntimeError):
    """Raised when an enumeration exceeds the materialisation cap."""


@dataclass(frozen=True)
class DetectorStatistic:
    """Scalar test value with explicit orientation metadata."""

    value: float
    orientation: str
    detector_id: str

    def __post_init__(self):
        if not np.isfinite(self.value):
            raise ValueError(f"non-finite statistic for {self.detector_id}")
        if self.orientation not in (ORIENT_H0, ORIENT_H1):
            raise ValueError(f"unknown orientation {self.orientation!r}")


@dataclass(frozen=True)
class CandidateIndexing:
    """Index maps for candidate symbol blocks of one frame geometry.

    Data-hypothesis candidates for a block are all ``N_s**N`` length-N
    symbol tuples; sync-hypothesis candidates fix the block's K sync
    symbols and enumerate the ``N_s**L_ch`` fills.  Digit ``d`` of an
    index is the symbol at block position ``d`` (latest-first).
    """

    symbols: np.ndarray
    N: int
    M: int
    L_ch: int
    cap: int = DEFAULT_CAP

    def __post_init__(self):
        object.__setattr__(self, "symbols", np.asarray(self.symbols, dtype=complex))

    @property
    def n_s(self) -> int:
        return int(self.symbols.size)

    @property
    def L_tot(self) -> int:
        return self.M * self.N

    @property
    def n_data_block(self) -> int:
        return self.n_s**self.N

    @property
    def n_sw_fill(self) -> int:
        return self.n_s**self.L_ch

    @property
    def n_data_total(self) -> int:
        return self.n_s**self.L_tot

    @property
    def n_sw_total(self) -> int:
        return self.n_s ** (self.M * self.L_ch)

    def q_index(self, l: int, m: int) -> int:
        """Per-block data candidate index of global index ``l``."""
        return (l // self.n_s ** (m * self.N)) % self.n_data_block

    def q_tilde_index(self, u: int, m: int) -> int:
        """Per-block fill candidate index of global index ``u``."""
        return (u // self.n_s ** (m * self.L_ch)) % self.n_sw_fill

    def data_vector(self, q: int) -> np.ndarray:
        """Length-N candidate vector for per-block index ``q``."""
        digits = [(q // self.n_s**d) % self.n_s for d in range(self.N)]
        return self.symbols[np.asarray(digits)]

    def sw_fill_vector(self, u: int) -> np.ndarray:
        """Length-L_ch fill vector for per-block index ``u``."""
        digits = [(u // self.n_s**d) % self.n_s for d in range(self.L_ch)]
        return self.symbols[np.asarray(digits)]

    def sw_vector(self, u: int, m: int, sw: SyncWord) -> np.ndarray:
        """Length-N sync-hypothesis candidate for window block ``m``."""
        return np.concatenate([sw.window_block(m), self.sw_fill_vector(u)])

    def all_data_vectors(self) -> np.ndarray:
        """All per-block data candidates, shape ``(N_s**N, N)``."""
        if self.n_data_block > self.cap:
            raise ResourceError(
                f"{self.n_data_block} block candidates exceed the cap {self.cap}; "
                "evaluate candidates on demand instead"
            )
        return self.symbols[_digit_matrix(self.n_data_block, self.N, self.n_s)]

    def all_sw_vectors(self, m: int, sw: SyncWord) -> np.ndarray:
        """All sync-hypothesis candidates for block ``m``, ``(N_s**L_ch, N)``."""
        fills = self.symbols[_digit_matrix(self.n_sw_fill, self.L_ch, self.n_s)]
        head = np.broadcast_to(sw.window_block(m), (fills.shape[0], self.N - self.L_ch))
        return np.concatenate([head, fills], axis=1)


@lru_cache(maxsize=None)
def _digit_matrix_cached(count: int, width: int, n_s: int) -> np.ndarray:
    digits = (
        np.arange(count, dtype=np.int64)[:, None]
        // n_s ** np.arange(width, dtype=np.int64)
    ) % n_s
    digits.setflags(write=False)
    return digits


def _digit_matrix(count: int, width: int, n_s: int) -> np.ndarray:
    """Rows are the base-``n_s`` digit expansions of ``0..count-1``."""
    return _digit_matrix_cached(int(count), int(width), int(n_s))


def _block_scores(candidates: np.ndarray, t_mat: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Per-candidate quadratic score ``a^H T a - 2 Re(w^H a)``.

    ``w`` is the block's matched vector ``B^H C_z^{-1} r``; adding the
    window-only constant ``r^H C_z^{-1} r`` turns the score into the full
    Gaussian exponent, but that constant cancels from every statistic.
    """
    quad = np.einsum("cn,nm,cm->c", candidates.conj(), t_mat, candidates).real
    cross = (candidates @ w.conj()).real
    return quad - 2.0 * cross


def _logsumexp(values: np.ndarray) -> float:
    m = float(np.max(values))
    return m + float(np.log(np.sum(np.exp(values - m))))


def build_D_matrices(
    idx: CandidateIndexing, sw: SyncWord, cap: int | None = None
) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Candidate outer-product sums for every global index.

    Entry ``l`` of the first list is ``sum_m a_{q(l,m)} a^H``; entry
    ``u`` of the second is the same sum over the sync-hypothesis
    candidates.  These matrices depend only on the constellation and the
    sync word, so they can be tabulated before synchronisation starts.

    Raises
    ------
    ResourceError
        If the full enumeration exceeds the materialisation cap; the
        statistics below then evaluate candidates on demand instead.
    """
    cap = idx.cap if cap is None else cap
    if idx.n_data_total > cap:
        raise ResourceError(
            f"{idx.n_data_total} data hypotheses exceed the cap {cap}; "
            "evaluate candidates on demand instead"
        )
    d_data = []
    for l in range(idx.n_data_total):
        acc = np.zeros((idx.N, idx.N), dtype=complex)
        for m in range(idx.M):
            a = idx.data_vector(idx.q_index(l, m))
            acc += np.outer(a, a.conj())
        d_data.append(acc)
    d_sw = []
    for u in range(idx.n_sw_total):
        acc = np.zeros((idx.N, idx.N), dtype=complex)
        for m in range(idx.M):
            a = idx.sw_vector(idx.q_tilde_index(u, m), m, sw)
            acc += np.outer(a, a.conj())
        d_sw.append(acc)
    return d_data, d_sw


def lrt_log_statistic(
    r_p: np.ndarray,
    b: np.ndarray,
    c_z_inv: np.ndarray,
    idx: CandidateIndexing,
    sw: SyncWord,
) -> float:
    """Exact log likelihood ratio of the data-only over sync hypotheses.

    Computed in the log domain with max subtraction; the sums over the
    global candidate enumerations factor into per-block log-sums because
    the enumeration is a product over blocks.  The decision rule
    compares the value against ``log(lambda * N_s**(M*K))``.
    """
    k = b.shape[0]
    r_blocks = np.asarray(r_p, dtype=complex).reshape(idx.M, k)
    t_mat = b.conj().T @ c_z_inv @ b
    g = b.conj().T @ c_z_inv
    data_cands = idx.all_data_vectors()
    lse_data = 0.0
    lse_sw = 0.0
    for m in range(idx.M):
        w = g @ r_blocks[m]
        lse_data += _logsumexp(-_block_scores(data_cands, t_mat, w))
        lse_sw += _logsumexp(-_block_scores(idx.all_sw_vectors(m, sw), t_mat, w))
    return lse_data - lse_sw


def _blockwise_minima(
    r_blocks: np.ndarray,
    b: np.ndarray,
    c_z_inv: np.ndarray,
    data_block_vectors,
    sw_block_vectors,
) -> tuple[float, float]:
    """Minimum total score over product candidate sets, block by block."""
    t_mat = b.conj().T @ c_z_inv @ b
    g = b.conj().T @ c_z_inv
    min_data = 0.0
    min_sw = 0.0
    for m in range(r_blocks.shape[0]):
        w = g @ r_blocks[m]
        min_data += float(np.min(_block_scores(data_block_vectors(m), t_mat, w)))
        min_sw += float(np.min(_block_scores(sw_block_vectors(m), t_mat, w)))
    return min_sw, min_data


def alrt_statistic(
    r_blocks: np.ndarray,
    b: np.ndarray,
    c_z_inv: np.ndarray,
    idx: CandidateIndexing,
    sw: SyncWord,
    d_matrices: tuple[list[np.ndarray], list[np.ndarray]] | None = None,
) -> float:
    """Max-term approximation of the LRT, scaled by ``1 / N_s**L_tot``.

    Difference of the two minimised Gaussian exponents (sync minus
    data).  When the precomputed outer-product matrices are supplied the
    trace form of the objective is evaluated literally over the global
    enumeration; otherwise the minimisation is carried out block by
    block, which yields the identical value for these product candidate
    sets at polynomial cost.
    """
    r_blocks = np.asarray(r_blocks, dtype=complex)
    if d_matrices is not None:
        d_data, d_sw = d_matrices
        min_sw = min(
            _trace_objective(r_blocks, b, c_z_inv, d_sw[u], _sw_cands(idx, sw, u))
            for u in range(idx.n_sw_total)
        )
        min_data = min(
            _trace_objective(r_blocks, b, c_z_inv, d_data[l], _data_cands(idx, l))
            for l in range(idx.n_data_total)
        )
    else:
        min_sw, min_data = _blockwise_minima(
            r_blocks,
            b,
            c_z_inv,
            lambda m: idx.all_data_vectors(),
            lambda m: idx.all_sw_vectors(m, sw),
        )
    return (min_sw - min_data) / idx.n_data_total


def _data_cands(idx: CandidateIndexing, l: int) -> list[np.ndarray]:
    return [idx.data_vector(idx.q_index(l, m)) for m in range(idx.M)]


def _sw_cands(idx: CandidateIndexing, sw: SyncWord, u: int) -> list[np.ndarray]:
    return [idx.sw_vector(idx.q_tilde_index(u, m), m, sw) for m in range(idx.M)]


def _trace_objective(r_blocks, b, c_z_inv, d_mat, cand_blocks) -> float:
    """Literal trace-form objective for one global candidate index."""
    t_mat = b.conj().T @ c_z_inv @ b
    tr = float(np.sum(t_mat * d_mat.T).real)
    cross = 0.0
    for m, a in enumerate(cand_blocks):
        cross += float((r_blocks[m].conj() @ c_z_inv @ b @ a).real)
    return tr - 2.0 * cross


@dataclass(frozen=True)
class HardDecision:
    """Coordinatewise nearest-symbol decisions for one raw window.

    ``data_indices[m, d]`` is the symbol index decided at position ``d``
    of window block ``m`` under the data-only reading;
    ``sw_fill_indices[m]`` covers only the ``L_ch`` free positions under
    the sync reading (the sync positions are pinned to the sync word).
    """

    data_indices: np.ndarray
    sw_fill_indices: np.ndarray


def hard_decision(
    r_raw: np.ndarray, idx: CandidateIndexing, sw: SyncWord
) -> HardDecision:
    """Nearest-symbol estimates of a raw (unprocessed) window.

    Equivalent to the full vector argmin over candidate vectors because
    the squared-distance objective separates per coordinate; ties take
    the lowest symbol index.
    """
    r_raw = np.asarray(r_raw, dtype=complex)
    blocks = r_raw[: idx.L_tot].reshape(idx.M, idx.N)
    dist = np.abs(blocks[..., None] - idx.symbols) ** 2
    data_indices = np.argmin(dist, axis=-1)
    k = idx.N - idx.L_ch
    return HardDecision(
        data_indices=data_indices,
        sw_fill_indices=data_indices[:, k:].copy(),
    )


def grid_set_sizes(
    n: int, l_ch: int, m: int, n_s: int, e_r0: int, e_r1: int
) -> tuple[int, int]:
    """Closed-form cardinalities of the reduced candidate sets.

    ``(sum_{l<=e} C(width, l) (N_s-1)**l) ** M`` with width ``N`` for
    the data set and ``L_ch`` for the sync-fill set.
    """
    per_data = sum(comb(n, l) * (n_s - 1) ** l for l in range(e_r0 + 1))
    per_sw = sum(comb(l_ch, l) * (n_s - 1) ** l for l in range(e_r1 + 1))
    return per_data**m, per_sw**m


@lru_cache(maxsize=None)
def _offset_patterns(width: int, e_r: int, n_s: int) -> np.ndarray:
    """Symbol-index offset rows covering all <= e_r coordinate changes.

    Offset 0 keeps a coordinate, offsets ``1..N_s-1`` enumerate every
    alternative symbol; adding a row to a base index vector (mod
    ``N_s``) yields one reduced-grid candidate, each exactly once.
    """
    rows = []
    for n_changes in range(e_r + 1):
        for positions in itertools.combinations(range(width), n_changes):
            for offsets in itertools.product(range(1, n_s), repeat=n_changes):
                row = np.zeros(width, dtype=np.int64)
                row[list(positions)] = offsets
                rows.append(row)
    out = np.array(rows, dtype=np.int64).reshape(len(rows), width)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class GridSets:
    """Reduced candidate sets around a window's hard decisions.

    The sets are products over blocks: each block's candidates differ
    from that block's hard decision in at most ``e_r0`` (data) or
    ``e_r1`` (sync-fill) coordinates.  Stored as per-block symbol-index
    matrices; the global candidate indices of the reduced enumeration
    are materialised on demand.
    """

    e_r0: int
    e_r1: int
    data_block_indices: tuple[np.ndarray, ...] = field(repr=False)
    sw_fill_block_indices: tuple[np.ndarray, ...] = field(repr=False)
    symbols: np.ndarray = field(repr=False)
    cap: int = DEFAULT_CAP

    @property
    def n_data_candidates(self) -> int:
        size = 1
        for block in self.data_block_indices:
            size *= block.shape[0]
        return size

    @property
    def n_sw_candidates(self) -> int:
        size = 1
        for block in self.sw_fill_block_indices:
            size *= block.shape[0]
        return size

    def data_block_vectors(self, m: int) -> np.ndarray:
        return self.symbols[self.data_block_indices[m]]

    def sw_block_vectors(self, m: int, sw: SyncWord) -> np.ndarray:
        fills = self.symbols[self.sw_fill_block_indices[m]]
        k = sw.block_length
        head = np.broadcast_to(sw.window_block(m), (fills.shape[0], k))
        return np.concatenate([head, fills], axis=1)

    def _global_indices(self, block_indices, width: int) -> list[int]:
        n_s = int(self.symbols.size)
        if self.n_data_candidates > self.cap and block_indices is self.data_block_indices:
            raise ResourceError(
                f"{self.n_data_candidates} grid candidates exceed the cap {self.cap}"
            )
        weights = [n_s**d for d in range(width)]
        per_block = []
        for block in block_indices:
            per_block.append([int(sum(int(v) * w for v, w in zip(row, weights))) for row in block])
        out = []
        radix = n_s**width
        for combo in itertools.product(*[range(len(q)) for q in per_block]):
            total = 0
            for m, c in enumerate(combo):
                total += per_block[m][c] * radix**m
            out.append(total)
        return out

    def l0_indices(self) -> list[int]:
        """Global data-enumeration indices of the reduced set."""
        width = self.data_block_indices[0].shape[1]
        return self._global_indices(self.data_block_indices, width)

    def l1_indices(self) -> list[int]:
        """Global sync-enumeration indices of the reduced set."""
        width = self.sw_fill_block_indices[0].shape[1]
        return self._global_indices(self.sw_fill_block_indices, width)


def build_grid_sets(
    hd: HardDecision,
    idx: CandidateIndexing,
    sw: SyncWord,
    e_r0: int,
    e_r1: int,
) -> GridSets:
    """Construct the reduced candidate sets around hard decisions.

    Candidates are generated directly (choose up to ``e_r`` coordinates
    per block, substitute every alternative symbol) rather than by
    filtering the full enumeration, so cost scales with the output size.
    """
    if not 0 <= e_r0 <= idx.N:
        raise ValueError(f"e_r0 must be in 0..{idx.N}, got {e_r0}")
    if not 0 <= e_r1 <= idx.L_ch:
        raise ValueError(f"e_r1 must be in 0..{idx.L_ch}, got {e_r1}")
    data_patterns = _offset_patterns(idx.N, e_r0, idx.n_s)
    fill_patterns = _offset_patterns(idx.L_ch, e_r1, idx.n_s)
    data_blocks = tuple(
        (hd.data_indices[m][None, :] + data_patterns) % idx.n_s
        for m in range(idx.M)
    )
    fill_blocks = tuple(
        (hd.sw_fill_indices[m][None, :] + fill_patterns) % idx.n_s
        for m in range(idx.M)
    )
    return GridSets(
        e_r0=e_r0,
        e_r1=e_r1,
        data_block_indices=data_blocks,
        sw_fill_block_indices=fill_blocks,
        symbols=idx.symbols,
        cap=idx.cap,
    )


def ralrt_statistic(
    r_blocks: np.ndarray,
    b: np.ndarray,
    c_z_inv: np.ndarray,
    grids: GridSets,
    idx: CandidateIndexing,
    sw: SyncWord,
    d_matrices: tuple[list[np.ndarray], list[np.ndarray]] | None = None,
) -> float:
    """ALRT with the minimisations restricted to the reduced grids."""
    r_blocks = np.asarray(r_blocks, dtype=complex)
    if d_matrices is not None:
        d_data, d_sw = d_matrices
        min_sw = min(
            _trace_objective(r_blocks, b, c_z_inv, d_sw[u], _sw_cands(idx, sw, u))
            for u in grids.l1_indices()
        )
        min_data = min(
            _trace_objective(r_blocks, b, c_z_inv, d_data[l], _data_cands(idx, l))
            for l in grids.l0_indices()
        )
    else:
        min_sw, min_data = _blockwise_minima(
            r_blocks,
            b,
            c_z_inv,
            grids.data_block_vectors,
            lambda m: grids.sw_block_vectors(m, sw),
        )
    return (min_sw - min_data) / idx.n_data_total


def salrt_statistic(
    r_blocks: np.ndarray,
    b_hat: np.ndarray,
    c_z_inv: np.ndarray,
    grids: GridSets,
    idx: CandidateIndexing,
    sw: SyncWord,
) -> float:
    """Reduced-grid statistic with the estimated channel matrix.

    Identical to :func:`ralrt_statistic` with the true matrix replaced
    by the estimate everywhere, including inside the quadratic terms,
    which therefore cannot be tabulated ahead of time.
    """
    return ralrt_statistic(r_blocks, b_hat, c_z_inv, grids, idx, sw)


def correlator_statistic(r: np.ndarray, sw) -> float:
    """Squared magnitude of the correlation against the sync word.

    Operates on raw received samples (no pre- or post-processing); the
    reference may be a :class:`SyncWord` or a plain vector.
    """
    f = sw.vector if isinstance(sw, SyncWord) else np.asarray(sw, dtype=complex)
    r = np.asarray(r, dtype=complex)
    if r.size != f.size:
        raise ValueError(f"expected {f.size} samples, got {r.size}")
    return float(np.abs(np.vdot(r, f)) ** 2)


def decide(stat: DetectorStatistic, threshold: float) -> str:
    """Threshold a statistic; ties resolve to the sync hypothesis."""
    if stat.orientation == ORIENT_H0:
        return H0 if stat.value > threshold else H1
    return H1 if stat.value >= threshold else H0
