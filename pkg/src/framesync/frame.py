"""
Frame structure, sync-word handling and window generation.

The transmitted synchronization segment interleaves the sync word with
random data: each of the M blocks carries K sync symbols preceded by
L_ch data symbols that absorb the channel memory, and a further L_ch
data symbols precede the whole segment.  All receiver-facing vectors
are stored latest-sample-first (index 0 is the most recent sample), the
same convention the detector matrices use; the chronological order used
by the channel simulation is the reverse.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import FrameGeometry, LptvChannel, apply_channel
from .cyclostat import NoiseModel, generate_acgn

__all__ = [
    "Constellation",
    "SyncWord",
    "ObservationWindow",
    "assemble_sync_sequence",
    "draw_window",
    "post_process",
    "zadoff_chu",
    "H0",
    "H1",
]

H0 = "H0"
H1 = "H1"

_MOMENT_TOL = 1e-12


@dataclass(frozen=True)
class Constellation:
    """Finite symbol alphabet with its uniform-law moments."""

    symbols: np.ndarray
    sigma_s2: float = field(init=False)
    pseudo_sigma_s2: complex = field(init=False)
    gamma_s2: float = field(init=False)

    def __post_init__(self):
        symbols = np.asarray(self.symbols, dtype=complex)
        object.__setattr__(self, "symbols", symbols)
        if symbols.ndim != 1 or symbols.size < 2:
            raise ValueError("constellation needs at least two symbols")
        if len(set(symbols.tolist())) != symbols.size:
            raise ValueError("constellation symbols must be distinct")
        if abs(np.mean(symbols)) > _MOMENT_TOL:
            raise ValueError("uniform draw over the constellation must be zero mean")
        p2 = float(np.mean(np.abs(symbols) ** 2))
        object.__setattr__(self, "sigma_s2", p2)
        object.__setattr__(self, "pseudo_sigma_s2", complex(np.mean(symbols**2)))
        object.__setattr__(
            self, "gamma_s2", float(np.mean(np.abs(symbols) ** 4)) / p2
        )

    def __len__(self) -> int:
        return int(self.symbols.size)

    @classmethod
    def bpsk(cls) -> "Constellation":
        return cls(symbols=np.array([-1.0, 1.0]))

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Uniform i.i.d. symbol draw."""
        return self.symbols[rng.integers(0, len(self), size=size)]

    def nearest_index(self, values: np.ndarray) -> np.ndarray:
        """Per-sample nearest-symbol indices; ties go to the lowest index."""
        values = np.asarray(values, dtype=complex)
        dist = np.abs(values[..., None] - self.symbols) ** 2
        return np.argmin(dist, axis=-1)


@dataclass(frozen=True)
class SyncWord:
    """Synchronization word in the receiver's latest-first convention.

    ``vector[p]`` holds the sync symbol with time index ``L_sw - 1 - p``:
    the first entry is the last sync symbol transmitted.  Block ``i``
    (``i = 0`` transmitted first) tiles the vector from the tail.
    """

    vector: np.ndarray
    n_blocks: int

    def __post_init__(self):
        vec = np.asarray(self.vector, dtype=complex)
        object.__setattr__(self, "vector", vec)
        if vec.ndim != 1 or vec.size % self.n_blocks != 0:
            raise ValueError(
                f"sync word length {vec.size} must be a multiple of "
                f"n_blocks={self.n_blocks}"
            )

    @property
    def length(self) -> int:
        return int(self.vector.size)

    @property
    def block_length(self) -> int:
        return self.length // self.n_blocks

    def block(self, i: int) -> np.ndarray:
        """Block ``t_i`` in latest-first order."""
        k, m = self.block_length, self.n_blocks
        if not 0 <= i < m:
            raise IndexError(f"block index {i} out of range 0..{m - 1}")
        return self.vector[(m - 1 - i) * k : (m - i) * k]

    def window_block(self, m: int) -> np.ndarray:
        """Sync block carried by window block ``m`` (``t_{M-1-m}``)."""
        k = self.block_length
        return self.vector[m * k : (m + 1) * k]

    @classmethod
    def from_symbols(
        cls, symbols, constellation: Constellation, n_blocks: int
    ) -> "SyncWord":
        """Build from explicit symbol values, validating membership."""
        vec = np.asarray(symbols, dtype=complex)
        for s in vec:
            if np.min(np.abs(constellation.symbols - s)) > _MOMENT_TOL:
                raise ValueError(f"sync symbol {s} is not in the constellation")
        return cls(vector=vec, n_blocks=n_blocks)


@dataclass(frozen=True)
class ObservationWindow:
    """One received window plus the trailing samples used for estimation.

    ``samples`` has length L_tot in latest-first order.  ``extra`` holds
    the samples received *after* the window (used only by the blind
    channel estimator), also latest-first, so ``extra[0]`` is the most
    recent sample overall.  ``truth`` records which hypothesis generated
    the window; detectors never read it.
    """

    samples: np.ndarray
    extra: np.ndarray
    truth: str

    def __post_init__(self):
        if self.truth not in (H0, H1):
            raise ValueError(f"truth label must be {H0!r} or {H1!r}")


def assemble_sync_sequence(
    sw: SyncWord,
    geom: FrameGeometry,
    data_rng: np.random.Generator,
    constellation: Constellation,
) -> np.ndarray:
    """Symbol vector of a sync-bearing window, latest-first.

    Layout: ``[t_{M-1}, d0, t_{M-2}, d1, ..., t_0, d_{M-1}, history]``
    where each ``d`` and the history are ``L_ch`` uniform data symbols.
    Length is ``L_tot + L_ch``.
    """
    if sw.length != geom.L_sw or sw.n_blocks != geom.M:
        raise ValueError("sync word is inconsistent with the frame geometry")
    parts = []
    for m in range(geom.M):
        parts.append(sw.window_block(m))
        parts.append(constellation.draw(data_rng, geom.L_ch))
    parts.append(constellation.draw(data_rng, geom.L_ch))
    return np.concatenate(parts)


def draw_window(
    hyp: str,
    sw: SyncWord,
    geom: FrameGeometry,
    ch: LptvChannel,
    noise: NoiseModel,
    rng: np.random.Generator,
    constellation: Constellation,
    extra_len: int = 0,
) -> ObservationWindow:
    """Simulate one observation window under the given hypothesis.

    Under H1 the window is aligned so its most recent sample coincides
    with the last sync symbol (absolute time 0, fixing the channel and
    noise phases); under H0 the same span carries i.i.d. data.
    ``extra_len`` additional post-window samples are generated for the
    blind estimator; the symbols after the window are random data under
    both hypotheses.  Data and noise use independent substreams spawned
    from ``rng``.
    """
    if extra_len < 0:
        raise ValueError("extra_len must be non-negative")
    if hyp not in (H0, H1):
        raise ValueError(f"unknown hypothesis {hyp!r}")
    data_rng, noise_rng = rng.spawn(2)

    if hyp == H1:
        s_paper = assemble_sync_sequence(sw, geom, data_rng, constellation)
    else:
        s_paper = constellation.draw(data_rng, geom.L_tot + geom.L_ch)
    s_chrono = s_paper[::-1]
    if extra_len:
        s_chrono = np.concatenate(
            [s_chrono, constellation.draw(data_rng, extra_len)]
        )

    start_time = 1 - geom.L_tot
    z = generate_acgn(noise, geom.L_tot + extra_len, noise_rng, start_time=start_time)
    r_chrono = apply_channel(ch, s_chrono, z, start_time=start_time)

    samples = r_chrono[: geom.L_tot][::-1].copy()
    extra = r_chrono[geom.L_tot :][::-1].copy()
    return ObservationWindow(samples=samples, extra=extra, truth=hyp)


def post_process(window, geom: FrameGeometry) -> np.ndarray:
    """Keep the first K samples of each N-block of the window.

    Input may be an :class:`ObservationWindow` or a latest-first sample
    vector of length at least L_tot.  The result is the length-``L_sw``
    vector the likelihood detectors operate on; reshaping it to
    ``(M, K)`` gives the per-block view.
    """
    samples = window.samples if isinstance(window, ObservationWindow) else window
    samples = np.asarray(samples)
    if samples.size < geom.L_tot:
        raise ValueError(
            f"window has {samples.size} samples, need at least {geom.L_tot}"
        )
    blocks = samples[: geom.L_tot].reshape(geom.M, geom.N)
    return blocks[:, : geom.K].ravel()


def zadoff_chu(root: int, length: int) -> np.ndarray:
    """Zadoff-Chu sequence of the given root and length.

    Uses the even-length form ``exp(-j pi root n^2 / length)`` when
    ``length`` is even and the odd-length form with ``n (n + 1)``
    otherwise.
    """
    n = np.arange(length)
    if length % 2 == 0:
        phase = -np.pi * root * n * n / length
    else:
        phase = -np.pi * root * n * (n + 1) / length
    return np.exp(1j * phase)
