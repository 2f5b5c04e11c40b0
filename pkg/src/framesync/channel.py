"""
Linear periodically time-varying channel model.

The channel is a causal FIR filter whose tap vector varies periodically
with the sample clock.  Besides the time-domain convolution, this module
builds the two matrix views of the channel used by the detectors: the
full pre-processing matrix acting on a whole observation window and the
per-block matrix acting on one block of kept samples.  All matrix-facing
vectors follow the receiver convention in which index 0 is the most
recent sample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cyclostat import NoiseModel, analytic_autocorrelation

__all__ = [
    "LptvChannel",
    "FrameGeometry",
    "apply_channel",
    "build_B_matrix",
    "build_A_matrix",
    "compute_snr",
    "calibrate_noise_power",
]


@dataclass(frozen=True)
class LptvChannel:
    """Periodic channel impulse response.

    ``coeffs[i, l]`` is the tap at delay ``l`` for sample times congruent
    to ``i`` modulo ``period``; taps outside ``0 <= l <= memory`` are
    zero (causal, finite memory).
    """

    period: int
    memory: int
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=complex)
        object.__setattr__(self, "coeffs", coeffs)
        if self.period < 1:
            raise ValueError("channel period must be a positive integer")
        if self.memory < 0:
            raise ValueError("channel memory must be non-negative")
        if coeffs.shape != (self.period, self.memory + 1):
            raise ValueError(
                f"coeffs must have shape ({self.period}, {self.memory + 1}), "
                f"got {coeffs.shape}"
            )
        if not np.any(coeffs[:, 0] != 0):
            raise ValueError("at least one phase must have a nonzero tap at delay 0")
        if not np.any(coeffs[:, -1] != 0):
            raise ValueError(
                f"at least one phase must have a nonzero tap at delay {self.memory}"
            )

    def tap(self, m: int, l: int) -> complex:
        """Tap value ``h[m, l]`` with periodic extension in ``m``."""
        if l < 0 or l > self.memory:
            return 0.0 + 0.0j
        return complex(self.coeffs[m % self.period, l])

    def taps_at(self, m: int, width: int) -> np.ndarray:
        """Tap vector ``h[m, 0..width]`` zero-padded beyond the memory."""
        out = np.zeros(width + 1, dtype=complex)
        out[: self.memory + 1] = self.coeffs[m % self.period]
        return out


@dataclass(frozen=True)
class FrameGeometry:
    """Structural integers of the synchronization frame.

    Derived sizes: ``L_ch = max(L_z, L_h)``, ``K = N - L_ch``,
    ``L_sw = K * M`` and ``L_tot = N * M``.
    """

    P_h: int
    P_z: int
    L_h: int
    L_z: int
    N: int
    M: int
    L_ch: int = field(init=False)
    K: int = field(init=False)
    L_sw: int = field(init=False)
    L_tot: int = field(init=False)
    #: small test instances may waive the sync-word length margin
    check_sw_margin: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        for name in ("P_h", "P_z", "N", "M"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be a positive integer")
        if self.L_h < 0 or self.L_z < 0:
            raise ValueError("channel and noise memories must be non-negative")
        l_ch = max(self.L_z, self.L_h)
        object.__setattr__(self, "L_ch", l_ch)
        object.__setattr__(self, "K", self.N - l_ch)
        object.__setattr__(self, "L_sw", self.K * self.M)
        object.__setattr__(self, "L_tot", self.N * self.M)
        if self.N % self.P_h != 0 or self.N % self.P_z != 0:
            raise ValueError(
                f"N={self.N} must be a common multiple of P_h={self.P_h} "
                f"and P_z={self.P_z}"
            )
        if self.N <= l_ch:
            raise ValueError(f"N > L_ch violated (N={self.N}, L_ch={l_ch})")
        if self.check_sw_margin and self.L_sw <= l_ch + 1:
            raise ValueError(
                f"L_sw > L_ch + 1 violated (L_sw={self.L_sw}, L_ch={l_ch})"
            )

    @property
    def base_period(self) -> int:
        return math.lcm(self.P_h, self.P_z)


def apply_channel(
    ch: LptvChannel,
    s: np.ndarray,
    z: np.ndarray,
    start_time: int,
) -> np.ndarray:
    """Time-domain channel output ``r[m] = sum_l h[m,l] s[m-l] + z[m]``.

    ``s`` and ``z`` are chronological arrays; ``z`` has one entry per
    output sample and ``s`` carries the channel-memory history in front,
    so ``s[j]`` sits at absolute time ``start_time - history + j`` with
    ``history = len(s) - len(z)``.

    Raises
    ------
    ValueError
        If fewer than ``memory`` history symbols are supplied.
    """
    s = np.asarray(s, dtype=complex)
    z = np.asarray(z, dtype=complex)
    history = s.size - z.size
    if history < ch.memory:
        raise ValueError(
            f"need at least {ch.memory} history symbols, got {history}"
        )
    n_out = z.size
    phases = np.mod(start_time + np.arange(n_out), ch.period)
    r = z.astype(complex, copy=True)
    for l in range(ch.memory + 1):
        r += ch.coeffs[phases, l] * s[history - l : history - l + n_out]
    return r


def build_B_matrix(
    ch: LptvChannel,
    geom: FrameGeometry,
    block_start_time: int = 0,
) -> np.ndarray:
    """Per-block channel matrix (K x N), latest-sample-first convention.

    Row ``k`` carries the tap vector ``h[block_start_time - k, 0..L_ch]``
    starting at column ``k``.  Because ``N`` is a multiple of the channel
    period the matrix is identical for every block of the window.
    """
    b = np.zeros((geom.K, geom.N), dtype=complex)
    for k in range(geom.K):
        b[k, k : k + geom.L_ch + 1] = ch.taps_at(block_start_time - k, geom.L_ch)
    return b


def build_A_matrix(ch: LptvChannel, geom: FrameGeometry) -> np.ndarray:
    """Whole-window channel matrix (L_tot x (L_tot + L_ch)).

    Acting on the latest-first symbol vector (window symbols followed by
    the channel-memory history) it reproduces the noiseless received
    window.
    """
    l_tot, l_ch = geom.L_tot, geom.L_ch
    a = np.zeros((l_tot, l_tot + l_ch), dtype=complex)
    for k in range(l_tot):
        a[k, k : k + l_ch + 1] = ch.taps_at(-k, l_ch)
    return a


def compute_snr(
    ch: LptvChannel,
    geom: FrameGeometry,
    noise: NoiseModel,
    sigma_s2: float,
) -> float:
    """Linear SNR of the windowed signal model.

    Ratio of the mean received signal energy over a window,
    ``sigma_s2 * trace(A^H A)``, to the mean noise energy, the sum of
    the noise variance over the window's sample times.
    """
    if sigma_s2 <= 0:
        raise ValueError("sigma_s2 must be positive")
    a = build_A_matrix(ch, geom)
    signal_energy = sigma_s2 * float(np.sum(np.abs(a) ** 2))
    noise_energy = (geom.L_tot / noise.period) * sum(
        analytic_autocorrelation(noise, p, 0).real for p in range(noise.period)
    )
    if noise_energy <= 0:
        raise ZeroDivisionError("noise model has zero power over the window")
    return signal_energy / noise_energy


def calibrate_noise_power(
    ch: LptvChannel,
    geom: FrameGeometry,
    noise_shape: NoiseModel,
    sigma_s2: float,
    target_snr_db: float,
) -> float:
    """Variance scale that drives :func:`compute_snr` to the target.

    The SNR is inversely linear in the innovation variance scale, so the
    answer is a single exact division.
    """
    if not math.isfinite(target_snr_db):
        raise ValueError("target SNR must be finite")
    base_snr = compute_snr(ch, geom, noise_shape, sigma_s2)
    return base_snr / (10.0 ** (target_snr_db / 10.0))
