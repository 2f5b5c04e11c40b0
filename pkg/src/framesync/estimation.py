"""
Blind channel acquisition for the estimated-channel detector.

The receiver collects extra samples after the candidate window, trains
one constant-modulus (Godard) equalizer per channel phase on the
phase-decimated sample streams, recovers symbols with a hard slicer,
and solves a least-squares regression of received samples on recovered
symbols to estimate one period of the channel impulse response.  The
per-phase estimates are then tiled periodically into the block channel
matrix used by the detector.

All entry points accept either a single window's post-window samples
(1-D, latest-first) or a batch of windows stacked on the leading axis;
the Monte-Carlo harness relies on the batched form, which runs the
sequential equalizer updates for all windows in lock step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import FrameGeometry
from .frame import Constellation

__all__ = [
    "EqualizerConfig",
    "EqualizerState",
    "NumericalDivergenceError",
    "EstimationError",
    "cma_train",
    "equalize_and_slice",
    "lsse_cir",
    "assemble_B_hat",
    "estimate_channel_matrix",
]

#: equalizer taps beyond this magnitude are treated as divergence
DIVERGENCE_LIMIT = 1e6

#: relative singular-value cutoff of the least-squares fallback
LS_RCOND = 1e-10


class NumericalDivergenceError(RuntimeError):
    """Equalizer taps blew up; retry with a smaller step size."""


class EstimationError(RuntimeError):
    """The symbol regressor is too degenerate to estimate the channel."""


@dataclass(frozen=True)
class EqualizerConfig:
    """Equalizer and estimator bookkeeping for one channel geometry.

    ``L_EQ`` post-window samples give ``J = L_EQ / P_h`` samples per
    channel phase; the equalizer runs ``J - (L_ch + 1)`` update
    iterations per phase.  The regression depth defaults to
    ``omega = J - (L_ch + psi)`` with ``psi`` the smallest integer such
    that ``psi * P_h >= L_ch + 1``; ``omega_override`` substitutes a
    different depth while keeping the rest of the pipeline unchanged.
    """

    delta_p: float
    L_EQ: int
    P_h: int
    L_ch: int
    gamma_s2: float
    omega_override: int | None = None
    J: int = field(init=False)
    xi: int = field(init=False)
    psi: int = field(init=False)
    omega: int = field(init=False)
    L_est: int = field(init=False)

    def __post_init__(self):
        if self.L_EQ <= 0 or self.L_EQ % self.P_h != 0:
            raise ValueError(
                f"L_EQ={self.L_EQ} must be a positive multiple of P_h={self.P_h}"
            )
        j = self.L_EQ // self.P_h
        if j % (self.L_ch + 1) != 0:
            raise ValueError(
                f"J={j} must be a multiple of L_ch+1={self.L_ch + 1}"
            )
        xi = j // (self.L_ch + 1)
        if xi < 3:
            raise ValueError(f"xi={xi} must be at least 3; increase L_EQ")
        psi = math.ceil((self.L_ch + 1) / self.P_h)
        omega = j - (self.L_ch + psi) if self.omega_override is None else int(self.omega_override)
        l_est = self.L_EQ - self.P_h * self.L_ch
        omega_max = (self.L_EQ - self.P_h * self.L_ch - self.L_ch - self.P_h) // self.P_h
        if not self.L_ch <= omega <= omega_max:
            raise ValueError(
                f"omega={omega} must lie in [{self.L_ch}, {omega_max}] for this geometry"
            )
        object.__setattr__(self, "J", j)
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "psi", psi)
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "L_est", l_est)

    #: default step size; stable down to -5 dB for the bundled scenarios
    DEFAULT_DELTA_P = 3e-5

    @classmethod
    def for_geometry(
        cls,
        geom: FrameGeometry,
        constellation: Constellation,
        delta_p: float = DEFAULT_DELTA_P,
        L_EQ: int | None = None,
        omega_override: int | None = None,
    ) -> "EqualizerConfig":
        if L_EQ is None:
            raise ValueError("L_EQ must be specified")
        return cls(
            delta_p=delta_p,
            L_EQ=L_EQ,
            P_h=geom.P_h,
            L_ch=geom.L_ch,
            gamma_s2=constellation.gamma_s2,
            omega_override=omega_override,
        )


@dataclass(frozen=True)
class EqualizerState:
    """Trained equalizer taps, one length-(L_ch+1) vector per phase."""

    taps: np.ndarray
    iterations: int


def _as_batch(received: np.ndarray) -> tuple[np.ndarray, bool]:
    received = np.asarray(received, dtype=complex)
    if received.ndim == 1:
        return received[None, :], True
    if received.ndim == 2:
        return received, False
    raise ValueError("received samples must be a vector or a batch of vectors")


def cma_train(received: np.ndarray, cfg: EqualizerConfig) -> EqualizerState:
    """Train the per-phase constant-modulus equalizers.

    ``received`` holds the ``L_EQ`` post-window samples latest-first
    (``received[j]`` is the sample ``j`` steps into the past), or a
    batch of such vectors.  Taps start at ``[1, 0, ..., 0]`` and follow
    the Godard update ``u += delta * conj(reg) * y * (gamma - |y|^2)``
    with ``y = u^T reg`` on the phase-decimated regressors.

    Raises
    ------
    NumericalDivergenceError
        If any tap magnitude exceeds ``1e6`` during training.
    """
    batch, single = _as_batch(received)
    if batch.shape[1] != cfg.L_EQ:
        raise ValueError(f"expected {cfg.L_EQ} samples, got {batch.shape[1]}")
    n_taps = cfg.L_ch + 1
    n_iter = cfg.J - n_taps
    taps = np.zeros((batch.shape[0], cfg.P_h, n_taps), dtype=complex)
    taps[:, :, 0] = 1.0
    for i in range(cfg.P_h):
        stream = batch[:, i :: cfg.P_h]
        u = taps[:, i, :]
        for k in range(n_iter):
            reg = stream[:, k : k + n_taps]
            y = np.sum(u * reg, axis=1)
            u += cfg.delta_p * reg.conj() * (y * (cfg.gamma_s2 - np.abs(y) ** 2))[:, None]
            if np.max(np.abs(u)) > DIVERGENCE_LIMIT:
                raise NumericalDivergenceError(
                    f"equalizer taps exceeded {DIVERGENCE_LIMIT:g} at iteration "
                    f"{k} of phase {i}; reduce delta_p (currently {cfg.delta_p:g})"
                )
    return EqualizerState(taps=taps[0] if single else taps, iterations=n_iter)


def equalize_and_slice(
    received: np.ndarray,
    state: EqualizerState,
    cfg: EqualizerConfig,
    constellation: Constellation,
) -> np.ndarray:
    """Recover symbols from the post-window samples via the hard slicer.

    Returns the ``L_est`` symbol estimates latest-first: entry ``j`` is
    the estimate of the symbol transmitted ``j`` steps into the past
    relative to the newest collected sample.
    """
    batch, single = _as_batch(received)
    taps = state.taps[None, ...] if state.taps.ndim == 2 else state.taps
    n_taps = cfg.L_ch + 1
    out = np.empty((batch.shape[0], cfg.L_est), dtype=complex)
    for i in range(cfg.P_h):
        stream = batch[:, i :: cfg.P_h]
        windows = np.lib.stride_tricks.sliding_window_view(stream, n_taps, axis=1)
        y = np.einsum("bkt,bt->bk", windows, taps[:, i, :])
        sym_idx = constellation.nearest_index(y)
        out[:, i :: cfg.P_h] = constellation.symbols[sym_idx]
    return out[0] if single else out


def lsse_cir(
    received: np.ndarray,
    s_hat: np.ndarray,
    cfg: EqualizerConfig,
) -> np.ndarray:
    """Least-squares channel estimate from recovered symbols.

    For each phase the regressor matrix stacks ``omega + 1`` shifted
    views of the recovered symbols and is solved against the matching
    received samples via QR, falling back to a pseudo-inverse with
    relative singular-value cutoff ``1e-10`` when rank-deficient.
    Returns per-phase tap vectors, shape ``(P_h, L_ch + 1)``.

    Raises
    ------
    EstimationError
        If a regressor is identically degenerate (all singular values
        below the cutoff).
    """
    batch, single = _as_batch(received)
    s_batch, _ = _as_batch(s_hat)
    if s_batch.shape != (batch.shape[0], cfg.L_est):
        raise ValueError(f"expected symbol estimates of shape (batch, {cfg.L_est})")
    n_taps = cfg.L_ch + 1
    n_rows = cfg.omega + 1
    h_hat = np.empty((batch.shape[0], cfg.P_h, n_taps), dtype=complex)
    col_idx = (
        cfg.P_h * np.arange(n_rows)[:, None] + np.arange(n_taps)[None, :]
    )
    for i in range(cfg.P_h):
        g = s_batch[:, col_idx + i]
        y = batch[:, i :: cfg.P_h][:, :n_rows]
        q, r = np.linalg.qr(g)
        diag = np.abs(np.diagonal(r, axis1=1, axis2=2))
        deficient = np.min(diag, axis=1) <= LS_RCOND * np.max(diag, axis=1)
        rhs = np.einsum("brc,br->bc", q.conj(), y)
        safe_r = r.copy()
        if np.any(deficient):
            safe_r[deficient] = np.eye(n_taps)
        h_hat[:, i, :] = np.linalg.solve(safe_r, rhs[:, :, None])[:, :, 0]
        for b in np.nonzero(deficient)[0]:
            sv = np.linalg.svd(g[b], compute_uv=False)
            if sv[0] <= 0:
                raise EstimationError(
                    f"symbol regressor for phase {i} is identically zero"
                )
            h_hat[b, i, :] = np.linalg.pinv(g[b], rcond=LS_RCOND) @ y[b]
    return h_hat[0] if single else h_hat


def assemble_B_hat(h_hat: np.ndarray, geom: FrameGeometry) -> np.ndarray:
    """Tile per-phase tap estimates into the block channel matrix.

    Row ``k`` of the result takes the phase ``k mod P_h`` estimate,
    extending the ``P_h`` estimated phases over all ``N`` time indices
    by periodicity; the placement matches the true matrix builder, so
    feeding the true taps reproduces the true matrix exactly.
    """
    h_hat = np.asarray(h_hat, dtype=complex)
    batched = h_hat.ndim == 3
    if not batched:
        h_hat = h_hat[None, ...]
    if h_hat.shape[1] != geom.P_h or h_hat.shape[2] != geom.L_ch + 1:
        raise ValueError(
            f"expected per-phase estimates of shape ({geom.P_h}, {geom.L_ch + 1})"
        )
    b = np.zeros((h_hat.shape[0], geom.K, geom.N), dtype=complex)
    for k in range(geom.K):
        b[:, k, k : k + geom.L_ch + 1] = h_hat[:, k % geom.P_h, :]
    return b if batched else b[0]


def estimate_channel_matrix(
    extra: np.ndarray,
    cfg: EqualizerConfig,
    constellation: Constellation,
    geom: FrameGeometry,
) -> np.ndarray:
    """Full blind pipeline: equalize, slice, regress, assemble.

    ``extra`` is the latest-first post-window sample vector (or batch);
    the result is the estimated block channel matrix ``(K, N)`` (or a
    batch thereof).
    """
    state = cma_train(extra, cfg)
    s_hat = equalize_and_slice(extra, state, cfg, constellation)
    h_hat = lsse_cir(extra, s_hat, cfg)
    return assemble_B_hat(h_hat, geom)
