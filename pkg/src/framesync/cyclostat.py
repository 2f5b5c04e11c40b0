"""
Wide-sense cyclostationary noise primitives.

The additive noise in this package is modelled generatively: a proper
complex Gaussian innovation sequence with a periodically varying
per-sample variance is passed through a short real FIR filter.  Both
evaluation scenarios shipped with the package are instances of this
model, and it guarantees a finite correlation memory equal to the filter
order.

Functions
---------
dcd_decompose / dcd_reconstruct :
    Decimated-components mapping between a scalar cyclostationary
    process and the equivalent multivariate stationary vector process.
generate_acgn :
    Draw a realisation of the additive cyclostationary Gaussian noise.
analytic_autocorrelation :
    Closed-form periodic autocorrelation of the generative model.
noise_cov_matrix :
    Covariance matrix of a window of noise samples in the receiver's
    (latest-sample-first) indexing convention.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "NoiseModel",
    "DcdFrame",
    "ModelConsistencyError",
    "dcd_decompose",
    "dcd_reconstruct",
    "generate_acgn",
    "analytic_autocorrelation",
    "noise_cov_matrix",
]

#: absolute tolerance on the smallest covariance eigenvalue
PSD_TOLERANCE = 1e-10


class ModelConsistencyError(ValueError):
    """Raised when a noise model produces an inconsistent covariance."""


@dataclass(frozen=True)
class NoiseModel:
    """Generative description of filtered cyclostationary Gaussian noise.

    Parameters
    ----------
    period : int
        Period of the innovation variance profile, in samples.
    memory : int
        Correlation memory; equals the order of the shaping filter.
    variance_profile : ndarray
        Per-sample innovation variance (linear power), one entry per
        sample of the period.  All entries must be strictly positive.
    shaping_fir : ndarray
        Real causal filter taps, length ``memory + 1``, first tap
        nonzero.
    """

    period: int
    memory: int
    variance_profile: np.ndarray
    shaping_fir: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "variance_profile", np.asarray(self.variance_profile, dtype=float)
        )
        object.__setattr__(
            self, "shaping_fir", np.asarray(self.shaping_fir, dtype=float)
        )
        if self.period < 1:
            raise ValueError("noise period must be a positive integer")
        if self.memory < 0:
            raise ValueError("noise memory must be non-negative")
        if self.variance_profile.shape != (self.period,):
            raise ValueError(
                f"variance_profile must have {self.period} entries, "
                f"got shape {self.variance_profile.shape}"
            )
        if np.any(self.variance_profile <= 0):
            raise ValueError("variance_profile entries must be strictly positive")
        if self.shaping_fir.shape != (self.memory + 1,):
            raise ValueError(
                f"shaping_fir must have memory+1 = {self.memory + 1} taps, "
                f"got shape {self.shaping_fir.shape}"
            )
        if self.shaping_fir[0] == 0:
            raise ValueError("shaping_fir[0] must be nonzero")

    def scaled(self, factor: float) -> "NoiseModel":
        """Return a copy with the variance profile multiplied by ``factor``."""
        return NoiseModel(
            period=self.period,
            memory=self.memory,
            variance_profile=self.variance_profile * factor,
            shaping_fir=self.shaping_fir,
        )


@dataclass(frozen=True)
class DcdFrame:
    """Decimated components of a scalar process.

    ``components[q, n]`` holds the sample ``x[n * base_period - q]`` of
    the source sequence (with the per-component index origin chosen so
    every component has equal length).
    """

    base_period: int
    components: np.ndarray = field(repr=False)

    def __post_init__(self):
        comps = np.asarray(self.components)
        if comps.ndim != 2 or comps.shape[0] != self.base_period:
            raise ValueError(
                f"components must be a {self.base_period} x n array, "
                f"got shape {comps.shape}"
            )
        object.__setattr__(self, "components", comps)


def dcd_decompose(x: np.ndarray, base_period: int) -> DcdFrame:
    """Split a sequence into its ``base_period`` decimated components.

    Component ``q`` collects the samples ``x[n * base_period - q]``; a
    cyclostationary input with period ``base_period`` becomes a
    stationary vector sequence.

    Raises
    ------
    ValueError
        If the sequence length is not a multiple of ``base_period``.
    """
    x = np.asarray(x)
    if base_period < 1:
        raise ValueError("base_period must be a positive integer")
    if x.ndim != 1 or x.size % base_period != 0:
        raise ValueError(
            f"sequence length {x.size} is not a multiple of base_period {base_period}"
        )
    n = x.size // base_period
    components = np.empty((base_period, n), dtype=x.dtype)
    for q in range(base_period):
        components[q] = x[(base_period - q) % base_period :: base_period]
    return DcdFrame(base_period=base_period, components=components)


def dcd_reconstruct(frame: DcdFrame) -> np.ndarray:
    """Interleave decimated components back into the scalar sequence.

    Exact inverse of :func:`dcd_decompose` for every input.
    """
    n0 = frame.base_period
    comps = frame.components
    out = np.empty(n0 * comps.shape[1], dtype=comps.dtype)
    for q in range(n0):
        out[(n0 - q) % n0 :: n0] = comps[q]
    return out


def generate_acgn(
    model: NoiseModel,
    length: int,
    rng: np.random.Generator,
    start_time: int = 0,
) -> np.ndarray:
    """Draw ``length`` samples of the noise process starting at ``start_time``.

    The innovation at absolute time ``m`` is proper complex Gaussian
    with variance ``variance_profile[m mod period]``, drawn as
    independent real and imaginary parts of variance ``sigma^2 / 2``
    each; the output is the shaping filter applied to the innovations.
    ``start_time`` fixes the phase of the variance profile so that
    windows cut from different absolute positions share one global
    noise clock.
    """
    if length <= 0:
        raise ValueError("length must be positive")
    lz = model.memory
    n_innov = length + lz
    times = start_time - lz + np.arange(n_innov)
    sigma = np.sqrt(model.variance_profile[np.mod(times, model.period)] / 2.0)
    w = sigma * (rng.standard_normal(n_innov) + 1j * rng.standard_normal(n_innov))
    z = np.convolve(w, model.shaping_fir)[lz : lz + length]
    return z


def analytic_autocorrelation(model: NoiseModel, m: int, lag: int) -> complex:
    """Closed-form autocorrelation ``E{Z[m+lag] Z[m]*}`` of the model.

    Vanishes for ``|lag| > memory`` and is periodic in ``m`` with the
    model period.
    """
    lz = model.memory
    if abs(lag) > lz:
        return complex(0.0)
    h = model.shaping_fir
    k_lo = max(0, -lag)
    k_hi = lz - max(0, lag)
    acc = 0.0
    for k in range(k_lo, k_hi + 1):
        acc += h[k] * model.variance_profile[(m - k) % model.period] * h[k + lag]
    return complex(acc)


def noise_cov_matrix(model: NoiseModel, k: int, n: int) -> np.ndarray:
    """Covariance matrix of ``k`` noise samples in latest-first order.

    Entry ``(a1, a2)`` equals ``E{Z[-a1] Z[-a2]*}``, i.e. the
    autocorrelation evaluated at ``(m, lag) = (-a2, a2 - a1)``.  ``n``
    is the block length of the surrounding frame and must be a multiple
    of the noise period so that the matrix is the same for every block.

    Raises
    ------
    ModelConsistencyError
        If the resulting matrix is not positive semidefinite within
        :data:`PSD_TOLERANCE`.
    """
    if n % model.period != 0:
        raise ValueError(
            f"block length {n} must be a multiple of the noise period {model.period}"
        )
    if k > n:
        raise ValueError(f"matrix size {k} exceeds block length {n}")
    cov = np.zeros((k, k), dtype=complex)
    for a1 in range(k):
        for a2 in range(max(0, a1 - model.memory), min(k, a1 + model.memory + 1)):
            cov[a1, a2] = analytic_autocorrelation(model, -a2, a2 - a1)
    min_eig = float(np.min(np.linalg.eigvalsh(cov)))
    if min_eig < -PSD_TOLERANCE:
        raise ModelConsistencyError(
            f"noise covariance has eigenvalue {min_eig:.3e} below -{PSD_TOLERANCE}"
        )
    return cov
