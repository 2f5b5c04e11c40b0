"""
Monte-Carlo evaluation harness.

Draws observation windows under both hypotheses with per-trial
counter-based substreams (keyed by master seed, hypothesis and trial
index, so results never depend on scheduling or worker count), evaluates
a chosen detector, and turns the statistic samples into empirical ROC
curves and AUC values.  Also houses the sync-word search, the
closed-form complexity report, and the statistical model-validation
suite run by the ``validate`` command.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import detectors as det
from .channel import build_B_matrix
from .cyclostat import analytic_autocorrelation, generate_acgn, noise_cov_matrix
from .estimation import estimate_channel_matrix
from .frame import H0, H1, SyncWord, draw_window, post_process

__all__ = [
    "RocCurve",
    "AucResult",
    "CheckResult",
    "sample_statistics",
    "empirical_roc",
    "auc",
    "sw_search",
    "complexity_report",
    "validate_scenario",
]

#: trials per batch; fixed so batch composition is scheduling-independent
CHUNK_SIZE = 250

_HYP_KEY = {H0: 0, H1: 1}


@dataclass(frozen=True)
class RocCurve:
    """Empirical ROC from a full threshold sweep over observed values."""

    p_fa: np.ndarray
    p_d: np.ndarray
    thresholds: np.ndarray
    n_h0: int
    n_h1: int

    def __post_init__(self):
        if np.any(np.diff(self.p_fa) < 0) or np.any(np.diff(self.p_d) < 0):
            raise ValueError("ROC points must be monotone nondecreasing")
        if self.p_fa[0] != 0 or self.p_d[0] != 0:
            raise ValueError("ROC must start at (0, 0)")
        if self.p_fa[-1] != 1 or self.p_d[-1] != 1:
            raise ValueError("ROC must end at (1, 1)")


@dataclass(frozen=True)
class AucResult:
    """AUC of one sync word's detector ROC."""

    sw: np.ndarray
    auc: float
    trials: int
    seed: int

    def __post_init__(self):
        if not 0.0 <= self.auc <= 1.0:
            raise ValueError(f"AUC {self.auc} outside [0, 1]")


@dataclass(frozen=True)
class CheckResult:
    """One statistical validation check: worst deviation vs 5 sigma."""

    name: str
    worst_ratio: float
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class RunContext:
    """Precomputed per-(scenario, SNR) state shared by all trials."""

    constellation: object
    geom: object
    channel: object
    noise: object
    sw: SyncWord
    idx: det.CandidateIndexing
    eq_cfg: object
    e_r0: int
    e_r1: int
    b: np.ndarray = field(repr=False)
    c_z: np.ndarray = field(repr=False)
    c_z_inv: np.ndarray = field(repr=False)


def make_context(config, snr_db: float, sw: SyncWord | None = None) -> RunContext:
    """Calibrate the noise to the target SNR and precompute matrices."""
    from .channel import calibrate_noise_power

    geom = config.geometry
    constellation = config.constellation
    scale = calibrate_noise_power(
        config.channel, geom, config.noise, constellation.sigma_s2, snr_db
    )
    noise = config.noise.scaled(scale)
    c_z = noise_cov_matrix(noise, geom.K, geom.N)
    return RunContext(
        constellation=constellation,
        geom=geom,
        channel=config.channel,
        noise=noise,
        sw=sw if sw is not None else config.sync_word,
        idx=det.CandidateIndexing(
            symbols=constellation.symbols,
            N=geom.N,
            M=geom.M,
            L_ch=geom.L_ch,
            cap=config.materialization_cap,
        ),
        eq_cfg=config.equalizer,
        e_r0=config.e_r0,
        e_r1=config.e_r1,
        b=build_B_matrix(config.channel, geom),
        c_z=c_z,
        c_z_inv=np.linalg.inv(c_z),
    )


def _trial_rng(seed: int, hyp: str, trial: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(_HYP_KEY[hyp], trial))
    return np.random.default_rng(ss)


def _draw_chunk(ctx: RunContext, hyp: str, trials, seed: int, extra_len: int):
    return [
        draw_window(
            hyp,
            ctx.sw,
            ctx.geom,
            ctx.channel,
            ctx.noise,
            _trial_rng(seed, hyp, t),
            ctx.constellation,
            extra_len=extra_len,
        )
        for t in trials
    ]


def _evaluate_chunk(
    ctx: RunContext, detector_id: str, hyp: str, trials, seed: int
) -> np.ndarray:
    """Statistic values for a block of trial indices."""
    geom, idx, sw = ctx.geom, ctx.idx, ctx.sw
    extra_len = ctx.eq_cfg.L_EQ if detector_id == "salrt" else 0
    windows = _draw_chunk(ctx, hyp, trials, seed, extra_len)
    values = np.empty(len(windows))

    if detector_id == "salrt":
        extras = np.stack([w.extra for w in windows])
        b_hats = estimate_channel_matrix(extras, ctx.eq_cfg, ctx.constellation, geom)
    for i, w in enumerate(windows):
        if detector_id == "correlator":
            values[i] = det.correlator_statistic(w.samples[: geom.L_sw], sw)
            continue
        r_p = post_process(w, geom)
        if detector_id == "lrt":
            values[i] = det.lrt_log_statistic(r_p, ctx.b, ctx.c_z_inv, idx, sw)
            continue
        r_blocks = r_p.reshape(geom.M, geom.K)
        if detector_id == "alrt":
            values[i] = det.alrt_statistic(r_blocks, ctx.b, ctx.c_z_inv, idx, sw)
            continue
        hd = det.hard_decision(w.samples, idx, sw)
        grids = det.build_grid_sets(hd, idx, sw, ctx.e_r0, ctx.e_r1)
        if detector_id == "ralrt":
            values[i] = det.ralrt_statistic(
                r_blocks, ctx.b, ctx.c_z_inv, grids, idx, sw
            )
        elif detector_id == "salrt":
            values[i] = det.salrt_statistic(
                r_blocks, b_hats[i], ctx.c_z_inv, grids, idx, sw
            )
        else:
            raise ValueError(f"unknown detector {detector_id!r}")
    return values


def _worker(args):
    config, sw_vector, detector_id, snr_db, seed, hyp, trials = args
    sw = SyncWord(vector=np.asarray(sw_vector), n_blocks=config.geometry.M)
    ctx = make_context(config, snr_db, sw=sw)
    return hyp, trials[0], _evaluate_chunk(ctx, detector_id, hyp, trials, seed)


def sample_statistics(
    config,
    detector_id: str,
    snr_db: float,
    n_trials: int,
    seed: int,
    sw: SyncWord | None = None,
    parallelism: int = 1,
) -> tuple[np.ndarray, np.ndarray]:
    """Detector statistics over ``n_trials`` windows per hypothesis.

    Every trial draws its window from a dedicated substream keyed by
    ``(seed, hypothesis, trial)``, so reruns are bit-identical for any
    worker count.  Returns the H0 and H1 value arrays, trial-ordered.
    """
    if detector_id not in det.DETECTOR_IDS:
        raise ValueError(f"unknown detector {detector_id!r}")
    if n_trials < 1:
        raise ValueError("n_trials must be at least 1")
    chunks = [
        (hyp, list(range(start, min(start + CHUNK_SIZE, n_trials))))
        for hyp in (H0, H1)
        for start in range(0, n_trials, CHUNK_SIZE)
    ]
    out = {H0: np.empty(n_trials), H1: np.empty(n_trials)}
    if parallelism <= 1:
        ctx = make_context(config, snr_db, sw=sw)
        for hyp, trials in chunks:
            out[hyp][trials[0] : trials[-1] + 1] = _evaluate_chunk(
                ctx, detector_id, hyp, trials, seed
            )
    else:
        sw_vec = (sw if sw is not None else config.sync_word).vector
        jobs = [
            (config, sw_vec, detector_id, snr_db, seed, hyp, trials)
            for hyp, trials in chunks
        ]
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            for hyp, start, values in pool.map(_worker, jobs):
                out[hyp][start : start + len(values)] = values
    return out[H0], out[H1]


def empirical_roc(
    h0_stats: np.ndarray, h1_stats: np.ndarray, orientation: str
) -> RocCurve:
    """ROC by sweeping the threshold through every distinct value.

    ``orientation`` names the hypothesis that large values favour; the
    sync hypothesis is declared on ties, matching the decision rule.
    """
    h0_stats = np.asarray(h0_stats, dtype=float)
    h1_stats = np.asarray(h1_stats, dtype=float)
    if h0_stats.size == 0 or h1_stats.size == 0:
        raise ValueError("both statistic lists must be nonempty")
    sign = -1.0 if orientation == det.ORIENT_H0 else 1.0
    s0 = np.sort(sign * h0_stats)
    s1 = np.sort(sign * h1_stats)
    thr = np.unique(np.concatenate([s0, s1]))[::-1]
    p_fa = 1.0 - np.searchsorted(s0, thr, side="left") / s0.size
    p_d = 1.0 - np.searchsorted(s1, thr, side="left") / s1.size
    return RocCurve(
        p_fa=np.concatenate([[0.0], p_fa]),
        p_d=np.concatenate([[0.0], p_d]),
        thresholds=np.concatenate([[np.inf], sign * thr]),
        n_h0=int(h0_stats.size),
        n_h1=int(h1_stats.size),
    )


def auc(curve: RocCurve) -> float:
    """Trapezoidal area under the ROC."""
    return float(np.trapezoid(curve.p_d, curve.p_fa))


def _sw_vector_from_index(index: int, n_s: int, length: int, symbols) -> np.ndarray:
    digits = [(index // n_s**p) % n_s for p in range(length)]
    return symbols[np.asarray(digits)]


def sw_search(
    config,
    sw_candidates,
    trials_per_sw: int,
    seed: int,
    snr_db: float | None = None,
    detector_id: str = "salrt",
    parallelism: int = 1,
    progress=None,
) -> tuple[list[AucResult], tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """Rank sync words by detector AUC.

    ``sw_candidates`` is a list of sync-word vectors, ``"exhaustive"``
    for all ``N_s**L_sw`` words, or ``"sample:n"`` for ``n`` words drawn
    at random (the near-optimal search procedure: evaluate the sample,
    keep the best).  Every word is evaluated with the same trial
    substreams, so comparisons are paired.  Returns results sorted by
    decreasing AUC plus a histogram ``(bin_edges, pdf, cdf)`` over the
    observed AUC values (50 uniform bins).
    """
    constellation = config.constellation
    geom = config.geometry
    n_s = len(constellation)
    total = n_s**geom.L_sw
    if snr_db is None:
        snr_db = config.sw_search_snr_db

    if isinstance(sw_candidates, str):
        if sw_candidates == "exhaustive":
            indices = range(total)
        elif sw_candidates.startswith("sample:"):
            n_sample = int(sw_candidates.split(":", 1)[1])
            rng = np.random.default_rng(
                np.random.SeedSequence(entropy=seed, spawn_key=(2,))
            )
            indices = sorted(
                int(i) for i in rng.choice(total, size=n_sample, replace=False)
            )
        else:
            raise ValueError(f"unknown search mode {sw_candidates!r}")
        vectors = (
            _sw_vector_from_index(i, n_s, geom.L_sw, constellation.symbols)
            for i in indices
        )
        n_words = len(indices) if hasattr(indices, "__len__") else total
    else:
        vectors = (np.asarray(v, dtype=complex) for v in sw_candidates)
        n_words = len(sw_candidates)

    results = []
    for count, vec in enumerate(vectors):
        sw = SyncWord.from_symbols(vec, constellation, geom.M)
        h0, h1 = sample_statistics(
            config,
            detector_id,
            snr_db,
            trials_per_sw,
            seed,
            sw=sw,
            parallelism=parallelism,
        )
        curve = empirical_roc(h0, h1, det.DETECTOR_ORIENTATION[detector_id])
        results.append(
            AucResult(sw=vec, auc=auc(curve), trials=trials_per_sw, seed=seed)
        )
        if progress is not None:
            progress(count + 1, n_words, results[-1])

    results.sort(key=lambda r: r.auc, reverse=True)
    aucs = np.array([r.auc for r in results])
    counts, edges = np.histogram(aucs, bins=50)
    widths = np.diff(edges)
    pdf = counts / (aucs.size * widths)
    cdf = np.cumsum(counts) / aucs.size
    return results, (edges, pdf, cdf)


def complexity_report(
    geom,
    e_r0: int,
    e_r1: int,
    eq_cfg,
    constellation,
    c1: int = 1,
    c2: int = 1,
) -> list[dict]:
    """Closed-form complex-multiplication/addition counts per detector.

    These evaluate the published complexity formulas; they are not
    instrumented operation counts of this implementation.
    """
    n, k, m, l_ch = geom.N, geom.K, geom.M, geom.L_ch
    l_sw, l_tot = geom.L_sw, geom.L_tot
    n_s = len(constellation)
    full = n_s**l_tot + n_s ** (m * l_ch)
    q0, q1 = det.grid_set_sizes(n, l_ch, m, n_s, e_r0, e_r1)
    q = q0 + q1
    p_h, j, omega, l_eq = eq_cfg.P_h, eq_cfg.J, eq_cfg.omega, eq_cfg.L_EQ

    cm_salrt = (
        (m * k * (n + 1) + 1 + n**3) * q
        + k * n * (k + n)
        + 1
        + p_h * (j - (l_ch + 1)) * (2 * (l_ch + 1) + 3)
        + p_h * (l_ch + 2) * ((omega + 1) * (l_ch + 1) + (l_ch + 1) ** 2)
        + (l_eq - p_h * l_ch) * (n_s + l_ch + 1)
        + (c1 + c2) * l_tot
    )
    ca_salrt = (
        (m * ((n - 1) * k + (k - 1)) + (n - 1) * n**2 + n) * q
        + n * (k - 1) * (k + n)
        + 1
        + p_h * (j - (l_ch + 1)) * (2 * (l_ch + 1))
        + p_h * (omega * (l_ch + 1) * (l_ch + 2) + l_ch * (l_ch + 1) + l_ch**3)
        + (l_eq - p_h * l_ch) * (n_s + l_ch)
        + (c1 + c2) * (2 * l_tot - 1)
    )
    return [
        {
            "detector": "lrt",
            "cm": m * k * (n + k + 1) * full + 1,
            "ca": m * (k * n + (k - 1) * (k + 1)) * full,
        },
        {
            "detector": "alrt",
            "cm": (m * k * (n + 1) + 1) * full + 1,
            "ca": m * ((n - 1) * k + (k - 1)) * full + 1,
        },
        {
            "detector": "ralrt",
            "cm": (m * k * (n + 1) + 1) * q + 1,
            "ca": m * ((n - 1) * k + (k - 1)) * q + 1,
        },
        {"detector": "salrt", "cm": cm_salrt, "ca": ca_salrt},
        {"detector": "correlator", "cm": l_sw + 1, "ca": l_sw - 1},
    ]


# ---------------------------------------------------------------------------
# statistical model validation
# ---------------------------------------------------------------------------


def _check(name: str, deviations: np.ndarray, limits: np.ndarray, detail: str = ""):
    ratio = float(np.max(deviations / limits))
    return CheckResult(name=name, worst_ratio=ratio, passed=ratio <= 1.0, detail=detail)


def validate_h0_post_mean(ctx: RunContext, n_trials: int, seed: int) -> CheckResult:
    """Post-processed H0 windows must be zero mean (5 sigma per part)."""
    geom = ctx.geom
    acc = np.zeros(geom.L_sw, dtype=complex)
    acc2 = np.zeros(geom.L_sw)
    for t in range(n_trials):
        w = draw_window(
            H0, ctx.sw, geom, ctx.channel, ctx.noise,
            _trial_rng(seed, H0, t), ctx.constellation,
        )
        r_p = post_process(w, geom)
        acc += r_p
        acc2 += np.abs(r_p) ** 2
    mean = acc / n_trials
    # per-component std of each quadrature, assuming circular samples
    comp_std = np.sqrt(np.maximum(acc2 / n_trials - np.abs(mean) ** 2, 1e-30) / 2.0)
    se = comp_std / np.sqrt(n_trials)
    dev = np.maximum(np.abs(mean.real), np.abs(mean.imag))
    return _check("h0_post_mean", dev, 5.0 * se, f"n={n_trials}")


def validate_conditional_covariance(
    ctx: RunContext, n_trials: int, seed: int
) -> CheckResult:
    """Residual covariance given fixed symbols must equal C_z.

    Fixes one symbol realisation, varies only the noise, removes the
    conditional mean predicted by the block channel matrix and compares
    the pooled per-block covariance of the residuals against C_z.
    """
    from .channel import apply_channel

    geom = ctx.geom
    sym_rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(3,)))
    from .frame import assemble_sync_sequence

    s_paper = assemble_sync_sequence(ctx.sw, geom, sym_rng, ctx.constellation)
    s_chrono = s_paper[::-1]
    start_time = 1 - geom.L_tot
    cond_mean = np.stack(
        [ctx.b @ s_paper[m * geom.N : (m + 1) * geom.N] for m in range(geom.M)]
    )
    acc = np.zeros((geom.K, geom.K), dtype=complex)
    n_samples = n_trials * geom.M
    for t in range(n_trials):
        z = generate_acgn(
            ctx.noise, geom.L_tot, _trial_rng(seed, H1, t), start_time=start_time
        )
        r_chrono = apply_channel(ctx.channel, s_chrono, z, start_time=start_time)
        r_p = post_process(r_chrono[::-1], geom).reshape(geom.M, geom.K)
        resid = r_p - cond_mean
        acc += resid.T @ resid.conj()
    cov = acc / n_samples
    cz = ctx.c_z
    power = np.real(np.diag(cz))
    se = np.sqrt(np.outer(power, power) / n_samples)
    return _check(
        "h1_conditional_block_covariance",
        np.abs(cov - cz),
        5.0 * se,
        f"n={n_samples} block samples",
    )


def validate_noise_properness(
    model, n_trials: int, seed: int, sampler=generate_acgn
) -> CheckResult:
    """Pseudo-autocorrelation of the generated noise must vanish."""
    p_z, l_z = model.period, model.memory
    length = p_z + l_z
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(4,)))
    acc = np.zeros((p_z, l_z + 1), dtype=complex)
    for _ in range(n_trials):
        z = sampler(model, length, rng, start_time=0)
        for lag in range(l_z + 1):
            acc[:, lag] += z[lag : lag + p_z] * z[:p_z]
    pseudo = acc / n_trials
    power = np.array(
        [analytic_autocorrelation(model, m, 0).real for m in range(p_z + l_z + 1)]
    )
    se = np.sqrt(
        np.array(
            [[power[m + lag] * power[m] for lag in range(l_z + 1)] for m in range(p_z)]
        )
        / n_trials
    )
    return _check("noise_properness", np.abs(pseudo), 5.0 * se, f"n={n_trials}")


def validate_noise_autocorrelation(
    model, n_trials: int, seed: int, sampler=generate_acgn
) -> CheckResult:
    """Empirical autocorrelation must match the closed form."""
    p_z, l_z = model.period, model.memory
    length = p_z + l_z
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(5,)))
    acc = np.zeros((p_z, l_z + 1), dtype=complex)
    for _ in range(n_trials):
        z = sampler(model, length, rng, start_time=0)
        for lag in range(l_z + 1):
            acc[:, lag] += z[lag : lag + p_z] * z[:p_z].conj()
    emp = acc / n_trials
    ana = np.array(
        [
            [analytic_autocorrelation(model, m, lag) for lag in range(l_z + 1)]
            for m in range(p_z)
        ]
    )
    power = np.array(
        [analytic_autocorrelation(model, m, 0).real for m in range(p_z + l_z + 1)]
    )
    se = np.sqrt(
        np.array(
            [[power[m + lag] * power[m] for lag in range(l_z + 1)] for m in range(p_z)]
        )
        / n_trials
    )
    return _check(
        "noise_autocorrelation", np.abs(emp - ana), 5.0 * se, f"n={n_trials}"
    )


def validate_scenario(config, n_trials: int, seed: int) -> list[CheckResult]:
    """Run the full statistical property suite for one scenario."""
    snr_db = config.snr_db[0] if config.snr_db else 0.0
    ctx = make_context(config, snr_db)
    return [
        validate_h0_post_mean(ctx, n_trials, seed),
        validate_conditional_covariance(ctx, n_trials, seed),
        validate_noise_properness(ctx.noise, n_trials, seed),
        validate_noise_autocorrelation(ctx.noise, n_trials, seed),
    ]
