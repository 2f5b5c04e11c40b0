"""
Command-line front end.

Subcommands::

    roc               ROC curves per detector and SNR (CSV + figures)
    search-sw         sync-word search: AUC per word (JSONL + histogram)
    complexity        closed-form complexity table (CSV + figure)
    validate          statistical model validation suite
    estimate-channel  one blind channel-estimation run against the truth

Exit codes: 0 success, 2 configuration error, 3 numerical error,
4 validation failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import detectors as det
from . import harness
from .config import ConfigError, parse_config
from .estimation import (
    EstimationError,
    NumericalDivergenceError,
    assemble_B_hat,
    cma_train,
    equalize_and_slice,
    lsse_cir,
)
from .frame import H1, draw_window

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_VALIDATION = 4


def _add_common(p: argparse.ArgumentParser, trials_help: str):
    p.add_argument("--config", required=True, help="scenario file or bundled name")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--trials", type=int, default=None, help=trials_help)
    p.add_argument(
        "--parallelism", type=int, default=1, help="worker processes for trials"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="framesync",
        description="Frame-synchronization detector experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("roc", help="ROC curves per detector and SNR")
    _add_common(p, "Monte-Carlo trials per hypothesis and point")
    p.add_argument(
        "--detectors",
        default=",".join(det.DETECTOR_IDS),
        help="comma-separated detector list",
    )
    p.add_argument(
        "--snr",
        default=None,
        help="comma-separated SNR list in dB (default: from config)",
    )
    p.add_argument(
        "--dump-stats",
        action="store_true",
        help="also write per-window statistics to statistics.csv",
    )

    p = sub.add_parser("search-sw", help="AUC search over sync words")
    _add_common(p, "Monte-Carlo trials per sync word and hypothesis")
    p.add_argument(
        "--mode",
        default=None,
        help="'exhaustive' or 'sample:n' (default: from config)",
    )

    p = sub.add_parser("complexity", help="closed-form complexity table")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=".")

    p = sub.add_parser("validate", help="statistical model validation")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--trials", type=int, default=None)

    p = sub.add_parser("estimate-channel", help="one channel-estimation run")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--snr", type=float, default=None, help="SNR in dB")
    return parser


def cmd_roc(args) -> int:
    cfg = parse_config(args.config)
    seed = cfg.seed if args.seed is None else args.seed
    trials = cfg.trials_roc if args.trials is None else args.trials
    detectors = [d.strip() for d in args.detectors.split(",") if d.strip()]
    for d in detectors:
        if d not in det.DETECTOR_IDS:
            raise ConfigError("--detectors", f"unknown detector {d!r}")
    snrs = (
        cfg.snr_db
        if args.snr is None
        else tuple(float(s) for s in args.snr.split(","))
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    from .plotting import plot_roc

    csv_path = out / "roc.csv"
    stats_fh = open(out / "statistics.csv", "w", newline="") if args.dump_stats else None
    stats_writer = None
    if stats_fh is not None:
        stats_writer = csv.writer(stats_fh)
        stats_writer.writerow(["window_id", "truth", "detector", "value"])
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["detector", "snr_db", "threshold", "p_fa", "p_d"])
        for snr_db in snrs:
            curves = {}
            for detector_id in detectors:
                h0, h1 = harness.sample_statistics(
                    cfg, detector_id, snr_db, trials, seed,
                    parallelism=args.parallelism,
                )
                curve = harness.empirical_roc(
                    h0, h1, det.DETECTOR_ORIENTATION[detector_id]
                )
                curves[detector_id] = curve
                for t, fa, pd_ in zip(curve.thresholds, curve.p_fa, curve.p_d):
                    writer.writerow([detector_id, snr_db, repr(float(t)), fa, pd_])
                if stats_writer is not None:
                    for label, values in (("H0", h0), ("H1", h1)):
                        for i, v in enumerate(values):
                            stats_writer.writerow([i, label, detector_id, repr(v)])
                print(
                    f"{detector_id:>10s}  SNR {snr_db:+.1f} dB  "
                    f"AUC {harness.auc(curve):.4f}"
                )
            plot_roc(curves, snr_db, out / f"roc_{snr_db:+g}dB.png")
    if stats_fh is not None:
        stats_fh.close()
        print(f"wrote {out / 'statistics.csv'}")
    print(f"wrote {csv_path}")
    return EXIT_OK


def cmd_search_sw(args) -> int:
    cfg = parse_config(args.config)
    seed = cfg.seed if args.seed is None else args.seed
    trials = cfg.trials_search if args.trials is None else args.trials
    mode = cfg.sw_search_mode if args.mode is None else args.mode
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    def progress(done, total, result):
        if done % 25 == 0 or done == total:
            print(f"  [{done}/{total}] last AUC {result.auc:.4f}", flush=True)

    results, (edges, pdf, cdf) = harness.sw_search(
        cfg, mode, trials, seed, parallelism=args.parallelism, progress=progress
    )

    jsonl_path = out / "sw_search.jsonl"
    with open(jsonl_path, "w") as fh:
        for r in results:
            fh.write(
                json.dumps(
                    {
                        "sw": _sw_json(r.sw),
                        "auc": r.auc,
                        "trials": r.trials,
                        "seed": r.seed,
                    }
                )
                + "\n"
            )
    hist_path = out / "auc_hist.csv"
    with open(hist_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bin_left", "bin_right", "pdf", "cdf"])
        for i in range(len(pdf)):
            writer.writerow([edges[i], edges[i + 1], pdf[i], cdf[i]])

    from .plotting import plot_auc_hist

    plot_auc_hist(edges, pdf, cdf, out / "auc_pdf_cdf.png")
    best = results[0]
    print(f"best sync word: {_sw_json(best.sw)}  AUC {best.auc:.4f}")
    print(f"wrote {jsonl_path} ({len(results)} words), {hist_path}")
    return EXIT_OK


def _sw_json(vector) -> list:
    vector = np.asarray(vector)
    if np.allclose(vector.imag, 0) and np.allclose(np.rint(vector.real), vector.real):
        return [int(v) for v in vector.real]
    return [[float(v.real), float(v.imag)] for v in vector]


def cmd_complexity(args) -> int:
    cfg = parse_config(args.config)
    rows = harness.complexity_report(
        cfg.geometry, cfg.e_r0, cfg.e_r1, cfg.equalizer, cfg.constellation,
        c1=cfg.c1, c2=cfg.c2,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "complexity.csv"
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["detector", "cm", "ca"])
        for row in rows:
            writer.writerow([row["detector"], row["cm"], row["ca"]])
            print(f"{row['detector']:>10s}  CM {row['cm']:>12,d}  CA {row['ca']:>12,d}")

    from .plotting import plot_complexity

    plot_complexity(rows, out / "complexity.png")
    print(f"wrote {csv_path}")
    return EXIT_OK


def cmd_validate(args) -> int:
    cfg = parse_config(args.config)
    seed = cfg.seed if args.seed is None else args.seed
    trials = cfg.trials_validate if args.trials is None else args.trials
    results = harness.validate_scenario(cfg, trials, seed)
    failed = False
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(
            f"[{status}] {r.name}: worst deviation {r.worst_ratio:.3f} "
            f"of the 5-sigma budget ({r.detail})"
        )
        failed = failed or not r.passed
    return EXIT_VALIDATION if failed else EXIT_OK


def cmd_estimate_channel(args) -> int:
    cfg = parse_config(args.config)
    seed = cfg.seed if args.seed is None else args.seed
    snr_db = args.snr if args.snr is not None else cfg.snr_db[0]
    ctx = harness.make_context(cfg, snr_db)
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(9,)))
    window = draw_window(
        H1, ctx.sw, ctx.geom, ctx.channel, ctx.noise, rng, ctx.constellation,
        extra_len=cfg.equalizer.L_EQ,
    )
    state = cma_train(window.extra, cfg.equalizer)
    s_hat = equalize_and_slice(window.extra, state, cfg.equalizer, ctx.constellation)
    h_hat = lsse_cir(window.extra, s_hat, cfg.equalizer)
    b_hat = assemble_B_hat(h_hat, ctx.geom)
    print(f"SNR {snr_db:+.1f} dB, seed {seed}")
    for i in range(ctx.geom.P_h):
        truth = ctx.channel.taps_at(-i, ctx.geom.L_ch)
        est = h_hat[i]
        nmse = float(np.sum(np.abs(est - truth) ** 2) / np.sum(np.abs(truth) ** 2))
        print(f"phase {i}: estimate {np.round(est, 4)}")
        print(f"         truth    {np.round(truth, 4)}   NMSE {nmse:.4f}")
    b_err = float(np.linalg.norm(b_hat - ctx.b) / np.linalg.norm(ctx.b))
    print(f"relative channel-matrix error {b_err:.4f}")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "roc": cmd_roc,
        "search-sw": cmd_search_sw,
        "complexity": cmd_complexity,
        "validate": cmd_validate,
        "estimate-channel": cmd_estimate_channel,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalDivergenceError, EstimationError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
