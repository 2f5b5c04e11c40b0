"""
Scenario configuration files.

A scenario is a JSON document naming the constellation, frame geometry,
channel taps, noise model, sync word, detector parameters, equalizer
settings and experiment defaults.  Parsing builds the validated domain
objects and computes every derived quantity (K, L_sw, L_tot, J, psi,
omega, the constellation moments); serialisation emits a canonical
document that parses back to an equivalent configuration.

Two scenarios matching the published evaluation setups are bundled with
the package and can be referenced by name (``scenario1``, ``scenario2``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .channel import FrameGeometry, LptvChannel
from .cyclostat import NoiseModel
from .estimation import EqualizerConfig
from .frame import Constellation, SyncWord

__all__ = ["ScenarioConfig", "ConfigError", "parse_config", "serialize_config"]

BUNDLED = ("scenario1", "scenario2")


class ConfigError(ValueError):
    """A scenario file violates a structural constraint."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"config field '{field}': {message}")


@dataclass(frozen=True, eq=False)
class ScenarioConfig:
    """Fully validated scenario with derived objects attached."""

    name: str
    constellation: Constellation
    geometry: FrameGeometry
    channel: LptvChannel
    noise: NoiseModel
    sync_word: SyncWord
    sync_word_indices: tuple[int, ...]
    e_r0: int
    e_r1: int
    materialization_cap: int
    equalizer: EqualizerConfig
    c1: int
    c2: int
    snr_db: tuple[float, ...]
    trials_roc: int
    trials_search: int
    trials_validate: int
    sw_search_snr_db: float
    sw_search_mode: str
    seed: int

    def with_sync_word(self, sw: SyncWord) -> "ScenarioConfig":
        indices = tuple(
            int(np.argmin(np.abs(self.constellation.symbols - s)))
            for s in sw.vector
        )
        return ScenarioConfig(
            **{
                **{f: getattr(self, f) for f in self.__dataclass_fields__},
                "sync_word": sw,
                "sync_word_indices": indices,
            }
        )

    def echo(self) -> dict:
        """Derived quantities, for logging alongside the raw fields."""
        g, e = self.geometry, self.equalizer
        return {
            "L_ch": g.L_ch,
            "K": g.K,
            "L_sw": g.L_sw,
            "L_tot": g.L_tot,
            "J": e.J,
            "xi": e.xi,
            "psi": e.psi,
            "omega": e.omega,
            "L_est": e.L_est,
            "sigma_s2": self.constellation.sigma_s2,
            "gamma_s2": self.constellation.gamma_s2,
        }


def _require(doc: dict, field: str):
    if field not in doc:
        raise ConfigError(field, "missing")
    return doc[field]


def _complex_list(values, field: str) -> np.ndarray:
    try:
        return np.array([complex(v[0], v[1]) for v in values])
    except (TypeError, IndexError) as exc:
        raise ConfigError(field, f"expected [re, im] pairs: {exc}") from None


def _parse_constellation(spec) -> Constellation:
    if spec == "bpsk":
        return Constellation.bpsk()
    if isinstance(spec, list):
        return Constellation(symbols=_complex_list(spec, "constellation"))
    raise ConfigError("constellation", f"unsupported spec {spec!r}")


def _parse_sync_word(entries, constellation: Constellation, geom: FrameGeometry):
    """Accept constellation indices, or +-1 value shorthand when a
    negative entry makes the value reading unambiguous."""
    n_s = len(constellation)
    values = []
    for e in entries:
        if isinstance(e, str):
            e = int(e)
        values.append(e)
    as_values = any(v < 0 for v in values)
    indices = []
    for v in values:
        if as_values:
            dist = np.abs(constellation.symbols - v)
            if np.min(dist) > 1e-9:
                raise ConfigError("sync_word", f"value {v} is not a symbol")
            indices.append(int(np.argmin(dist)))
        else:
            if not 0 <= v < n_s:
                raise ConfigError("sync_word", f"index {v} outside 0..{n_s - 1}")
            indices.append(int(v))
    if len(indices) != geom.L_sw:
        raise ConfigError(
            "sync_word",
            f"length {len(indices)} must equal K*M = {geom.L_sw}",
        )
    vector = constellation.symbols[np.asarray(indices)]
    return SyncWord(vector=vector, n_blocks=geom.M), tuple(indices)


def parse_config(path) -> ScenarioConfig:
    """Load and validate a scenario file (path or bundled name)."""
    text = _read_config_text(path)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<document>", f"invalid JSON: {exc}") from None
    return _build(doc)


def _read_config_text(path) -> str:
    p = Path(path)
    if p.exists():
        return p.read_text()
    name = str(path)
    if name in BUNDLED:
        return (
            resources.files("framesync").joinpath(f"configs/{name}.json").read_text()
        )
    raise ConfigError("<path>", f"no such config file or bundled scenario: {path}")


def _build(doc: dict) -> ScenarioConfig:
    constellation = _parse_constellation(_require(doc, "constellation"))

    g = _require(doc, "geometry")
    try:
        geom = FrameGeometry(
            P_h=int(_require(g, "P_h")),
            P_z=int(_require(g, "P_z")),
            L_h=int(_require(g, "L_h")),
            L_z=int(_require(g, "L_z")),
            N=int(_require(g, "N")),
            M=int(_require(g, "M")),
        )
    except ValueError as exc:
        raise ConfigError("geometry", str(exc)) from None

    ch_doc = _require(doc, "channel")
    try:
        taps = np.array(
            [
                [complex(t[0], t[1]) for t in phase]
                for phase in _require(ch_doc, "taps")
            ]
        )
        channel = LptvChannel(
            period=int(_require(ch_doc, "period")),
            memory=int(_require(ch_doc, "memory")),
            coeffs=taps,
        )
    except ValueError as exc:
        raise ConfigError("channel", str(exc)) from None
    if channel.period != geom.P_h or channel.memory != geom.L_h:
        raise ConfigError("channel", "period/memory disagree with the geometry")

    nz_doc = _require(doc, "noise")
    try:
        noise = NoiseModel(
            period=int(_require(nz_doc, "period")),
            memory=int(_require(nz_doc, "memory")),
            variance_profile=np.asarray(_require(nz_doc, "variance_profile"), float),
            shaping_fir=np.asarray(_require(nz_doc, "shaping_fir"), float),
        )
    except ValueError as exc:
        raise ConfigError("noise", str(exc)) from None
    if noise.period != geom.P_z or noise.memory != geom.L_z:
        raise ConfigError("noise", "period/memory disagree with the geometry")

    sync_word, sw_indices = _parse_sync_word(
        _require(doc, "sync_word"), constellation, geom
    )

    det_doc = doc.get("detector", {})
    e_r0 = int(det_doc.get("e_r0", geom.N))
    e_r1 = int(det_doc.get("e_r1", geom.L_ch))
    cap = int(det_doc.get("materialization_cap", 2**20))
    if not 0 <= e_r0 <= geom.N:
        raise ConfigError("detector.e_r0", f"must be in 0..{geom.N}")
    if not 0 <= e_r1 <= geom.L_ch:
        raise ConfigError("detector.e_r1", f"must be in 0..{geom.L_ch}")

    eq_doc = _require(doc, "equalizer")
    try:
        equalizer = EqualizerConfig(
            delta_p=float(_require(eq_doc, "delta_p")),
            L_EQ=int(_require(eq_doc, "L_EQ")),
            P_h=geom.P_h,
            L_ch=geom.L_ch,
            gamma_s2=constellation.gamma_s2,
            omega_override=eq_doc.get("omega_override"),
        )
    except ValueError as exc:
        raise ConfigError("equalizer", str(exc)) from None

    trials = doc.get("trials", {})
    search_doc = doc.get("sw_search", {})
    snr_db = tuple(float(s) for s in doc.get("snr_db", [-5.0, 0.0, 5.0]))

    return ScenarioConfig(
        name=str(doc.get("name", "scenario")),
        constellation=constellation,
        geometry=geom,
        channel=channel,
        noise=noise,
        sync_word=sync_word,
        sync_word_indices=sw_indices,
        e_r0=e_r0,
        e_r1=e_r1,
        materialization_cap=cap,
        equalizer=equalizer,
        c1=int(doc.get("c1", 1)),
        c2=int(doc.get("c2", 1)),
        snr_db=snr_db,
        trials_roc=int(trials.get("roc", 3000)),
        trials_search=int(trials.get("search", 3000)),
        trials_validate=int(trials.get("validate", 100_000)),
        sw_search_snr_db=float(search_doc.get("snr_db", -5.0)),
        sw_search_mode=str(search_doc.get("mode", "sample:100")),
        seed=int(doc.get("seed", 0)),
    )


def serialize_config(cfg: ScenarioConfig) -> dict:
    """Canonical JSON-ready document; parses back to an equivalent config."""
    return {
        "name": cfg.name,
        "constellation": [
            [float(s.real), float(s.imag)] for s in cfg.constellation.symbols
        ],
        "geometry": {
            "P_h": cfg.geometry.P_h,
            "P_z": cfg.geometry.P_z,
            "L_h": cfg.geometry.L_h,
            "L_z": cfg.geometry.L_z,
            "N": cfg.geometry.N,
            "M": cfg.geometry.M,
        },
        "channel": {
            "period": cfg.channel.period,
            "memory": cfg.channel.memory,
            "taps": [
                [[float(t.real), float(t.imag)] for t in phase]
                for phase in cfg.channel.coeffs
            ],
        },
        "noise": {
            "period": cfg.noise.period,
            "memory": cfg.noise.memory,
            "variance_profile": [float(v) for v in cfg.noise.variance_profile],
            "shaping_fir": [float(v) for v in cfg.noise.shaping_fir],
        },
        "sync_word": list(cfg.sync_word_indices),
        "detector": {
            "e_r0": cfg.e_r0,
            "e_r1": cfg.e_r1,
            "materialization_cap": cfg.materialization_cap,
        },
        "equalizer": {
            "delta_p": cfg.equalizer.delta_p,
            "L_EQ": cfg.equalizer.L_EQ,
            **(
                {"omega_override": cfg.equalizer.omega_override}
                if cfg.equalizer.omega_override is not None
                else {}
            ),
        },
        "c1": cfg.c1,
        "c2": cfg.c2,
        "snr_db": list(cfg.snr_db),
        "trials": {
            "roc": cfg.trials_roc,
            "search": cfg.trials_search,
            "validate": cfg.trials_validate,
        },
        "sw_search": {
            "snr_db": cfg.sw_search_snr_db,
            "mode": cfg.sw_search_mode,
        },
        "seed": cfg.seed,
    }
