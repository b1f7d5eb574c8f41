"""Command-line front end: configuration, experiment sweeps, CSV emission.

``ambc-detect run`` executes one experiment described by a YAML config and
writes one CSV per run with the fixed column schema

    sweep,detector,metric,estimate,ci_lo,ci_hi,closed_form,error

Rows are sorted by (sweep value, detector, metric) and floats are printed
with a fixed format, so output files are byte-identical for a fixed seed no
matter how many worker threads execute the sweep.
"""

from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import yaml

from . import analysis, detectors
from .channel import GeometryConfig, LinkBudget, NoiseModel, build_link_budget, dbm_to_watts
from .detectors import DetectorConfig, JcedWeights
from .sysmodel import ScenarioParams, average_signal_stats

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "ResultRow",
    "EXPERIMENTS",
    "load_config",
    "default_config",
    "serialize_config",
    "build_scenario",
    "run_experiment",
    "main",
]

# Sweep axis and default sweep values per experiment.
EXPERIMENTS: dict[str, tuple[str, list[float]]] = {
    "roc": ("pf", []),
    "pd_vs_ps": ("p_s_dbm", [-20.0, -15.0, -10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0]),
    "ber_vs_ps": ("p_s_dbm", [-20.0, -15.0, -10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0]),
    "ber_vs_xi": ("xi", [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0]),
    "auc_vs_ps": ("p_s_dbm", [-20.0, -15.0, -10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0]),
    "pd_vs_q": ("q", [0.5, 1.0, 1.5, 2.0, 3.0, 5.0]),
    "popt_vs_pf": ("target_pf", [0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5]),
    "weights_vs_pf": ("target_pf", [0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5]),
    "ber_vs_antennas": ("m_antennas", [1, 2, 4, 8]),
}

CSV_HEADER = "sweep,detector,metric,estimate,ci_lo,ci_hi,closed_form,error"


class ConfigError(ValueError):
    """Configuration failed validation; the message names the field."""


@dataclass(frozen=True)
class DetectorSpec:
    """One detector entry of the config file."""

    kind: str
    p: float | None = None  # None means optimize per sweep point
    alpha: float | None = None  # None means optimize per sweep point

    def to_config(self) -> DetectorConfig:
        weights = None if self.alpha is None else JcedWeights.from_alpha(self.alpha)
        return DetectorConfig(kind=self.kind, p=self.p, weights=weights)

    @property
    def label(self) -> str:
        if self.kind == "ied":
            return "ied_opt" if self.p is None else f"ied_p{self.p:g}"
        return self.kind


@dataclass(frozen=True)
class ScenarioConfig:
    """Scenario section of the config file (powers in dBm, toggles, priors)."""

    p_s_dbm: float = 10.0
    n_samples: int = 512
    m_antennas: int = 1
    xi: float = 1.0
    epsilon: float = 0.0
    dic: bool = False
    signal_model: str = "constant_unit"
    fading: str = "rayleigh"
    rician_k: float = 3.0
    prior_h0: float = 0.5
    prior_h1: float = 0.5
    noise_family: str = "cscg"
    noise_q: float = 1.0
    apply_pathloss: bool = True
    noise_var_w: float | None = None  # overrides the budgeted thermal noise
    link_variances: tuple[float, float, float] | None = None  # (sr, st, tr)


@dataclass(frozen=True)
class ExperimentConfig:
    """Complete description of one simulation run."""

    experiment: str = "roc"
    seed: int = 20240915
    trials: int = 10000
    target_pf: float = 0.05
    channel_mode: str = "fading"
    threshold_mode: str | None = None
    output: str = "results"
    sweep: tuple[float, ...] | None = None
    detectors: tuple[DetectorSpec, ...] = (
        DetectorSpec("ted"),
        DetectorSpec("ied"),
        DetectorSpec("jced"),
    )
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    geometry: GeometryConfig = field(default_factory=GeometryConfig)


def default_config() -> ExperimentConfig:
    """Config with every field at its default operating point."""
    return ExperimentConfig()


def _expect_mapping(value, path: str) -> dict:
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigError(f"{path} must be a mapping, got {type(value).__name__}")
    return value


def _take(data: dict, key: str, path: str, expected, default):
    if key not in data:
        return default
    value = data.pop(key)
    if expected is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}.{key} must be a number, got {value!r}")
        return float(value)
    if expected is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path}.{key} must be an integer, got {value!r}")
        return value
    if expected is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{path}.{key} must be a boolean, got {value!r}")
        return value
    if expected is str:
        if not isinstance(value, str):
            raise ConfigError(f"{path}.{key} must be a string, got {value!r}")
        return value
    return value


def _reject_unknown(data: dict, path: str) -> None:
    if data:
        raise ConfigError(f"unknown key {path}.{next(iter(data))}")


def _parse_detectors(raw, path: str) -> tuple[DetectorSpec, ...]:
    if raw is None:
        return default_config().detectors
    if not isinstance(raw, list) or not raw:
        raise ConfigError(f"{path} must be a non-empty list")
    specs = []
    for i, entry in enumerate(raw):
        entry = dict(_expect_mapping(entry, f"{path}[{i}]"))
        kind = _take(entry, "kind", f"{path}[{i}]", str, None)
        if kind not in detectors.DETECTOR_KINDS:
            raise ConfigError(
                f"{path}[{i}].kind must be one of {detectors.DETECTOR_KINDS}, got {kind!r}"
            )
        p = entry.pop("p", None)
        if p is not None and not (isinstance(p, str) and p == "optimize"):
            if isinstance(p, bool) or not isinstance(p, (int, float)) or p <= 0:
                raise ConfigError(f"{path}[{i}].p must be positive or 'optimize', got {p!r}")
            p = float(p)
        else:
            p = None
        alpha = entry.pop("alpha", None)
        if alpha is not None and not (isinstance(alpha, str) and alpha == "optimize"):
            if isinstance(alpha, bool) or not isinstance(alpha, (int, float)) or not 0 < alpha < 1:
                raise ConfigError(
                    f"{path}[{i}].alpha must lie in (0, 1) or be 'optimize', got {alpha!r}"
                )
            alpha = float(alpha)
        else:
            alpha = None
        _reject_unknown(entry, f"{path}[{i}]")
        specs.append(DetectorSpec(kind=kind, p=p, alpha=alpha))
    labels = [s.label for s in specs]
    if len(set(labels)) != len(labels):
        raise ConfigError(f"{path} entries must be distinct, got {labels}")
    return tuple(specs)


def _parse_scenario(raw, path: str) -> ScenarioConfig:
    data = dict(_expect_mapping(raw, path))
    base = ScenarioConfig()
    link_raw = data.pop("link_variances", None)
    if link_raw is not None:
        if (
            not isinstance(link_raw, (list, tuple))
            or len(link_raw) != 3
            or any(isinstance(v, bool) or not isinstance(v, (int, float)) or v <= 0 for v in link_raw)
        ):
            raise ConfigError(f"{path}.link_variances must be three positive numbers")
        link = tuple(float(v) for v in link_raw)
    else:
        link = None
    noise_var = data.pop("noise_var_w", None)
    if noise_var is not None:
        if isinstance(noise_var, bool) or not isinstance(noise_var, (int, float)) or noise_var <= 0:
            raise ConfigError(f"{path}.noise_var_w must be positive, got {noise_var!r}")
        noise_var = float(noise_var)
    cfg = ScenarioConfig(
        p_s_dbm=_take(data, "p_s_dbm", path, float, base.p_s_dbm),
        n_samples=_take(data, "n_samples", path, int, base.n_samples),
        m_antennas=_take(data, "m_antennas", path, int, base.m_antennas),
        xi=_take(data, "xi", path, float, base.xi),
        epsilon=_take(data, "epsilon", path, float, base.epsilon),
        dic=_take(data, "dic", path, bool, base.dic),
        signal_model=_take(data, "signal_model", path, str, base.signal_model),
        fading=_take(data, "fading", path, str, base.fading),
        rician_k=_take(data, "rician_k", path, float, base.rician_k),
        prior_h0=_take(data, "prior_h0", path, float, base.prior_h0),
        prior_h1=_take(data, "prior_h1", path, float, base.prior_h1),
        noise_family=_take(data, "noise_family", path, str, base.noise_family),
        noise_q=_take(data, "noise_q", path, float, base.noise_q),
        apply_pathloss=_take(data, "apply_pathloss", path, bool, base.apply_pathloss),
        noise_var_w=noise_var,
        link_variances=link,
    )
    _reject_unknown(data, path)
    return cfg


def _parse_geometry(raw, path: str) -> GeometryConfig:
    data = dict(_expect_mapping(raw, path))
    base = GeometryConfig()
    try:
        geom = GeometryConfig(
            d_sr_km=_take(data, "d_sr_m", path, float, base.d_sr_km * 1000.0) / 1000.0,
            d_st_km=_take(data, "d_st_m", path, float, base.d_st_km * 1000.0) / 1000.0,
            d_tr_km=_take(data, "d_tr_m", path, float, base.d_tr_km * 1000.0) / 1000.0,
            freq_mhz=_take(data, "freq_mhz", path, float, base.freq_mhz),
            bandwidth_hz=_take(data, "bandwidth_hz", path, float, base.bandwidth_hz),
            noise_density_dbm_hz=_take(
                data, "noise_density_dbm_hz", path, float, base.noise_density_dbm_hz
            ),
            gain_source_db=_take(data, "gain_source_db", path, float, base.gain_source_db),
            gain_reader_db=_take(data, "gain_reader_db", path, float, base.gain_reader_db),
            gain_tag_db=_take(data, "gain_tag_db", path, float, base.gain_tag_db),
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    _reject_unknown(data, path)
    return geom


def parse_config(data: dict) -> ExperimentConfig:
    """Build and validate an ExperimentConfig from a parsed mapping."""
    data = dict(_expect_mapping(data, "config"))
    base = default_config()
    experiment = _take(data, "experiment", "config", str, base.experiment)
    if experiment not in EXPERIMENTS:
        raise ConfigError(
            f"experiment must be one of {sorted(EXPERIMENTS)}, got {experiment!r}"
        )
    seed = _take(data, "seed", "config", int, base.seed)
    trials = _take(data, "trials", "config", int, base.trials)
    if trials < 1:
        raise ConfigError(f"trials must be positive, got {trials}")
    target_pf = _take(data, "target_pf", "config", float, base.target_pf)
    if not 0.0 < target_pf < 1.0:
        raise ConfigError(f"target_pf must lie in (0, 1), got {target_pf}")
    channel_mode = _take(data, "channel_mode", "config", str, base.channel_mode)
    if channel_mode not in analysis.CHANNEL_MODES:
        raise ConfigError(
            f"channel_mode must be one of {analysis.CHANNEL_MODES}, got {channel_mode!r}"
        )
    threshold_mode = data.pop("threshold_mode", None)
    if threshold_mode is not None and threshold_mode not in analysis.THRESHOLD_MODES:
        raise ConfigError(
            f"threshold_mode must be one of {analysis.THRESHOLD_MODES}, got {threshold_mode!r}"
        )
    output = _take(data, "output", "config", str, base.output)
    sweep_raw = data.pop("sweep", None)
    if sweep_raw is not None:
        if not isinstance(sweep_raw, list) or not sweep_raw:
            raise ConfigError("sweep must be a non-empty list of numbers")
        for v in sweep_raw:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigError(f"sweep values must be numbers, got {v!r}")
        sweep = tuple(float(v) for v in sweep_raw)
    else:
        sweep = None
    cfg = ExperimentConfig(
        experiment=experiment,
        seed=seed,
        trials=trials,
        target_pf=target_pf,
        channel_mode=channel_mode,
        threshold_mode=threshold_mode,
        output=output,
        sweep=sweep,
        detectors=_parse_detectors(data.pop("detectors", None), "detectors"),
        scenario=_parse_scenario(data.pop("scenario", None), "scenario"),
        geometry=_parse_geometry(data.pop("geometry", None), "geometry"),
    )
    _reject_unknown(data, "config")
    # Cross-field checks: build the scenario once so field errors surface now.
    try:
        build_scenario(cfg)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"scenario: {exc}") from exc
    if cfg.experiment == "pd_vs_q" and cfg.scenario.noise_family != "mcleish":
        raise ConfigError("scenario.noise_family must be 'mcleish' for the pd_vs_q experiment")
    if cfg.experiment == "ber_vs_antennas" and cfg.sweep is not None:
        if any(v != int(v) or v < 1 for v in cfg.sweep):
            raise ConfigError("sweep values must be positive integers for ber_vs_antennas")
    return cfg


def load_config(path: str | Path | None) -> ExperimentConfig:
    """Load a YAML config file; None or an empty file yields the defaults."""
    if path is None:
        return parse_config({})
    text = Path(path).read_text()
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML: {exc}") from exc
    return parse_config(data if data is not None else {})


def serialize_config(cfg: ExperimentConfig) -> dict:
    """Mapping representation that ``parse_config`` round-trips exactly."""
    scenario = {
        "p_s_dbm": cfg.scenario.p_s_dbm,
        "n_samples": cfg.scenario.n_samples,
        "m_antennas": cfg.scenario.m_antennas,
        "xi": cfg.scenario.xi,
        "epsilon": cfg.scenario.epsilon,
        "dic": cfg.scenario.dic,
        "signal_model": cfg.scenario.signal_model,
        "fading": cfg.scenario.fading,
        "rician_k": cfg.scenario.rician_k,
        "prior_h0": cfg.scenario.prior_h0,
        "prior_h1": cfg.scenario.prior_h1,
        "noise_family": cfg.scenario.noise_family,
        "noise_q": cfg.scenario.noise_q,
        "apply_pathloss": cfg.scenario.apply_pathloss,
    }
    if cfg.scenario.noise_var_w is not None:
        scenario["noise_var_w"] = cfg.scenario.noise_var_w
    if cfg.scenario.link_variances is not None:
        scenario["link_variances"] = list(cfg.scenario.link_variances)
    out = {
        "experiment": cfg.experiment,
        "seed": cfg.seed,
        "trials": cfg.trials,
        "target_pf": cfg.target_pf,
        "channel_mode": cfg.channel_mode,
        "output": cfg.output,
        "detectors": [
            {
                "kind": spec.kind,
                **({"p": spec.p} if spec.p is not None else {}),
                **({"alpha": spec.alpha} if spec.alpha is not None else {}),
            }
            for spec in cfg.detectors
        ],
        "scenario": scenario,
        "geometry": {
            "d_sr_m": cfg.geometry.d_sr_km * 1000.0,
            "d_st_m": cfg.geometry.d_st_km * 1000.0,
            "d_tr_m": cfg.geometry.d_tr_km * 1000.0,
            "freq_mhz": cfg.geometry.freq_mhz,
            "bandwidth_hz": cfg.geometry.bandwidth_hz,
            "noise_density_dbm_hz": cfg.geometry.noise_density_dbm_hz,
            "gain_source_db": cfg.geometry.gain_source_db,
            "gain_reader_db": cfg.geometry.gain_reader_db,
            "gain_tag_db": cfg.geometry.gain_tag_db,
        },
    }
    if cfg.threshold_mode is not None:
        out["threshold_mode"] = cfg.threshold_mode
    if cfg.sweep is not None:
        out["sweep"] = list(cfg.sweep)
    return out


def build_scenario(cfg: ExperimentConfig) -> ScenarioParams:
    """Resolve config sections into simulation-ready scenario parameters."""
    sc = cfg.scenario
    budget = build_link_budget(cfg.geometry)
    if not sc.apply_pathloss:
        link = sc.link_variances or (1.0, 1.0, 1.0)
        budget = LinkBudget(link[0], link[1], link[2], budget.noise_var_w)
    elif sc.link_variances is not None:
        link = sc.link_variances
        budget = LinkBudget(link[0], link[1], link[2], budget.noise_var_w)
    noise_var = sc.noise_var_w if sc.noise_var_w is not None else budget.noise_var_w
    budget = replace(budget, noise_var_w=noise_var)
    noise = NoiseModel(family=sc.noise_family, variance_w=noise_var, q=sc.noise_q)
    return ScenarioParams(
        p_s_w=dbm_to_watts(sc.p_s_dbm),
        budget=budget,
        noise=noise,
        n_samples=sc.n_samples,
        m_antennas=sc.m_antennas,
        xi=sc.xi,
        epsilon=sc.epsilon,
        dic=sc.dic,
        signal_model=sc.signal_model,
        fading=sc.fading,
        rician_k=sc.rician_k,
        prior_h0=sc.prior_h0,
        prior_h1=sc.prior_h1,
    )


# ---------------------------------------------------------------------------
# Experiment execution
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ResultRow:
    sweep: float
    detector: str
    metric: str
    estimate: float
    ci_lo: float | None = None
    ci_hi: float | None = None
    closed_form: float | None = None
    error: str = ""


def _fmt(value: float | None) -> str:
    if value is None:
        return ""
    if isinstance(value, float) and math.isnan(value):
        return "nan"
    return f"{value:.10g}"


def _point_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence(entropy=seed, spawn_key=(index,)).generate_state(1)[0])


def _apply_point(cfg: ExperimentConfig, axis: str, value: float):
    """Scenario/target adjusted to one sweep point; returns (params, target_pf)."""
    sc = cfg.scenario
    if axis == "p_s_dbm":
        sc = replace(sc, p_s_dbm=value)
    elif axis == "xi":
        sc = replace(sc, xi=value)
    elif axis == "q":
        sc = replace(sc, noise_q=value)
    elif axis == "m_antennas":
        sc = replace(sc, m_antennas=int(value))
    target_pf = value if axis == "target_pf" else cfg.target_pf
    params = build_scenario(replace(cfg, scenario=sc))
    return params, target_pf


def _closed_form_pd(params, det_cfg, noise, target_pf) -> float:
    stats = average_signal_stats(params, params.budget)
    resolved = detectors.resolve_parameters(det_cfg, stats, noise, target_pf)
    return detectors.analytic_pd(detectors.detector_moments(resolved, stats, noise), target_pf)


def _run_point(cfg: ExperimentConfig, index: int, value: float) -> list[ResultRow]:
    axis, _ = EXPERIMENTS[cfg.experiment]
    params, target_pf = _apply_point(cfg, axis, value)
    seed = _point_seed(cfg.seed, index)
    rows: list[ResultRow] = []

    for spec in cfg.detectors:
        det_cfg = spec.to_config()
        label = spec.label
        if cfg.experiment == "roc":
            summary, scores = analysis.run_trials(
                params,
                det_cfg,
                cfg.trials,
                seed,
                target_pf=target_pf,
                channel_mode=cfg.channel_mode,
                threshold_mode=cfg.threshold_mode,
                collect_scores=True,
            )
            roc = analysis.empirical_roc(scores.scores_h0, scores.scores_h1)
            stats = average_signal_stats(params, params.budget)
            resolved = detectors.resolve_parameters(det_cfg, stats, params.noise, target_pf)
            moments = detectors.detector_moments(resolved, stats, params.noise)
            n1 = scores.scores_h1.size
            for pf, pd in zip(roc.pf, roc.pd):
                lo, hi = analysis.wilson_interval(int(round(pd * n1)), n1)
                rows.append(
                    ResultRow(
                        sweep=float(pf),
                        detector=label,
                        metric="pd",
                        estimate=float(pd),
                        ci_lo=lo,
                        ci_hi=hi,
                        closed_form=detectors.analytic_pd(moments, float(pf))
                        if 0.0 < pf < 1.0
                        else None,
                    )
                )
            continue

        if cfg.experiment == "popt_vs_pf":
            stats = average_signal_stats(params, params.budget)
            p_opt = detectors.optimize_p(stats, params.noise, target_pf)
            rows.append(ResultRow(sweep=value, detector=label, metric="p_opt", estimate=p_opt))
            continue

        if cfg.experiment == "weights_vs_pf":
            stats = average_signal_stats(params, params.budget)
            weights = detectors.optimize_weights(
                detectors.jced_moments(stats, params.noise), target_pf
            )
            rows.append(
                ResultRow(sweep=value, detector=label, metric="alpha", estimate=weights.alpha)
            )
            rows.append(
                ResultRow(sweep=value, detector=label, metric="beta", estimate=weights.beta)
            )
            continue

        if cfg.experiment == "auc_vs_ps":
            summary, scores = analysis.run_trials(
                params,
                det_cfg,
                cfg.trials,
                seed,
                target_pf=target_pf,
                channel_mode=cfg.channel_mode,
                threshold_mode=cfg.threshold_mode,
                collect_scores=True,
            )
            roc = analysis.empirical_roc(scores.scores_h0, scores.scores_h1)
            stats = average_signal_stats(params, params.budget)
            resolved = detectors.resolve_parameters(det_cfg, stats, params.noise, target_pf)
            moments = detectors.detector_moments(resolved, stats, params.noise)
            rows.append(
                ResultRow(
                    sweep=value,
                    detector=label,
                    metric="auc",
                    estimate=analysis.auc_trapezoid(roc),
                    closed_form=analysis.auc_closed_form(analysis.auc_inputs(moments)),
                )
            )
            continue

        summary = analysis.run_trials(
            params,
            det_cfg,
            cfg.trials,
            seed,
            target_pf=target_pf,
            channel_mode=cfg.channel_mode,
            threshold_mode=cfg.threshold_mode,
        )
        closed_pd = _closed_form_pd(params, det_cfg, params.noise, target_pf)
        if cfg.experiment.startswith("ber"):
            closed = analysis.ber(target_pf, closed_pd, params.prior_h0, params.prior_h1)
            rows.append(
                ResultRow(
                    sweep=value,
                    detector=label,
                    metric="ber",
                    estimate=summary.empirical_ber,
                    ci_lo=summary.ber_ci[0],
                    ci_hi=summary.ber_ci[1],
                    closed_form=closed,
                )
            )
        else:
            rows.append(
                ResultRow(
                    sweep=value,
                    detector=label,
                    metric="pd",
                    estimate=summary.empirical_pd,
                    ci_lo=summary.pd_ci[0],
                    ci_hi=summary.pd_ci[1],
                    closed_form=closed_pd,
                )
            )
            rows.append(
                ResultRow(
                    sweep=value,
                    detector=label,
                    metric="pf",
                    estimate=summary.empirical_pf,
                    ci_lo=summary.pf_ci[0],
                    ci_hi=summary.pf_ci[1],
                    closed_form=target_pf,
                )
            )
    return rows


def sweep_values(cfg: ExperimentConfig) -> list[float]:
    axis, default = EXPERIMENTS[cfg.experiment]
    if cfg.experiment == "roc":
        return [cfg.scenario.p_s_dbm]  # single point; rows carry the staircase
    values = list(cfg.sweep) if cfg.sweep is not None else list(default)
    return values


def run_experiment(
    cfg: ExperimentConfig, out_dir: str | Path, jobs: int = 1, gnuplot: bool = False
) -> tuple[Path, int]:
    """Execute all sweep points and write the CSV; returns (path, error count)."""
    if jobs < 1:
        raise ValueError(f"jobs must be positive, got {jobs}")
    values = sweep_values(cfg)
    results: list[list[ResultRow]] = [[] for _ in values]
    errors = 0

    def work(item):
        index, value = item
        try:
            return index, _run_point(cfg, index, value)
        except Exception as exc:  # noqa: BLE001 - reported as an error row
            return index, [
                ResultRow(
                    sweep=value,
                    detector="*",
                    metric="error",
                    estimate=math.nan,
                    error=f"{type(exc).__name__}: {exc}",
                )
            ]

    items = list(enumerate(values))
    if jobs == 1:
        completed = map(work, items)
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            completed = list(pool.map(work, items))
    for index, rows in completed:
        results[index] = rows
        errors += sum(1 for row in rows if row.error)

    all_rows = [row for rows in results for row in rows]
    all_rows.sort(key=lambda r: (r.sweep, r.detector, r.metric))

    out_path = Path(out_dir)
    out_path.mkdir(parents=True, exist_ok=True)
    csv_path = out_path / f"{cfg.experiment}.csv"
    lines = [CSV_HEADER]
    for row in all_rows:
        lines.append(
            ",".join(
                [
                    _fmt(row.sweep),
                    row.detector,
                    row.metric,
                    _fmt(row.estimate),
                    _fmt(row.ci_lo),
                    _fmt(row.ci_hi),
                    _fmt(row.closed_form),
                    row.error.replace(",", ";"),
                ]
            )
        )
    csv_path.write_text("\n".join(lines) + "\n")
    if gnuplot:
        _write_gnuplot(cfg, out_path)
    return csv_path, errors


def _write_gnuplot(cfg: ExperimentConfig, out_dir: Path) -> Path:
    metric = {
        "roc": "pd",
        "pd_vs_ps": "pd",
        "pd_vs_q": "pd",
        "ber_vs_ps": "ber",
        "ber_vs_xi": "ber",
        "ber_vs_antennas": "ber",
        "auc_vs_ps": "auc",
        "popt_vs_pf": "p_opt",
        "weights_vs_pf": "alpha",
    }[cfg.experiment]
    lines = [
        'set datafile separator ","',
        f'set title "{cfg.experiment}"',
        'set xlabel "sweep"',
        f'set ylabel "{metric}"',
        "set key outside",
        f'set output "{cfg.experiment}.png"',
        "set terminal pngcairo size 900,600",
    ]
    if metric == "ber":
        lines.append("set logscale y")
    plots = [
        f'"{cfg.experiment}.csv" using 1:((strcol(2) eq "{spec.label}" && strcol(3) eq "{metric}") ? $4 : NaN) '
        f'with linespoints title "{spec.label}"'
        for spec in cfg.detectors
    ]
    lines.append("plot \\\n    " + ", \\\n    ".join(plots))
    gp_path = out_dir / f"{cfg.experiment}.gp"
    gp_path.write_text("\n".join(lines) + "\n")
    return gp_path


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ambc-detect",
        description="Monte Carlo detection experiments for ambient backscatter readers",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment sweep and write CSV results")
    run.add_argument("--config", help="YAML config file (defaults used when omitted)")
    run.add_argument("--seed", type=int, help="override the config seed")
    run.add_argument("--jobs", type=int, default=1, help="worker threads for sweep points")
    run.add_argument("--out", help="output directory (overrides config 'output')")
    run.add_argument("--gnuplot", action="store_true", help="also emit a gnuplot script")

    val = sub.add_parser("validate", help="validate a config file")
    val.add_argument("--config", required=True)

    sub.add_parser("defaults", help="print the default config as YAML")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "defaults":
        print(yaml.safe_dump(serialize_config(default_config()), sort_keys=False), end="")
        return 0
    try:
        cfg = load_config(args.config)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.command == "validate":
        print("configuration OK")
        return 0
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    out_dir = args.out if args.out is not None else cfg.output
    try:
        csv_path, errors = run_experiment(cfg, out_dir, jobs=args.jobs, gnuplot=args.gnuplot)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {csv_path}")
    if errors:
        print(f"error: {errors} sweep point(s) failed; see the error column", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
