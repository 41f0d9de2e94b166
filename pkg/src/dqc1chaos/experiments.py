"""Experiment runners. Each returns a :class:`~dqc1chaos.tables.ResultTable`.

Every random draw is addressed through ``RngStream(seed, index)`` so the data
rows depend only on the configuration, not on ``workers`` or scheduling.
"""

from __future__ import annotations

import datetime as _dt
import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .dqc1 import (
    ANALYTIC,
    Dqc1Config,
    dqc1_estimate,
    padding_correction,
    qubits_for,
    resource_scaling_study,
)
from .ensembles import EnsembleSpec, RngStream, sample
from .kickedtop import TopParams, floquet, interpolate_params
from .linalg import UnitaryMatrix, eigenphases
from .spectral import (
    cumulative_t_statistics,
    deduplicate_doublets,
    eigenphase_walk,
    form_factor_series,
)
from .tables import ConfigError, ResultTable, load_matrix

DEFAULT_J_GRID = list(range(10, 251, 10))

DEFAULTS: dict[str, dict] = {
    "ensemble-convergence": {
        "beta": 2, "dim": 600, "samples": 50, "delta_n_max": 30, "workers": 1,
    },
    "kicked-top-scan": {
        "regime": "regular", "j_list": DEFAULT_J_GRID, "delta_n": 30, "workers": 1,
    },
    "walk": {"j": 20},
    "transition": {
        "j_list": [50, 100, 200], "delta_n": 30, "eps_steps": 20, "workers": 1,
    },
    "dqc1-run": {
        "source": "cue", "dim": 256, "j": 20, "matrix": None, "n_max": 30,
        "shots": ANALYTIC, "epsilon": 1.0, "num_qubits": None, "workers": 1,
        "bias_correction": True,
    },
    "resource-scaling": {
        "sizes": [64, 256, 1024], "trials": 100, "constant_shots": 256,
        "shots_per_dim": 64, "delta_n": 16, "threshold_c": 3.0,
    },
}

REGIMES = {"regular": TopParams.regular, "chaotic": TopParams.chaotic}
SOURCES = ("cue", "coe", "cse", "poisson", "identity", "kicked-regular", "kicked-chaotic", "file")


@dataclass
class ExperimentConfig:
    experiment: str
    parameters: dict = field(default_factory=dict)
    master_seed: int = 0
    output_path: str | None = None
    output_format: str = "csv"

    def __post_init__(self):
        if self.experiment not in DEFAULTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; choose from {sorted(DEFAULTS)}")
        unknown = set(self.parameters) - set(DEFAULTS[self.experiment])
        if unknown:
            raise ConfigError(f"unknown parameters for {self.experiment}: {sorted(unknown)}")
        if self.output_format not in ("csv", "json"):
            raise ConfigError(f"output_format must be csv or json, got {self.output_format!r}")
        if not isinstance(self.master_seed, int) or not 0 <= self.master_seed < 2**64:
            raise ConfigError("seed must be an integer in [0, 2^64)")

    @property
    def resolved(self) -> dict:
        return {**DEFAULTS[self.experiment], **self.parameters}

    def echo(self) -> dict:
        return {"experiment": self.experiment, "master_seed": self.master_seed,
                "parameters": self.resolved}

    def config_hash(self) -> str:
        blob = json.dumps(self.echo(), sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def pmap(fn, items, workers: int = 1) -> list:
    """Order-preserving map, threaded when ``workers > 1``."""
    items = list(items)
    if workers <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(workers) as pool:
        return list(pool.map(fn, items))


def _metadata(config: ExperimentConfig, extra: dict | None = None) -> dict:
    meta = {
        "experiment": config.experiment,
        "master_seed": config.master_seed,
        "config": config.echo(),
        "config_hash": config.config_hash(),
        "version": __version__,
        "created": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }
    meta.update(extra or {})
    return meta


def _positive_int(p: dict, key: str, minimum: int = 1) -> int:
    v = p[key]
    if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < minimum:
        raise ConfigError(f"{key} must be an integer >= {minimum}, got {v!r}")
    return int(v)


def _spin_list(values) -> list:
    if not values:
        raise ConfigError("j_list must be non-empty")
    out = []
    for j in values:
        if float(j) * 2 != int(float(j) * 2) or float(j) < 0:
            raise ConfigError(f"invalid angular momentum {j!r}")
        out.append(int(j) if float(j).is_integer() else float(j))
    return out


def spectrum_for_statistics(u: UnitaryMatrix, beta: int):
    """Eigenphases, collapsed to one per Kramers doublet for beta=4."""
    spec = eigenphases(u)
    return deduplicate_doublets(spec) if beta == 4 else spec


def run_ensemble_convergence(config: ExperimentConfig) -> ResultTable:
    """t0/t1 against the window size over many ensemble samples."""
    p = config.resolved
    try:
        spec = EnsembleSpec(int(p["beta"]), int(p["dim"]))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    samples = _positive_int(p, "samples", 2)
    dn_max = _positive_int(p, "delta_n_max")

    def one(k):
        u = sample(spec, RngStream(config.master_seed, k))
        series = form_factor_series(spectrum_for_statistics(u, spec.beta), dn_max)
        return cumulative_t_statistics(series)

    stats = pmap(one, range(samples), _positive_int(p, "workers"))
    t0 = np.array([s[0] for s in stats])
    t1 = np.array([s[1] for s in stats])
    dn = np.arange(1, dn_max + 1)
    cols = ["delta_n", "t1_sample0", "t1_sample1", "t0_sample0", "t0_sample1",
            "t1_mean", "t1_std", "t1_var", "t0_mean", "t0_std", "t0_var", "bound"]
    data = np.column_stack([
        t1[0], t1[1], t0[0], t0[1],
        t1.mean(0), t1.std(0), t1.var(0), t0.mean(0), t0.std(0), t0.var(0),
        1 / np.sqrt(dn),
    ])
    rows = [[int(n)] + list(r) for n, r in zip(dn, data)]
    return ResultTable(cols, rows, _metadata(config, {"statistics_dim": spec.dim}))


def top_t_statistics(params: TopParams, delta_n: int) -> tuple[float, float, float, float]:
    """``(t0 at 1, t0 at delta_n, t1 at 1, t1 at delta_n)`` for one kicked top."""
    series = form_factor_series(eigenphases(floquet(params)), delta_n)
    t0, t1 = cumulative_t_statistics(series)
    return t0[0], t0[-1], t1[0], t1[-1]


def run_kicked_top_scan(config: ExperimentConfig) -> ResultTable:
    p = config.resolved
    if p["regime"] not in REGIMES:
        raise ConfigError(f"regime must be one of {sorted(REGIMES)}")
    make = REGIMES[p["regime"]]
    dn = _positive_int(p, "delta_n")
    js = _spin_list(p["j_list"])

    def one(j):
        params = make(j)
        return [j, params.dim, *top_t_statistics(params, dn)]

    rows = pmap(one, js, _positive_int(p, "workers"))
    cols = ["j", "N", "t0_dn1", f"t0_dn{dn}", "t1_dn1", f"t1_dn{dn}"]
    return ResultTable(cols, rows, _metadata(config, {"parameters_vector": list(make(js[0]).vector)}))


def run_walk(config: ExperimentConfig) -> ResultTable:
    p = config.resolved
    j = _spin_list([p["j"]])[0]
    paths = [eigenphase_walk(eigenphases(floquet(make(j)))) for make in REGIMES.values()]
    pts = np.hstack([w.points for w in paths])
    cols = ["step", "x_regular", "y_regular", "x_chaotic", "y_chaotic"]
    rows = [[i, *r] for i, r in enumerate(pts)]
    return ResultTable(cols, rows, _metadata(config, {"N": paths[0].steps}))


def run_transition(config: ExperimentConfig) -> ResultTable:
    p = config.resolved
    js = _spin_list(p["j_list"])
    dn = _positive_int(p, "delta_n")
    steps = _positive_int(p, "eps_steps")
    eps_grid = [k / steps for k in range(steps + 1)]

    def one(point):
        eps, j = point
        params = interpolate_params(TopParams.regular(j), TopParams.chaotic(j), eps)
        return top_t_statistics(params, dn)[1]

    grid = [(e, j) for e in eps_grid for j in js]
    vals = pmap(one, grid, _positive_int(p, "workers"))
    rows = [[eps_grid[i], *vals[i * len(js):(i + 1) * len(js)]] for i in range(len(eps_grid))]
    cols = ["eps"] + [f"t0_j{j}" for j in js]
    return ResultTable(cols, rows, _metadata(config))


def dqc1_source(p: dict, rng: RngStream) -> UnitaryMatrix:
    src = p["source"]
    if src not in SOURCES:
        raise ConfigError(f"source must be one of {SOURCES}")
    if src == "file":
        if not p.get("matrix"):
            raise ConfigError("source 'file' needs a matrix path")
        return load_matrix(p["matrix"])
    if src.startswith("kicked-"):
        j = _spin_list([p["j"]])[0]
        return floquet(REGIMES[src.split("-", 1)[1]](j))
    dim = _positive_int(p, "dim")
    if src == "identity":
        return UnitaryMatrix.identity(dim)
    beta = {"poisson": 0, "coe": 1, "cue": 2, "cse": 4}[src]
    if beta == 4:
        if dim % 2:
            raise ConfigError("cse source needs an even dim")
        dim //= 2
    try:
        return sample(EnsembleSpec(beta, dim), rng)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def run_dqc1(config: ExperimentConfig) -> ResultTable:
    """Simulated DQC1 signals for ``F^n``, ``n = 1..n_max``, with the exact reference."""
    p = config.resolved
    f = dqc1_source(p, RngStream(config.master_seed, 0))
    n_max = _positive_int(p, "n_max")
    shots = p["shots"]
    try:
        base = Dqc1Config(f.dim, 1, shots, float(p["epsilon"]), p["num_qubits"],
                          _positive_int(p, "workers"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    exact = form_factor_series(eigenphases(f), n_max).values / f.dim**2
    shot_rng = RngStream(config.master_seed, 1)
    rows = []
    for n in range(1, n_max + 1):
        cfg = Dqc1Config(f.dim, n, base.shots, base.epsilon, base.num_qubits, base.workers)
        est = dqc1_estimate(f, cfg, shot_rng.child(n))
        cor = padding_correction(est, f.dim, cfg.num_qubits, cfg.epsilon)
        t = cor.re**2 + cor.im**2
        if p["bias_correction"] and not cfg.analytic:
            t -= cor.std_error_re**2 + cor.std_error_im**2
        rows.append([n, est.re, est.im, est.std_error_re, est.std_error_im, t, exact[n - 1]])
    cols = ["n", "re", "im", "std_error_re", "std_error_im", "t_norm", "t_norm_exact"]
    meta = {"N": f.dim, "K": base.num_qubits, "workers": base.workers,
            "shots": base.shots}
    return ResultTable(cols, rows, _metadata(config, meta))


def run_resource_scaling(config: ExperimentConfig) -> ResultTable:
    p = config.resolved
    sizes = [int(s) for s in p["sizes"]]
    if not sizes or any(s < 2 for s in sizes):
        raise ConfigError("sizes must be integers >= 2")
    const = p["constant_shots"]
    per_dim = p["shots_per_dim"]
    schedules = {
        "constant": lambda n: const,
        "proportional": lambda n: per_dim * n,
    }
    rows_raw = resource_scaling_study(
        sizes, schedules, _positive_int(p, "trials"), RngStream(config.master_seed, 0),
        delta_n=_positive_int(p, "delta_n"), threshold_c=float(p["threshold_c"]),
    )
    ids = {name: i for i, name in enumerate(schedules)}
    rows = [[r.dim, ids[r.schedule], r.shots, r.trials, r.errors, r.error_rate, *r.ci]
            for r in rows_raw]
    cols = ["N", "schedule", "shots", "decisions", "errors", "error_rate", "ci_low", "ci_high"]
    meta = {"schedule_ids": ids, "K": {str(s): qubits_for(s) for s in sizes}}
    return ResultTable(cols, rows, _metadata(config, meta))


RUNNERS = {
    "ensemble-convergence": run_ensemble_convergence,
    "kicked-top-scan": run_kicked_top_scan,
    "walk": run_walk,
    "transition": run_transition,
    "dqc1-run": run_dqc1,
    "resource-scaling": run_resource_scaling,
}


def run_experiment(config: ExperimentConfig) -> ResultTable:
    return RUNNERS[config.experiment](config)
