"""Seeded Monte Carlo experiment engine with percentile aggregation.

An experiment is a declarative spec: one parameter point, a 1-D sweep, or a
2-D (D/K, L/K) grid, each cell run for a number of independent trials.  Every
trial derives its own substreams for (basis, channels, source, noise) from
(seed, trial index), so results are bit-reproducible at any worker count and
per-method results never depend on which other methods were requested.
"""

import hashlib
import json
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .exceptions import ConfigurationError, InputError
from .metrics import db_to_linear, sin_angle
from .models import (
    RngStreams,
    add_noise,
    bandpass_pulse,
    default_train_size,
    gen_channels_in_subspace,
    gen_gaussian_subspace,
    gen_pca_subspace,
    gen_source,
    sigma_for_snr,
)
from .sigops import convolve_short
from .solvers import (
    solve_cross_conv,
    solve_linearized_ls,
    solve_oracle_ls,
    solve_subspace_cross_conv,
)

METHODS = ("cc", "sccc", "oracle", "ls")

SWEEP_PARAMS = ("d", "m", "l-over-k", "snr-db")

#: Floor applied before taking log10 of a percentile error in grid output.
LOG_FLOOR = 1e-16


@dataclass(frozen=True)
class Sweep:
    param: str
    values: tuple


@dataclass(frozen=True)
class Grid:
    d_over_k: tuple
    l_over_k: tuple


@dataclass(frozen=True)
class ExperimentSpec:
    filter_len: int
    n_channels: int
    subspace_dim: int
    l_over_k: float
    snr_db: float | None  # None means noiseless
    trials: int
    methods: tuple = ("cc", "sccc")
    basis: str = "gaussian"
    source: str = "gaussian"
    norm_profile: str = "flat"
    percentile: float = 95.0
    seed: int = 0
    sweep: Sweep | Grid | None = None

    def validate(self):
        if self.trials < 1:
            raise ConfigurationError(f"need trials >= 1, got {self.trials}")
        if not self.methods:
            raise ConfigurationError("at least one method must be requested")
        for m in self.methods:
            if m not in METHODS:
                raise ConfigurationError(f"unknown method {m!r}; expected subset of {METHODS}")
        if not 0 < self.percentile <= 100:
            raise ConfigurationError(f"percentile must be in (0, 100], got {self.percentile}")
        if isinstance(self.sweep, Sweep):
            if self.sweep.param not in SWEEP_PARAMS:
                raise ConfigurationError(
                    f"unknown sweep parameter {self.sweep.param!r}; expected one of {SWEEP_PARAMS}"
                )
            if not self.sweep.values:
                raise ConfigurationError("sweep needs a nonempty value list")
        if isinstance(self.sweep, Grid):
            if not self.sweep.d_over_k or not self.sweep.l_over_k:
                raise ConfigurationError("grid needs nonempty d-over-k and l-over-k lists")
        return self

    @property
    def shape(self):
        """One of "point", "sweep", "grid" (exactly one by construction)."""
        if self.sweep is None:
            return "point"
        return "sweep" if isinstance(self.sweep, Sweep) else "grid"


def spec_from_dict(raw):
    """Build a spec from the documented kebab-case JSON mapping."""
    data = dict(raw)
    snr = data.get("snr-db", "noiseless")
    snr_db = None if snr in (None, "noiseless") else float(snr)
    sweep = None
    raw_sweep = data.get("sweep")
    if raw_sweep is not None:
        if "param" in raw_sweep:
            sweep = Sweep(param=str(raw_sweep["param"]), values=tuple(raw_sweep["values"]))
        elif "d-over-k" in raw_sweep and "l-over-k" in raw_sweep:
            sweep = Grid(
                d_over_k=tuple(raw_sweep["d-over-k"]),
                l_over_k=tuple(raw_sweep["l-over-k"]),
            )
        else:
            raise ConfigurationError(
                "sweep must hold either {param, values} or both {d-over-k, l-over-k}"
            )
    try:
        spec = ExperimentSpec(
            filter_len=int(data["k"]),
            n_channels=int(data["m"]),
            subspace_dim=int(data["d"]),
            l_over_k=float(data.get("l-over-k", 20)),
            snr_db=snr_db,
            trials=int(data.get("trials", 200)),
            methods=tuple(data.get("methods", ["cc", "sccc"])),
            basis=str(data.get("basis", "gaussian")),
            source=str(data.get("source", "gaussian")),
            norm_profile=str(data.get("norm-profile", "flat")),
            percentile=float(data.get("percentile", 95)),
            seed=int(data.get("seed", 0)),
            sweep=sweep,
        )
    except KeyError as missing:
        raise ConfigurationError(f"spec is missing required key {missing}") from None
    return spec.validate()


def spec_to_dict(spec):
    """Inverse of spec_from_dict (canonical kebab-case keys)."""
    out = {
        "k": spec.filter_len,
        "m": spec.n_channels,
        "d": spec.subspace_dim,
        "l-over-k": spec.l_over_k,
        "snr-db": "noiseless" if spec.snr_db is None else spec.snr_db,
        "trials": spec.trials,
        "methods": list(spec.methods),
        "basis": spec.basis,
        "source": spec.source,
        "norm-profile": spec.norm_profile,
        "percentile": spec.percentile,
        "seed": spec.seed,
    }
    if isinstance(spec.sweep, Sweep):
        out["sweep"] = {"param": spec.sweep.param, "values": list(spec.sweep.values)}
    elif isinstance(spec.sweep, Grid):
        out["sweep"] = {
            "d-over-k": list(spec.sweep.d_over_k),
            "l-over-k": list(spec.sweep.l_over_k),
        }
    return out


def spec_hash(spec):
    """Stable short digest of the resolved spec, recorded for provenance."""
    blob = json.dumps(spec_to_dict(spec), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _point_spec(spec):
    """The spec with any sweep stripped, used for one cell's trials."""
    return replace(spec, sweep=None)


def _apply_sweep_value(spec, param, value):
    if param == "d":
        return replace(spec, subspace_dim=int(value))
    if param == "m":
        return replace(spec, n_channels=int(value))
    if param == "l-over-k":
        return replace(spec, l_over_k=float(value))
    if param == "snr-db":
        return replace(spec, snr_db=None if value == "noiseless" else float(value))
    raise ConfigurationError(f"unknown sweep parameter {param!r}")


def run_trial(spec, trial_index):
    """Generate one instance and run every requested method on the same data.

    Returns ({method: sin-angle error}, {method: degenerate flag}).
    """
    K = spec.filter_len
    M = spec.n_channels
    D = spec.subspace_dim
    L = int(round(spec.l_over_k * K))
    streams = RngStreams(spec.seed)

    if spec.basis == "gaussian":
        model = gen_gaussian_subspace(K, D, M, streams.stream("basis", trial_index))
    elif spec.basis == "pca":
        model = gen_pca_subspace(
            bandpass_pulse, K, D, default_train_size(D),
            streams.stream("basis", trial_index), n_channels=M,
        )
    else:
        raise ConfigurationError(f"unknown basis kind {spec.basis!r}")

    u, channels = gen_channels_in_subspace(
        model, streams.stream("channels", trial_index), spec.norm_profile
    )
    x = gen_source(spec.source, L, 1.0, streams.stream("source", trial_index))
    if spec.snr_db is None:
        noise_var = 0.0
    else:
        noise_var = sigma_for_snr(db_to_linear(spec.snr_db), K, L, M, x, u)
    noise_stream = streams.stream("noise", trial_index)
    sigma_w = np.sqrt(noise_var)
    ys = [add_noise(convolve_short(x, channels.filters[m]), sigma_w, noise_stream)
          for m in range(M)]

    truth = channels.stacked
    errors = {}
    degenerate = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)  # sweeps probe L < 3K on purpose
        for method in spec.methods:
            if method == "cc":
                est = solve_cross_conv(ys, K)
            elif method == "sccc":
                est = solve_subspace_cross_conv(ys, model, noise_var)
            elif method == "oracle":
                est = solve_oracle_ls(ys, x, model)
            elif method == "ls":
                est = solve_linearized_ls(ys, model)
            else:
                raise ConfigurationError(f"unknown method {method!r}")
            errors[method] = sin_angle(est.h_hat, truth)
            degenerate[method] = bool(est.degenerate)
    return errors, degenerate


def aggregate_percentile(errors, p):
    """Nearest-rank percentile: sorted ascending, value at index ceil(p/100 * n)."""
    values = sorted(errors)
    if not values:
        raise InputError("cannot take a percentile of an empty list")
    if not 0 < p <= 100:
        raise InputError(f"percentile must be in (0, 100], got {p}")
    rank = int(np.ceil(p / 100.0 * len(values)))
    return float(values[max(rank, 1) - 1])


@dataclass(frozen=True)
class PointResult:
    """Per-trial errors of one parameter point, trial-indexed."""

    spec: ExperimentSpec
    errors: dict  # method -> list[float], index = trial
    degenerate: dict  # method -> list[bool]

    def percentile(self, method, p=None):
        return aggregate_percentile(self.errors[method], p or self.spec.percentile)

    def median(self, method):
        return float(np.median(self.errors[method]))

    def mean(self, method):
        return float(np.mean(self.errors[method]))

    def degenerate_count(self, method):
        return int(sum(self.degenerate[method]))


def run_point(spec, threads=1):
    """Run all trials of a single parameter point (the unit of parallelism)."""
    spec = _point_spec(spec).validate()
    indices = range(spec.trials)
    if threads == 1:
        outcomes = [run_trial(spec, i) for i in indices]
    else:
        workers = threads if threads and threads > 0 else None
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(lambda i: run_trial(spec, i), indices))
    errors = {m: [out[0][m] for out in outcomes] for m in spec.methods}
    degenerate = {m: [out[1][m] for out in outcomes] for m in spec.methods}
    return PointResult(spec=spec, errors=errors, degenerate=degenerate)


@dataclass(frozen=True)
class SweepRow:
    sweep_param: str
    value: object
    method: str
    percentile_error: float
    median: float
    mean: float
    trials: int
    degenerate: int


@dataclass(frozen=True)
class PhaseRow:
    d_over_k: float
    l_over_k: float
    method: str
    log10_percentile_error: float


@dataclass(frozen=True)
class ExperimentResult:
    spec: ExperimentSpec
    provenance: str
    rows: tuple
    points: tuple = field(default=())


def _rows_for_point(point, sweep_param, value):
    rows = []
    for method in point.spec.methods:
        rows.append(
            SweepRow(
                sweep_param=sweep_param,
                value=value,
                method=method,
                percentile_error=point.percentile(method),
                median=point.median(method),
                mean=point.mean(method),
                trials=point.spec.trials,
                degenerate=point.degenerate_count(method),
            )
        )
    return rows


def run_sweep(spec, threads=1):
    """Run a 1-D sweep; one output row per (value, method)."""
    spec = spec.validate()
    if spec.shape != "sweep":
        raise ConfigurationError(f"expected a 1-D sweep spec, got shape {spec.shape!r}")
    rows = []
    points = []
    for value in spec.sweep.values:
        cell = _apply_sweep_value(_point_spec(spec), spec.sweep.param, value)
        point = run_point(cell, threads=threads)
        points.append(point)
        rows.extend(_rows_for_point(point, spec.sweep.param, value))
    return ExperimentResult(
        spec=spec, provenance=spec_hash(spec), rows=tuple(rows), points=tuple(points)
    )


def run_phase_grid(spec, threads=1):
    """Run a 2-D (D/K, L/K) grid; one output row per (cell, method)."""
    spec = spec.validate()
    if spec.shape != "grid":
        raise ConfigurationError(f"expected a 2-D grid spec, got shape {spec.shape!r}")
    K = spec.filter_len
    rows = []
    points = []
    for dk in spec.sweep.d_over_k:
        for lk in spec.sweep.l_over_k:
            cell = replace(
                _point_spec(spec),
                subspace_dim=max(1, int(round(dk * K))),
                l_over_k=float(lk),
            )
            point = run_point(cell, threads=threads)
            points.append(point)
            for method in spec.methods:
                err = max(point.percentile(method), LOG_FLOOR)
                rows.append(
                    PhaseRow(
                        d_over_k=float(dk),
                        l_over_k=float(lk),
                        method=method,
                        log10_percentile_error=float(np.log10(err)),
                    )
                )
    return ExperimentResult(
        spec=spec, provenance=spec_hash(spec), rows=tuple(rows), points=tuple(points)
    )


def run_point_result(spec, threads=1):
    """Run a single-point spec, wrapped as an ExperimentResult for output."""
    spec = spec.validate()
    if spec.shape != "point":
        raise ConfigurationError(f"expected a single-point spec, got shape {spec.shape!r}")
    point = run_point(spec, threads=threads)
    rows = _rows_for_point(point, "none", "")
    return ExperimentResult(
        spec=spec, provenance=spec_hash(spec), rows=tuple(rows), points=(point,)
    )


def _fmt(value):
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


def write_sweep_csv(result, path):
    """CSV rows `sweep_param,value,method,p95,median,mean,trials,degenerate`.

    The p95 column holds the spec's configured percentile (95 by default).
    """
    lines = ["sweep_param,value,method,p95,median,mean,trials,degenerate"]
    for r in result.rows:
        lines.append(
            f"{r.sweep_param},{_fmt(r.value)},{r.method},{_fmt(r.percentile_error)},"
            f"{_fmt(r.median)},{_fmt(r.mean)},{r.trials},{r.degenerate}"
        )
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def write_phase_csv(result, path):
    lines = ["d_over_k,l_over_k,method,log10_p95"]
    for r in result.rows:
        lines.append(
            f"{_fmt(r.d_over_k)},{_fmt(r.l_over_k)},{r.method},"
            f"{_fmt(r.log10_percentile_error)}"
        )
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def write_trials_csv(result, path):
    """Per-trial errors of a point run: `trial,method,error,degenerate`."""
    point = result.points[0]
    lines = ["trial,method,error,degenerate"]
    for method in point.spec.methods:
        for i, err in enumerate(point.errors[method]):
            lines.append(f"{i},{method},{_fmt(err)},{int(point.degenerate[method][i])}")
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def result_to_json(result):
    """JSON mirror with the resolved spec embedded for provenance."""
    payload = {
        "spec": spec_to_dict(result.spec),
        "provenance": result.provenance,
        "rows": [vars(r) for r in result.rows],
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"
