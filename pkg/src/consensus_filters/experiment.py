"""Configuration and seeded experiment drivers.

Seed fan-out: the master seed ``S`` feeds ``numpy.random.SeedSequence(S,
spawn_key=key)`` with

==========  ==========================
key         stream
==========  ==========================
(0,)        step-size calibration
(1,)        moment estimation
(2, k)      Gram sample set ``k``
(3, r)      convergence run ``r``
==========  ==========================

so every stream is reproducible on its own and independent of how many
workers run it.
"""

from __future__ import annotations

import csv
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .design import design_filter, objective_value, verify_kkt
from .dynamics import apply_filter, calibrate_alpha, consensus_error, evolve_window, iteration_matrix
from .graphs import DEFAULT_MAX_RETRIES, FixedGraph, model_from_dict, sample_connected
from .gram import approx_gram, gram_samples, prefix_means, sample_error_vector, spectral_norm_error
from .moments import MomentTable, estimate_expected_moments
from .switching import MAX_WINDOW

log = logging.getLogger(__name__)

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "load_config",
    "config_from_dict",
    "rng_stream",
    "log_checkpoints",
    "resolve_alpha",
    "resolve_moments",
    "run_moments",
    "run_gram_approx",
    "run_figure1",
    "run_design",
    "run_convergence",
    "sample_switching_realization",
    "simulate_paired",
]

ALPHA_STREAM, MOMENT_STREAM, GRAM_STREAM, CONVERGENCE_STREAM = range(4)

FIGURE1_HEADER = ["sample_set", "M", "spectral_norm_error"]
CONVERGENCE_HEADER = ["iteration", "filtered_error", "unfiltered_error", "run"]


class ConfigError(ValueError):
    """Invalid experiment configuration; the message names the field."""


@dataclass
class ExperimentConfig:
    model: object
    d: int
    p_sw: float
    moment_trials: int = 1000
    gram_samples: int = 1000
    sample_sets: int = 5
    seed: int = 0
    output_dir: str = "out"
    alpha: Optional[float] = None
    alpha_trials: Optional[int] = None
    max_retries: int = DEFAULT_MAX_RETRIES
    moments_path: Optional[str] = None
    windows: int = 4
    convergence_runs: int = 50
    threads: int = 1

    def __post_init__(self):
        if not 1 <= self.d <= MAX_WINDOW:
            raise ConfigError(f"d: must lie in [1, {MAX_WINDOW}], got {self.d}")
        if not 0.0 <= self.p_sw <= 1.0:
            raise ConfigError(f"p_sw: must lie in [0, 1], got {self.p_sw}")
        for name in ("moment_trials", "gram_samples", "sample_sets", "max_retries",
                     "windows", "convergence_runs", "threads"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name}: must be >= 1, got {getattr(self, name)}")
        if self.alpha_trials is not None and self.alpha_trials < 1:
            raise ConfigError(f"alpha_trials: must be >= 1, got {self.alpha_trials}")
        if self.alpha is not None and not self.alpha > 0:
            raise ConfigError(f"alpha: must be positive, got {self.alpha}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed: must be an unsigned 64-bit integer, got {self.seed}")


_INT_FIELDS = ("d", "moment_trials", "gram_samples", "sample_sets", "seed",
               "alpha_trials", "max_retries", "windows", "convergence_runs", "threads")
_FLOAT_FIELDS = ("p_sw", "alpha")
_STR_FIELDS = ("output_dir", "moments_path")
_REQUIRED = ("model", "d", "p_sw")


def config_from_dict(raw):
    if not isinstance(raw, dict):
        raise ConfigError("config: top level must be a JSON object")
    known = set(_INT_FIELDS) | set(_FLOAT_FIELDS) | set(_STR_FIELDS) | {"model"}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(f"{unknown[0]}: unknown config key")
    for name in _REQUIRED:
        if name not in raw:
            raise ConfigError(f"{name}: missing required field")
    kwargs = {}
    for name, val in raw.items():
        if name == "model":
            continue
        if val is None:
            kwargs[name] = None
        elif name in _INT_FIELDS:
            if isinstance(val, bool) or not isinstance(val, int):
                raise ConfigError(f"{name}: expected an integer, got {val!r}")
            kwargs[name] = val
        elif name in _FLOAT_FIELDS:
            if isinstance(val, bool) or not isinstance(val, (int, float)):
                raise ConfigError(f"{name}: expected a number, got {val!r}")
            kwargs[name] = float(val)
        else:
            if not isinstance(val, str):
                raise ConfigError(f"{name}: expected a string, got {val!r}")
            kwargs[name] = val
    if not isinstance(raw["model"], dict):
        raise ConfigError("model: expected an object")
    try:
        model = model_from_dict(raw["model"])
    except (ValueError, TypeError) as exc:
        msg = str(exc)
        raise ConfigError(msg if msg.startswith("model") else f"model: {msg}") from None
    try:
        return ExperimentConfig(model=model, **kwargs)
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from None


def load_config(path):
    """Parse and validate a JSON experiment config.

    Unset fields take their defaults (``moment_trials=1000``,
    ``gram_samples=1000``, ``sample_sets=5``).  Errors are raised as
    :class:`ConfigError` with the offending field path leading the message.
    """
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: invalid JSON ({exc})") from None
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path} ({exc.strerror})") from None
    return config_from_dict(raw)


def rng_stream(seed, *key):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def log_checkpoints(M, per_decade=10):
    """Sample counts ``round(10**(k / per_decade))`` up to ``M``, always
    ending at ``M``."""
    top = int(np.floor(np.log10(M) * per_decade + 1e-9))
    pts = np.unique(np.round(10.0 ** (np.arange(top + 1) / per_decade)).astype(int))
    pts = pts[pts <= M]
    if pts[-1] != M:
        pts = np.append(pts, M)
    return pts


def _map(fn, items, threads):
    if threads <= 1:
        yield from map(fn, items)
        return
    # executor.map yields in submission order, keeping reductions index-ordered
    with ThreadPoolExecutor(max_workers=threads) as pool:
        yield from pool.map(fn, items)


def resolve_alpha(cfg):
    if cfg.alpha is not None:
        return cfg.alpha
    if cfg.model.alpha is not None:
        return cfg.model.alpha
    trials = 1 if isinstance(cfg.model, FixedGraph) else cfg.alpha_trials or cfg.moment_trials
    alpha = calibrate_alpha(cfg.model, trials, rng_stream(cfg.seed, ALPHA_STREAM),
                            cfg.max_retries)
    log.info("calibrated alpha=%.6g from %d draws", alpha, trials)
    return alpha


def resolve_moments(cfg, alpha=None):
    """Moment table of order ``2 d``: loaded from ``moments_path`` if set,
    otherwise estimated on the moment stream.  Returns ``(table, alpha)``."""
    order = 2 * cfg.d
    if cfg.moments_path:
        table = MomentTable.load(cfg.moments_path)
        if table.order < order:
            raise ConfigError(
                f"moments_path: table order {table.order} < required {order}")
        return table, table.meta.get("alpha", alpha)
    if alpha is None:
        alpha = resolve_alpha(cfg)
    if isinstance(cfg.model, FixedGraph):
        trials = 1
    else:
        trials = cfg.moment_trials
    table = estimate_expected_moments(
        cfg.model, alpha, order, trials, rng_stream(cfg.seed, MOMENT_STREAM),
        cfg.max_retries, seed=cfg.seed)
    return table, alpha


def _out_dir(cfg):
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def run_moments(cfg):
    table, _ = resolve_moments(cfg)
    table.save(_out_dir(cfg) / "moments.json")
    return table


def run_gram_approx(cfg):
    table, alpha = resolve_moments(cfg)
    qhat = approx_gram(cfg.d, cfg.p_sw, table)
    qhat.to_csv(_out_dir(cfg) / "qhat.csv")
    return qhat


def error_curve(qhat, samples):
    """``||Qhat - mean of first M samples||_2`` for every ``M``."""
    means = prefix_means(samples)
    return np.array([spectral_norm_error(qhat, m) for m in means])


def run_figure1(cfg):
    """Estimation error of the approximate Gram matrix versus sample count.

    One approximation is built per config; each of ``cfg.sample_sets``
    independent sets contributes a curve of spectral-norm errors at
    logarithmically spaced ``M``.  Rows are written to ``figure1.csv`` as each
    set finishes.

    Returns
    -------
    dict
        ``alpha``, ``moments``, ``qhat``, ``checkpoints``, ``curves`` (full
        per-``M`` errors, shape ``(sample_sets, gram_samples)``) and ``rows``.
    """
    out = _out_dir(cfg)
    table, alpha = resolve_moments(cfg)
    table.save(out / "moments.json")
    qhat = approx_gram(cfg.d, cfg.p_sw, table)
    qhat.to_csv(out / "qhat.csv")
    checkpoints = log_checkpoints(cfg.gram_samples)

    def one_set(k):
        samples = gram_samples(cfg.model, cfg.d, cfg.p_sw, cfg.gram_samples,
                               rng_stream(cfg.seed, GRAM_STREAM, k), alpha=alpha,
                               max_retries=cfg.max_retries)
        return error_curve(qhat, samples)

    curves, rows = [], []
    with open(out / "figure1.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FIGURE1_HEADER)
        for k, curve in enumerate(_map(one_set, range(cfg.sample_sets), cfg.threads)):
            for M in checkpoints:
                row = (k, int(M), float(curve[M - 1]))
                rows.append(row)
                w.writerow([row[0], row[1], repr(row[2])])
            fh.flush()
            curves.append(curve)
    return {"alpha": alpha, "moments": table, "qhat": qhat,
            "checkpoints": checkpoints, "curves": np.array(curves), "rows": rows}


def run_design(cfg):
    out = _out_dir(cfg)
    table, alpha = resolve_moments(cfg)
    qhat = approx_gram(cfg.d, cfg.p_sw, table)
    filt = design_filter(qhat)
    filt.to_json(qhat, out / "filter.json")
    report = {
        "alpha": alpha,
        "objective": objective_value(qhat, filt),
        "kkt_residual": verify_kkt(qhat, filt),
        "ridge": filt.ridge,
    }
    return filt, report


def sample_switching_realization(spec, alpha, steps, p_sw, rng,
                                 max_retries=DEFAULT_MAX_RETRIES):
    """Iteration matrices for ``steps`` consecutive steps of a switching
    network: a fresh network at step 1, then a fresh one with probability
    ``p_sw`` at each later step.  Unchanged steps share the same object."""
    if isinstance(spec, FixedGraph):
        W = iteration_matrix(spec.graph, alpha)
        return [W] * steps
    mats = []
    for n in range(steps):
        if n == 0 or rng.random() < p_sw:
            W = iteration_matrix(sample_connected(spec, rng, max_retries), alpha,
                                 check=False)
        mats.append(W)
    return mats


def simulate_paired(a, matrices, x0):
    """Consensus errors with and without periodic filtering.

    Both arms see the same ``matrices``; the filtered arm replaces its state
    by the filter output after every ``len(a) - 1`` steps.  Returns two arrays
    of length ``len(matrices) + 1`` (index 0 is the initial error).
    """
    a = np.asarray(getattr(a, "a", a), dtype=float)
    d = len(a) - 1
    if len(matrices) % d:
        raise ValueError("number of steps must be a multiple of the filter degree")
    x = np.asarray(x0, dtype=float)
    unfiltered = [consensus_error(x)]
    y = x
    for W in matrices:
        y = W.w @ y
        unfiltered.append(consensus_error(y))
    filtered = [consensus_error(x)]
    for start in range(0, len(matrices), d):
        traj = evolve_window(matrices[start:start + d], x)
        filtered.extend(consensus_error(s) for s in traj.states[1:-1])
        x = apply_filter(traj, a)
        filtered.append(consensus_error(x))
    return np.array(filtered), np.array(unfiltered)


def run_convergence(cfg, filt=None):
    """Paired filtered/unfiltered simulation over ``cfg.windows`` windows.

    Designs the filter from the config unless ``filt`` is given.  Writes
    ``convergence.csv`` and returns ``(rows, filtered, unfiltered)`` where the
    arrays have shape ``(runs, windows * d + 1)``.
    """
    out = _out_dir(cfg)
    if filt is None:
        filt, report = run_design(cfg)
        alpha = report["alpha"]
    else:
        alpha = resolve_alpha(cfg)
    steps = cfg.windows * cfg.d

    def one_run(r):
        rng = rng_stream(cfg.seed, CONVERGENCE_STREAM, r)
        x0 = sample_error_vector(cfg.model.n, rng)
        mats = sample_switching_realization(cfg.model, alpha, steps, cfg.p_sw, rng,
                                            cfg.max_retries)
        return simulate_paired(filt, mats, x0)

    results = list(_map(one_run, range(cfg.convergence_runs), cfg.threads))
    filtered = np.array([f for f, _ in results])
    unfiltered = np.array([u for _, u in results])
    rows = []
    with open(out / "convergence.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CONVERGENCE_HEADER)
        for r in range(cfg.convergence_runs):
            for it in range(steps + 1):
                row = (it, float(filtered[r, it]), float(unfiltered[r, it]), r)
                rows.append(row)
                w.writerow([it, repr(row[1]), repr(row[2]), r])
    return rows, filtered, unfiltered
