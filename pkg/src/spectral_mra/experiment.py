"""Monte Carlo sweeps over (sigma, M, method) producing CSV tables.

Random streams: each trial draws its signal from a seed derived from
``(seed, trial)`` (or from ``seed`` alone with ``fixed_signal``), and its
observations from ``(seed, trial, sigma index)``. Observation sets for
different M are prefixes of one stream, so the M sweep is paired.
"""

from __future__ import annotations

import csv
import io
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np

from .baselines import SYNC_MAX_ITERS, SYNC_TOL
from .invariants import InvariantAccumulator
from .pipeline import invert
from .reconstruct import evaluate
from .signal import relative_error
from .simulate import generate_gaussian_signal, generate_observations, known_shift_oracle

METHODS = ("spectral", "fm", "phase-sync-random", "phase-sync-spectral", "oracle")
CSV_COLUMNS = ("method", "sigma", "m", "trial", "rel_error", "iterations", "selected_gap",
               "time_estimate_s", "time_invert_s")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    N: int = 41
    M_grid: list = field(default_factory=lambda: [10_000])
    sigma_grid: list = field(default_factory=lambda: [1.0])
    trials: int = 50
    seed: int = 0
    methods: list = field(default_factory=lambda: ["spectral"])
    sync_max_iters: int = SYNC_MAX_ITERS
    sync_tol: float = SYNC_TOL
    enforce_symmetry: bool = True
    fixed_signal: bool = False

    def validate(self) -> "ExperimentConfig":
        if self.N < 2:
            raise ConfigError(f"n: must be >= 2, got {self.N}")
        if not self.M_grid or any(m < 1 for m in self.M_grid):
            raise ConfigError(f"m_grid: must be a nonempty list of positive integers, got {self.M_grid}")
        if not self.sigma_grid or any(not (s >= 0 and math.isfinite(s)) for s in self.sigma_grid):
            raise ConfigError(f"sigma_grid: must be a nonempty list of finite values >= 0, got {self.sigma_grid}")
        if self.trials < 1:
            raise ConfigError(f"trials: must be >= 1, got {self.trials}")
        if not self.methods:
            raise ConfigError("methods: must name at least one method")
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise ConfigError(f"methods: unknown {bad}; choose from {', '.join(METHODS)}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed: must be an unsigned 64-bit integer, got {self.seed}")
        if self.sync_max_iters < 1 or not self.sync_tol > 0:
            raise ConfigError("sync_max_iters must be >= 1 and sync_tol > 0")
        return self


_KEYS = {
    "n": "N", "m_grid": "M_grid", "m": "M_grid", "sigma_grid": "sigma_grid", "sigma": "sigma_grid",
    "trials": "trials", "seed": "seed", "methods": "methods", "sync_max_iters": "sync_max_iters",
    "sync_tol": "sync_tol", "enforce_symmetry": "enforce_symmetry", "fixed_signal": "fixed_signal",
}


def _as_int(key, text):
    try:
        v = float(text)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {text!r}") from None
    if not v.is_integer():
        raise ConfigError(f"{key}: expected an integer, got {text!r}")
    return int(v) if abs(v) < 2**53 else int(text)


def _as_bool(key, text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {text!r}")


def parse_config(text: str) -> ExperimentConfig:
    """Parse ``key = value`` lines (``#`` starts a comment; lists are comma separated)."""
    cfg = ExperimentConfig()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (p.strip() for p in line.split("=", 1))
        key = key.lower()
        if key not in _KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        items = [v.strip() for v in value.split(",") if v.strip()]
        attr = _KEYS[key]
        try:
            if attr == "M_grid":
                val = [_as_int(key, v) for v in items]
            elif attr == "sigma_grid":
                val = [float(v) for v in items]
            elif attr == "methods":
                val = items
            elif attr in ("N", "trials", "seed", "sync_max_iters"):
                val = _as_int(key, value)
            elif attr == "sync_tol":
                val = float(value)
            else:
                val = _as_bool(key, value)
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"line {lineno}: bad value for {key}: {value!r}") from None
        setattr(cfg, attr, val)
    return cfg.validate()


def format_config(cfg: ExperimentConfig) -> str:
    inv = {v: k for k, v in reversed(list(_KEYS.items()))}
    lines = []
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        text = ", ".join(str(x) for x in v) if isinstance(v, list) else str(v).lower() if isinstance(v, bool) else str(v)
        lines.append(f"{inv[f.name]} = {text}")
    return "\n".join(lines) + "\n"


def derive_seed(*parts) -> int:
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1, np.uint64)[0])


def _run_cell(cfg: ExperimentConfig, trial: int, si: int):
    """All M values and methods for one (trial, sigma) pair."""
    sigma = cfg.sigma_grid[si]
    x = generate_gaussian_signal(cfg.N, cfg.seed if cfg.fixed_signal else derive_seed(cfg.seed, 1, trial))
    obs_seed = derive_seed(cfg.seed, 2, trial, si)
    init_seed = derive_seed(cfg.seed, 3, trial, si)
    m_max = max(cfg.M_grid)
    obs = generate_observations(x, m_max, sigma, obs_seed)
    acc = InvariantAccumulator(cfg.N)
    t_est = 0.0
    done = 0
    rows = []
    for M in sorted(set(cfg.M_grid)):
        t0 = time.perf_counter()
        acc.add_batch(obs.observations[done:M])
        t_est += time.perf_counter() - t0
        done = M
        t0 = time.perf_counter()
        inv = acc.estimates(sigma)
        t_total = t_est + time.perf_counter() - t0
        for method in cfg.methods:
            row = {"method": method, "sigma": sigma, "m": M, "trial": trial,
                   "iterations": None, "selected_gap": None}
            if method == "oracle":
                t0 = time.perf_counter()
                sub = type(obs)(obs.observations[:M], sigma, obs.true_shifts[:M])
                xh = known_shift_oracle(sub)
                row["time_invert_s"] = time.perf_counter() - t0
                row["time_estimate_s"] = None
                row["rel_error"] = relative_error(x, xh)[0]
            else:
                res = evaluate(invert(inv, method, enforce_symmetry=cfg.enforce_symmetry,
                                      sync_max_iters=cfg.sync_max_iters, sync_tol=cfg.sync_tol,
                                      init_seed=init_seed), x)
                row["rel_error"] = res.rel_error
                row["iterations"] = res.diagnostics.get("iterations")
                row["selected_gap"] = res.diagnostics.get("selected_gap")
                row["time_estimate_s"] = t_total
                row["time_invert_s"] = res.diagnostics["time_invert_s"]
            rows.append(row)
    return rows


def _thread_count():
    raw = os.environ.get("MRA_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"MRA_THREADS must be an integer, got {raw!r}") from None
    return (os.cpu_count() or 1) if n <= 0 else n


def _sort_key(row):
    return (row["sigma"], row["m"], METHODS.index(row["method"]), row["trial"])


def run_experiment(cfg: ExperimentConfig, threads: int | None = None) -> list[dict]:
    """One row per (sigma, M, method, trial), sorted canonically."""
    cfg.validate()
    tasks = [(t, si) for si in range(len(cfg.sigma_grid)) for t in range(cfg.trials)]
    threads = _thread_count() if threads is None else threads
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            chunks = list(pool.map(lambda a: _run_cell(cfg, *a), tasks))
    else:
        chunks = [_run_cell(cfg, *a) for a in tasks]
    rows = [r for chunk in chunks for r in chunk]
    rows.sort(key=_sort_key)
    return rows


def _stats(vals):
    vals = [v for v in vals if v is not None]
    if not vals:
        return None, None
    a = np.asarray(vals, dtype=np.float64)
    return float(a.mean()), float(a.std(ddof=1)) if a.size > 1 else 0.0


def aggregate(rows: list[dict]) -> list[dict]:
    """Mean and sample standard deviation per (sigma, M, method), in canonical order."""
    groups = {}
    for r in rows:
        groups.setdefault((r["sigma"], r["m"], r["method"]), []).append(r)
    out = []
    for (sigma, m, method), grp in sorted(groups.items(), key=lambda kv: (kv[0][0], kv[0][1], METHODS.index(kv[0][2]))):
        mean_row = {"method": method, "sigma": sigma, "m": m, "trial": "mean"}
        std_row = {"method": method, "sigma": sigma, "m": m, "trial": "std"}
        for col in CSV_COLUMNS[4:]:
            mean_row[col], std_row[col] = _stats(r[col] for r in grp)
        out += [mean_row, std_row]
    return out


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def to_csv(rows: list[dict], include_aggregates: bool = True, timing: bool = True) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    all_rows = rows + (aggregate(rows) if include_aggregates else [])
    for r in all_rows:
        w.writerow(["" if (not timing and c.startswith("time_")) else _fmt(r.get(c)) for c in CSV_COLUMNS])
    return buf.getvalue()


def summary(rows: list[dict]) -> dict:
    """``{(method, sigma, m): mean rel_error}`` plus mean iterations where recorded."""
    out = {}
    for r in aggregate(rows):
        if r["trial"] == "mean":
            out[(r["method"], r["sigma"], r["m"])] = {"rel_error": r["rel_error"],
                                                      "iterations": r["iterations"]}
    return out
