"""Sweep orchestration, presets and result files.

A sweep runs every (algorithm, n, T, alpha, gamma, seed) combination of a
:class:`SweepConfig`, evaluates each recorded state and writes

* ``long.csv``: one row per recorded state of every run,
* ``agg.csv``: one row per cell with seed means, standard errors and bound values,
* ``manifest.json``: file hashes, the config echo and the library version.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .algorithms import Algo, AlgoConfig, run
from .core import BoundConstants, Dataset, MolError, make_neighboring_dataset
from .metrics import (ca_bound_rhs, estimate_constants, evaluate_trajectory, initial_gap,
                      opt_bound_rhs)
from .minnorm import DEFAULT_TOL
from .problems import (TOY_INITIALIZATIONS, LowerBoundSpec, ScQuadraticSpec, ToySpec,
                       make_lower_bound_example, make_sc_quadratic, make_toy_nonconvex,
                       sc_replacement)
from .simplex import uniform_weights
from .stability import (estimate_stability, gamma_cap, lower_bound_config, lower_bound_value,
                        stability_upper_value)

WORKERS_ENV = "MODO_WORKERS"
FORMATS = ("csv", "json")

SPEC_KINDS = {"sc_quadratic": ScQuadraticSpec, "toy": ToySpec, "lower_bound": LowerBoundSpec}

LONG_COLUMNS = ("run_id", "problem", "algo", "n", "T", "alpha", "gamma", "seed", "t",
                "r_opt", "r_pop", "r_gen", "e_ca", "ps_pop", "pop_source", "wall_ns")
KEY_COLUMNS = ("problem", "algo", "n", "T", "alpha", "gamma")
_FINAL = ("r_opt", "r_pop", "r_gen", "e_ca", "ps_pop")
_AVG = ("r_opt", "e_ca", "r_pop")
AGG_COLUMNS = (KEY_COLUMNS + ("num_seeds", "status", "reason")
               + tuple(f"final_{m}_{s}" for m in _FINAL for s in ("mean", "se"))
               + tuple(f"avg_{m}_{s}" for m in _AVG for s in ("mean", "se"))
               + ("ca_bound", "opt_bound", "stab_upper"))


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

def spec_from_dict(d: dict):
    """Build a problem spec from ``{"kind": ..., field: value, ...}``."""
    d = dict(d)
    kind = d.pop("kind", None)
    if kind not in SPEC_KINDS:
        raise ValueError(f"unknown problem kind {kind!r}")
    cls = SPEC_KINDS[kind]
    names = {f.name for f in dataclasses.fields(cls)} - {"kind"}
    unknown = set(d) - names
    if unknown:
        raise ValueError(f"unknown {kind} fields: {sorted(unknown)}")
    conv = {k: tuple(v) if isinstance(v, list) else v for k, v in d.items()}
    if kind == "sc_quadratic" and conv.get("A") is not None:
        conv["A"] = tuple(tuple(row) for row in conv["A"])
    return cls(**conv)


def spec_to_dict(spec) -> dict:
    out = {"kind": spec.kind}
    for f in dataclasses.fields(spec):
        if f.name != "kind":
            v = getattr(spec, f.name)
            out[f.name] = [list(r) if isinstance(r, tuple) else r for r in v] if isinstance(v, tuple) else v
    return out


def _positive_list(name, values, allow_zero=False):
    values = tuple(values)
    if not values:
        raise ValueError(f"grid {name} is empty")
    for v in values:
        if not (v >= 0 if allow_zero else v > 0):
            raise ValueError(f"grid {name} has invalid value {v!r}")
    return values


@dataclass(frozen=True)
class SweepConfig:
    """Everything a sweep needs; JSON round-trips through :meth:`from_dict` / :meth:`to_dict`.

    ``x0`` defaults to the origin (quadratic), the first toy initialization,
    or ``7 v`` (lower-bound example). ``label`` fills the ``problem`` column
    and defaults to the problem kind. ``n_test`` draws a held-out set for
    problems without an analytic population gradient.
    """

    problem: object = field(default_factory=ScQuadraticSpec)
    algos: tuple = ("modo",)
    T: tuple = (100,)
    alpha: tuple = (0.01,)
    gamma: tuple = (0.001,)
    n: tuple = (50,)
    seeds: tuple = tuple(range(10))
    record_every: int = 1
    out_dir: str = "results"
    formats: tuple = ("csv",)
    tol: float = DEFAULT_TOL
    x0: Optional[tuple] = None
    lambda0: Optional[tuple] = None
    label: Optional[str] = None
    n_test: int = 0
    timing: bool = False

    def __post_init__(self):
        set_ = lambda k, v: object.__setattr__(self, k, v)  # noqa: E731
        if isinstance(self.problem, dict):
            set_("problem", spec_from_dict(self.problem))
        if type(self.problem) not in SPEC_KINDS.values():
            raise ValueError("problem must be a problem spec")
        algos = tuple(Algo(a).value for a in self.algos)
        if not algos:
            raise ValueError("algos is empty")
        set_("algos", algos)
        set_("T", tuple(int(t) for t in self.T))
        if not self.T or any(t < 0 for t in self.T):
            raise ValueError("grid T must be nonempty with T >= 0")
        set_("alpha", tuple(float(a) for a in _positive_list("alpha", self.alpha)))
        set_("gamma", tuple(float(g) for g in _positive_list("gamma", self.gamma, allow_zero=True)))
        set_("n", tuple(int(n) for n in _positive_list("n", self.n)))
        seeds = tuple(int(s) for s in self.seeds)
        if not seeds or len(set(seeds)) != len(seeds):
            raise ValueError("seeds must be nonempty and distinct")
        if any(s < 0 or s >= 2 ** 64 for s in seeds):
            raise ValueError("seeds must be 64-bit unsigned integers")
        set_("seeds", seeds)
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")
        formats = tuple(self.formats)
        if not formats or set(formats) - set(FORMATS):
            raise ValueError(f"formats must be a nonempty subset of {FORMATS}")
        set_("formats", formats)
        if not self.tol > 0:
            raise ValueError("tol must be > 0")
        for name in ("x0", "lambda0"):
            v = getattr(self, name)
            if v is not None:
                set_(name, tuple(float(a) for a in v))

    @property
    def problem_label(self) -> str:
        return self.label or self.problem.kind

    @classmethod
    def from_dict(cls, d: dict) -> "SweepConfig":
        d = dict(d)
        grids = d.pop("grids", {})
        output = d.pop("output", {})
        known = {"problem", "algos", "seeds", "record_every", "tol", "x0", "lambda0",
                 "label", "n_test", "timing"}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        unknown = set(grids) - {"T", "alpha", "gamma", "n"}
        if unknown:
            raise ValueError(f"unknown grids: {sorted(unknown)}")
        kw = dict(d, **grids)
        if "dir" in output:
            kw["out_dir"] = output["dir"]
        if "formats" in output:
            kw["formats"] = output["formats"]
        return cls(**kw)

    @classmethod
    def from_json(cls, path) -> "SweepConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return {
            "problem": spec_to_dict(self.problem),
            "algos": list(self.algos),
            "grids": {"T": list(self.T), "alpha": list(self.alpha),
                      "gamma": list(self.gamma), "n": list(self.n)},
            "seeds": list(self.seeds),
            "record_every": self.record_every,
            "output": {"dir": str(self.out_dir), "formats": list(self.formats)},
            "tol": self.tol,
            "x0": None if self.x0 is None else list(self.x0),
            "lambda0": None if self.lambda0 is None else list(self.lambda0),
            "label": self.label,
            "n_test": self.n_test,
            "timing": self.timing,
        }


# ---------------------------------------------------------------------------
# Problem instances (cached per worker process)
# ---------------------------------------------------------------------------

def _freeze(obj):
    return json.dumps(obj, sort_keys=True)


@lru_cache(maxsize=64)
def _instance(spec_json: str, n: int):
    spec = replace(spec_from_dict(json.loads(spec_json)), n=n)
    if isinstance(spec, ScQuadraticSpec):
        problem, S = make_sc_quadratic(spec)
        return problem, S, np.zeros(problem.d), spec
    if isinstance(spec, ToySpec):
        problem, S = make_toy_nonconvex(spec)
        return problem, S, np.array(TOY_INITIALIZATIONS[0]), spec
    problem, S, _, v, _ = make_lower_bound_example(spec)
    return problem, S, 7.0 * v, spec


def _test_set(problem, spec, n_test: int):
    if n_test <= 0:
        return None
    z = problem.sample_population(np.random.default_rng([getattr(spec, "data_seed", 0), 7]), n_test)
    if z is None:
        return None
    return Dataset(z, id=f"test-n{n_test}")


# ---------------------------------------------------------------------------
# Sweep execution
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Task:
    spec_json: str
    label: str
    algo: str
    n: int
    T: int
    alpha: float
    gamma: float
    seed: int
    x0: Optional[tuple]
    lambda0: Optional[tuple]
    record_every: int
    tol: float
    n_test: int
    timing: bool

    @property
    def key(self):
        return (self.label, self.algo, self.n, self.T, self.alpha, self.gamma)

    @property
    def run_id(self) -> str:
        return (f"{self.label}-{self.algo}-n{self.n}-T{self.T}-a{fmt(self.alpha)}"
                f"-g{fmt(self.gamma)}-s{self.seed}")


def _tasks(cfg: SweepConfig) -> list[_Task]:
    """All tasks in cell-key order. MGDA and static ignore ``gamma`` (collapsed
    to 0), and MGDA ignores the seed (one run with the first seed)."""
    spec_json = _freeze(spec_to_dict(cfg.problem))
    seen, out = set(), []
    for algo in cfg.algos:
        gammas = cfg.gamma if algo == Algo.MODO.value else (0.0,)
        seeds = cfg.seeds[:1] if algo == Algo.MGDA.value else cfg.seeds
        for n in cfg.n:
            for T in cfg.T:
                for a in cfg.alpha:
                    for g in gammas:
                        for s in seeds:
                            t = _Task(spec_json, cfg.problem_label, algo, n, T, a, g, s, cfg.x0,
                                      cfg.lambda0, cfg.record_every, cfg.tol, cfg.n_test, cfg.timing)
                            if t.run_id not in seen:
                                seen.add(t.run_id)
                                out.append(t)
    return out


def _execute(task: _Task) -> dict:
    problem, S, default_x0, spec = _instance(task.spec_json, task.n)
    x0 = default_x0 if task.x0 is None else np.array(task.x0)
    lam0 = uniform_weights(problem.M) if task.lambda0 is None else np.array(task.lambda0)
    out = {"task": task, "rows": [], "status": "ok", "reason": "", "final": None,
           "avg": None, "constants": None}
    try:
        cfg = AlgoConfig(task.algo, task.T, task.alpha, task.gamma, lam0, x0, task.seed,
                         task.record_every)
        t0 = time.perf_counter_ns()
        traj = run(problem, S, cfg, task.tol)
        wall = time.perf_counter_ns() - t0 if task.timing else 0
        tm = evaluate_trajectory(problem, S, _test_set(problem, spec, task.n_test), traj, task.tol)
    except (MolError, ValueError, FloatingPointError) as exc:
        out["status"], out["reason"] = "failed", f"{type(exc).__name__}: {exc}"
        return out
    for r in tm.records:
        out["rows"].append((task.run_id, task.label, task.algo, task.n, task.T, task.alpha, task.gamma,
                            task.seed, r.t, r.r_opt, r.r_pop, r.r_gen, r.e_ca, r.ps_pop,
                            r.pop_source, wall))
    fin = tm.final
    out["final"] = {m: getattr(fin, m) for m in _FINAL}
    out["avg"] = {"r_opt": tm.avg_r_opt, "e_ca": tm.avg_e_ca, "r_pop": tm.avg_r_pop}
    if problem.constants(S, x0) is None:
        c = estimate_constants(problem, S, traj.xs)
        out["constants"] = (c.lip_grad, c.lip_val)
    return out


def worker_count(default: Optional[int] = None) -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            value = int(env)
        except ValueError:
            raise ValueError(f"{WORKERS_ENV} must be an integer") from None
        if value < 1:
            raise ValueError(f"{WORKERS_ENV} must be >= 1")
        return value
    return default or os.cpu_count() or 1


def _map(tasks, workers: int):
    if workers <= 1 or len(tasks) <= 1:
        return [_execute(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_execute, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


@dataclass
class SweepResults:
    config: dict
    long_rows: list
    agg_rows: list

    @property
    def failed(self) -> list:
        return [{k: r[k] for k in KEY_COLUMNS + ("reason",)} for r in self.agg_rows
                if r["status"] != "ok"]

    def cell(self, **key) -> dict:
        """The single aggregate row whose key columns match ``key``."""
        hits = [r for r in self.agg_rows if all(r[k] == v for k, v in key.items())]
        if len(hits) != 1:
            raise KeyError(f"{len(hits)} cells match {key}")
        return hits[0]

    def merged(self, other: "SweepResults", config: dict) -> "SweepResults":
        seen = {r["run_id"] for r in self.long_rows}
        longs = self.long_rows + [r for r in other.long_rows if r["run_id"] not in seen]
        keys = {tuple(r[k] for k in KEY_COLUMNS) for r in self.agg_rows}
        aggs = self.agg_rows + [r for r in other.agg_rows
                                if tuple(r[k] for k in KEY_COLUMNS) not in keys]
        keyf = lambda r: tuple(r[k] for k in KEY_COLUMNS)  # noqa: E731
        aggs.sort(key=keyf)
        longs.sort(key=lambda r: (keyf(r), r["seed"], r["t"]))
        return SweepResults(config, longs, aggs)


def _mean_se(values):
    vals = np.asarray(values, dtype=float)
    if vals.size == 0:
        return math.nan, math.nan
    se = float(vals.std(ddof=1) / math.sqrt(vals.size)) if vals.size > 1 else 0.0
    return float(vals.mean()), se


def _bounds(cfg: SweepConfig, key, outs) -> dict:
    label, algo, n, T, alpha, gamma = key
    res = {"ca_bound": None, "opt_bound": None, "stab_upper": None}
    if algo == Algo.MGDA.value or T < 1:
        return res
    problem, S, default_x0, _ = _instance(_freeze(spec_to_dict(cfg.problem)), n)
    x0 = default_x0 if cfg.x0 is None else np.array(cfg.x0)
    lam0 = uniform_weights(problem.M) if cfg.lambda0 is None else np.array(cfg.lambda0)
    consts = problem.constants(S, x0)
    if consts is None:
        est = [o["constants"] for o in outs if o["constants"] is not None]
        if not est:
            return res
        consts = BoundConstants.from_values(max(e[0] for e in est), max(e[1] for e in est), 0.0, problem.M)
    if gamma > 0:
        res["ca_bound"] = ca_bound_rhs(consts, alpha, gamma, T)
    try:
        res["opt_bound"] = opt_bound_rhs(consts, initial_gap(problem, S, x0, lam0), alpha, gamma, T)
    except ValueError:
        pass
    if consts.strong_convexity > 0:
        res["stab_upper"] = stability_upper_value(consts, alpha, gamma, n)
    return res


def _aggregate(cfg: SweepConfig, outs: list) -> SweepResults:
    cells: dict = {}
    for o in outs:
        cells.setdefault(o["task"].key, []).append(o)
    longs, aggs = [], []
    for key in sorted(cells):
        group = sorted(cells[key], key=lambda o: o["task"].seed)
        ok = [o for o in group if o["status"] == "ok"]
        bad = [o for o in group if o["status"] != "ok"]
        row = dict(zip(KEY_COLUMNS, key))
        row["num_seeds"] = len(ok)
        row["status"] = "ok" if not bad else "failed"
        row["reason"] = "; ".join(f"seed {o['task'].seed}: {o['reason']}" for o in bad)
        for m in _FINAL:
            row[f"final_{m}_mean"], row[f"final_{m}_se"] = _mean_se([o["final"][m] for o in ok])
        for m in _AVG:
            row[f"avg_{m}_mean"], row[f"avg_{m}_se"] = _mean_se([o["avg"][m] for o in ok])
        row.update(_bounds(cfg, key, ok) if ok else {"ca_bound": None, "opt_bound": None, "stab_upper": None})
        aggs.append(row)
        for o in ok:
            longs.extend(dict(zip(LONG_COLUMNS, r)) for r in o["rows"])
    return SweepResults(cfg.to_dict(), longs, aggs)


def run_sweep(cfg: SweepConfig, workers: Optional[int] = None, write: bool = True) -> SweepResults:
    """Run every task of ``cfg``, aggregate per cell and (by default) write the report.

    ``workers`` defaults to ``$MODO_WORKERS`` or the CPU count; results do not
    depend on it. Failing runs are recorded in the aggregate table with
    ``status="failed"`` and the error, and the sweep carries on.
    """
    results = _aggregate(cfg, _map(_tasks(cfg), worker_count(workers)))
    if write:
        emit_report(results, cfg.out_dir, cfg.formats, force=True)
    return results


# ---------------------------------------------------------------------------
# Report files
# ---------------------------------------------------------------------------

def fmt(v) -> str:
    """Shortest round-trip text for floats; '' for missing values."""
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _csv_bytes(columns, rows) -> bytes:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(r[c]) for c in columns])
    return buf.getvalue().encode()


def _json_value(v):
    if isinstance(v, float) and not math.isfinite(v):
        return fmt(v)
    if isinstance(v, (np.integer, np.floating)):
        return v.item()
    return v


def _json_bytes(columns, rows) -> bytes:
    data = [{c: _json_value(r[c]) for c in columns} for r in rows]
    return (json.dumps(data, indent=1) + "\n").encode()


def emit_report(results: SweepResults, out_dir, formats=("csv",), force: bool = False) -> dict:
    """Write ``long``/``agg`` tables in each format plus ``manifest.json``.

    Returns the manifest dict. Empty results raise ``ValueError`` unless
    ``force`` is set, in which case header-only tables are written. If a
    write fails, a manifest of the files completed so far is attempted
    before the error propagates.
    """
    if not results.agg_rows and not force:
        raise ValueError("results empty")
    out = Path(out_dir)
    manifest = {"version": __version__, "config": results.config, "files": [],
                "failed_cells": results.failed, "complete": False}

    def write_manifest():
        (out / "manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")

    try:
        out.mkdir(parents=True, exist_ok=True)
        for f in formats:
            enc = _csv_bytes if f == "csv" else _json_bytes
            for name, cols, rows in (("long", LONG_COLUMNS, results.long_rows),
                                     ("agg", AGG_COLUMNS, results.agg_rows)):
                data = enc(cols, rows)
                path = out / f"{name}.{f}"
                path.write_bytes(data)
                manifest["files"].append({"path": path.name, "sha256": hashlib.sha256(data).hexdigest(),
                                          "bytes": len(data)})
        manifest["complete"] = True
        write_manifest()
    except OSError:
        try:
            write_manifest()
        except OSError:
            pass
        raise
    return manifest


# ---------------------------------------------------------------------------
# Presets
# ---------------------------------------------------------------------------

FIGURE2_T = (10, 30, 100, 300, 1000)
FIGURE2_ALPHA = (1e-3, 3e-3, 1e-2, 3e-2, 1e-1, 3e-1)
FIGURE2_GAMMA = (1e-4, 1e-3, 1e-2, 1e-1)
TOY_ALPHA = 5e-3
TOY_GAMMA = 1e-4
TOY_T = 50000


def figure2_configs(seeds=tuple(range(10)), out_dir="results/figure2") -> list[SweepConfig]:
    """Three one-factor sweeps around ``T=100, alpha=0.01, gamma=0.001`` on the default quadratic."""
    base = SweepConfig(seeds=tuple(seeds), out_dir=out_dir)
    return [replace(base, T=FIGURE2_T), replace(base, alpha=FIGURE2_ALPHA),
            replace(base, gamma=FIGURE2_GAMMA)]


def run_figure2(seeds=tuple(range(10)), out_dir="results/figure2", workers=None,
                write: bool = True) -> SweepResults:
    cfgs = figure2_configs(seeds, out_dir)
    return _run_many("figure2", cfgs, out_dir, workers, write)


def figure3_configs(T: int = TOY_T, record_every: int = 500, seed: int = 0,
                    out_dir="results/figure3") -> list[SweepConfig]:
    """MoDo, MGDA and static weighting on the toy landscape from each initialization."""
    return [SweepConfig(problem=ToySpec(), algos=("modo", "mgda", "static"), T=(T,), alpha=(TOY_ALPHA,),
                        gamma=(TOY_GAMMA,), n=(20,), seeds=(seed,), record_every=record_every,
                        out_dir=out_dir, x0=x0, label=f"toy_init{k}")
            for k, x0 in enumerate(TOY_INITIALIZATIONS)]


def run_figure3(T: int = TOY_T, record_every: int = 500, seed: int = 0, out_dir="results/figure3",
                workers=None, write: bool = True) -> SweepResults:
    return _run_many("figure3", figure3_configs(T, record_every, seed, out_dir), out_dir, workers, write)


def _run_many(name, cfgs, out_dir, workers, write) -> SweepResults:
    tasks = []
    for c in cfgs:
        tasks.extend(_tasks(c))
    # the panels share cells; run each run_id once
    uniq = {t.run_id: t for t in tasks}
    outs = _map(list(uniq.values()), worker_count(workers))
    by_id = {o["task"].run_id: o for o in outs}
    echo = {"preset": name, "sweeps": [c.to_dict() for c in cfgs]}
    results = SweepResults(echo, [], [])
    for c in cfgs:
        part = _aggregate(c, [by_id[t.run_id] for t in _tasks(c)])
        results = results.merged(part, echo)
    if write:
        emit_report(results, out_dir, cfgs[0].formats, force=True)
    return results


REGIMES = ("I", "II", "III", "IV")


def _ceil_pow(n: int, p: float) -> int:
    # guard against 1024**0.8 = 256.00000000000006
    return math.ceil(n ** p - 1e-9)


def regime_parameters(regime: str, n: int, alpha: float = 0.01) -> tuple[float, float, int]:
    """``(alpha, gamma, T)`` for a trade-off regime; factors 10 and 0.1 are fixtures."""
    if regime not in REGIMES:
        raise ValueError(f"regime must be one of {REGIMES}")
    if n < 20:
        raise ValueError("trade-off presets need n >= 20")
    if regime == "I":
        return alpha, 10.0 * alpha, _ceil_pow(n, 0.5)
    if regime == "II":
        return alpha, 10.0 * alpha, _ceil_pow(n, 1.5)
    if regime == "III":
        T = _ceil_pow(n, 1.5)
        return alpha, 0.1 / T, T
    T = _ceil_pow(n, 0.8)
    return T ** -0.5, T ** -0.25, T


def run_tradeoff_preset(regime: str, n: int, base: Optional[SweepConfig] = None, workers=None,
                        write: bool = True) -> SweepResults:
    """Run ``base`` at the single ``(alpha, gamma, T, n)`` cell of ``regime``.

    ``alpha`` for regimes I-III comes from ``base.alpha[0]``. ``record_every``
    is raised so each run keeps about 100 recorded states.
    """
    base = base or SweepConfig(out_dir=f"results/tradeoff_{regime}_n{n}")
    alpha, gamma, T = regime_parameters(regime, n, base.alpha[0])
    cfg = replace(base, T=(T,), alpha=(alpha,), gamma=(gamma,), n=(n,),
                  record_every=max(base.record_every, T // 100))
    return run_sweep(cfg, workers, write)


# ---------------------------------------------------------------------------
# Stability experiments
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StabilityConfig:
    """Coupled-run stability sweep over ``n``.

    ``gamma`` may be ``"cap"`` for the strongly convex step-size cap. For the
    lower-bound problem the prescribed ``x0``, ``alpha``, ``gamma`` and ``T``
    are used and the corresponding fields are ignored.
    """

    problem: object = field(default_factory=ScQuadraticSpec)
    algo: str = "modo"
    T: int = 100
    alpha: float = 0.01
    gamma: object = "cap"
    n: tuple = (20, 40, 80, 160, 320)
    num_seeds: int = 20
    seed: int = 0
    j: int = 0
    out_dir: str = "results/stability"

    def __post_init__(self):
        if isinstance(self.problem, dict):
            object.__setattr__(self, "problem", spec_from_dict(self.problem))
        if isinstance(self.problem, ToySpec):
            raise ValueError("stability runs support sc_quadratic and lower_bound problems")
        Algo(self.algo)
        object.__setattr__(self, "n", tuple(int(v) for v in _positive_list("n", self.n)))
        if not (self.gamma == "cap" or (isinstance(self.gamma, (int, float)) and self.gamma >= 0)):
            raise ValueError("gamma must be 'cap' or a number >= 0")
        if self.num_seeds < 2:
            raise ValueError("num_seeds must be >= 2")

    @classmethod
    def from_dict(cls, d: dict) -> "StabilityConfig":
        d = dict(d)
        output = d.pop("output", {})
        names = {f.name for f in dataclasses.fields(cls)} - {"out_dir"}
        unknown = set(d) - names
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        if "dir" in output:
            d["out_dir"] = output["dir"]
        return cls(**d)

    def to_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in dataclasses.fields(self)}
        d["problem"] = spec_to_dict(self.problem)
        d["n"] = list(self.n)
        return d


def _slope(ns, values) -> Optional[float]:
    ns, values = np.asarray(ns, float), np.asarray(values, float)
    if ns.size < 2 or np.any(values <= 0):
        return None
    return float(np.polyfit(np.log(ns), np.log(values), 1)[0])


def run_stability(cfg: StabilityConfig, write: bool = True) -> dict:
    """Estimate stability at each ``n`` and attach the matching bound values."""
    seeds = [cfg.seed + k for k in range(cfg.num_seeds)]
    rows = []
    for n in cfg.n:
        if isinstance(cfg.problem, LowerBoundSpec):
            spec = replace(cfg.problem, n=n)
            problem, S, Sp, v, _ = make_lower_bound_example(spec)
            T = spec.horizon
            run_cfg = lower_bound_config(problem, S, v, T, cfg.seed)
            consts = problem.constants(S, run_cfg.x0)
        else:
            spec = replace(cfg.problem, n=n)
            problem, S = make_sc_quadratic(spec)
            Sp = make_neighboring_dataset(S, cfg.j % n, sc_replacement(spec))
            x0 = np.zeros(problem.d)
            consts = problem.constants(S, x0)
            T = cfg.T
            gamma = gamma_cap(consts, T) if cfg.gamma == "cap" else float(cfg.gamma)
            if cfg.algo != Algo.MODO.value:
                gamma = 0.0
            run_cfg = AlgoConfig(cfg.algo, T, cfg.alpha, gamma, uniform_weights(problem.M), x0, cfg.seed)
        rep = estimate_stability(problem, S, Sp, run_cfg, cfg.num_seeds, seeds=seeds)
        row = rep.to_dict()
        row.update(T=T, alpha=run_cfg.alpha, gamma=run_cfg.gamma,
                   gamma_cap=gamma_cap(consts, T),
                   upper_bound=stability_upper_value(consts, run_cfg.alpha, run_cfg.gamma, n),
                   lower_bound=(lower_bound_value(run_cfg.gamma, T, n)
                                if isinstance(cfg.problem, LowerBoundSpec) else None))
        rows.append(row)
    report = {
        "version": __version__,
        "config": cfg.to_dict(),
        "reports": rows,
        "slope_arg_stability_sq": _slope(cfg.n, [r["arg_stability_sq"] for r in rows]),
    }
    if write:
        out = Path(cfg.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        data = (json.dumps(report, indent=1, sort_keys=True) + "\n").encode()
        (out / "stability.json").write_bytes(data)
        manifest = {"version": __version__, "config": cfg.to_dict(), "complete": True,
                    "files": [{"path": "stability.json", "sha256": hashlib.sha256(data).hexdigest(),
                               "bytes": len(data)}]}
        (out / "manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    return report
