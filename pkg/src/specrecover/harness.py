"""Seeded Monte-Carlo campaigns for the four recovery experiments."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import svg
from .model import FrequencyDrawError, InstanceConfig, ModelError, draw_instance, nominal_separation
from .recovery import ScoringTolerances, recover
from .sdp import SolverParams

log = logging.getLogger(__name__)

EXPERIMENT_IDS = ("1", "2", "3", "4a", "4b", "custom")
SEPARATIONS = ("nominal", "n-1", "none")
TRIAL_FIELDS = ["trial", "p", "k", "converged", "objective", "gap", "ms"]
SUMMARY_FIELDS = ["p", "k", "count", "probability"]


class ConfigError(ValueError):
    pass


def separation_for(rule: str, n: int) -> float | None:
    if rule == "nominal":
        return nominal_separation(n)
    if rule == "n-1":
        return 1.0 / (n - 1)
    if rule == "none":
        return None
    raise ConfigError(f"unknown separation rule {rule!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    experiment_id: str
    n: int
    m: tuple[int, ...]
    s: tuple[int, ...]
    p_values: tuple[int, ...] | None  # None: 0..s-1 for each s
    trials: int
    master_seed: int = 0
    separation: str = "nominal"
    solver: SolverParams = field(default_factory=SolverParams)
    scoring: ScoringTolerances = field(default_factory=ScoringTolerances)
    output_dir: str | None = None
    profile: str = "desk"
    notes: str = ""

    def __post_init__(self):
        object.__setattr__(self, "m", tuple(int(v) for v in np.atleast_1d(self.m)))
        object.__setattr__(self, "s", tuple(int(v) for v in np.atleast_1d(self.s)))
        if self.p_values is not None:
            object.__setattr__(self, "p_values", tuple(int(v) for v in self.p_values))
        if self.experiment_id not in EXPERIMENT_IDS:
            raise ConfigError(f"unknown experiment id {self.experiment_id!r}")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.n < 2:
            raise ConfigError("n must be at least 2")
        if self.master_seed < 0:
            raise ConfigError("master_seed must be unsigned")
        if self.separation not in SEPARATIONS:
            raise ConfigError(f"unknown separation rule {self.separation!r}")
        for m in self.m:
            if not 1 <= m <= self.n:
                raise ConfigError(f"m={m} outside [1, n={self.n}]")
        sep = separation_for(self.separation, self.n)
        for s in self.s:
            if s < 1:
                raise ConfigError("s must be positive")
            if sep is not None and s * sep > 1.0:
                raise ConfigError(f"s={s} lines cannot be {sep:g} apart (s * spacing > 1)")
            for p in self.p_list(s):
                if not 0 <= p <= s - 1:
                    raise ConfigError(f"p={p} outside [0, s-1={s - 1}]")

    def p_list(self, s: int) -> tuple[int, ...]:
        return self.p_values if self.p_values is not None else tuple(range(s))

    @property
    def settings(self) -> list[tuple[int, int]]:
        """(m, s) pairs in output order."""
        return [(m, s) for s in self.s for m in self.m]

    def to_json(self) -> dict:
        d = asdict(self)
        d["m"] = list(self.m)
        d["s"] = list(self.s)
        d["p_values"] = None if self.p_values is None else list(self.p_values)
        d["min_separation"] = separation_for(self.separation, self.n)
        return d


def default_config(experiment_id: str, profile: str = "desk", **overrides) -> ExperimentConfig:
    """Resolved defaults for one of the four experiments."""
    if profile not in ("desk", "paper"):
        raise ConfigError(f"unknown profile {profile!r}")
    full = profile == "paper"
    if experiment_id == "1":
        base = dict(n=32, m=(9,), s=(4,), p_values=None, trials=1000 if full else 200, separation="nominal")
    elif experiment_id == "2":
        base = dict(n=256 if full else 128, m=(40,), s=(8, 12, 16), p_values=None,
                    trials=100 if full else 25, separation="nominal",
                    notes="s values 8, 12, 16 are placeholders, not published settings"
                          + ("" if full else "; desk profile uses n=128"))
    elif experiment_id == "3":
        base = dict(n=80, m=tuple(range(12, 45, 4)), s=(6,), p_values=None if full else (0, 2, 4),
                    trials=100 if full else 50, separation="nominal")
    elif experiment_id in ("4a", "4b"):
        base = dict(n=40, m=(15,), s=(7,), p_values=None, trials=1000 if full else 200,
                    separation="n-1" if experiment_id == "4a" else "none")
    else:
        raise ConfigError(f"no defaults for experiment {experiment_id!r}")
    base.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(experiment_id=experiment_id, profile=profile, **base)


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    p: int
    k: int
    converged: bool
    objective: float
    gap: float
    wall_time_ms: float | None
    m: int
    s: int


def _limit_blas():
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:  # pragma: no cover
        return None
    return threadpool_limits(1)


def run_trial(cfg: ExperimentConfig, m: int, s: int, trial: int, timing: bool = False) -> list[TrialRecord]:
    """All p values of one realization; failures become k=0 records."""
    icfg = InstanceConfig(cfg.n, m, s, 0, separation_for(cfg.separation, cfg.n), master_seed=cfg.master_seed)
    out = []
    try:
        inst = draw_instance(icfg, trial)
    except (FrequencyDrawError, ModelError) as exc:
        log.warning("trial %d (m=%d, s=%d): %s", trial, m, s, exc)
        return [TrialRecord(trial, p, 0, False, math.nan, math.nan, None, m, s) for p in cfg.p_list(s)]
    for p in cfg.p_list(s):
        t0 = time.perf_counter()
        try:
            res = recover(inst.with_known(p), cfg.solver, cfg.scoring)
        except Exception as exc:  # a failed solve is a failed trial, not a failed campaign
            log.warning("trial %d p=%d failed: %s", trial, p, exc)
            out.append(TrialRecord(trial, p, 0, False, math.nan, math.nan, None, m, s))
            continue
        ms = (time.perf_counter() - t0) * 1e3 if timing else None
        d = res.diagnostics
        out.append(TrialRecord(trial, p, res.k, res.converged, float(d["primal_objective"]), float(d["gap"]),
                               ms, m, s))
    return out


def _run_unit(args):
    cfg, m, s, trial, timing = args
    return run_trial(cfg, m, s, trial, timing)


def _worker_init():
    global _WORKER_LIMIT
    _WORKER_LIMIT = _limit_blas()


def run_campaign(cfg: ExperimentConfig, threads: int = 1, timing: bool = False) -> list[TrialRecord]:
    """Every (setting, trial) unit; output is sorted and independent of ``threads``."""
    units = [(cfg, m, s, t, timing) for (m, s) in cfg.settings for t in range(cfg.trials)]
    records: list[TrialRecord] = []
    if threads <= 1:
        limiter = _limit_blas()
        try:
            for u in units:
                records.extend(_run_unit(u))
        finally:
            if limiter is not None:
                limiter.unregister()
    else:
        with ProcessPoolExecutor(max_workers=threads, initializer=_worker_init) as pool:
            for recs in pool.map(_run_unit, units, chunksize=max(1, len(units) // (8 * threads))):
                records.extend(recs)
    records.sort(key=lambda r: (r.s, r.m, r.trial, r.p))
    return records


def histogram(records: list[TrialRecord], s: int) -> dict[int, list[int]]:
    """Counts of k = 0..s for each p."""
    out: dict[int, list[int]] = {}
    for r in records:
        out.setdefault(r.p, [0] * (s + 1))[r.k] += 1
    return dict(sorted(out.items()))


def success_probability(records: list[TrialRecord], p: int, s: int) -> float:
    sel = [r for r in records if r.p == p]
    return sum(r.k == s for r in sel) / len(sel) if sel else math.nan


def invalid_cells(hist: dict[int, list[int]]) -> list[tuple[int, int, int]]:
    """(p, k, count) for non-empty cells with 0 < k <= p."""
    return [(p, k, counts[k]) for p, counts in hist.items() for k in range(1, p + 1)
            if k < len(counts) and counts[k] > 0]


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def trials_csv(records: list[TrialRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRIAL_FIELDS)
    for r in records:
        w.writerow([_fmt(r.trial), _fmt(r.p), _fmt(r.k), _fmt(r.converged), _fmt(r.objective), _fmt(r.gap),
                    _fmt(r.wall_time_ms)])
    return buf.getvalue()


def summary_rows(records: list[TrialRecord], s: int) -> list[tuple[int, int, int, float]]:
    rows = []
    for p, counts in histogram(records, s).items():
        total = sum(counts)
        rows.extend((p, k, c, c / total) for k, c in enumerate(counts))
    return rows


def summary_csv(records: list[TrialRecord], s: int) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_FIELDS)
    for p, k, c, prob in summary_rows(records, s):
        w.writerow([p, k, c, repr(prob)])
    return buf.getvalue()


def check_output_dir(path) -> Path:
    """Create ``path`` and prove it is writable before any solve runs."""
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    probe = out / ".write-probe"
    probe.write_text("")
    probe.unlink()
    return out


def _emit_one(records: list[TrialRecord], s: int, title: str, out: Path) -> dict:
    (out / "trials.csv").write_text(trials_csv(records))
    (out / "summary.csv").write_text(summary_csv(records, s))
    hist = histogram(records, s)
    series = {f"p={p}": [c / sum(counts) for c in counts] for p, counts in hist.items()}
    (out / "summary.svg").write_text(svg.grouped_bars(list(range(s + 1)), series, title, "k recovered"))
    bad = invalid_cells(hist)
    for p, k, c in bad:
        log.warning("%s: %d trials in invalid cell p=%d, k=%d", title, c, p, k)
    return {"invalid_cells": bad}


def emit_outputs(records: list[TrialRecord], cfg: ExperimentConfig, out_dir=None) -> Path:
    """trials.csv, summary.csv, summary.svg and config.json (one subdirectory per setting when several)."""
    if not records:
        raise ConfigError("no trial records to write")
    out = check_output_dir(out_dir or cfg.output_dir or ".")
    settings = cfg.settings
    report = {}
    for m, s in settings:
        sel = [r for r in records if r.m == m and r.s == s]
        if not sel:
            continue
        target = out if len(settings) == 1 else check_output_dir(out / f"m{m}_s{s}")
        title = f"experiment {cfg.experiment_id}: n={cfg.n}, m={m}, s={s}"
        report[f"m{m}_s{s}"] = _emit_one(sel, s, title, target)
    if len(cfg.m) > 1:
        _emit_curve(records, cfg, out)
    doc = {"config": cfg.to_json(), "report": report}
    (out / "config.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return out


def success_curve(records: list[TrialRecord], cfg: ExperimentConfig) -> list[tuple[int, int, int, int, float]]:
    """(s, m, p, trials, P(k = s)) rows."""
    rows = []
    for m, s in cfg.settings:
        for p in cfg.p_list(s):
            sel = [r for r in records if r.m == m and r.s == s and r.p == p]
            if sel:
                rows.append((s, m, p, len(sel), sum(r.k == s for r in sel) / len(sel)))
    return rows


def _emit_curve(records, cfg, out: Path):
    rows = success_curve(records, cfg)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["s", "m", "p", "trials", "probability"])
    for row in rows:
        w.writerow([*row[:4], repr(row[4])])
    (out / "curve.csv").write_text(buf.getvalue())
    for s in cfg.s:
        series = {f"p={p}": [r[4] for r in rows if r[0] == s and r[2] == p] for p in cfg.p_list(s)}
        (out / f"curve_s{s}.svg").write_text(
            svg.lines(list(cfg.m), series, f"experiment {cfg.experiment_id}: n={cfg.n}, s={s}, P(k=s)", "m"))


def minimal_m(rows, s: int, p: int, target: float) -> int | None:
    """Smallest m whose success probability reaches ``target``."""
    ok = [m for (ss, m, pp, _, prob) in rows if ss == s and pp == p and prob >= target]
    return min(ok) if ok else None


def _expect(cfg: ExperimentConfig, ids: tuple[str, ...]):
    if cfg.experiment_id not in ids + ("custom",):
        raise ConfigError(f"config for experiment {cfg.experiment_id} passed to runner for {ids}")


def run_experiment1(cfg: ExperimentConfig, threads: int = 1, timing: bool = False) -> list[TrialRecord]:
    _expect(cfg, ("1",))
    if len(cfg.m) != 1 or len(cfg.s) != 1:
        raise ConfigError("experiment 1 takes a single (m, s)")
    return run_campaign(cfg, threads, timing)


def run_experiment2(cfg: ExperimentConfig, threads: int = 1, timing: bool = False) -> list[TrialRecord]:
    _expect(cfg, ("2",))
    if len(cfg.m) != 1:
        raise ConfigError("experiment 2 takes a single m")
    return run_campaign(cfg, threads, timing)


def run_experiment3(cfg: ExperimentConfig, threads: int = 1, timing: bool = False) -> list[TrialRecord]:
    _expect(cfg, ("3",))
    if len(cfg.s) != 1:
        raise ConfigError("experiment 3 takes a single s")
    return run_campaign(cfg, threads, timing)


def run_experiment4(cfg: ExperimentConfig, threads: int = 1, timing: bool = False) -> list[TrialRecord]:
    _expect(cfg, ("4a", "4b"))
    if len(cfg.m) != 1 or len(cfg.s) != 1:
        raise ConfigError("experiment 4 takes a single (m, s)")
    return run_campaign(cfg, threads, timing)


RUNNERS = {"1": run_experiment1, "2": run_experiment2, "3": run_experiment3, "4a": run_experiment4,
           "4b": run_experiment4, "custom": run_campaign}


def run_and_emit(cfg: ExperimentConfig, threads: int = 1, timing: bool = False) -> tuple[list[TrialRecord], Path]:
    out = check_output_dir(cfg.output_dir or ".")
    records = RUNNERS[cfg.experiment_id](cfg, threads=threads, timing=timing)
    return records, emit_outputs(records, cfg, out)


def default_threads() -> int:
    return max(1, len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1))


def two_proportion_z(successes_a: int, n_a: int, successes_b: int, n_b: int) -> float:
    """z statistic for H0: p_a == p_b (pooled variance); positive when a > b."""
    pa, pb = successes_a / n_a, successes_b / n_b
    pool = (successes_a + successes_b) / (n_a + n_b)
    se = math.sqrt(pool * (1 - pool) * (1 / n_a + 1 / n_b))
    if se == 0.0:
        return 0.0 if pa == pb else math.copysign(math.inf, pa - pb)
    return (pa - pb) / se


__all__ = [
    "ConfigError", "ExperimentConfig", "TrialRecord", "default_config", "run_trial", "run_campaign",
    "run_experiment1", "run_experiment2", "run_experiment3", "run_experiment4", "emit_outputs",
    "run_and_emit", "histogram", "success_probability", "success_curve", "minimal_m", "invalid_cells",
    "two_proportion_z", "trials_csv", "summary_csv",
]
