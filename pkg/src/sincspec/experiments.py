"""Seeded Monte Carlo harness for the spectral, coverage, capacity and DoF
experiments.

Each trial draws one sample of size 2n from the generator keyed by
``(seed, trial_index)``; the first n points are the Z's and the last n the Y's.
Trials are mapped over a process pool in trial-index order and reduced in that
order, so a report does not depend on the number of workers.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.stats import binomtest

from sincspec import metrics
from sincspec.eigensolve import eig_hermitian, eig_symmetric
from sincspec.kernels import SincKernel
from sincspec.randmat import build_A, build_H, gram
from sincspec.sampling import trial_sample
from sincspec.sinc_operator import default_quad_order, fit_decay, sinc_operator_spectrum

log = logging.getLogger(__name__)

DOF_EPSILONS = (0.25, 0.5, 0.75)
DOF_ALPHAS = (0.8, 0.9, 0.99)
COVERAGE_FACTORS = (1.0, 0.5, 0.25)
FIGURE_EXTRA = 40


@dataclass(frozen=True)
class ExperimentConfig:
    ms: tuple[float, ...] = (2.0, 4.0, 6.0, 10.0, 20.0)
    n: int = 300
    trials: int = 50
    xi: float = 1.63
    quad_order: int | None = None
    seed: int = 0
    p: float | None = None
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "ms", tuple(float(m) for m in self.ms))
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if not self.ms:
            raise ValueError("at least one m is required")
        for m in self.ms:
            if not 1 <= m <= self.n:
                raise ValueError(f"every m must satisfy 1 <= m <= n={self.n}, got {m}")
        if not self.xi > 0:
            raise ValueError(f"xi must be positive, got {self.xi}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")

    def quad_for(self, m: float) -> int:
        return self.quad_order if self.quad_order is not None else max(default_quad_order(m), 512)

    def power(self) -> float:
        return float(self.n) if self.p is None else self.p

    def echo(self) -> dict:
        d = asdict(self)
        d.pop("workers")
        d["ms"] = list(self.ms)
        return d


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def mkey(m: float) -> str:
    return format(m, "g")


@dataclass
class ExperimentReport:
    experiment: str
    config: ExperimentConfig
    records: list[dict]
    aggregates: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    @property
    def columns(self) -> list[str]:
        return list(self.records[0]) if self.records else list(_COLUMNS.get(self.experiment, ()))

    def finalize(self, wall_time: float | None = None) -> "ExperimentReport":
        from sincspec import __version__

        self.aggregates = AGGREGATORS[self.experiment](self.records, self.config)
        self.provenance = {"code_version": __version__, "config": self.config.echo()}
        if wall_time is not None:
            self.provenance["wall_time_s"] = wall_time
        self.audit()
        return self

    def audit(self) -> None:
        """Recompute aggregates from the per-trial records; they must match exactly."""
        again = AGGREGATORS[self.experiment](self.records, self.config)
        if json.dumps(again, sort_keys=True) != json.dumps(self.aggregates, sort_keys=True):
            raise RuntimeError(f"{self.experiment}: aggregates do not match per-trial records")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        cols = self.columns
        w.writerow(cols)
        for rec in self.records:
            w.writerow([_fmt(rec[c]) for c in cols])
        return buf.getvalue()

    def to_dict(self, include_timing: bool = False) -> dict:
        prov = dict(self.provenance)
        if not include_timing:
            prov.pop("wall_time_s", None)
        return {
            "experiment": self.experiment,
            "config": self.config.echo(),
            "provenance": prov,
            "trials": self.records,
            "aggregates": self.aggregates,
        }

    def to_json(self, include_timing: bool = False) -> str:
        return json.dumps(_jsonable(self.to_dict(include_timing)), indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ExperimentReport":
        d = json.loads(text)
        cfg = ExperimentConfig(**d["config"])
        return cls(d["experiment"], cfg, d["trials"], d["aggregates"], d["provenance"])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


# -- per-trial spectra ----------------------------------------------------------

def trial_spectra(config: ExperimentConfig, t: int, m: float, with_H: bool = True):
    Z, Y = trial_sample(config.seed, t, config.n)
    A = build_A(m, Z, Y)
    lam_A = eig_hermitian(gram(A), "A*A", m=m)
    lam_H = eig_symmetric(build_H(SincKernel(m), Y), "H", m=m) if with_H else None
    return lam_A, lam_H


def _q_values(config: ExperimentConfig) -> dict[float, np.ndarray]:
    return {m: sinc_operator_spectrum(m, config.quad_for(m)).values for m in config.ms}


def _map_trials(fn, config: ExperimentConfig, extra) -> list[dict]:
    jobs = [(config, t, extra) for t in range(config.trials)]
    if config.workers == 1:
        chunks = [fn(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            chunks = list(pool.map(fn, jobs, chunksize=max(1, config.trials // (4 * config.workers))))
    return [rec for chunk in chunks for rec in chunk]


def _run(name, fn, config, extra):
    start = time.perf_counter()
    records = _map_trials(fn, config, extra)
    wall = time.perf_counter() - start
    log.info("%s: %d trials in %.2fs", name, config.trials, wall)
    return ExperimentReport(name, config, records).finalize(wall)


def _by_m(records: list[dict]) -> dict[float, list[dict]]:
    out: dict[float, list[dict]] = {}
    for r in records:
        out.setdefault(float(r["m"]), []).append(r)
    return out


def _stats(values) -> dict:
    v = np.asarray(values, dtype=float)
    return {
        "mean": float(np.mean(v)),
        "median": float(np.median(v)),
        "std": float(np.std(v, ddof=1)) if v.size > 1 else 0.0,
        "min": float(np.min(v)),
        "max": float(np.max(v)),
    }


def wilson_interval(hits: int, n: int) -> tuple[float, float]:
    ci = binomtest(hits, n).proportion_ci(confidence_level=0.95, method="wilson")
    return float(ci.low), float(ci.high)


# -- Table 2: relative l2 spectral errors ------------------------------------------

def _table2_trial(job) -> list[dict]:
    config, t, qs = job
    n = config.n
    out = []
    for m in config.ms:
        lam_A, lam_H = trial_spectra(config, t, m)
        rm = math.sqrt(m)
        out.append({
            "trial": t,
            "m": m,
            "n": n,
            "err_AH": metrics.l2_spectral_distance(lam_A, lam_H, n) / rm,
            "err_HQ": metrics.l2_spectral_distance(lam_H, qs[m], n) / rm,
            "err_AQ": metrics.l2_spectral_distance(lam_A, qs[m], n) / rm,
            "sqrt_m_over_n": math.sqrt(m / n),
        })
    return out


def _aggregate_table2(records, config):
    agg = {}
    for m, rows in _by_m(records).items():
        agg[mkey(m)] = {c: _stats([r[c] for r in rows]) for c in ("err_AH", "err_HQ", "err_AQ")}
        agg[mkey(m)]["sqrt_m_over_n"] = math.sqrt(m / config.n)
        agg[mkey(m)]["trials"] = len(rows)
    return agg


def run_table2(config: ExperimentConfig) -> ExperimentReport:
    return _run("table2", _table2_trial, config, _q_values(config))


# -- concentration coverage --------------------------------------------------------

_DIST_FOR_BOUND = {"theorem1": "dist_HQ", "prop2": "dist_AH", "theorem2": "dist_AQ", "individual": "indiv_maxdev"}


def _coverage_trial(job) -> list[dict]:
    config, t, qs = job
    n = config.n
    out = []
    for m in config.ms:
        lam_A, lam_H = trial_spectra(config, t, m)
        b = metrics.concentration_bounds(metrics.ConcentrationQuery(config.xi, m, n))
        q = np.zeros(n)
        q[: min(n, qs[m].size)] = qs[m][:n]
        top = min(n, 2 * math.ceil(m) + 1)
        out.append({
            "trial": t,
            "m": m,
            "n": n,
            "dist_AH": metrics.l2_spectral_distance(lam_A, lam_H, n),
            "dist_HQ": metrics.l2_spectral_distance(lam_H, q, n),
            "dist_AQ": metrics.l2_spectral_distance(lam_A, q, n),
            "indiv_maxdev": float(np.max(np.abs(lam_A.values[:top] - q[:top]))),
            "bound_theorem1": b.theorem1,
            "bound_prop2": b.prop2,
            "bound_theorem2": b.theorem2,
            "bound_individual": b.individual,
        })
    return out


def _aggregate_coverage(records, config):
    agg = {}
    for m, rows in _by_m(records).items():
        b = metrics.concentration_bounds(metrics.ConcentrationQuery(config.xi, m, config.n))
        entry = {}
        for name in metrics.BOUND_NAMES:
            col = _DIST_FOR_BOUND[name]
            per_factor = {}
            for f in COVERAGE_FACTORS:
                hits = sum(1 for r in rows if r[col] <= f * r["bound_" + name])
                lo, hi = wilson_interval(hits, len(rows))
                per_factor[format(f, "g")] = {"coverage": hits / len(rows), "wilson_low": lo, "wilson_high": hi}
            full = per_factor["1"]
            half_width = 0.5 * (full["wilson_high"] - full["wilson_low"])
            entry[name] = {
                "bound": b.bound(name),
                "guaranteed": b.level(name),
                "flagged": bool(full["coverage"] < b.level(name) - half_width),
                "by_factor": per_factor,
            }
        entry["trials"] = len(rows)
        agg[mkey(m)] = entry
    return agg


def run_coverage(config: ExperimentConfig) -> ExperimentReport:
    if config.trials < 100:
        raise ValueError(f"coverage needs at least 100 trials, got {config.trials}")
    return _run("coverage", _coverage_trial, config, _q_values(config))


# -- Table 3: capacity -------------------------------------------------------------------

def _table3_trial(job) -> list[dict]:
    config, t, _ = job
    n, p = config.n, config.power()
    out = []
    for m in config.ms:
        lam_A, _ = trial_spectra(config, t, m, with_H=False)
        C = metrics.capacity(lam_A, n * p / m)
        approx = metrics.capacity_approx(m, n, p)
        E, Er = approx.errors(C)
        out.append({"trial": t, "m": m, "n": n, "p": p, "C_m": C, "C_tilde": approx.tilde,
                    "C_approx": approx.approx, "E_m": E, "Er_m": Er})
    return out


def _aggregate_table3(records, config):
    agg = {}
    for m, rows in _by_m(records).items():
        C = _stats([r["C_m"] for r in rows])
        tilde = rows[0]["C_tilde"]
        agg[mkey(m)] = {
            "C_m": C,
            "C_tilde": tilde,
            "C_approx": rows[0]["C_approx"],
            "E_m": _stats([r["E_m"] for r in rows]),
            "Er_m": _stats([r["Er_m"] for r in rows]),
            "Er_of_mean": abs(C["mean"] - tilde) / C["mean"],
            "band_xi": metrics.mcdiarmid_capacity_band(config.n, config.power(), config.xi),
            "trials": len(rows),
        }
    return agg


def run_table3(config: ExperimentConfig) -> ExperimentReport:
    return _run("table3", _table3_trial, config, None)


# -- Figures 1-2: spectra for plotting ------------------------------------------------

def _safe_log(x: float):
    return math.log(x) if x > 0 else None


def _figures_trial(job) -> list[dict]:
    config, t, qs = job
    out = []
    for m in config.ms:
        lam_A, lam_H = trial_spectra(config, t, m)
        top = min(config.n, math.ceil(m) + FIGURE_EXTRA)
        for j in range(top):
            a, h, q = float(lam_A[j]), float(lam_H[j]), float(qs[m][j])
            out.append({"trial": t, "m": m, "j": j, "lambda_AA": a, "lambda_H": h, "lambda_Q": q,
                        "log_AA": _safe_log(a), "log_H": _safe_log(h), "log_Q": _safe_log(q)})
    return out


def _aggregate_figures(records, config):
    agg = {}
    for m, rows in _by_m(records).items():
        trials = sorted({r["trial"] for r in rows})
        first = [r for r in rows if r["trial"] == trials[0]]
        entry = {
            "count_AA_above_half": _stats([sum(1 for r in rows if r["trial"] == t and r["lambda_AA"] > 0.5)
                                           for t in trials]),
            "count_H_above_half": _stats([sum(1 for r in rows if r["trial"] == t and r["lambda_H"] > 0.5)
                                          for t in trials]),
            "count_Q_above_half": sum(1 for r in first if r["lambda_Q"] > 0.5),
        }
        if m >= 3:
            q = sinc_operator_spectrum(m, config.quad_for(m))
            fit = fit_decay(q, m)
            entry["decay_eta"] = fit.eta
            entry["decay_C"] = fit.C
        agg[mkey(m)] = entry
    return agg


def run_figures(config: ExperimentConfig) -> ExperimentReport:
    return _run("figures", _figures_trial, config, _q_values(config))


# -- degrees of freedom -------------------------------------------------------------------

def _eps_key(eps: float) -> str:
    return format(eps, "g")


def _dof_trial(job) -> list[dict]:
    config, t, _ = job
    out = []
    for m in config.ms:
        lam_A, lam_H = trial_spectra(config, t, m)
        rec = {"trial": t, "m": m, "n": config.n}
        for eps in DOF_EPSILONS:
            rec[f"deg_H_eps{_eps_key(eps)}"] = metrics.deg_inf(lam_H, eps)
            rec[f"deg_AA_eps{_eps_key(eps)}"] = metrics.deg_inf(lam_A, eps)
        out.append(rec)
    return out


def _aggregate_dof(records, config):
    agg = {}
    for m, rows in _by_m(records).items():
        q = sinc_operator_spectrum(m, config.quad_for(m))
        entry = {}
        for eps in DOF_EPSILONS:
            e = _eps_key(eps)
            dh = [r[f"deg_H_eps{e}"] for r in rows]
            da = [r[f"deg_AA_eps{e}"] for r in rows]
            per_alpha = {}
            for a in DOF_ALPHAS:
                h = metrics.randomized_from_degrees(dh, a)
                aa = metrics.randomized_from_degrees(da, a)
                per_alpha[format(a, "g")] = {"deg_H": h, "deg_AA": aa, "dev_H": h - m, "dev_AA": aa - m}
            qi = metrics.deg_inf(q, eps)
            q2 = metrics.deg_2(q, eps)
            entry[e] = {"deg_inf_Q": qi, "dev_inf_Q": qi - m, "deg_2_Q": q2, "dev_2_Q": q2 - m,
                        "randomized": per_alpha}
        entry["trials"] = len(rows)
        agg[mkey(m)] = entry
    return agg


def run_dof(config: ExperimentConfig) -> ExperimentReport:
    if config.trials < metrics.MIN_RANDOMIZED_TRIALS:
        raise ValueError(f"dof needs at least {metrics.MIN_RANDOMIZED_TRIALS} trials, got {config.trials}")
    return _run("dof", _dof_trial, config, None)


AGGREGATORS = {
    "table2": _aggregate_table2,
    "coverage": _aggregate_coverage,
    "table3": _aggregate_table3,
    "figures": _aggregate_figures,
    "dof": _aggregate_dof,
}

_COLUMNS = {
    "table2": ("trial", "m", "n", "err_AH", "err_HQ", "err_AQ", "sqrt_m_over_n"),
    "coverage": ("trial", "m", "n", "dist_AH", "dist_HQ", "dist_AQ", "indiv_maxdev", "bound_theorem1",
                 "bound_prop2", "bound_theorem2", "bound_individual"),
    "table3": ("trial", "m", "n", "p", "C_m", "C_tilde", "C_approx", "E_m", "Er_m"),
    "figures": ("trial", "m", "j", "lambda_AA", "lambda_H", "lambda_Q", "log_AA", "log_H", "log_Q"),
    "dof": ("trial", "m", "n") + tuple(f"deg_{k}_eps{_eps_key(e)}" for e in DOF_EPSILONS for k in ("H", "AA")),
}
