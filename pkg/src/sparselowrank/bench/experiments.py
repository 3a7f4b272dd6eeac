"""Seeded experiment engine: synthetic trials in, CSV rows out.

A run is fully described by an :class:`ExperimentConfig`.  Trial ``t`` draws
all of its randomness from the ``t``-th child of ``SeedSequence(seed)``, so
the rows do not depend on how many worker processes execute the trials.
"""
import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..admm import SolverConfig
from ..clustering import accuracy, affinity, detect_outliers, spectral_cluster
from ..completion import CompletionProblem, complete
from ..core import relative_error
from ..diagnostics import boundedness_report, kkt_report
from ..lrr import LrrProblem, lrr
from ..regularizers import RegularizerSpec
from ..rpca import compare_variants, rpca
from .generators import gen_lowrank, gen_mask, gen_outliers, gen_sparse_error, gen_subspaces, trial_seeds

KINDS = ("completion", "rpca", "lrr-cluster")

# Regularizers for the completion comparison; "piecewise" takes the configured spec.
COMPLETION_PRESETS = {
    "nuclear": RegularizerSpec.nuclear(),
    "scad": RegularizerSpec("scad", theta=10.0),
    "mcp": RegularizerSpec("mcp", theta=10.0),
    "lp": RegularizerSpec("lp", p=0.25),
    "capped_l1": RegularizerSpec("capped_l1", theta=70.0),
    "etp": RegularizerSpec("etp", theta=0.1),
}

ADMM_VARIANTS = ("convex", "convex+dm", "nonconvex", "nonconvex+dm")

DEFAULTS = {
    "completion": dict(m=150, n=150, d=10, methods=("piecewise",), spec=RegularizerSpec.piecewise()),
    "rpca": dict(m=100, n=100, d=10, methods=ADMM_VARIANTS, max_iter=150,
                 spec=RegularizerSpec.piecewise((0.1, 0.2), (5.0, 50.0, 60.0))),
    "lrr-cluster": dict(methods=ADMM_VARIANTS, max_iter=100,
                        spec=RegularizerSpec.piecewise((0.1, 0.2), (12.0, 40.0, 60.0))),
}

EXTRA_FIELDS = {
    "completion": ("relative_error",),
    "rpca": ("final_error", "relative_error", "kkt_primal", "kkt_e_dual", "kkt_l_fixed_point", "bounded"),
    "lrr-cluster": ("accuracy", "outlier_recall", "inlier_misflag"),
}
PRIMARY_METRIC = {"completion": "relative_error", "rpca": "final_error", "lrr-cluster": "accuracy"}
BASE_FIELDS = ("kind", "trial", "method", "metric", "value", "mean", "min", "std", "count",
               "iterations", "converged", "error")


@dataclass
class ExperimentConfig:
    """Everything needed to reproduce one experiment.

    ``fraction`` is the sparse-error support (rpca); ``observed`` is the
    sampled share of entries (completion).  ``spec`` and ``max_iter`` default
    per kind when left as ``None``.  ``timing=True`` adds wall-clock columns,
    which makes the CSV non-reproducible byte for byte.
    """

    kind: str = "rpca"
    m: int = None
    n: int = None
    d: int = None
    fraction: float = 0.2
    observed: float = 0.5
    alpha: float = 1.0
    trials: int = 1
    seed: int = 0
    methods: tuple = None
    spec: RegularizerSpec = None
    lam: float = 0.1
    mu0: float = 1e-3
    kappa: float = 1.2
    max_iter: int = None
    feas_tol: float = 1e-9
    alpha_rule: str = "sqrt"
    mu: float = 1.1
    step_tol: float = 1e-12
    ambient: int = 100
    dim: int = 10
    k: int = 10
    samples_per: int = 10
    outliers: int = 0
    gamma: str = "l21"
    outlier_threshold: float = 0.1
    output: str = None
    workers: int = 1
    timing: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        for key, val in DEFAULTS[self.kind].items():
            if getattr(self, key) is None:
                setattr(self, key, val)
        if self.kind == "completion" and self.max_iter is None:
            self.max_iter = 600
        self.methods = tuple(self.methods)
        for name, val in (("fraction", self.fraction), ("observed", self.observed)):
            if not 0 < val < 1:
                raise ValueError(f"{name} must lie in (0, 1)")
        if self.trials < 1:
            raise ValueError("trial count must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        allowed = ("piecewise",) + tuple(COMPLETION_PRESETS) if self.kind == "completion" else ADMM_VARIANTS
        bad = [m for m in self.methods if m not in allowed]
        if bad:
            raise ValueError(f"unknown methods {bad}; choose from {allowed}")

    def solver_config(self, method):
        """SolverConfig for one ADMM variant name."""
        spec = self.spec if method.startswith("nonconvex") else RegularizerSpec.nuclear()
        return SolverConfig(lam=self.lam, mu0=self.mu0, kappa=self.kappa, max_iter=self.max_iter,
                            feas_tol=self.feas_tol, momentum=method.endswith("+dm"), spec=spec,
                            alpha_rule=self.alpha_rule)


def _row(cfg, trial, method, **values):
    row = {"kind": cfg.kind, "trial": trial, "method": method, "metric": PRIMARY_METRIC[cfg.kind]}
    row.update(values)
    row["value"] = values.get(PRIMARY_METRIC[cfg.kind], math.nan)
    return row


def _guarded(cfg, trial, method, fn):
    start = time.perf_counter()
    try:
        row = _row(cfg, trial, method, **fn())
    except Exception as exc:  # one failed solve must not abort the sweep
        row = _row(cfg, trial, method, error=f"{type(exc).__name__}: {exc}")
    if cfg.timing:
        row["seconds"] = time.perf_counter() - start
        iters = row.get("iterations")
        if iters:
            row["seconds_per_100_iter"] = row["seconds"] * 100.0 / iters
    return row


def _completion_trial(cfg, trial, ss):
    s_data, s_mask = ss.spawn(2)
    O = gen_lowrank(cfg.m, cfg.n, cfg.d, s_data, dist="normal")
    mask = gen_mask(cfg.m, cfg.n, cfg.observed, s_mask)
    rows = []
    for method in cfg.methods:
        spec = cfg.spec if method == "piecewise" else COMPLETION_PRESETS[method]

        def solve(spec=spec):
            prob = CompletionProblem(mask, mask.project(O), spec=spec, mu=cfg.mu,
                                     max_iter=cfg.max_iter, step_tol=cfg.step_tol)
            X, trace = complete(prob)
            return {"relative_error": relative_error(X, O), "iterations": len(trace),
                    "converged": len(trace) < cfg.max_iter}

        rows.append(_guarded(cfg, trial, method, solve))
    return rows


def rpca_instance(cfg, ss):
    """Planted ``(D, M)`` for one trial: uniform-factor low rank plus ``alpha`` times sparse error."""
    s_low, s_err = ss.spawn(2)
    M = gen_lowrank(cfg.m, cfg.n, cfg.d, s_low, dist="uniform")
    E = gen_sparse_error(cfg.m, cfg.n, cfg.fraction, s_err)
    return M + cfg.alpha * E, M


def _rpca_trial(cfg, trial, ss):
    D, M = rpca_instance(cfg, ss)
    rows = []
    for method in cfg.methods:
        scfg = cfg.solver_config(method)

        def solve(scfg=scfg):
            res = rpca(D, scfg)
            kkt = kkt_report(res, D, scfg)
            bounded = not boundedness_report(res.trace, np.linalg.norm(D)).diverged
            return {"final_error": float(np.linalg.norm(res.L - M)), "relative_error": relative_error(res.L, M),
                    "kkt_primal": kkt.primal, "kkt_e_dual": kkt.e_dual, "kkt_l_fixed_point": kkt.l_fixed_point,
                    "bounded": bounded, "iterations": res.iterations, "converged": res.converged}

        rows.append(_guarded(cfg, trial, method, solve))
    return rows


def cluster_instance(cfg, ss):
    """``(D, labels)`` for one trial; appended outlier columns carry label ``-1``."""
    s_sub, s_out = ss.spawn(2)
    D, labels = gen_subspaces(cfg.ambient, cfg.dim, cfg.k, cfg.samples_per, s_sub)
    if cfg.outliers:
        target = float(np.linalg.norm(D, axis=0).mean())
        D = np.hstack([D, gen_outliers(cfg.ambient, cfg.outliers, s_out, target)])
        labels = np.concatenate([labels, -np.ones(cfg.outliers, dtype=labels.dtype)])
    return D, labels


def _cluster_trial(cfg, trial, ss):
    D, labels = cluster_instance(cfg, ss)
    km_seed = int(ss.generate_state(1)[0])
    is_out = labels < 0
    rows = []
    for method in cfg.methods:
        scfg = cfg.solver_config(method)

        def solve(scfg=scfg):
            res = lrr(LrrProblem(D, gamma=cfg.gamma, config=scfg))
            W = affinity(res.Z)
            flags = detect_outliers(W, cfg.outlier_threshold) if cfg.outliers else None
            pred = spectral_cluster(W, cfg.k, seed=km_seed, outliers=flags)
            out = {"accuracy": accuracy(pred, labels, flags), "iterations": res.iterations,
                   "converged": res.converged}
            if cfg.outliers:
                out["outlier_recall"] = float(flags[is_out].mean())
                out["inlier_misflag"] = float(flags[~is_out].mean())
            return out

        rows.append(_guarded(cfg, trial, method, solve))
    return rows


_TRIALS = {"completion": _completion_trial, "rpca": _rpca_trial, "lrr-cluster": _cluster_trial}


def _run_trial(args):
    cfg, trial, ss = args
    return _TRIALS[cfg.kind](cfg, trial, ss)


def _aggregate(cfg, per_trial):
    fields = [PRIMARY_METRIC[cfg.kind]] + [f for f in EXTRA_FIELDS[cfg.kind] if f != PRIMARY_METRIC[cfg.kind]]
    fields += ["iterations"] + (["seconds", "seconds_per_100_iter"] if cfg.timing else [])
    rows = []
    for method in cfg.methods:
        mine = [r for r in per_trial if r["method"] == method]
        for name in fields:
            vals = np.array([float(r[name]) for r in mine if name in r], dtype=np.float64)
            vals = vals[np.isfinite(vals)]
            if vals.size == 0:
                continue
            rows.append({"kind": cfg.kind, "trial": "aggregate", "method": method, "metric": name,
                         "mean": float(vals.mean()), "min": float(vals.min()), "std": float(vals.std()),
                         "count": int(vals.size)})
    return rows


def run_experiment(cfg):
    """Run every trial and method; return per-trial rows followed by aggregate rows."""
    seeds = trial_seeds(cfg.seed, cfg.trials)
    jobs = [(cfg, t, seeds[t]) for t in range(cfg.trials)]
    if cfg.workers > 1 and cfg.trials > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            chunks = list(pool.map(_run_trial, jobs))
    else:
        chunks = [_run_trial(job) for job in jobs]
    per_trial = [row for chunk in chunks for row in chunk]
    return per_trial + _aggregate(cfg, per_trial)


def rpca_curves(cfg):
    """Mean ``||L_k - M||_F`` per iteration for each ADMM variant, as CSV-ready rows."""
    if cfg.kind != "rpca":
        raise ValueError("curves are only defined for the rpca experiment")
    seeds = trial_seeds(cfg.seed, cfg.trials)
    Ds, Ms = zip(*(rpca_instance(cfg, ss) for ss in seeds))
    curves = compare_variants(list(Ds), list(Ms), [cfg.solver_config(m) for m in cfg.methods], cfg.max_iter)
    return [{"method": m, "iteration": i + 1, "mean_error": float(v)}
            for m, curve in zip(cfg.methods, curves) for i, v in enumerate(curve)]


def format_value(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def columns_for(cfg):
    cols = list(BASE_FIELDS) + [f for f in EXTRA_FIELDS[cfg.kind] if f != PRIMARY_METRIC[cfg.kind]]
    if cfg.timing:
        cols += ["seconds", "seconds_per_100_iter"]
    return cols


def rows_to_csv(rows, columns):
    """Render rows as CSV text: header first, floats with 17 significant digits."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([format_value(row.get(c)) for c in columns])
    return buf.getvalue()


def experiment_csv(cfg, rows=None):
    rows = run_experiment(cfg) if rows is None else rows
    return rows_to_csv(rows, columns_for(cfg))

