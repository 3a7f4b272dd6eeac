"""Command-line front end: ``sparselowrank <subcommand> [options]``.

Every option can also come from ``--config FILE`` (flat ``key=value`` lines,
keys named like the long options without dashes).  Values from the file win
over values given on the command line.  On failure the process exits with
status 1 and prints one JSON line ``{"error": ..., "message": ...}`` to stderr.
"""
import argparse
import json
import sys

import numpy as np

from .admm import ALPHA_RULES
from .bench.config import ConfigError, read_config
from .bench.experiments import ADMM_VARIANTS, DEFAULTS, KINDS, ExperimentConfig
from .bench.experiments import cluster_instance, columns_for, rows_to_csv, rpca_curves, rpca_instance, run_experiment
from .bench.generators import gen_lowrank, gen_mask, trial_seeds
from .bench.pgm import image_read, image_write
from .clustering import accuracy, affinity, detect_outliers, spectral_cluster
from .completion import CompletionProblem, complete
from .core import psnr, relative_error
from .diagnostics import boundedness_report, kkt_report, lrr_kkt_report, partial_sums_stable, rate_report
from .lrr import LrrProblem, lrr
from .regularizers import FAMILIES, RegularizerSpec
from .rpca import rpca

# config-file keys that differ from option destinations
CONFIG_ALIASES = {"lambda": "reg_lambda"}


def load_matrix(path):
    """Read a matrix from ``.pgm`` (scaled to [0, 1]), ``.npy`` or comma-separated text."""
    if path.endswith(".pgm"):
        return image_read(path)
    if path.endswith(".npy"):
        return np.load(path)
    return np.loadtxt(path, delimiter=",", ndmin=2)


def save_matrix(path, X):
    if path.endswith(".pgm"):
        image_write(path, X)
    elif path.endswith(".npy"):
        np.save(path, X)
    else:
        np.savetxt(path, X, delimiter=",", fmt="%.17g")


def _bool(text):
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _add_common(p):
    p.add_argument("--config", help="flat key=value file; its values override flags")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", help="output path")


def _add_regularizer(p):
    g = p.add_argument_group("regularizer")
    g.add_argument("--family", choices=FAMILIES, default="piecewise")
    g.add_argument("--reg-lambda", type=float, default=1.0, help="global weight of the rank surrogate")
    g.add_argument("--theta", type=float)
    g.add_argument("--p", type=float, help="exponent for the lp family")
    for name, default in (("a1", 0.1), ("a2", 0.2)):
        g.add_argument(f"--{name}", type=float, default=default)
    for name in ("p1", "p2", "p3"):
        g.add_argument(f"--{name}", type=float, help="piecewise knot (default depends on the subcommand)")


def _add_admm(p, max_iter):
    g = p.add_argument_group("solver")
    g.add_argument("--method", choices=ADMM_VARIANTS, default="nonconvex+dm")
    g.add_argument("--lam", type=float, default=0.1, help="weight of the sparse-error norm")
    g.add_argument("--mu0", type=float, default=1e-3)
    g.add_argument("--kappa", type=float, default=1.2)
    g.add_argument("--max-iter", type=int, default=max_iter)
    g.add_argument("--feas-tol", type=float, default=1e-9)
    g.add_argument("--alpha-rule", choices=ALPHA_RULES, default="sqrt")


def _add_subspaces(p):
    g = p.add_argument_group("synthetic subspaces")
    g.add_argument("--ambient", type=int, default=100)
    g.add_argument("--dim", type=int, default=10)
    g.add_argument("--k", type=int, default=10, help="number of subspaces / clusters")
    g.add_argument("--samples-per", type=int, default=10)
    g.add_argument("--outliers", type=int, default=0)
    g.add_argument("--gamma", choices=("l1", "l21"), default="l21")


def build_parser():
    parser = argparse.ArgumentParser(prog="sparselowrank", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("complete", help="matrix completion (synthetic or a PGM image)")
    _add_common(p)
    _add_regularizer(p)
    p.add_argument("--input", help="image or matrix to complete (default: synthetic low-rank)")
    p.add_argument("--m", type=int, default=150)
    p.add_argument("--n", type=int, default=150)
    p.add_argument("--d", type=int, default=10)
    p.add_argument("--observed", type=float, default=0.5, help="fraction of observed entries")
    p.add_argument("--mu", type=float, default=1.1)
    p.add_argument("--max-iter", type=int, default=600)
    p.add_argument("--step-tol", type=float, default=1e-12)

    for name, helptext in (("rpca", "robust PCA on a matrix or a synthetic instance"),
                           ("diag", "convergence diagnostics of one synthetic solve as CSV")):
        p = sub.add_parser(name, help=helptext)
        _add_common(p)
        _add_regularizer(p)
        _add_admm(p, 150)
        p.add_argument("--m", type=int, default=100)
        p.add_argument("--n", type=int, default=100)
        p.add_argument("--d", type=int, default=10)
        p.add_argument("--fraction", type=float, default=0.2, help="sparse error support fraction")
        p.add_argument("--alpha", type=float, default=1.0, help="sparse error magnitude")
        if name == "rpca":
            p.add_argument("--input", help="data matrix (.pgm, .npy or .csv); default: synthetic")
            p.add_argument("--output-sparse", help="where to write the sparse part")
        else:
            p.add_argument("--solver", choices=("rpca", "lrr"), default="rpca")
            p.add_argument("--K", type=int, nargs="+", default=[20, 50, 100], help="rate check horizons")
            _add_subspaces(p)

    for name, helptext in (("lrr", "low-rank representation; writes Z"),
                           ("cluster", "LRR + spectral clustering; writes labels CSV")):
        p = sub.add_parser(name, help=helptext)
        _add_common(p)
        _add_regularizer(p)
        _add_admm(p, 100)
        _add_subspaces(p)
        p.add_argument("--input", help="data matrix with samples as columns; default: synthetic")
        if name == "cluster":
            p.add_argument("--outlier-threshold", type=float, default=0.1)

    p = sub.add_parser("bench", help="run a seeded multi-trial experiment and emit CSV")
    _add_common(p)
    _add_regularizer(p)
    p.add_argument("--kind", choices=KINDS, default="rpca")
    p.add_argument("--m", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--fraction", type=float, default=0.2)
    p.add_argument("--observed", type=float, default=0.5)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--methods", help="comma-separated methods (default depends on --kind)")
    p.add_argument("--lam", type=float, default=0.1)
    p.add_argument("--mu0", type=float, default=1e-3)
    p.add_argument("--kappa", type=float, default=1.2)
    p.add_argument("--max-iter", type=int)
    p.add_argument("--feas-tol", type=float, default=1e-9)
    p.add_argument("--alpha-rule", choices=ALPHA_RULES, default="sqrt")
    p.add_argument("--mu", type=float, default=1.1)
    p.add_argument("--step-tol", type=float, default=1e-12)
    _add_subspaces(p)
    p.add_argument("--outlier-threshold", type=float, default=0.1)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--timing", action="store_true", help="add wall-clock columns (not reproducible)")
    p.add_argument("--curves", help="also write mean error-per-iteration curves (rpca only)")
    return parser


def apply_config(parser, args):
    """Overwrite parsed options with values from ``--config``, coerced like the flags."""
    if not args.config:
        return args
    sub = parser._subparsers._group_actions[0].choices[args.command]
    actions = {a.dest: a for a in sub._actions}
    for key, raw in read_config(args.config).items():
        dest = CONFIG_ALIASES.get(key, key)
        if dest not in actions or dest in ("help", "config"):
            raise ConfigError(f"unknown config key {key!r} for {args.command}")
        action = actions[dest]
        if isinstance(action, argparse._StoreTrueAction):
            val = _bool(raw)
        elif action.nargs in ("+", "*"):
            val = [action.type(v) for v in raw.replace(",", " ").split()]
        else:
            val = action.type(raw) if action.type else raw
            if action.choices is not None and val not in action.choices:
                raise ConfigError(f"{key}={raw!r} is not one of {list(action.choices)}")
        setattr(args, dest, val)
    return args


def regularizer_from(args, kind):
    if args.family == "piecewise":
        base = DEFAULTS[kind]["spec"]
        knots = [base.p1 if args.p1 is None else args.p1, base.p2 if args.p2 is None else args.p2,
                 base.p3 if args.p3 is None else args.p3]
        return RegularizerSpec.piecewise((args.a1, args.a2), knots, lam=args.reg_lambda)
    return RegularizerSpec(args.family, lam=args.reg_lambda, theta=args.theta, p=args.p)


def _experiment(args, kind, **overrides):
    fields = dict(kind=kind, seed=args.seed, spec=regularizer_from(args, kind))
    for name in ("m", "n", "d", "fraction", "alpha", "lam", "mu0", "kappa", "max_iter", "feas_tol", "alpha_rule",
                 "ambient", "dim", "k", "samples_per", "outliers", "gamma", "outlier_threshold"):
        if hasattr(args, name):
            fields[name] = getattr(args, name)
    fields.update(overrides)
    return ExperimentConfig(**fields)


def _emit(text, path):
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _summary(**values):
    print(" ".join(f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}" for k, v in values.items()))


def cmd_complete(args):
    spec = regularizer_from(args, "completion")
    rng_seed = np.random.SeedSequence(args.seed)
    s_data, s_mask = rng_seed.spawn(2)
    if args.input:
        O = load_matrix(args.input)
    else:
        O = gen_lowrank(args.m, args.n, args.d, s_data)
    mask = gen_mask(O.shape[0], O.shape[1], args.observed, s_mask)
    prob = CompletionProblem(mask, mask.project(O), spec=spec, mu=args.mu, max_iter=args.max_iter,
                             step_tol=args.step_tol)
    X, trace = complete(prob)
    _summary(relative_error=relative_error(X, O), psnr=psnr(np.clip(X, 0, 1), O) if args.input else float("nan"),
             iterations=len(trace))
    if args.output:
        save_matrix(args.output, X)


def cmd_rpca(args):
    cfg = _experiment(args, "rpca")
    scfg = cfg.solver_config(args.method)
    if args.input:
        D, M = load_matrix(args.input), None
    else:
        D, M = rpca_instance(cfg, trial_seeds(args.seed, 1)[0])
    res = rpca(D, scfg)
    kkt = kkt_report(res, D, scfg)
    extra = {} if M is None else {"final_error": float(np.linalg.norm(res.L - M))}
    _summary(iterations=res.iterations, converged=res.converged, primal=kkt.primal, **extra)
    if args.output:
        save_matrix(args.output, res.L)
    if args.output_sparse:
        save_matrix(args.output_sparse, res.E)


def _lrr_data(args, cfg):
    if args.input:
        return load_matrix(args.input), None
    return cluster_instance(cfg, trial_seeds(args.seed, 1)[0])


def cmd_lrr(args):
    cfg = _experiment(args, "lrr-cluster")
    D, _ = _lrr_data(args, cfg)
    res = lrr(LrrProblem(D, gamma=args.gamma, config=cfg.solver_config(args.method)))
    _summary(iterations=res.iterations, converged=res.converged, residual=res.trace.residual[-1])
    if args.output:
        save_matrix(args.output, res.Z)


def cmd_cluster(args):
    cfg = _experiment(args, "lrr-cluster")
    D, labels = _lrr_data(args, cfg)
    res = lrr(LrrProblem(D, gamma=args.gamma, config=cfg.solver_config(args.method)))
    W = affinity(res.Z)
    flags = detect_outliers(W, args.outlier_threshold) if (args.outliers or args.input) else np.zeros(D.shape[1], bool)
    pred = spectral_cluster(W, args.k, seed=args.seed, outliers=flags)
    rows = [{"sample_index": i, "label": int(pred[i]), "outlier_flag": bool(flags[i])} for i in range(D.shape[1])]
    _emit(rows_to_csv(rows, ["sample_index", "label", "outlier_flag"]), args.output)
    if labels is not None:
        print(f"accuracy={accuracy(pred, labels, flags):.6g} flagged={int(flags.sum())}", file=sys.stderr)


def cmd_bench(args):
    methods = tuple(m.strip() for m in args.methods.split(",")) if args.methods else None
    cfg = _experiment(args, args.kind, trials=args.trials, methods=methods, observed=args.observed, mu=args.mu,
                      step_tol=args.step_tol, workers=args.workers, timing=args.timing, output=args.output)
    rows = run_experiment(cfg)
    _emit(rows_to_csv(rows, columns_for(cfg)), cfg.output)
    if args.curves:
        _emit(rows_to_csv(rpca_curves(cfg), ["method", "iteration", "mean_error"]), args.curves)


TRACE_FIELDS = ("residual", "residual2", "dL", "dZ", "dE", "y_norm", "yhat_norm", "c_k", "lagrangian", "mu",
                "alpha", "coef")


def diag_rows(result, trace, K_list, kkt=None, data_norm=None):
    """Long-format diagnostic rows: per-iteration trace values, then one row per check."""
    rows = []
    for name in TRACE_FIELDS:
        for i, v in enumerate(getattr(trace, name)):
            rows.append({"section": "trace", "iteration": i + 1, "quantity": name, "value": v})
    if kkt is not None:
        for name in ("primal", "e_dual", "l_fixed_point"):
            rows.append({"section": "kkt", "quantity": name, "value": getattr(kkt, name)})
    bound = boundedness_report(trace, data_norm)
    for name, v in bound.maxima.items():
        rows.append({"section": "bounded", "quantity": name, "value": v, "bound": bound.limit,
                     "passed": not bound.diverged})
    try:
        for r in rate_report(trace, K_list):
            rows.append({"section": "rate", "iteration": r.K, "quantity": "min_step", "value": r.min_step,
                         "bound": r.bound, "passed": r.passed})
    except ValueError as exc:
        rows.append({"section": "rate", "quantity": "skipped", "value": str(exc)})
    rows.append({"section": "c_k", "quantity": "partial_sum", "value": float(np.nansum(trace.c_k)),
                 "passed": partial_sums_stable(trace.c_k)})
    rows.append({"section": "run", "quantity": "converged", "value": result.converged})
    return rows


def cmd_diag(args):
    if args.solver == "rpca":
        cfg = _experiment(args, "rpca")
        scfg = cfg.solver_config(args.method)
        D, _ = rpca_instance(cfg, trial_seeds(args.seed, 1)[0])
        res = rpca(D, scfg)
        kkt = kkt_report(res, D, scfg)
    else:
        cfg = _experiment(args, "lrr-cluster")
        scfg = cfg.solver_config(args.method)
        D, _ = cluster_instance(cfg, trial_seeds(args.seed, 1)[0])
        problem = LrrProblem(D, gamma=args.gamma, config=scfg)
        res = lrr(problem)
        kkt = lrr_kkt_report(res, problem)
    rows = diag_rows(res, res.trace, args.K, kkt, np.linalg.norm(D))
    _emit(rows_to_csv(rows, ["section", "iteration", "quantity", "value", "bound", "passed"]), args.output)


COMMANDS = {"complete": cmd_complete, "rpca": cmd_rpca, "lrr": cmd_lrr, "cluster": cmd_cluster,
            "bench": cmd_bench, "diag": cmd_diag}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        apply_config(parser, args)
        COMMANDS[args.command](args)
    except Exception as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
