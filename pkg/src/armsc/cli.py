"""Command-line entry point: ``armsc {solve,cluster,synth,rankfig,replay}``.

Exit codes: 0 success, 1 input/configuration/numerical error, 2 the solver
hit its iteration cap without meeting the feasibility tolerance.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import nullcontext

import numpy as np

from . import __version__
from .evaluation import (PROFILE_COLUMNS, CorruptionSpec, SubspaceSpec, block_diag_mass,
                         clustering_error, corrupt, generate_subspaces, rank_approx_profile,
                         write_table)
from .matrix_io import MatrixFormatError, load_labels, load_matrix, save_labels, save_matrix
from .pipeline import cluster_subspaces
from .prox import DcConfig
from .solver import TRACE_COLUMNS, SolverConfig, SolverError, solve_arm, solve_lrr_baseline

log = logging.getLogger("armsc")

EXIT_OK, EXIT_ERROR, EXIT_NONCONVERGED = 0, 1, 2

PRESETS = {
    "motion": dict(lam=2.0, mu0=10.0, rho=1.05, error_model="l21"),
    "face": dict(lam=1e-5, mu0=1.7, rho=1.03, error_model="l1"),
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage, which collides with the non-convergence code
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _add_solver_flags(p):
    g = p.add_argument_group("solver")
    g.add_argument("--preset", choices=sorted(PRESETS), default="motion",
                   help="base parameter set (default: motion)")
    g.add_argument("--lambda", dest="lam", type=float, help="error weight")
    g.add_argument("--mu0", type=float, help="initial penalty")
    g.add_argument("--rho", type=float, help="penalty growth factor (> 1)")
    g.add_argument("--error-model", choices=["fro", "l1", "l21"])
    g.add_argument("--tol", type=float, default=1e-5, help="feasibility tolerance")
    g.add_argument("--max-iters", type=int, default=150)
    g.add_argument("--dc-max-iters", type=int, default=50)
    g.add_argument("--dc-tol", type=float, default=1e-8)
    g.add_argument("--method", choices=["arm", "lrr"], default="arm")
    g.add_argument("--debug-descent", action="store_true",
                   help="check blockwise descent of the augmented Lagrangian")


def _solver_config(args, lam=None):
    base = dict(PRESETS[args.preset])
    for key in ("lam", "mu0", "rho", "error_model"):
        val = getattr(args, key)
        if val is not None:
            base[key] = val
    if lam is not None:
        base["lam"] = lam
    return SolverConfig(rel_tol=args.tol, max_iters=args.max_iters,
                        dc=DcConfig(max_iters=args.dc_max_iters, tol=args.dc_tol),
                        debug=args.debug_descent, **base)


def build_parser():
    parser = _Parser(prog="armsc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"armsc {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("solve", help="solve the ARM (or LRR) problem for a data matrix")
    p.add_argument("--input", required=True, help="data matrix, columns are samples")
    p.add_argument("--out-prefix", help="output path prefix (default: input stem)")
    p.add_argument("--save-xz", action="store_true", help="also write the clean part XZ")
    p.add_argument("--plot", action="store_true", help="render the convergence trace to PNG")
    _add_solver_flags(p)

    p = sub.add_parser("cluster", help="full pipeline: solve, affinity graph, NCuts")
    p.add_argument("--input", required=True)
    p.add_argument("--k", type=int, required=True, help="number of subspaces")
    p.add_argument("--truth", help="ground-truth labels; prints the clustering error")
    p.add_argument("--alpha", type=int, default=2, help="affinity sharpening exponent")
    p.add_argument("--seed", type=int, default=0, help="k-means seed")
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--svd-tol", type=float, default=1e-6, help="skinny SVD relative cut")
    p.add_argument("--out-prefix")
    p.add_argument("--plot", action="store_true", help="render W and the trace to PNG")
    _add_solver_flags(p)

    p = sub.add_parser("synth", help="generate union-of-subspaces data")
    p.add_argument("--m", type=int, required=True, help="ambient dimension")
    p.add_argument("--k", type=int, required=True, help="number of subspaces")
    p.add_argument("--dim", type=int, required=True, help="dimension of each subspace")
    p.add_argument("--points", type=int, required=True, help="points per subspace")
    p.add_argument("--dependent", action="store_true",
                   help="draw bases independently at random instead of disjoint blocks")
    p.add_argument("--corruption", choices=["none", "gaussian", "sparse", "sample"],
                   default="none")
    p.add_argument("--level", type=float, default=0.0)
    p.add_argument("--magnitude", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0,
                   help="data seed; corruption uses seed + 1")
    p.add_argument("--out-prefix", required=True)

    p = sub.add_parser("rankfig", help="figure data: rank surrogate surface or lambda sweep")
    p.add_argument("--mode", choices=["surface", "lambda-sweep"], required=True)
    p.add_argument("--sigma-max", type=float, default=20.0)
    p.add_argument("--steps", type=int, default=41)
    p.add_argument("--input")
    p.add_argument("--truth")
    p.add_argument("--k", type=int, help="subspace count (default: from --truth)")
    p.add_argument("--lambdas", type=_float_list, default=[1.0, 1.5, 2.0, 2.5, 3.0])
    p.add_argument("--alpha", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--plot", action="store_true", help="render the table to PNG")
    _add_solver_flags(p)

    p = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    p.add_argument("manifest")
    return parser


# -- manifest ---------------------------------------------------------------

def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


class Manifest:
    """Ordered ``key=value`` record of one run."""

    def __init__(self, command, argv):
        self.items = [("command", command), ("armsc_version", __version__),
                      ("argv", json.dumps(argv)), ("cwd", os.getcwd())]
        self._t0 = None

    def add(self, key, value):
        self.items.append((key, value))

    def add_config(self, prefix, cfg_dict):
        for key, val in cfg_dict.items():
            self.add(f"{prefix}.{key}", val)

    def add_input(self, key, path):
        self.add(f"input.{key}", os.path.abspath(path))
        self.add(f"input.{key}.sha256", _sha256(path))

    def stage(self, name):
        manifest = self

        class _Stage:
            def __enter__(self):
                self.t0 = time.perf_counter()

            def __exit__(self, *exc):
                manifest.add(f"time.{name}_s", f"{time.perf_counter() - self.t0:.4f}")
                return False

        return _Stage()

    def write(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            for key, val in self.items:
                fh.write(f"{key}={val}\n")


def read_manifest(path):
    out = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line or "=" not in line:
                continue
            key, val = line.split("=", 1)
            out[key] = val
    return out


def _write_trace(result, path):
    rows = [tuple(getattr(rec, c) for c in TRACE_COLUMNS) for rec in result.trace]
    write_table(path, TRACE_COLUMNS, rows)


def _trace_summary(manifest, result):
    last = result.trace[-1]
    manifest.add("result.method", result.method)
    manifest.add("result.converged", result.converged)
    manifest.add("result.iterations", result.iterations)
    manifest.add("result.final_objective", repr(last.objective))
    manifest.add("result.final_r1", repr(last.r1))
    manifest.add("result.final_r2", repr(last.r2))
    manifest.add("result.final_mu", repr(last.mu))
    manifest.add("result.arctan_rank", repr(last.arctan_rank))
    manifest.add("result.nuclear_norm", repr(last.nuclear_norm))
    manifest.add("result.max_abs_y1", repr(max(r.y1_max for r in result.trace)))
    manifest.add("result.max_abs_y2", repr(max(r.y2_max for r in result.trace)))
    manifest.add("result.gram_invertible", result.gram_invertible)
    if result.descent_violations:
        manifest.add("result.descent_violations", result.descent_violations)


def _prefix(args):
    if args.out_prefix:
        return args.out_prefix
    return os.path.splitext(args.input)[0]


# -- commands ---------------------------------------------------------------

def cmd_solve(args, argv):
    cfg = _solver_config(args)
    man = Manifest("solve", argv)
    man.add_input("matrix", args.input)
    man.add_config("solver", cfg.as_dict())
    man.add("solver.method", args.method)
    with man.stage("load"):
        X = load_matrix(args.input)
    with man.stage("solve"):
        solver = solve_arm if args.method == "arm" else solve_lrr_baseline
        res = solver(X, cfg)
    prefix = _prefix(args)
    outputs = {"Z": f"{prefix}_Z.csv", "E": f"{prefix}_E.csv", "trace": f"{prefix}_trace.csv"}
    save_matrix(res.Z, outputs["Z"])
    save_matrix(res.E, outputs["E"])
    _write_trace(res, outputs["trace"])
    if args.save_xz:
        outputs["XZ"] = f"{prefix}_XZ.csv"
        save_matrix(X @ res.Z, outputs["XZ"])
    if args.plot:
        from .plotting import plot_trace

        outputs["trace_png"] = f"{prefix}_trace.png"
        plot_trace(res, outputs["trace_png"])
    for key, path in outputs.items():
        man.add(f"output.{key}", path)
    _trace_summary(man, res)
    man.write(f"{prefix}_manifest.txt")
    print(f"{args.method}: {res.iterations} iterations, converged={res.converged}, "
          f"r1={res.trace[-1].r1:.3e}, r2={res.trace[-1].r2:.3e}, "
          f"arctan-rank={res.trace[-1].arctan_rank:.6g}, "
          f"nuclear={res.trace[-1].nuclear_norm:.6g}")
    return EXIT_OK if res.converged else EXIT_NONCONVERGED


def cmd_cluster(args, argv):
    cfg = _solver_config(args)
    man = Manifest("cluster", argv)
    man.add_input("matrix", args.input)
    man.add_config("solver", cfg.as_dict())
    man.add("solver.method", args.method)
    man.add_config("spectral", {"k": args.k, "seed": args.seed, "restarts": args.restarts})
    man.add_config("affinity", {"alpha": args.alpha, "svd_rel_tol": args.svd_tol})
    with man.stage("load"):
        X = load_matrix(args.input)
        truth = None
        if args.truth:
            man.add_input("truth", args.truth)
            truth = load_labels(args.truth)
            if truth.size != X.shape[1]:
                raise UsageError(f"--truth has {truth.size} labels but the data has "
                                 f"{X.shape[1]} samples")
    if not 1 <= args.k <= X.shape[1]:
        raise UsageError(f"--k must lie in [1, {X.shape[1]}]")
    with man.stage("pipeline"):
        out = cluster_subspaces(X, args.k, cfg, alpha=args.alpha, seed=args.seed,
                                method=args.method, svd_rel_tol=args.svd_tol,
                                restarts=args.restarts)
    prefix = _prefix(args)
    outputs = {"labels": f"{prefix}_labels.txt", "W": f"{prefix}_W.csv",
               "trace": f"{prefix}_trace.csv"}
    save_labels(out.labels, outputs["labels"])
    save_matrix(out.graph.W, outputs["W"])
    _write_trace(out.solve, outputs["trace"])
    if args.plot:
        from .plotting import plot_affinity, plot_trace

        outputs["W_png"] = f"{prefix}_W.png"
        outputs["trace_png"] = f"{prefix}_trace.png"
        order = np.argsort(truth, kind="stable") if truth is not None else None
        plot_affinity(out.graph.W, outputs["W_png"], order=order)
        plot_trace(out.solve, outputs["trace_png"])
    for key, path in outputs.items():
        man.add(f"output.{key}", path)
    _trace_summary(man, out.solve)
    man.add("graph.rank", out.graph.rank)
    man.add("graph.isolated", int(out.graph.zero_rows.sum()))
    man.add("kmeans.degenerate", out.info["degenerate"])
    if truth is not None:
        err = clustering_error(out.labels, truth)
        mass = block_diag_mass(out.graph.W, truth)
        man.add("eval.clustering_error", repr(err))
        man.add("eval.block_diag_mass", repr(mass))
        print(f"clustering error: {100 * err:.2f}%")
        print(f"block-diagonal mass: {mass:.4f}")
    man.write(f"{prefix}_manifest.txt")
    return EXIT_OK if out.solve.converged else EXIT_NONCONVERGED


def cmd_synth(args, argv):
    spec = SubspaceSpec(args.m, args.k, args.dim, args.points, seed=args.seed,
                        independent=not args.dependent)
    cspec = CorruptionSpec(args.corruption, args.level, args.magnitude, seed=args.seed + 1)
    man = Manifest("synth", argv)
    man.add_config("subspaces", {"m": args.m, "k": args.k, "dim": args.dim,
                                 "points": args.points, "seed": args.seed,
                                 "independent": spec.independent})
    man.add_config("corruption", {"model": cspec.model, "level": cspec.level,
                                  "magnitude": cspec.magnitude, "seed": cspec.seed})
    with man.stage("generate"):
        X, labels = generate_subspaces(spec)
        Xc, E = corrupt(X, cspec)
    outputs = {"X": f"{args.out_prefix}_X.csv", "labels": f"{args.out_prefix}_labels.txt",
               "E_true": f"{args.out_prefix}_E.csv"}
    save_matrix(Xc, outputs["X"])
    save_labels(labels, outputs["labels"])
    save_matrix(E, outputs["E_true"])
    for key, path in outputs.items():
        man.add(f"output.{key}", path)
    man.write(f"{args.out_prefix}_manifest.txt")
    print(f"wrote {Xc.shape[0]}x{Xc.shape[1]} data to {outputs['X']}")
    return EXIT_OK


def _sweep_one(X, truth, k, cfg, args):
    out = cluster_subspaces(X, k, cfg, alpha=args.alpha, seed=args.seed, method=args.method)
    return (cfg.lam, clustering_error(out.labels, truth), out.solve.iterations,
            int(out.solve.converged))


def cmd_rankfig(args, argv):
    man = Manifest("rankfig", argv)
    man.add("mode", args.mode)
    outputs = {"table": args.out}
    if args.mode == "surface":
        man.add_config("surface", {"sigma_max": args.sigma_max, "steps": args.steps})
        rows = rank_approx_profile(args.sigma_max, args.steps)
        write_table(args.out, PROFILE_COLUMNS, rows)
        if args.plot:
            from .plotting import plot_rank_surface

            outputs["png"] = os.path.splitext(args.out)[0] + ".png"
            plot_rank_surface(rows, outputs["png"])
    else:
        if not args.input or not args.truth:
            raise UsageError("lambda-sweep needs --input and --truth")
        if not args.lambdas:
            raise UsageError("--lambdas is empty")
        X = load_matrix(args.input)
        truth = load_labels(args.truth)
        man.add_input("matrix", args.input)
        man.add_input("truth", args.truth)
        if truth.size != X.shape[1]:
            raise UsageError("--truth length does not match the data")
        k = args.k or int(truth.max()) + 1
        cfgs = [_solver_config(args, lam=lam) for lam in args.lambdas]
        man.add_config("solver", {key: val for key, val in cfgs[0].as_dict().items()
                                  if key != "lam"})
        man.add("solver.lambdas", ",".join(repr(c.lam) for c in cfgs))
        man.add("solver.method", args.method)
        man.add_config("spectral", {"k": k, "seed": args.seed, "alpha": args.alpha})
        with man.stage("sweep"):
            jobs = max(1, args.jobs)
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                rows = list(pool.map(lambda c: _sweep_one(X, truth, k, c, args), cfgs))
        write_table(args.out, ("lambda", "clustering_error", "iterations", "converged"), rows)
        errs = [r[1] for r in rows]
        man.add("eval.error_spread", repr(max(errs) - min(errs)))
        if args.plot:
            from .plotting import plot_lambda_sweep

            outputs["png"] = os.path.splitext(args.out)[0] + ".png"
            plot_lambda_sweep([r[0] for r in rows], errs, outputs["png"])
        for lam, err, its, _ in rows:
            print(f"lambda={lam:g}: clustering error {100 * err:.2f}% ({its} iterations)")
    for key, path in outputs.items():
        man.add(f"output.{key}", path)
    man.write(os.path.splitext(args.out)[0] + "_manifest.txt")
    return EXIT_OK


def cmd_replay(args, argv):
    rec = read_manifest(args.manifest)
    if "argv" not in rec:
        raise UsageError(f"{args.manifest} has no recorded argv")
    replay_argv = json.loads(rec["argv"])
    cwd = rec.get("cwd")
    ctx = _chdir(cwd) if cwd and os.path.isdir(cwd) else nullcontext()
    with ctx:
        return main(replay_argv)


class _chdir:
    def __init__(self, path):
        self.path = path

    def __enter__(self):
        self.old = os.getcwd()
        os.chdir(self.path)

    def __exit__(self, *exc):
        os.chdir(self.old)
        return False


COMMANDS = {"solve": cmd_solve, "cluster": cmd_cluster, "synth": cmd_synth,
            "rankfig": cmd_rankfig, "replay": cmd_replay}


def _thread_limit():
    value = os.environ.get("ARM_NUM_THREADS")
    if not value:
        return nullcontext()
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=int(value))


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_ERROR
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        with _thread_limit():
            return COMMANDS[args.command](args, argv)
    except UsageError as exc:
        print(f"armsc {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (OSError, MatrixFormatError, ValueError, SolverError,
            np.linalg.LinAlgError) as exc:
        print(f"armsc {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
