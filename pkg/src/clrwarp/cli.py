"""Command-line interface: ``clrwarp {register,simulate,gradcheck,envelope}``.

Exit codes: 0 success, 2 input or parse error, 3 divergence, 4 I/O error,
5 verification failure.
"""

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .artifacts import (
    ParseError,
    RunManifest,
    parse_config_text,
    read_signal_csv,
    write_aligned_csv,
    write_config,
    write_json,
    write_signal_csv,
    write_trace_csv,
    write_warp_csv,
    fmt,
)
from .basis import build_centered_basis
from .metrics import recovery_report
from .mismatch import ALL_METHODS, AlignmentContext, MethodId, evaluate_mismatch
from .numerics import Grid
from .optimizer import DivergenceError, RegistrationConfig, asymmetry_probe, register
from .signals import EXPERIMENTS, EnvelopeError, WavFormatError, load_envelope, noisy_pair
from .verification import TOLERANCE, corrupted_kernel, gradient_check

log = logging.getLogger("clrwarp")

EXIT_OK, EXIT_PARSE, EXIT_DIVERGED, EXIT_IO, EXIT_VERIFY = 0, 2, 3, 4, 5

# Reference settings per experiment. The triangle pair runs a
# lambda contrast (unregularized vs regularized) instead of a single value.
EXPERIMENT_DEFAULTS = {
    "inverse_seesaw": dict(sigma=0.04, d=40, lam=(1e-5,), alpha=0.05, iters=4000),
    "three_gaussian": dict(sigma=0.08, d=20, lam=(4e-6,), alpha=0.8, iters=4000),
    "triangle_2to1": dict(sigma=0.0, d=20, lam=(0.0, 1e-4), alpha=0.2, iters=4000),
}
SIM_GRID = 1000


class CliError(Exception):
    def __init__(self, code, message):
        self.code = code
        super().__init__(message)


def _methods(value):
    if value == "all":
        return ALL_METHODS
    try:
        return (MethodId.parse(value),)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _add_config_flags(p):
    p.add_argument("--d", type=int, help="basis dimension")
    p.add_argument("--n-grid", type=int, dest="n_grid", help="grid size N")
    p.add_argument("--lambda", type=float, dest="lam", help="Sobolev weight")
    p.add_argument("--alpha", type=float, help="gradient step size")
    p.add_argument("--iters", type=int, help="iteration budget")
    p.add_argument("--rel-tol", type=float, dest="rel_tol", help="relative objective-change stop")
    p.add_argument("--seed", type=int, help="random seed")


def _overrides(args):
    return {
        "basis_dim": args.d,
        "grid_size": args.n_grid,
        "lam": args.lam,
        "step_size": args.alpha,
        "max_iters": args.iters,
        "rel_tol": args.rel_tol,
        "seed": args.seed,
    }


def build_parser():
    parser = argparse.ArgumentParser(
        prog="clrwarp", description="Sobolev-regularized CLR warp registration of 1-D signals."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("register", help="align g to f from two signal CSVs")
    p.add_argument("f_csv", type=Path, help="target signal (t,value)")
    p.add_argument("g_csv", type=Path, help="source signal (t,value)")
    p.add_argument("--config", type=Path, help="key=value config file")
    p.add_argument("--method", type=_methods, help="1, 2, 3, 4 or all")
    _add_config_flags(p)
    p.add_argument("--out", type=Path, required=True, help="output directory")

    p = sub.add_parser("simulate", help="run a synthetic experiment with its reference settings")
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--method", type=_methods, default=ALL_METHODS, help="1, 2, 3, 4 or all")
    p.add_argument("--sigma", type=float, help="noise level (overrides the experiment default)")
    _add_config_flags(p)
    p.add_argument("--out", type=Path, required=True, help="output directory")

    p = sub.add_parser("gradcheck", help="compare analytic gradients with finite differences")
    p.add_argument("--method", type=_methods, default=ALL_METHODS, help="1, 2, 3, 4 or all")
    p.add_argument("--d", type=int, default=10)
    p.add_argument("--n-grid", type=int, dest="n_grid", default=400)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dump-matrices", type=Path, metavar="DIR",
                   help="write the basis matrix B and stiffness R as CSV")
    p.add_argument("--corrupt-kernel", action="store_true", help=argparse.SUPPRESS)

    p = sub.add_parser("envelope", help="RMS envelope of a PCM16 mono WAV as a signal CSV")
    p.add_argument("wav", type=Path)
    p.add_argument("--window-ms", type=float, default=25.0, dest="window_ms")
    p.add_argument("--n-grid", type=int, dest="n_grid", default=1000)
    p.add_argument("--out", type=Path, required=True, help="output CSV path")
    return parser


def _mkdir(path):
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot create {path}: {exc}") from None
    return path


def _run(f, g, config, basis=None):
    try:
        return register(f, g, config, basis=basis)
    except DivergenceError as exc:
        raise CliError(EXIT_DIVERGED, f"method {int(config.method)}: {exc}") from None


def _summary(result, f, g, truth=None, basis=None):
    cfg = result.config
    warp = result.warp
    ctx = AlignmentContext.build(f.values, g.values, warp)
    forward, swapped = asymmetry_probe(f, g, cfg, result=result)
    out = {
        "method": int(cfg.method),
        "label": cfg.method.label,
        "config": cfg.to_dict(),
        "initial_objective": result.initial_objective,
        "final_objective": result.final_objective,
        "final_mismatch": result.final_mismatch,
        "final_penalty": result.final_penalty,
        "weighted_penalty": cfg.lam * result.final_penalty,
        "iterations_run": result.iterations_run,
        "converged": result.converged,
        "mismatch_all_methods": {m.label: evaluate_mismatch(m, ctx) for m in ALL_METHODS},
        "warp": {
            "min_gamma_prime": warp.min_gamma_prime,
            "max_gamma_prime": warp.max_gamma_prime,
            "diffeomorphism": warp.is_diffeomorphism(),
        },
        "aligned_rmse": float(np.sqrt(np.mean((f.values - ctx.warped_g) ** 2))),
        "asymmetry": {
            "forward": forward,
            "swapped": swapped,
            "relative_gap": abs(forward - swapped) / max(forward, 1e-300),
        },
        "coefficients": [float(c) for c in result.coeffs],
    }
    if truth is not None:
        out["recovery"] = recovery_report(result, truth, basis).to_dict()
        truth_ctx = AlignmentContext.build(f.values, g.values, truth.warp)
        out["mismatch_at_truth"] = evaluate_mismatch(cfg.method, truth_ctx)
    return out


def _write_run(run_dir, manifest, result, f, g, truth=None, basis=None):
    _mkdir(run_dir)
    warp = result.warp
    grid = warp.grid
    iso = None
    if result.config.method == MethodId.ISOMETRY:
        iso = result.aligned * np.sqrt(warp.gamma_prime)
    summary = _summary(result, f, g, truth, basis)
    write_warp_csv(manifest.add("warp", run_dir / "warp.csv"), warp)
    write_aligned_csv(manifest.add("aligned", run_dir / "aligned.csv"), grid, f.values,
                      g.values, result.aligned, iso)
    write_trace_csv(manifest.add("trace", run_dir / "trace.csv"), result)
    write_json(manifest.add("summary", run_dir / "summary.json"), summary)
    return summary


def cmd_register(args):
    kwargs = {}
    try:
        if args.config is not None:
            kwargs = parse_config_text(args.config.read_text(), args.config)
        kwargs.update({k: v for k, v in _overrides(args).items() if v is not None})
        if args.method is not None and len(args.method) == 1:
            kwargs["method"] = args.method[0]
        f = read_signal_csv(args.f_csv, n_points=kwargs.get("grid_size"), label="f")
        g = read_signal_csv(args.g_csv, n_points=f.grid.n_points, label="g")
        kwargs["grid_size"] = f.grid.n_points
        base = RegistrationConfig(**kwargs)
    except ParseError as exc:
        raise CliError(EXIT_PARSE, str(exc)) from None
    except ValueError as exc:
        raise CliError(EXIT_PARSE, f"invalid configuration: {exc}") from None
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read input: {exc}") from None

    methods = args.method if args.method is not None and len(args.method) > 1 else (base.method,)
    out = _mkdir(args.out)
    manifest = RunManifest(out, base.to_dict(), inputs=[args.f_csv, args.g_csv])
    try:
        for m in methods:
            cfg = base.with_(method=m)
            result = _run(f, g, cfg)
            run_dir = out if len(methods) == 1 else out / f"method{int(m)}"
            summary = _write_run(run_dir, manifest, result, f, g)
            print(f"method {int(m)} ({m.label}): objective {summary['final_objective']:.6g} "
                  f"after {result.iterations_run} iterations")
        write_config(manifest.add("config", out / "config.txt"), base)
        manifest.write()
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot write output: {exc}") from None
    return EXIT_OK


def _comparison_csv(path, rows):
    cols = ["run", "method", "label", "lambda", "clr_l2", "hnorm", "min_gamma_prime",
            "max_gamma_prime", "sup_warp_error", "final_objective", "final_mismatch",
            "final_penalty", "mismatch_at_truth", "iterations"]
    lines = [",".join(cols)]
    for r in rows:
        lines.append(",".join(r[c] if isinstance(r[c], str) else fmt(r[c]) for c in cols))
    Path(path).write_text("\n".join(lines) + "\n")


def cmd_simulate(args):
    preset = EXPERIMENT_DEFAULTS[args.experiment]
    sigma = preset["sigma"] if args.sigma is None else args.sigma
    if sigma < 0:
        raise CliError(EXIT_PARSE, "sigma must be non-negative")
    lams = preset["lam"] if args.lam is None else (args.lam,)
    seed = args.seed or 0
    n = args.n_grid or SIM_GRID
    try:
        base = RegistrationConfig(
            basis_dim=args.d or preset["d"], grid_size=n, lam=lams[0],
            step_size=args.alpha or preset["alpha"], max_iters=args.iters or preset["iters"],
            rel_tol=args.rel_tol or 0.0, seed=seed,
        )
    except ValueError as exc:
        raise CliError(EXIT_PARSE, f"invalid configuration: {exc}") from None

    grid = Grid(n)
    basis = build_centered_basis(base.basis_dim, grid)
    f, g, truth = noisy_pair(args.experiment, sigma, seed, grid)
    out = _mkdir(args.out)
    cfg_record = dict(base.to_dict(), experiment=args.experiment, sigma=sigma,
                      lambdas=list(lams), methods=[int(m) for m in args.method])
    manifest = RunManifest(out, cfg_record, experiment=args.experiment)
    rows = []
    try:
        write_signal_csv(manifest.add("f", out / "f.csv"), f)
        write_signal_csv(manifest.add("g", out / "g.csv"), g)
        write_warp_csv(manifest.add("truth_warp", out / "truth_warp.csv"), truth.warp)
        for lam in lams:
            for m in args.method:
                cfg = base.with_(method=m, lam=lam)
                name = f"method{int(m)}" if len(lams) == 1 else f"method{int(m)}_lambda{lam:g}"
                result = _run(f, g, cfg, basis)
                s = _write_run(out / name, manifest, result, f, g, truth, basis)
                rec = s["recovery"]
                rows.append(dict(run=name, method=int(m), label=m.label, **{"lambda": lam}, **rec,
                                 final_objective=s["final_objective"],
                                 final_mismatch=s["final_mismatch"],
                                 final_penalty=s["final_penalty"],
                                 mismatch_at_truth=s["mismatch_at_truth"],
                                 iterations=result.iterations_run))
                print(f"{name}: clr_l2 {rec['clr_l2']:.4f}  hnorm {rec['hnorm']:.2f}  "
                      f"min gamma' {rec['min_gamma_prime']:.4f}  objective "
                      f"{s['final_objective']:.6g}")
        _comparison_csv(manifest.add("comparison", out / "comparison.csv"), rows)
        manifest.write()
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot write output: {exc}") from None
    return EXIT_OK


def cmd_gradcheck(args):
    if args.d < 4 or args.n_grid < 10 * args.d:
        raise CliError(EXIT_PARSE, "need d >= 4 and N >= 10 d")
    if args.trials < 0:
        raise CliError(EXIT_PARSE, "trials must be non-negative")
    if args.dump_matrices is not None:
        out = _mkdir(args.dump_matrices)
        basis = build_centered_basis(args.d, Grid(args.n_grid))
        try:
            np.savetxt(out / "B.csv", basis.eval_matrix, delimiter=",", fmt="%.17g")
            np.savetxt(out / "R.csv", basis.stiffness, delimiter=",", fmt="%.17g")
        except OSError as exc:
            raise CliError(EXIT_IO, f"cannot write matrices: {exc}") from None
    if args.trials == 0:
        log.warning("trials=0: nothing to check")
        return EXIT_OK
    kernel = corrupted_kernel if args.corrupt_kernel else None
    checks = gradient_check(args.method, args.d, args.n_grid, args.trials, args.seed,
                            kernel=kernel)
    failed = False
    for m in args.method:
        mine = [c for c in checks if c.method == m]
        worst = max(mine, key=lambda c: c.max_rel_error)
        ok = worst.max_rel_error < TOLERANCE
        failed |= not ok
        line = f"method {int(m)} ({m.label}): max relative error {worst.max_rel_error:.3e}"
        if not ok:
            line += f"  FAIL (trial {worst.trial}, component {worst.worst_component})"
        print(line)
    return EXIT_VERIFY if failed else EXIT_OK


def cmd_envelope(args):
    try:
        env = load_envelope(args.wav, args.window_ms / 1000.0, args.n_grid)
    except (WavFormatError, EnvelopeError) as exc:
        raise CliError(EXIT_PARSE, str(exc)) from None
    except ValueError as exc:
        raise CliError(EXIT_PARSE, str(exc)) from None
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read {args.wav}: {exc}") from None
    try:
        if args.out.parent != Path(""):
            _mkdir(args.out.parent)
        write_signal_csv(args.out, env)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot write {args.out}: {exc}") from None
    print(f"wrote {env.grid.n_points} envelope samples to {args.out}")
    return EXIT_OK


COMMANDS = {
    "register": cmd_register,
    "simulate": cmd_simulate,
    "gradcheck": cmd_gradcheck,
    "envelope": cmd_envelope,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
