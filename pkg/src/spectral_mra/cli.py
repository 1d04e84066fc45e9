"""``spectral-mra`` command-line entry point.

Failures print one line ``error: <kind>: <message>`` to stderr and exit 1;
argument errors print usage and exit 2.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import acceptance, kernels
from .experiment import METHODS, ConfigError, parse_config, run_experiment, to_csv
from .invariants import accumulate_observations, read_invariants, write_invariants
from .pipeline import INVERSION_METHODS, invert
from .reconstruct import evaluate, read_signal, write_signal
from .simulate import generate_gaussian_signal, generate_observations, read_observations, write_observations


class CliError(Exception):
    def __init__(self, kind, message):
        super().__init__(message)
        self.kind = kind


def _cmd_generate(args):
    if args.signal_in:
        x = read_signal(args.signal_in)
        if args.n is not None and args.n != x.shape[0]:
            raise CliError("input", f"--n {args.n} disagrees with signal length {x.shape[0]}")
    else:
        if args.n is None:
            raise CliError("input", "either --n or --signal-in is required")
        x = generate_gaussian_signal(args.n, args.seed)
    obs = generate_observations(x, args.m, args.sigma, args.seed)
    write_observations(args.out, obs)
    if args.signal_out:
        write_signal(args.signal_out, x)
    print(json.dumps({"N": obs.N, "M": obs.M, "sigma": obs.sigma, "seed": args.seed, "out": str(args.out)}))


def _cmd_estimate(args):
    obs = read_observations(args.input)
    acc = accumulate_observations(obs.observations)
    inv = acc.estimates(None if args.estimate_sigma else obs.sigma)
    write_invariants(args.out, inv)
    print(json.dumps({"N": inv.N, "M": inv.M, "sigma": inv.sigma, "sigma_source": inv.sigma_source}))


def _cmd_invert(args):
    inv = read_invariants(args.input)
    res = invert(inv, args.method, enforce_symmetry=not args.no_symmetry,
                 sync_max_iters=args.sync_max_iters, sync_tol=args.sync_tol,
                 init_seed=args.init_seed, solver=args.solver)
    if args.truth:
        truth = read_signal(args.truth)
        if truth.shape[0] != inv.N:
            raise CliError("input", f"truth has length {truth.shape[0]}, invariants have N={inv.N}")
        evaluate(res, truth)
    write_signal(args.out, res.x_hat)
    report = {"method": res.method, **res.diagnostics}
    if res.rel_error is not None:
        report.update(rel_error=res.rel_error, aligning_shift=res.aligning_shift)
    print(json.dumps(report))


def _cmd_benchmark(args):
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        raise CliError("io", f"cannot read config {args.config}: {exc.strerror}") from None
    cfg = parse_config(text)
    if args.fixed_signal:
        cfg.fixed_signal = True
    rows = run_experiment(cfg, threads=args.threads)
    out = to_csv(rows, include_aggregates=not args.no_aggregates, timing=not args.omit_timing)
    if args.out == "-":
        sys.stdout.write(out)
    else:
        Path(args.out).write_text(out)


def _cmd_selftest(args):
    print(f"backend: {kernels.BACKEND}")
    crit = acceptance.CRITERIA if args.full else acceptance.FAST_CRITERIA
    results = acceptance.run(crit)
    failed = [r.number for r in results if not r.passed]
    if failed:
        raise CliError("selftest", f"criteria failed: {','.join(map(str, failed))}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spectral-mra",
                                description="Signal recovery from noisy cyclically shifted copies.")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    g = sub.add_parser("generate", help="draw a signal and noisy shifted observations")
    g.add_argument("--n", type=int, help="signal length (omit with --signal-in)")
    g.add_argument("--m", type=int, required=True, help="number of observations")
    g.add_argument("--sigma", type=float, required=True, help="noise standard deviation")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True, help="observation file (MRA1 binary)")
    g.add_argument("--signal-in", help="use this signal file instead of drawing one")
    g.add_argument("--signal-out", help="also write the true signal here")
    g.set_defaults(func=_cmd_generate)

    e = sub.add_parser("estimate", help="observation file -> invariants file")
    e.add_argument("--in", dest="input", required=True)
    e.add_argument("--out", required=True)
    e.add_argument("--estimate-sigma", action="store_true",
                   help="estimate sigma from the data instead of using the recorded value")
    e.set_defaults(func=_cmd_estimate)

    v = sub.add_parser("invert", help="invariants file -> signal file")
    v.add_argument("--method", choices=INVERSION_METHODS, default="spectral")
    v.add_argument("--in", dest="input", required=True)
    v.add_argument("--out", required=True)
    v.add_argument("--truth", help="signal file to score against")
    v.add_argument("--no-symmetry", action="store_true", help="skip conjugate-symmetry projection of phases")
    v.add_argument("--sync-max-iters", type=int, default=15)
    v.add_argument("--sync-tol", type=float, default=1e-8)
    v.add_argument("--init-seed", type=int, default=0, help="seed for phase-sync-random")
    v.add_argument("--solver", choices=("jacobi", "lapack"), default="jacobi")
    v.set_defaults(func=_cmd_invert)

    b = sub.add_parser("benchmark", help="run a Monte Carlo sweep from a config file")
    b.add_argument("--config", required=True)
    b.add_argument("--out", required=True, help="CSV path, or - for stdout")
    b.add_argument("--threads", type=int, help="worker threads (default: MRA_THREADS, 0 = auto)")
    b.add_argument("--fixed-signal", action="store_true", help="reuse one signal across trials")
    b.add_argument("--no-aggregates", action="store_true", help="omit mean/std rows")
    b.add_argument("--omit-timing", action="store_true",
                   help="leave timing columns empty so output is byte-reproducible")
    b.set_defaults(func=_cmd_benchmark)

    s = sub.add_parser("selftest", help="run acceptance checks")
    s.add_argument("--full", action="store_true", help="run every criterion (minutes)")
    s.set_defaults(func=_cmd_selftest)
    p.epilog = f"methods for benchmark configs: {', '.join(METHODS)}"
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except CliError as exc:
        kind, msg = exc.kind, str(exc)
    except ConfigError as exc:
        kind, msg = "config", str(exc)
    except FileNotFoundError as exc:
        kind, msg = "io", f"{exc.filename}: no such file"
    except OSError as exc:
        kind, msg = "io", f"{exc.filename}: {exc.strerror}"
    except (ValueError, ArithmeticError, RuntimeError) as exc:
        kind, msg = type(exc).__name__, str(exc)
    else:
        return 0
    msg = " ".join(msg.split())
    print(f"error: {kind}: {msg}", file=sys.stderr)
    return 1


if __name__ == "__main__":
    sys.exit(main())
