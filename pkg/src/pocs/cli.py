"""Command-line entry point.

Exit codes: 0 success, 1 I/O failure, 2 invalid input, 3 refused as too large.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bpdn import SolverConfig, bpdn
from .experiments import EpsilonPolicy, ExperimentConfig, emit_results, run_noise_sweep, run_phase_transition
from .io import FormatError, read_complex_matrix, read_complex_vector, write_real_vector
from .linalg import RngStream, sample_sparse_signal
from .linearization import build_Az, e1, phase_consistency_check
from .rip import MAX_EXHAUSTIVE_SUPPORTS, count_supports, estimate_rip, rip_of_linearized
from .sensing import Scaling, SensingEnsemble, sign_c

log = logging.getLogger("pocs")

EXIT_OK, EXIT_IO, EXIT_USAGE, EXIT_REFUSED = 0, 1, 2, 3
SEED_ENV = "PO_CS_SEED"

FORMAT_HELP = """\
file formats:
  complex matrix  one row per line, cells 're,im' separated by ';'
  complex vector  one 're,im' cell per line
  '#' starts a comment line; blank lines are ignored
"""


class UsageError(Exception):
    pass


def positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def nonneg_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {v}")
    return v


def nonneg_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v >= 0 or not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"must be a finite number >= 0, got {text}")
    return v


def int_grid(text: str) -> tuple[int, ...]:
    """``start:stop:step`` (stop included when aligned) or a comma list."""
    try:
        if ":" in text:
            parts = [int(p) for p in text.split(":")]
            if len(parts) == 2:
                parts.append(1)
            start, stop, step = parts
            if step < 1 or stop < start:
                raise ValueError
            grid = tuple(range(start, stop + 1, step))
        else:
            grid = tuple(int(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}; use start:stop:step or a,b,c") from None
    if not grid or min(grid) < 1:
        raise argparse.ArgumentTypeError(f"grid values must be >= 1, got {text!r}")
    return grid


def float_list(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad list {text!r}") from None
    if any(not v >= 0 for v in vals):
        raise argparse.ArgumentTypeError(f"values must be >= 0, got {text!r}")
    return vals


def epsilon_policy(text: str) -> EpsilonPolicy:
    try:
        return EpsilonPolicy.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def rip_mode(text: str) -> str:
    if text == "exhaustive":
        return text
    if text.startswith("sampled:"):
        positive_int(text.split(":", 1)[1])
        return text
    raise argparse.ArgumentTypeError(f"mode must be 'exhaustive' or 'sampled:K', got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="pocs",
        description="Phase-only compressive sensing: experiments, recovery and RIP estimates.",
        epilog=FORMAT_HELP + f"\nenvironment:\n  {SEED_ENV}  overrides --seed when set\n",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-q", "--quiet", action="store_true", help="only log warnings")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def experiment_args(sp):
        sp.add_argument("--n", type=positive_int, default=100, help="signal length (default 100)")
        sp.add_argument("--s", type=positive_int, default=10, help="sparsity (default 10)")
        sp.add_argument("--trials", type=positive_int, default=100, help="trials per cell (default 100)")
        sp.add_argument("--seed", type=nonneg_int, default=0, help="master seed (default 0)")
        sp.add_argument("--threshold", type=float, default=1e-3, help="success threshold on relative error")
        sp.add_argument("--jobs", type=positive_int, default=None, help="worker processes (default: all cores)")
        sp.add_argument("--out", type=Path, required=True, help="output directory")

    pt = sub.add_parser("phase-transition", help="noiseless success rate of PO-CS vs linear CS",
                        epilog=FORMAT_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    experiment_args(pt)
    pt.add_argument("--m-grid", type=int_grid, default=int_grid("5:70:5"), help="measurements, e.g. 5:70:5")

    ns = sub.add_parser("noise-sweep", help="mean SNR of PO-CS under bounded phase noise")
    experiment_args(ns)
    ns.add_argument("--m-grid", type=int_grid, default=int_grid("10:70:10"))
    taus = ns.add_mutually_exclusive_group()
    taus.add_argument("--tau-over-pi", type=float_list, default=None, help="noise radii as fractions of pi")
    taus.add_argument("--tau", type=float_list, default=None, help="absolute noise radii")
    ns.add_argument("--epsilon-policy", type=epsilon_policy, default=EpsilonPolicy(),
                    help="theoretical[:delta] | oracle | fixed:value (default theoretical:0.2)")

    rc = sub.add_parser("recover", help="recover a signal direction from a phase vector",
                        epilog=FORMAT_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    rc.add_argument("--matrix", type=Path, required=True, help="raw complex matrix Phi (m rows, n cells)")
    rc.add_argument("--phases", type=Path, required=True, help="observed phase vector z (m cells)")
    rc.add_argument("--scaling", choices=[s.value for s in Scaling], default=Scaling.OVER_SQRT_M.value)
    rc.add_argument("--tau", type=nonneg_float, default=0.0, help="noise radius (default 0)")
    rc.add_argument("--epsilon-policy", type=epsilon_policy, default=EpsilonPolicy(),
                    help="theoretical[:delta] | fixed:value (default theoretical:0.2)")
    rc.add_argument("--consistency-tol", type=float, default=1e-6)
    rc.add_argument("--out", type=Path, required=True, help="output directory")

    rp = sub.add_parser("rip-estimate", help="brute-force restricted isometry constant")
    rp.add_argument("--n", type=positive_int, default=16)
    rp.add_argument("--s", type=positive_int, default=2)
    rp.add_argument("--m", type=positive_int, default=None, help="measurements (default 6n)")
    rp.add_argument("--mode", type=rip_mode, default="exhaustive", help="exhaustive | sampled:K")
    kind = rp.add_mutually_exclusive_group()
    kind.add_argument("--linearized", action="store_true", help="estimate for A_z' instead of A")
    kind.add_argument("--identity", action="store_true", help="use the n x n identity (sanity check)")
    rp.add_argument("--scaling", choices=[s.value for s in Scaling], default=None,
                    help="default over-sqrt-m with --linearized, over-sqrt-2m otherwise")
    rp.add_argument("--repeat", type=positive_int, default=1)
    rp.add_argument("--seed", type=nonneg_int, default=0)
    rp.add_argument("--out", type=Path, default=None, help="optional JSON report path")
    return p


def _resolve_seed(args) -> None:
    env = os.environ.get(SEED_ENV)
    if env is not None and hasattr(args, "seed"):
        try:
            seed = int(env)
            if seed < 0:
                raise ValueError
        except ValueError:
            raise UsageError(f"{SEED_ENV} must be a non-negative integer, got {env!r}") from None
        args.seed = seed


def _experiment_config(args, **extra) -> ExperimentConfig:
    try:
        return ExperimentConfig(
            n=args.n, s=args.s, m_grid=args.m_grid, trials=args.trials, master_seed=args.seed,
            success_threshold=args.threshold, **extra,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_phase_transition(args) -> int:
    cfg = _experiment_config(args)
    log.info("resolved config: %s", json.dumps(cfg.to_dict(), sort_keys=True))
    res = run_phase_transition(cfg, jobs=args.jobs)
    for path in emit_results(res, args.out):
        log.info("wrote %s", path)
    return EXIT_OK


def cmd_noise_sweep(args) -> int:
    if args.tau is not None:
        taus = args.tau
    else:
        taus = tuple(t * math.pi for t in (args.tau_over_pi or (1e-1, 1e-2, 1e-3)))
    if any(t >= math.pi for t in taus):
        raise UsageError("noise radii must be below pi")
    if any(t == 0 for t in taus):
        raise UsageError("noise radii must be positive; use phase-transition for the noiseless case")
    cfg = _experiment_config(args, tau_grid=taus, epsilon_policy=args.epsilon_policy)
    log.info("resolved config: %s", json.dumps(cfg.to_dict(), sort_keys=True))
    res = run_noise_sweep(cfg, jobs=args.jobs)
    for path in emit_results(res, args.out):
        log.info("wrote %s", path)
    return EXIT_OK


def cmd_recover(args) -> int:
    if args.epsilon_policy.kind == "oracle":
        raise UsageError("the oracle epsilon policy needs the true signal and is only available in experiments")
    try:
        phi = read_complex_matrix(args.matrix)
        z = read_complex_vector(args.phases)
    except FormatError as exc:
        raise UsageError(str(exc)) from None
    if z.shape[0] != phi.shape[0]:
        raise UsageError(f"phase vector has {z.shape[0]} entries but the matrix has {phi.shape[0]} rows")
    ens = SensingEnsemble(phi, Scaling(args.scaling))
    eps = args.epsilon_policy.radius(args.tau)
    config = {
        "command": "recover",
        "matrix": str(args.matrix),
        "phases": str(args.phases),
        "m": ens.m,
        "n": ens.n,
        "scaling": ens.scaling.value,
        "tau": args.tau,
        "epsilon_policy": str(args.epsilon_policy),
        "epsilon": eps,
    }
    log.info("resolved config: %s", json.dumps(config, sort_keys=True))
    Az = build_Az(ens, z)
    rep = bpdn(Az.matrix, e1(ens.m), SolverConfig(epsilon=eps))
    check = phase_consistency_check(ens, z, rep.estimate, args.consistency_tol)
    report = {
        "config": config,
        "status": rep.status.value,
        "residual_norm": rep.residual_norm,
        "l1_norm": rep.l1_norm,
        "outer_iters": rep.outer_iters,
        "total_matvecs": rep.total_matvecs,
        "consistency": {
            "tol": args.consistency_tol,
            "consistent": check.consistent,
            "positivity_violations": check.positivity_violations,
            "h_residual": check.h_residual,
            "normalization_error": check.normalization_error,
            "imaginary_error": check.imaginary_error,
        },
    }
    args.out.mkdir(parents=True, exist_ok=True)
    est = write_real_vector(args.out / "estimate.csv", rep.estimate, ["pocs recover", "config: " + json.dumps(config, sort_keys=True)])
    rpt = args.out / "report.json"
    rpt.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    log.info("wrote %s and %s (status %s)", est, rpt, rep.status.value)
    return EXIT_OK


def cmd_rip_estimate(args) -> int:
    n, s = args.n, args.s
    if s > n:
        raise UsageError(f"need s <= n, got s={s}, n={n}")
    if args.mode == "exhaustive" and count_supports(n, s) > MAX_EXHAUSTIVE_SUPPORTS:
        print(
            f"refusing exhaustive enumeration of C({n}, {s}) = {count_supports(n, s)} supports "
            f"(cap {MAX_EXHAUSTIVE_SUPPORTS})",
            file=sys.stderr,
        )
        return EXIT_REFUSED
    m = args.m or 6 * n
    scaling = Scaling(args.scaling) if args.scaling else (
        Scaling.OVER_SQRT_M if args.linearized else Scaling.OVER_SQRT_2M
    )
    config = {
        "command": "rip-estimate", "n": n, "s": s, "m": m, "mode": args.mode, "linearized": args.linearized,
        "identity": args.identity, "scaling": scaling.value, "repeat": args.repeat, "seed": args.seed,
    }
    log.info("resolved config: %s", json.dumps(config, sort_keys=True))
    estimates = []
    for r in range(args.repeat):
        rng = RngStream(args.seed, r)
        if args.identity:
            M = np.eye(n)
        elif args.linearized:
            ens = SensingEnsemble.sample(rng, m, n, scaling)
            x = sample_sparse_signal(rng, n, s)
            if args.mode == "exhaustive":
                estimates.append(rip_of_linearized(ens, x, s))
                continue
            M = build_Az(ens, sign_c(ens.matrix @ x)).matrix
        else:
            ens = SensingEnsemble.sample(rng, m, n, scaling)
            M = np.vstack([ens.matrix.real, ens.matrix.imag])
        estimates.append(estimate_rip(M, s, args.mode, rng=rng.child(1)))
    deltas = [e.delta for e in estimates]
    report = {
        "config": config,
        "median_delta": float(np.median(deltas)),
        "estimates": [
            {"delta": e.delta, "sigma_min": e.sigma_min, "sigma_max": e.sigma_max,
             "order": e.order, "supports_checked": e.supports_checked}
            for e in estimates
        ],
    }
    text = json.dumps(report, indent=2, sort_keys=True)
    print(text)
    if args.out is not None:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(text + "\n")
    return EXIT_OK


COMMANDS = {
    "phase-transition": cmd_phase_transition,
    "noise-sweep": cmd_noise_sweep,
    "recover": cmd_recover,
    "rip-estimate": cmd_rip_estimate,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on bad flags
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
        stream=sys.stderr,
    )
    try:
        _resolve_seed(args)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"pocs {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"pocs {args.command}: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
