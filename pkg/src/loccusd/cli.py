"""Command line experiment runner.

Every subcommand is seeded, writes machine-readable output (JSON with an
embedded run manifest, or CSV) and exits with status 1 when an in-run
check fails, e.g. a decoded state that differs from the one sent.
"""

import argparse
import csv
import hashlib
import io
import json
from importlib import resources
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__, feasibility, multiparty, optics, protocol2, qcore, qss
from .montecarlo import binomial_zscore, chunk_rng
from .povm import label_name

DEFAULT_COEFFS = (0.8, 0.42, float(np.sqrt(1 - 0.64 - 0.1764)))


def _float_list(text, n=None):
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if n is not None and len(vals) != n:
        raise argparse.ArgumentTypeError(f"expected {n} numbers, got {len(vals)}")
    return vals


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _nonneg_int(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("expected a nonnegative integer")
    return v


def manifest(command, config, seed, stamp=False):
    payload = json.dumps({"command": command, "config": config, "seed": seed}, sort_keys=True)
    return {
        "command": command,
        "config": config,
        "seed": seed,
        "input_hash": hashlib.sha256(payload.encode()).hexdigest(),
        "timestamp": datetime.now(timezone.utc).isoformat() if stamp else None,
        "version": __version__,
    }


def load_schema(name):
    """Shipped JSON schema for a subcommand output or a session record."""
    text = resources.files("loccusd").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)


def _pair_key(a, b):
    return f"{label_name(a)},{label_name(b)}"


def _z_and_sigma(count, n, p):
    sigma = float(np.sqrt(p * (1 - p) / n)) if n else 0.0
    return float(binomial_zscore(count, n, p)), sigma


# -- subcommands -----------------------------------------------------------

def cmd_discriminate(args):
    spec = protocol2.ProtocolSpec(args.theta0, roles=args.roles)
    stats = protocol2.run_two_party_batch(spec, args.trials, args.seed, args.threads)
    analytic = float(np.cos(2 * spec.theta0))
    z, sigma = _z_and_sigma(stats.failures, stats.trials, analytic)
    config = {"theta0": spec.theta0, "trials": args.trials, "roles": spec.roles, "threads": args.threads}
    out = {
        "manifest": manifest("discriminate", config, args.seed, args.timestamp),
        "theta0": spec.theta0,
        "trials": stats.trials,
        "sent_counts": {str(k): v for k, v in sorted(stats.sent_counts.items())},
        "outcome_counts": {_pair_key(*k): v for k, v in sorted(stats.outcome_counts.items())},
        "failures": stats.failures,
        "failure_rate": stats.failure_rate,
        "analytic_failure": analytic,
        "sigma": sigma,
        "z_score": z,
        "errors": stats.errors,
    }
    if args.trace:
        rng = chunk_rng(args.seed, 0, stream=9)
        setup = protocol2.build_two_party_protocol(spec)
        out["trace"] = []
        for _ in range(args.trace):
            t = protocol2.run_two_party_trial(spec, int(rng.integers(0, 2)), rng, setup)
            out["trace"].append({"sent": t.sent, "alice": label_name(t.alice_label),
                                 "bob": label_name(t.bob_label), "decoded": label_name(t.decoded)})
    checks = {"zero_errors": stats.errors == 0}
    return out, checks


def _sweep_thetas(args):
    if args.thetas is not None:
        return args.thetas
    start, stop, num = args.grid
    return list(np.linspace(start, stop, int(num)))


SWEEP_HEADER = ["theta0", "p_fail_emp", "p_fail_ana", "p_idp", "p_e"]


def cmd_sweep(args):
    thetas = _sweep_thetas(args)
    if not thetas:
        raise argparse.ArgumentTypeError("empty theta grid")
    rows = []
    errors = 0
    for i, t in enumerate(thetas):
        spec = protocol2.ProtocolSpec(t)
        # one independent seed stream per grid point
        stats = protocol2.run_two_party_batch(spec, args.trials, args.seed * 1_000_003 + i, args.threads)
        errors += stats.errors
        psi0, psi1 = protocol2.build_states(spec.theta0)
        rows.append({
            "theta0": spec.theta0,
            "p_fail_emp": stats.failure_rate,
            "p_fail_ana": protocol2.failure_probability(spec),
            "p_idp": qcore.idp_success_prob(psi0, psi1),
            "p_e": qcore.min_error_prob(psi0, psi1),
        })
    config = {"thetas": [float(t) for t in thetas], "trials": args.trials, "threads": args.threads}
    out = {"manifest": manifest("sweep", config, args.seed, args.timestamp), "rows": rows, "errors": errors}
    return out, {"zero_errors": errors == 0}


def cmd_optics(args):
    thetas = args.thetas or [args.theta0]
    reports = [optics.equivalence_report(t) for t in thetas]
    worst = max(r["max_abs_diff"] for r in reports)
    config = {"thetas": [float(t) for t in thetas], "tolerance": args.tolerance}
    out = {
        "manifest": manifest("optics", config, args.seed, args.timestamp),
        "reports": reports,
        "max_abs_diff": worst,
        "equivalent": worst <= args.tolerance,
    }
    return out, {"optics_matches_povm": worst <= args.tolerance}


def cmd_multiparty(args):
    if args.qutrit:
        coeffs = args.coeffs or list(DEFAULT_COEFFS)
        norm = float(np.linalg.norm(coeffs))
        spec = multiparty.QutritSpec(args.n, tuple(c / norm for c in coeffs))
        config = {"family": "qutrit", "n_parties": args.n, "coeffs": [c / norm for c in coeffs]}
        usd = multiparty.build_qutrit_usd(spec.coeffs)
        analytic = usd.failure_probability
    else:
        spec = multiparty.MultiQubitSpec(args.n, args.theta0)
        config = {"family": "qubit", "n_parties": args.n, "theta0": spec.theta0}
        analytic = float(np.cos(2 * spec.theta0))
    config.update(trials=args.trials, threads=args.threads)
    stats = multiparty.run_multiparty_batch(spec, args.trials, args.seed, args.threads)
    z, sigma = _z_and_sigma(stats.failures, stats.trials, analytic)
    out = {
        "manifest": manifest("multiparty", config, args.seed, args.timestamp),
        "trials": stats.trials,
        "failures": stats.failures,
        "failure_rate": stats.failure_rate,
        "analytic_failure": analytic,
        "sigma": sigma,
        "z_score": z,
        "errors": stats.errors,
        "zero_errors": stats.errors == 0,
        "sent_counts": {str(k): v for k, v in sorted(stats.sent_counts.items())},
        "projective_counts": {str(k): v for k, v in sorted(stats.projective_counts.items())},
    }
    return out, {"zero_errors": stats.errors == 0}


def _session_config(args):
    if args.config:
        with open(args.config) as fh:
            return qss.SessionConfig.from_dict(json.load(fh))
    adversary = {
        "none": None,
        "eve": qss.Eve(args.fallback),
        "cheating-alice": qss.CheatingAlice(),
        "cheating-bob": qss.CheatingBob(),
    }[args.adversary]
    return qss.SessionConfig(args.theta0, args.rounds, args.check_fraction, args.block_size,
                             args.role_announcement, adversary)


def cmd_secretshare(args):
    cfg = _session_config(args)
    result = qss.run_session(cfg, args.seed, args.threads)
    config = dict(cfg.to_dict(), threads=args.threads)
    res = result.to_dict()
    out = {
        "manifest": manifest("secretshare", config, args.seed, args.timestamp),
        "config": cfg.to_dict(),
        "result": res,
        "error_rate": result.observed_error_rate,
        "analytic_error_rate": qss.analytic_error_rate(cfg),
    }
    checks = {}
    if cfg.adversary is None:
        checks["honest_session_error_free"] = result.observed_error_rate == 0.0
    return out, checks


def cmd_infeasibility(args):
    psi0, psi1 = feasibility.states_from_lambdas(args.lambda0, args.lambda1, args.basis_angle)
    rng = np.random.default_rng(args.seed)
    res = feasibility.infeasibility_search(psi0, psi1, args.restarts, args.iterations, rng, args.epsilon)
    config = {"lambda0": args.lambda0, "lambda1": args.lambda1, "basis_angle": args.basis_angle,
              "restarts": args.restarts, "iterations": args.iterations, "epsilon": args.epsilon}
    out = {
        "manifest": manifest("infeasibility", config, args.seed, args.timestamp),
        "best_residual": res.best_residual,
        "restarts": res.restarts,
        "iterations": res.iterations,
        "epsilon": res.epsilon,
        "residual_quantiles": {str(q): float(np.quantile(res.residuals, q)) for q in (0.0, 0.1, 0.5, 0.9)},
    }
    return out, {}


# -- plumbing ----------------------------------------------------------------

def _common(p, fmt_choices=("json",), default_fmt="json"):
    p.add_argument("--seed", type=_nonneg_int, default=0, help="master seed (default 0)")
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--format", choices=fmt_choices, default=default_fmt)
    p.add_argument("--threads", type=_positive_int, default=1, help="worker threads; results do not depend on it")
    p.add_argument("--timestamp", action="store_true", help="record wall-clock time in the manifest")


def build_parser():
    parser = argparse.ArgumentParser(prog="loccusd", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("discriminate", help="two-party trials at one angle")
    p.add_argument("--theta0", type=float, required=True, help="state angle in radians, (0, pi/4]")
    p.add_argument("--trials", type=_positive_int, default=100_000)
    p.add_argument("--roles", choices=[protocol2.ALICE, protocol2.BOB], default=protocol2.ALICE,
                   help="party that measures projectively")
    p.add_argument("--trace", type=_nonneg_int, default=0, help="dump this many sampled trials")
    _common(p, ("json", "csv"))
    p.set_defaults(func=cmd_discriminate)

    p = sub.add_parser("sweep", help="failure rate against the optimum over a grid of angles")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--thetas", type=_float_list, help="comma-separated angles")
    g.add_argument("--grid", type=lambda s: _float_list(s, 3), help="start,stop,num")
    p.add_argument("--trials", type=_positive_int, default=100_000, help="trials per grid point")
    _common(p, ("csv", "json"), "csv")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("optics", help="interferometer vs abstract measurement")
    p.add_argument("--theta0", type=float, default=np.pi / 8)
    p.add_argument("--thetas", type=_float_list)
    p.add_argument("--tolerance", type=float, default=1e-12)
    _common(p)
    p.set_defaults(func=cmd_optics)

    p = sub.add_parser("multiparty", help="N-party qubit or qutrit protocol")
    p.add_argument("--n", type=int, default=3, help="number of parties (>= 2)")
    p.add_argument("--theta0", type=float, default=np.pi / 8)
    p.add_argument("--qutrit", action="store_true")
    p.add_argument("--coeffs", type=lambda s: _float_list(s, 3), help="qutrit coefficients, normalized on use")
    p.add_argument("--trials", type=_positive_int, default=100_000)
    _common(p)
    p.set_defaults(func=cmd_multiparty)

    p = sub.add_parser("secretshare", help="secret sharing session with an optional adversary")
    p.add_argument("--theta0", type=float, default=np.pi / 8)
    p.add_argument("--rounds", type=_positive_int, default=100_000)
    p.add_argument("--check-fraction", type=float, default=0.1)
    p.add_argument("--block-size", type=_positive_int, default=1)
    p.add_argument("--role-announcement", action="store_true")
    p.add_argument("--adversary", choices=["none", "eve", "cheating-alice", "cheating-bob"], default="none")
    p.add_argument("--fallback", choices=[qss.RANDOM, qss.FIXED], default=qss.RANDOM,
                   help="what Eve forwards after a failed identification")
    p.add_argument("--config", help="SessionConfig JSON file; overrides the session flags")
    _common(p)
    p.set_defaults(func=cmd_secretshare)

    p = sub.add_parser("infeasibility", help="search for simultaneous-failure measurements")
    p.add_argument("--lambda0", type=lambda s: _float_list(s, 2), required=True)
    p.add_argument("--lambda1", type=lambda s: _float_list(s, 2), required=True)
    p.add_argument("--basis-angle", type=float, default=0.0)
    p.add_argument("--restarts", type=_positive_int, default=200)
    p.add_argument("--iterations", type=_positive_int, default=2000)
    p.add_argument("--epsilon", type=float, default=1e-3, help="lower bound on detection scales")
    _common(p)
    p.set_defaults(func=cmd_infeasibility)
    return parser


def _render(out, fmt, command):
    if fmt == "json":
        return json.dumps(out, indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if command == "sweep":
        writer.writerow(SWEEP_HEADER)
        for row in out["rows"]:
            writer.writerow([repr(float(row[k])) for k in SWEEP_HEADER])
    else:
        keys = ["theta0", "trials", "failures", "failure_rate", "analytic_failure", "z_score", "errors"]
        writer.writerow(keys)
        writer.writerow([out[k] for k in keys])
    return buf.getvalue()


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        out, checks = args.func(args)
    except (ValueError, argparse.ArgumentTypeError, OSError) as exc:
        parser.exit(2, f"loccusd {args.command}: error: {exc}\n")
    if args.format == "json":
        out["checks"] = checks
    text = _render(out, args.format, args.command)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    failed = [name for name, ok in checks.items() if not ok]
    if failed:
        sys.stderr.write(f"loccusd {args.command}: failed checks: {', '.join(failed)}\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
