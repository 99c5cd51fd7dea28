"""Command-line front end: ``linfty {profile,residual,demo,inclusion}``.

Exit codes: 0 pass, 1 verification failure, 2 configuration or domain
error, 3 numerical failure.  The first line on standard output is the
verdict; full data goes to the ``--out`` file.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from . import ode, solutions
from . import verify as V
from .errors import DomainError, SingularityReached
from .inclusion import DET_MODES, scan_inclusion

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _t_min(text):
    return None if text == "auto" else float(text)


def _single(values, name):
    if values is None:
        return None
    if len(values) != 1:
        raise DomainError(f"--{name} takes a single value here, got {len(values)}")
    return values[0]


def _sampling_flags(p):
    g = p.add_argument_group("sampling")
    g.add_argument("--shells", type=int, default=10)
    g.add_argument("--per-shell", type=int, default=36)
    g.add_argument("--r-min", type=float, default=None,
                   help="inner sampling radius (default 1e-2, raised to the existence "
                        "radius for eikonal maps)")
    g.add_argument("--r-max", type=float, default=V.DEFAULT_R_MAX)
    g.add_argument("--seed", type=int, default=V.DEFAULT_SEED)
    g.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: $LINFTY_THREADS, else all cores)")


def _family_flags(p):
    p.add_argument("--family", required=True, choices=sorted(solutions.FAMILIES))
    p.add_argument("--a", type=_floats)
    p.add_argument("--gamma", type=_floats)
    p.add_argument("--mu", type=_floats)
    p.add_argument("--n", type=int, default=2)


def _output_flags(p, default):
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", default=None, help=f"report path (default {default}.<format>)")


def build_parser():
    parser = argparse.ArgumentParser(prog="linfty", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("profile", help="solve for the eikonal profile g_a and write it as CSV")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--t-min", type=_t_min, default=None,
                   help="left end of the grid; 'auto' (default) stays 20%% above the blow-up point")
    p.add_argument("--tol", type=float, default=ode.DEFAULT_TOL)
    p.add_argument("--blowup-threshold", type=float, default=-5.0,
                   help="g(t_min) below this is reported as approaching -inf")
    p.add_argument("--out", default="profile.csv")

    p = sub.add_parser("residual", help="evaluate an operator on a map family over sampled points")
    p.add_argument("--op", required=True, choices=sorted(V.OPERATORS))
    _family_flags(p)
    p.add_argument("--tol", type=float, default=V.RESIDUAL_TOL)
    _sampling_flags(p)
    _output_flags(p, "residual")

    p = sub.add_parser("demo", help="several solutions of one Dirichlet problem")
    p.add_argument("--problem", required=True, choices=sorted(V.OPERATORS))
    p.add_argument("--a", type=_floats)
    p.add_argument("--gamma", type=_floats)
    p.add_argument("--mu", type=_floats)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--tol", type=float, default=V.RESIDUAL_TOL)
    p.add_argument("--delta", type=float, default=V.DISTINCTNESS,
                   help="minimum pairwise sup-distance")
    _sampling_flags(p)
    _output_flags(p, "demo")

    p = sub.add_parser("inclusion", help="scan Du against the set L_a or K_a")
    _family_flags(p)
    p.add_argument("--set", required=True, choices=("L", "K"))
    p.add_argument("--det-mode", choices=DET_MODES, default="nonzero")
    p.add_argument("--tol", type=float, default=None,
                   help="equality tolerance (default 1e-9 analytic, 1e-6 with FD evaluators)")
    _sampling_flags(p)
    _output_flags(p, "inclusion")
    return parser


# -- helpers ------------------------------------------------------------------

def _family_param(args):
    key = solutions.FAMILIES[args.family]
    if key is None:
        return None
    value = _single(getattr(args, key), key)
    if value is None:
        raise DomainError(f"family {args.family!r} needs --{key}")
    return value


def _build(args, family_param):
    """Map plus samples; eikonal maps are solved down to the sampled radius."""
    r_min = args.r_min
    if args.family == "eikonal":
        r_min = V.eikonal_r_min([family_param], args.n, r_min)
        u = solutions.eikonal_map(family_param, args.n, t_min=V.eikonal_t_min(r_min))
    else:
        r_min = V.DEFAULT_R_MIN if r_min is None else r_min
        u = solutions.build(args.family, args.n, family_param)
    samples = V.sample_punctured_ball(args.n, args.shells, args.per_shell, r_min, args.r_max, args.seed)
    return u, samples


def _write(report, args, default):
    path = args.out or f"{default}.{args.format}"
    if args.format == "json":
        report.to_json(path)
    else:
        report.to_csv(path)
    return path


# -- commands -----------------------------------------------------------------

def cmd_profile(args):
    t_min = args.t_min
    if t_min is None:
        t_min = solutions.EXISTENCE_MARGIN * ode.blowup_time(args.a, args.n)
    sol = ode.solve_profile(args.a, args.n, t_min=t_min, tol=args.tol)
    sol.to_csv(args.out)
    resid = float(np.max(sol.ode_residual(sol.midpoints())))
    g_min = float(sol.g[0])
    ok = resid <= 10 * args.tol
    print(f"{'PASS' if ok else 'FAIL'} profile a={args.a:g} n={args.n} grid={sol.size} "
          f"t_min={sol.t_min:.6g} g(t_min)={g_min:.6g} max_ode_residual={resid:.3e}")
    print(f"blow-up point t0={ode.blowup_time(args.a, args.n):.10g}; "
          f"g(t_min) {'below' if g_min < args.blowup_threshold else 'above'} "
          f"threshold {args.blowup_threshold:g}")
    print(f"wrote {args.out}")
    return EXIT_PASS if ok else EXIT_FAIL


def cmd_residual(args):
    param = _family_param(args)
    mu = None
    if args.op == "linear":
        mu = _single(args.mu, "mu")
        if mu is None:
            raise DomainError("--op linear needs --mu")
    u, samples = _build(args, param)
    report = V.residual_report(args.op, u, samples, tol=args.tol, mu=mu,
                               boundary=args.family != "trig", threads=args.threads)
    path = _write(report, args, "residual")
    print(report.summary())
    print(f"wrote {path}")
    return EXIT_PASS if report.passed else EXIT_FAIL


_DEMO_PARAM = {"infinity-laplacian": "a", "q-infinity": "gamma", "linear": "mu"}


def cmd_demo(args):
    key = _DEMO_PARAM[args.problem]
    params = getattr(args, key)
    if not params:
        raise DomainError(f"--problem {args.problem} needs --{key}")
    report = V.nonuniqueness_demo(
        args.problem, params, args.n, tol=args.tol, delta=args.delta, threads=args.threads,
        shells=args.shells, per_shell=args.per_shell, r_min=args.r_min, r_max=args.r_max,
        seed=args.seed)
    path = _write(report, args, "demo")
    print(report.summary() + f" members={len(report.members)} min_distance={report.distances['min']:.4g}")
    print(f"{'member':>8} {'map':>10} {'params':>28} {'max_normalized':>15} {'boundary':>10} verdict")
    for k, m in enumerate(report.members):
        b = (m.boundary or {}).get("outer", {}).get("max_deviation")
        worst = m.aggregates.get("max")
        ps = ",".join(f"{k2}={m.params[k2]:g}" for k2 in ("a", "gamma", "mu") if k2 in m.params)
        print(f"{k:>8} {m.map:>10} {ps:>28} {worst if worst is None else format(worst, '.3e'):>15} "
              f"{'n/a' if b is None else format(b, '.1e'):>10} {m.verdict}")
    for p in report.distances["pairs"]:
        print(f"  |u{p['i']} - u{p['j']}|_sup = {p['sup_distance']:.6g}")
    print(f"wrote {path}")
    return EXIT_PASS if report.passed else EXIT_FAIL


def cmd_inclusion(args):
    param = _family_param(args)
    level = _single(args.a, "a")
    if args.set == "K" and args.family in ("power", "mu") and level is None:
        gamma = param if args.family == "power" else solutions.mu_exponent(param, args.n)
        level = solutions.dilation_level(gamma, args.n)
    if level is None:
        raise DomainError(f"--set {args.set} for family {args.family!r} needs --a")
    u, samples = _build(args, param)
    report = scan_inclusion(u, samples, args.set, level, tol=args.tol, det_mode=args.det_mode,
                            threads=args.threads)
    path = _write(report, args, "inclusion")
    print(report.summary())
    print(f"wrote {path}")
    return EXIT_PASS if report.passed else EXIT_FAIL


COMMANDS = {"profile": cmd_profile, "residual": cmd_residual, "demo": cmd_demo,
            "inclusion": cmd_inclusion}


_LIST_FLAGS = ("--a", "--gamma", "--mu")


def _attach_negative_lists(argv):
    # argparse reads "--gamma -0.5,1" as two options; glue such values on
    out = []
    for tok in argv:
        if out and out[-1] in _LIST_FLAGS and tok.startswith("-"):
            try:
                _floats(tok)
            except argparse.ArgumentTypeError:
                pass
            else:
                out[-1] = f"{out[-1]}={tok}"
                continue
        out.append(tok)
    return out


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_attach_negative_lists(argv))
    try:
        return COMMANDS[args.command](args)
    except SingularityReached as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
