"""Batch command-line front end.

Exit codes: 0 success (including "hypothesis-unmet" and "inconclusive"),
1 when the verdict is "violation" or "fail", 2 on usage or input errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

from . import __version__
from .fourier import TorusGrid, bridge_check, from_fourier, grid_size
from .lattice import WeightedSequence, holder_triple, parse_exponent
from .norms import (bt_membership_scan, bt_seminorm, mixed_lebesgue_norm, norm_omega_n,
                    norm_two_order, norm_zero_n)
from .operators import apply
from .parallel import set_workers
from .report import FAILING, Report, jsonable
from .symbols import symbol_from_spec
from .tensors import tensor_from_spec
from .verification import (CompactnessExperiment, boundedness_experiment,
                           compactness_experiment, lemma_x_scan, negative_witness_scan,
                           variable_coefficient_scan)

# run-environment options that must not influence report bytes
_NOT_CONFIG = {"threads", "out", "csv", "func"}


class InputError(Exception):
    pass


def load_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: "
                         f"{exc.msg}") from None


def _json_arg(text: str):
    """Inline JSON when the argument starts with '{', otherwise a file path."""
    if text.lstrip().startswith("{"):
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"malformed inline JSON at line {exc.lineno}, column {exc.colno}: "
                             f"{exc.msg}") from None
    return load_json(text)


def _tensor(path):
    return tensor_from_spec(load_json(path))


def _sequence(path):
    return WeightedSequence.from_json_obj(load_json(path))


def _multi(text: str, d: int):
    vals = tuple(int(v) for v in text.split(",")) if text else (0,) * d
    if len(vals) != d:
        raise ValueError(f"multi-index {text!r} needs {d} entries")
    return vals


def _floats(text: str):
    return [float(v) for v in text.split(",") if v.strip()]


def _config(args) -> dict:
    return jsonable({k: v for k, v in sorted(vars(args).items()) if k not in _NOT_CONFIG})


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_apply(args) -> Report:
    theta = _tensor(args.tensor)
    out = apply(theta, _sequence(args.f), _sequence(args.g), args.out_radius)
    return Report("apply", {"outRadius": args.out_radius}, value=None,
                  radius=args.out_radius, verdict="ok", details={"output": out.to_json_obj()})


def _scan_report(kind, res, params) -> Report:
    return Report(kind, params, value=res.value, argmax=res.argmax, radius=res.radius,
                  boundary_ratio=res.boundary_ratio, verdict="ok", details={"count": res.count})


def cmd_norm(args) -> Report:
    theta = _tensor(args.tensor)
    if args.kind == "omega-n":
        res = norm_omega_n(theta, args.omega, args.N, args.radius)
    elif args.kind == "zero-n":
        res = norm_zero_n(theta, args.N, args.radius)
    else:
        w1 = args.omega if args.omega1 is None else args.omega1
        w2 = args.omega if args.omega2 is None else args.omega2
        res = norm_two_order(theta, w1, w2, args.N, args.radius)
    return _scan_report("norm", res, {"kind": args.kind})


def cmd_seminorm(args) -> Report:
    theta = _tensor(args.tensor)
    a, b = _multi(args.alpha, theta.d), _multi(args.beta, theta.d)
    res = bt_seminorm(theta, a, b, args.omega, args.N, args.radius)
    return _scan_report("seminorm", res, {"alpha": list(a), "beta": list(b)})


def cmd_mixed(args) -> Report:
    theta = _tensor(args.tensor)
    t = holder_triple(args.p, args.q)
    if args.all_orderings:
        value, per = mixed_lebesgue_norm(theta, t, args.radius, minimize=True)
        details = {"orderings": per}
    else:
        value = mixed_lebesgue_norm(theta, t, args.radius)
        details = {}
    return Report("mixed-norm", {"triple": t.as_dict()}, value=value, radius=args.radius,
                  verdict="ok", details=details)


def cmd_bt(args) -> Report:
    theta = _tensor(args.tensor)
    return bt_membership_scan(theta, args.omega, args.N, args.alpha_max, args.beta_max,
                              args.radius, args.stability, args.divergence)


def cmd_bound(args) -> Report:
    theta = _tensor(args.tensor)
    split = _floats(args.split) if args.split else None
    return boundedness_experiment(theta, holder_triple(args.p, args.q), args.s1, args.s2,
                                  args.omega, args.N, args.radius, args.samples, args.seed,
                                  args.slack, split)


def cmd_compact(args) -> Report:
    theta = _tensor(args.tensor)
    e = CompactnessExperiment(theta, _sequence(args.b), holder_triple(args.p, args.q), args.N,
                              _floats(args.epsilons), args.samples, args.seed, args.radius,
                              args.slot)
    curve, report = compactness_experiment(e)
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(curve.to_csv())
    return report


def cmd_witness(args) -> Report:
    return negative_witness_scan(_tensor(args.tensor), args.omega, args.N, args.rmax,
                                 args.divergence)


def cmd_bridge(args) -> Report:
    theta = _tensor(args.tensor)
    f, g = _sequence(args.F), _sequence(args.G)
    K = args.K if args.K is not None else max(f.support_radius(), g.support_radius())
    n = args.n
    if n is None:
        kv = 0
        if hasattr(theta, "V"):
            kv = theta.V.coeffs.support_radius()
        elif hasattr(theta, "terms"):
            kv = max(V.coeffs.support_radius() for V, _ in theta.terms)
        n = grid_size(2 * (kv + 2 * K) + 1)
    grid = TorusGrid(theta.d, n)
    return bridge_check(theta, from_fourier(f, grid), from_fourier(g, grid), K)


def cmd_lemma_x(args) -> Report:
    phi = symbol_from_spec(args.d, _json_arg(args.phi))
    if args.vhat:
        return variable_coefficient_scan([(_sequence(args.vhat), phi)], args.N, args.alpha_max,
                                         args.beta_max, args.radius, args.stability,
                                         args.divergence)
    return lemma_x_scan(phi, args.N, args.alpha_max, args.beta_max, args.radius,
                        args.stability, args.divergence)


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(2)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="dbo", description="Discrete bilinear operators on Z^d: norms, "
                 "BT-class scans and verification experiments.")
    ap.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the JSON report here (default: standard output)")
    common.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: $DBO_THREADS or 1); never changes results")
    common.add_argument("--stability", type=float, default=0.10,
                        help="relative change allowed under radius doubling (default 0.10)")
    common.add_argument("--divergence", type=float, default=2.0,
                        help="growth factor that counts as divergence (default 2.0)")
    common.add_argument("--slack", type=float, default=1e-9,
                        help="relative floating-point slack for certificates (default 1e-9)")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=func)
        return p

    p = add("apply", cmd_apply, "apply T_Theta to a pair of sequences")
    p.add_argument("--tensor", required=True)
    p.add_argument("--f", required=True)
    p.add_argument("--g", required=True)
    p.add_argument("--out-radius", type=int, required=True)

    p = add("norm", cmd_norm, "scan ||Theta||_{omega,N} and its variants")
    p.add_argument("--tensor", required=True)
    p.add_argument("--kind", choices=["omega-n", "zero-n", "two-order"], default="omega-n")
    p.add_argument("--omega", type=float, default=0.0)
    p.add_argument("--omega1", type=float, default=None)
    p.add_argument("--omega2", type=float, default=None)
    p.add_argument("--N", type=float, required=True)
    p.add_argument("--radius", type=int, required=True)

    p = add("seminorm", cmd_seminorm, "scan one BT seminorm")
    p.add_argument("--tensor", required=True)
    p.add_argument("--alpha", default="", help="comma-separated, e.g. 1,-1")
    p.add_argument("--beta", default="")
    p.add_argument("--omega", type=float, default=0.0)
    p.add_argument("--N", type=float, required=True)
    p.add_argument("--radius", type=int, required=True)

    p = add("mixed-norm", cmd_mixed, "mixed Lebesgue norm l^r_j l^p'_k l^q'_l")
    p.add_argument("--tensor", required=True)
    p.add_argument("--p", type=parse_exponent, required=True)
    p.add_argument("--q", type=parse_exponent, required=True)
    p.add_argument("--radius", type=int, required=True)
    p.add_argument("--all-orderings", action="store_true")

    p = add("bt-check", cmd_bt, "BT-class membership scan at radii R and 2R")
    p.add_argument("--tensor", required=True)
    p.add_argument("--omega", type=float, default=0.0)
    p.add_argument("--N", type=float, required=True)
    p.add_argument("--alpha-max", type=int, default=2)
    p.add_argument("--beta-max", type=int, default=2)
    p.add_argument("--radius", type=int, default=20)

    p = add("verify-bound", cmd_bound, "certificate versus sampled operator ratios")
    p.add_argument("--tensor", required=True)
    p.add_argument("--p", type=parse_exponent, required=True)
    p.add_argument("--q", type=parse_exponent, required=True)
    p.add_argument("--s1", type=float, default=0.0)
    p.add_argument("--s2", type=float, default=0.0)
    p.add_argument("--omega", type=float, default=0.0)
    p.add_argument("--N", type=float, required=True)
    p.add_argument("--radius", type=int, required=True)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--split", default=None, help="N1,N2 with N1 + N2 = 2N")

    p = add("verify-compactness", cmd_compact, "tail decay of a commutator")
    p.add_argument("--tensor", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--p", type=parse_exponent, required=True)
    p.add_argument("--q", type=parse_exponent, required=True)
    p.add_argument("--N", type=float, required=True)
    p.add_argument("--radius", type=int, default=24)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--slot", type=int, choices=[1, 2], default=1)
    p.add_argument("--epsilons", default="0.1,0.01,0.001")
    p.add_argument("--csv", default=None, help="also write the tail curve as CSV")

    p = add("witness", cmd_witness, "divergence along the ray j = 2k = 2l")
    p.add_argument("--tensor", required=True)
    p.add_argument("--omega", type=float, default=0.0)
    p.add_argument("--N", type=float, required=True)
    p.add_argument("--rmax", type=int, required=True)

    p = add("bridge", cmd_bridge, "Fourier-side tensor versus physical-side operator")
    p.add_argument("--tensor", required=True)
    p.add_argument("--F", required=True, help="coefficients of F (sequence JSON)")
    p.add_argument("--G", required=True, help="coefficients of G (sequence JSON)")
    p.add_argument("--K", type=int, default=None, help="band limit (default: from the inputs)")
    p.add_argument("--n", type=int, default=None, help="grid size (default: power of two)")

    p = add("lemma-x", cmd_lemma_x, "membership scan of Theta_Phi (or Theta_{V,Phi})")
    p.add_argument("--phi", required=True, help="symbol JSON file, or inline JSON such as "
                   "'{\"name\": \"monomial\", \"a\": [1], \"b\": [0]}'")
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--vhat", default=None, help="optional V^ sequence JSON")
    p.add_argument("--N", type=float, required=True)
    p.add_argument("--alpha-max", type=int, default=2)
    p.add_argument("--beta-max", type=int, default=2)
    p.add_argument("--radius", type=int, default=20)
    return ap


def _validate(args):
    for name in ("radius", "out_radius", "rmax", "samples"):
        v = getattr(args, name, None)
        if v is not None and v < (0 if name == "out_radius" else 1):
            raise ValueError(f"--{name.replace('_', '-')} must be positive")
    if getattr(args, "N", None) is not None and args.N <= 0:
        raise ValueError("--N must be positive")
    if args.stability < 0 or args.divergence <= 1 or args.slack < 0:
        raise ValueError("thresholds need stability >= 0, divergence > 1, slack >= 0")
    for name in ("alpha_max", "beta_max"):
        v = getattr(args, name, None)
        if v is not None and v < 0:
            raise ValueError(f"--{name.replace('_', '-')} must be nonnegative")


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        set_workers(args.threads)
        _validate(args)
        report = args.func(args)
    except (InputError, ValueError, KeyError, TypeError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"dbo {args.command}: error: {msg}", file=sys.stderr)
        return 2
    finally:
        set_workers(None)
    report.config = _config(args)
    if args.command == "apply":
        # the output file is the sequence itself, readable as sequence JSON
        obj = dict(report.details["output"], config=report.config)
        text = json.dumps(obj, sort_keys=True, indent=2) + "\n"
    else:
        text = report.to_json()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    value = "" if report.value is None else f" value={report.value:.6g}"
    print(f"{report.kind}: {report.verdict}{value}", file=sys.stdout if args.out else sys.stderr)
    return 1 if report.verdict in FAILING else 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
