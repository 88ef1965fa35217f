#!/usr/bin/env python3
"""
sumcap command line.

  make-channel NAME [params] [-o FILE]     write a named channel as JSON
  compute QUANTITY [FILE] [options]        evaluate one quantity, print JSON
  compute QUANTITY --direct-sum A B        ... of A (+) B (--tensor A B for A (x) B)
  verify CHECK [INPUTS] [options]          run one check (exit 0 pass, 1 fail)
  suite [CONFIG] [-o PREFIX]               run a suite, write JSON + CSV

Exit codes: 0 success, 1 a check failed, 2 invalid input.
Environment: SUMCAP_THREADS bounds restart parallelism, SUMCAP_QUIET=1 hides [info] lines.
"""

import argparse
import json
import math
import sys
from typing import List, Optional

import yaml

from common.errors import ConfigError, SumcapError
from common.utils import log, save_json
from calc import channels as ch
from calc import quantities as qt
from harness.suite import CHECKS, PARAM_ALIASES, build_channel, resolve_channel, resolve_state, run_check, run_suite
from api.export_reports import build_payload, quantity_payload, write_reports

MAKE_NAMES = ["identity", "depolarizing", "dephasing", "constant", "partial_trace", "werner_holevo",
              "mixed_unitary", "random", "unitary"]

QUANTITIES = {
    "smin": "minimal output Renyi entropy (--alpha)",
    "coherent": "coherent information J",
    "mutual": "mutual information I",
    "chi": "HSW capacity",
    "chi-constrained": "constrained HSW capacity chi(T, rho) (--state)",
    "hT": "convex closure of output entropy H_T(rho) (--state)",
    "eof": "entanglement of formation (--state, no channel)",
    "gap": "log2 d_out - S_min - chi",
}


def _alpha(text: str) -> float:
    if text.strip().lower() in ("inf", "infinity"):
        return math.inf
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not v >= 1:
        raise argparse.ArgumentTypeError(f"alpha must be >= 1, got {v}")
    return v


def _add_options(ap: argparse.ArgumentParser) -> None:
    g = ap.add_argument_group("optimizer")
    g.add_argument("--restarts", type=int, help="Random restarts (default 32)")
    g.add_argument("--seed", type=int, help="Base seed; restart r uses seed + r (default 0)")
    g.add_argument("--max-iterations", type=int)
    g.add_argument("--objective-tolerance", type=float)
    g.add_argument("--ensemble-size", type=int, help="Ensemble members for chi (default d_in^2)")
    g.add_argument("--decomposition-size", type=int, help="Decomposition members for H_T (default rank^2)")
    g.add_argument("--jobs", type=int, help="Worker threads (default SUMCAP_THREADS or all cores)")


def _options(args) -> qt.OptimizerOptions:
    raw = {
        "restarts": args.restarts,
        "seed": args.seed,
        "max_iterations": args.max_iterations,
        "objective_tolerance": args.objective_tolerance,
        "ensemble_size": args.ensemble_size,
        "decomposition_size": args.decomposition_size,
        "n_jobs": args.jobs,
    }
    return qt.OptimizerOptions.from_dict({k: v for k, v in raw.items() if v is not None})


def _emit(obj: dict, out: Optional[str]) -> None:
    if out:
        save_json(out, obj)
        log(f"wrote {out}")
    else:
        sys.stdout.write(json.dumps(obj, ensure_ascii=False, indent=2) + "\n")


# ----------------- subcommands -----------------

def cmd_make_channel(args) -> int:
    raw = {
        "d": args.d, "lambda": args.lam, "p": args.p, "seed": args.seed, "env_dim": args.env_dim,
        "d_in": args.d_in, "d_out": args.d_out, "dA": args.dA, "dB": args.dB, "side": args.side,
        "index": args.index, "state": args.state, "weights": args.weights,
    }
    params = {k: v for k, v in raw.items() if v is not None}
    if args.name == "random" and args.d is not None:
        params.setdefault("d_in", args.d)
        params.setdefault("d_out", args.d)
    T = build_channel(args.name, params)
    if args.label:
        T = ch.Channel(T.kraus, args.label)
    if args.out:
        ch.save_channel(T, args.out)
        ch.load_channel(args.out)
        log(f"wrote {args.out}: {T!r} unital={T.d_in == T.d_out and ch.is_unital(T)}")
    else:
        _emit(ch.channel_to_json(T), None)
    return 0


def _channel_files(args) -> List[str]:
    return list(args.tensor or args.direct_sum or args.files)


def _compute_channel(args) -> ch.Channel:
    files = args.files
    pair = args.tensor or args.direct_sum
    if pair:
        if files:
            raise ConfigError("with --tensor/--direct-sum the two channel files follow the flag")
        a, b = (resolve_channel(f) for f in pair)
        return ch.tensor(a, b) if args.tensor else ch.direct_sum([a, b])
    if len(files) != 1:
        raise ConfigError(f"{args.quantity} takes one channel file (or two with --tensor/--direct-sum)")
    return resolve_channel(files[0])


def cmd_compute(args) -> int:
    opts = _options(args)
    q = args.quantity
    state = resolve_state(args.state) if args.state else None
    if q in ("chi-constrained", "hT", "eof") and state is None:
        raise ConfigError(f"{q} needs --state FILE")

    if q == "eof":
        if _channel_files(args):
            raise ConfigError("eof takes no channel file, only --state")
        result = qt.eof(state, opts)
    else:
        T = _compute_channel(args)
        if q == "smin":
            result = qt.min_output_renyi(T, args.alpha, opts)
        elif q == "coherent":
            result = qt.coherent_information(T, opts)
        elif q == "mutual":
            result = qt.mutual_information(T, opts)
        elif q == "chi":
            result = qt.holevo_capacity(T, opts)
        elif q == "chi-constrained":
            result = qt.constrained_holevo(T, state, opts)
        elif q == "hT":
            result = qt.convex_closure_output_entropy(T, state, opts)
        else:
            gap = qt.hsw_smin_gap(T, opts)
            _emit({"units": "bits", "quantity": q, "inputs": _channel_files(args), "value": gap}, args.out)
            return 0
    if not result.converged:
        log(f"{q}: best restart did not meet its convergence criterion", "warn")
    inputs = _channel_files(args) + ([args.state] if args.state else [])
    _emit(quantity_payload(q, result, inputs, args.emit_witness), args.out)
    return 0


def cmd_verify(args) -> int:
    spec = CHECKS.get(args.check)
    if spec is None:
        raise ConfigError(f"unknown check {args.check!r}; known: {', '.join(sorted(CHECKS))}")
    if args.perturb is not None and spec.finding:
        raise ConfigError(f"{args.check} records a finding; --perturb has nothing to shift")
    raw = {"alpha": args.alpha, "p": args.p, "weights": args.weights, "lambda": args.lam}
    params = {k: v for k, v in raw.items() if v is not None and PARAM_ALIASES.get(k, k) in spec.params}
    report = run_check(args.check, args.inputs, params, _options(args), args.tolerance)
    if args.perturb is not None:
        report.perturb(args.perturb)
    if args.out:
        for path in write_reports([report], args.out, args.format):
            log(f"wrote {path}")
    else:
        _emit(build_payload([report]), None)
    log(f"{report.check_name}: {'passed' if report.passed else 'FAILED'}", "ok" if report.passed else "fail")
    return 0 if report.passed else 1


def cmd_suite(args) -> int:
    opts = _options(args)
    reports = run_suite(args.config, base_opts=opts)
    for path in write_reports(reports, args.out, args.format):
        log(f"wrote {path}")
    failed = [r for r in reports if not r.passed]
    log(f"{len(reports) - len(failed)}/{len(reports)} checks passed", "ok" if not failed else "fail")
    return 1 if failed else 0


# ----------------- parser -----------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sumcap", description="Direct-sum channel capacity toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    mk = sub.add_parser("make-channel", help="Write a named channel as JSON")
    mk.add_argument("name", choices=MAKE_NAMES)
    mk.add_argument("--d", type=int, help="Dimension")
    mk.add_argument("--lambda", dest="lam", type=float, help="Depolarizing parameter")
    mk.add_argument("--p", type=float, help="Dephasing strength (default 1)")
    mk.add_argument("--seed", type=int, help="Seed for random/unitary/mixed_unitary")
    mk.add_argument("--env-dim", type=int, help="Environment dimension for random")
    mk.add_argument("--d-in", type=int)
    mk.add_argument("--d-out", type=int)
    mk.add_argument("--dA", type=int, help="partial_trace: first factor")
    mk.add_argument("--dB", type=int, help="partial_trace: second factor")
    mk.add_argument("--side", choices=["A", "B"], help="partial_trace: factor traced out (default B)")
    mk.add_argument("--index", type=int, help="constant: basis state of the output")
    mk.add_argument("--state", help="constant: output state file")
    mk.add_argument("--weights", type=float, nargs="+", help="mixed_unitary: probabilities")
    mk.add_argument("--label", help="Override the advisory label")
    mk.add_argument("-o", "--out", help="Output JSON path (default stdout)")
    mk.set_defaults(func=cmd_make_channel)

    cp = sub.add_parser("compute", help="Evaluate one quantity")
    cp.add_argument("quantity", choices=sorted(QUANTITIES))
    cp.add_argument("files", nargs="*", help="Channel JSON file(s)")
    cp.add_argument("--alpha", type=_alpha, default=1.0, help="Renyi order for smin (number or inf)")
    combo = cp.add_mutually_exclusive_group()
    combo.add_argument("--tensor", nargs=2, metavar=("A", "B"), help="Use the tensor product of two channel files")
    combo.add_argument("--direct-sum", nargs=2, metavar=("A", "B"), help="Use the direct sum of two channel files")
    cp.add_argument("--state", help="State JSON file for chi-constrained, hT and eof")
    cp.add_argument("--emit-witness", action="store_true", help="Serialize the witness states")
    cp.add_argument("-o", "--out", help="Output JSON path (default stdout)")
    _add_options(cp)
    cp.set_defaults(func=cmd_compute)

    vf = sub.add_parser("verify", help="Run one check")
    vf.add_argument("check", help=f"One of: {', '.join(sorted(CHECKS))}")
    vf.add_argument("inputs", nargs="*", help="Channel files, then state files")
    vf.add_argument("--alpha", type=_alpha)
    vf.add_argument("--p", type=_alpha, help="Renyi order for wh")
    vf.add_argument("--weights", type=float, nargs="+", help="Block weights for affinity")
    vf.add_argument("--lambda", dest="lam", type=float, help="Block weight for constrained-dsum")
    vf.add_argument("--tolerance", type=float)
    vf.add_argument("--perturb", type=float, help="Add a constant to the computed rhs (negative control; not for wh)")
    vf.add_argument("--format", choices=["json", "csv"])
    vf.add_argument("-o", "--out", help="Report path prefix (default: JSON on stdout)")
    _add_options(vf)
    vf.set_defaults(func=cmd_verify)

    st = sub.add_parser("suite", help="Run a verification suite")
    st.add_argument("config", nargs="?", help="Suite YAML/JSON (default sources/suite.yaml)")
    st.add_argument("-o", "--out", default="outputs/suite_report", help="Report path prefix")
    st.add_argument("--format", choices=["json", "csv"], help="Write only this format")
    _add_options(st)
    st.set_defaults(func=cmd_suite)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    log(f"sumcap {args.command}")
    try:
        return args.func(args)
    except (SumcapError, OSError, json.JSONDecodeError, yaml.YAMLError) as e:
        log(f"{type(e).__name__}: {e}", "error")
        return 2


if __name__ == "__main__":
    sys.exit(main())
