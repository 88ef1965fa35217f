"""
Suite configuration: loading, validation, input descriptors and run_suite.

A suite file (YAML or JSON) is either a bare list of entries or
{"checks": [...]}. Each entry:

  check:     registry name (see CHECKS)
  inputs:    list of descriptors; channels first, then states
  params:    scalar parameters of the check (alpha, p, weights, lambda)
  tolerance: overrides the check's default tolerance
  options:   OptimizerOptions overrides
  enabled:   false skips the entry
  perturb:   constant added to the computed rhs (negative control; not
             allowed on finding checks such as wh)

A descriptor is a path to a channel/state JSON file (relative to the suite
file), or an inline constructor such as {channel: depolarizing, d: 2,
lambda: 0.5}, {state: bell}, {direct_sum: [...]}, {tensor: [...]}.
"""

from __future__ import annotations

import json
import os
from typing import Any, Callable, Dict, List, NamedTuple, Optional, Sequence, Union

import numpy as np
import yaml

from common.errors import ConfigError
from common.utils import ROOT, log, validate_against_schema
from calc import channels as ch
from calc import matcore as mc
from calc.quantities import OptimizerOptions
from harness import checks as hc

DEFAULT_SUITE = os.path.join(ROOT, "sources", "suite.yaml")


# ----------------- constructor registries -----------------

def _req(params: dict, key: str, name: str):
    if key not in params:
        raise ConfigError(f"{name}: missing parameter {key!r}")
    return params[key]


def _constant(params: dict, base_dir: str) -> ch.Channel:
    if "state" in params and params["state"] is not None:
        sigma = resolve_state(params["state"], base_dir)
    else:
        d = int(params.get("d", 2))
        idx = int(params.get("index", 0))
        if not 0 <= idx < d:
            raise ConfigError(f"constant: basis index {idx} outside range({d})")
        sigma = mc.pure_density(np.eye(d)[idx])
    d_in = params.get("d_in")
    return ch.constant_channel(sigma, None if d_in is None else int(d_in))


def _mixed_unitary(params: dict, base_dir: str) -> ch.Channel:
    weights = _req(params, "weights", "mixed_unitary")
    d = int(params.get("d", 2))
    if params.get("seed") is not None:
        seed = int(params["seed"])
        Us = [mc.random_haar_unitary(d, seed + n) for n in range(len(weights))]
    else:
        basis = ch.weyl_operators(d)
        if len(weights) > len(basis):
            raise ConfigError(f"mixed_unitary: at most {len(basis)} Weyl unitaries for d={d}")
        Us = basis[:len(weights)]
    return ch.mixed_unitary(weights, Us)


CHANNEL_BUILDERS: Dict[str, Callable[[dict, str], ch.Channel]] = {
    "identity": lambda p, b: ch.identity(int(_req(p, "d", "identity"))),
    "depolarizing": lambda p, b: ch.depolarizing(int(_req(p, "d", "depolarizing")),
                                                 float(_req(p, "lambda", "depolarizing"))),
    "dephasing": lambda p, b: ch.dephasing(int(_req(p, "d", "dephasing")), float(p.get("p", 1.0))),
    "unitary": lambda p, b: ch.unitary_channel(mc.random_haar_unitary(int(_req(p, "d", "unitary")),
                                                                      int(p.get("seed", 0)))),
    "constant": _constant,
    "partial_trace": lambda p, b: ch.partial_trace_channel(int(_req(p, "dA", "partial_trace")),
                                                           int(_req(p, "dB", "partial_trace")),
                                                           str(p.get("side", "B"))),
    "werner_holevo": lambda p, b: ch.werner_holevo(int(p.get("d", 3))),
    "mixed_unitary": _mixed_unitary,
    "random": lambda p, b: ch.random_channel(int(_req(p, "d_in", "random")), int(_req(p, "d_out", "random")),
                                             int(p.get("env_dim", 2)), int(p.get("seed", 0))),
}

STATE_BUILDERS: Dict[str, Callable[[dict], Any]] = {
    "bell": lambda p: mc.bell_state(),
    "maximally_entangled": lambda p: mc.maximally_entangled(int(p.get("d", 2))).density(),
    "maximally_mixed": lambda p: mc.maximally_mixed(int(_req(p, "d", "maximally_mixed"))),
    "product": lambda p: mc.product_state(*p.get("vectors", [])),
    "werner": lambda p: mc.werner_state(float(_req(p, "fidelity", "werner"))),
    "basis": lambda p: mc.pure_density(np.eye(int(_req(p, "d", "basis")))[int(p.get("index", 0))],
                                       p.get("dims")),
    "pure": lambda p: mc.pure_density(_complex_vector(_req(p, "vec", "pure")), p.get("dims")),
    "random": lambda p: mc.DensityMatrix(
        mc.random_density(int(_req(p, "d", "random")), p.get("rank"), int(p.get("seed", 0))).mat,
        tuple(p.get("dims") or [int(p["d"])])),
}


def _complex_vector(raw) -> np.ndarray:
    arr = np.asarray(raw, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 2:
        return arr[:, 0] + 1j * arr[:, 1]
    return arr.astype(complex)


def build_channel(name: str, params: Optional[dict] = None, base_dir: str = ".") -> ch.Channel:
    builder = CHANNEL_BUILDERS.get(name)
    if builder is None:
        raise ConfigError(f"unknown channel constructor {name!r}; known: {', '.join(sorted(CHANNEL_BUILDERS))}")
    return builder(dict(params or {}), base_dir)


def build_state(name: str, params: Optional[dict] = None):
    builder = STATE_BUILDERS.get(name)
    if builder is None:
        raise ConfigError(f"unknown state constructor {name!r}; known: {', '.join(sorted(STATE_BUILDERS))}")
    return builder(dict(params or {}))


def _path(desc: str, base_dir: str) -> str:
    return desc if os.path.isabs(desc) else os.path.join(base_dir, desc)


def resolve_channel(desc, base_dir: str = ".") -> ch.Channel:
    if isinstance(desc, str):
        return ch.load_channel(_path(desc, base_dir))
    if isinstance(desc, dict):
        if "channel" in desc:
            params = {k: v for k, v in desc.items() if k != "channel"}
            return build_channel(desc["channel"], params, base_dir)
        if "direct_sum" in desc:
            return ch.direct_sum([resolve_channel(d, base_dir) for d in desc["direct_sum"]])
        if "tensor" in desc:
            parts = [resolve_channel(d, base_dir) for d in desc["tensor"]]
            out = parts[0]
            for t in parts[1:]:
                out = ch.tensor(out, t)
            return out
    raise ConfigError(f"cannot resolve channel descriptor {desc!r}")


def resolve_state(desc, base_dir: str = "."):
    if isinstance(desc, str):
        return ch.load_state(_path(desc, base_dir))
    if isinstance(desc, dict) and "state" in desc:
        params = {k: v for k, v in desc.items() if k != "state"}
        return build_state(desc["state"], params)
    raise ConfigError(f"cannot resolve state descriptor {desc!r}")


def describe(desc) -> str:
    return desc if isinstance(desc, str) else json.dumps(desc, sort_keys=True, ensure_ascii=False)


# ----------------- check registry -----------------

class CheckSpec(NamedTuple):
    func: Callable
    channels: int
    states: int  # -1: any number, passed as one list
    params: Sequence[str]
    uses_opts: bool = True
    finding: bool = False


CHECKS: Dict[str, CheckSpec] = {
    "smin-dsum": CheckSpec(hc.check_direct_sum_smin, 2, 0, ("alpha",)),
    "coherent-dsum": CheckSpec(hc.check_direct_sum_coherent, 2, 0, ()),
    "mutual-dsum": CheckSpec(hc.check_direct_sum_mutual, 2, 0, ()),
    "chi-dsum": CheckSpec(hc.check_direct_sum_holevo, 2, 0, ()),
    "tensor-distributes": CheckSpec(hc.check_tensor_distributes, 4, 0, (), uses_opts=False),
    "equalize-smin": CheckSpec(hc.check_equalize_smin, 2, 0, ("alpha",)),
    "prop2-chi": CheckSpec(hc.check_prop2_chi_expansion, 2, 0, ()),
    "superadditivity": CheckSpec(hc.check_superadditivity_embedding, 2, 1, ()),
    "affinity": CheckSpec(hc.check_monotone_affinity, 0, -1, ("weights",)),
    "weak-to-strong": CheckSpec(hc.check_weak_to_strong_monotone, 0, 2, ()),
    "wh": CheckSpec(hc.wh_counterexample, 0, 0, ("p",), finding=True),
    "constrained-dsum": CheckSpec(hc.check_constrained_block_formula, 2, 2, ("lam",)),
    "product-additivity": CheckSpec(hc.check_product_additivity, 2, 2, ()),
    "hsw-gap": CheckSpec(hc.check_hsw_smin_gap, 1, 0, ()),
}

PARAM_ALIASES = {"lambda": "lam"}


def _param_value(key: str, value):
    if key in ("alpha", "p") and isinstance(value, str) and value.lower() in ("inf", "infinity"):
        return float("inf")
    return value


def run_check(name: str, inputs: Sequence = (), params: Optional[dict] = None,
              opts: Optional[OptimizerOptions] = None, tolerance: Optional[float] = None,
              base_dir: str = ".") -> hc.CheckReport:
    spec = CHECKS.get(name)
    if spec is None:
        raise ConfigError(f"unknown check {name!r}; known: {', '.join(sorted(CHECKS))}")
    inputs = list(inputs)
    n_states = len(inputs) - spec.channels if spec.states < 0 else spec.states
    if len(inputs) != spec.channels + n_states or n_states < 0 or (spec.states < 0 and n_states < 1):
        want = f"{spec.channels} channel(s) and " + ("one or more" if spec.states < 0 else str(spec.states))
        raise ConfigError(f"{name}: expected {want} state(s), got {len(inputs)} input(s)")
    chans = [resolve_channel(d, base_dir) for d in inputs[:spec.channels]]
    states = [resolve_state(d, base_dir) for d in inputs[spec.channels:]]

    kwargs = {}
    for key, value in (params or {}).items():
        key = PARAM_ALIASES.get(key, key)
        if key not in spec.params:
            raise ConfigError(f"{name}: unknown parameter {key!r}")
        kwargs[key] = _param_value(key, value)
    missing = [k for k in spec.params if k not in kwargs and k in ("p", "weights", "lam")]
    if missing:
        raise ConfigError(f"{name}: missing parameter(s) {', '.join(missing)}")
    if spec.uses_opts:
        kwargs["opts"] = opts or OptimizerOptions()
    if tolerance is not None:
        kwargs["tol"] = float(tolerance)

    args = chans + ([states] if spec.states < 0 else states)
    report = spec.func(*args, **kwargs)
    report.inputs = [describe(d) for d in inputs]
    return report


# ----------------- suites -----------------

def load_suite(path: str) -> List[dict]:
    with open(path, "r", encoding="utf-8") as f:
        raw = yaml.safe_load(f)
    return normalize_suite(raw)


def normalize_suite(raw) -> List[dict]:
    if raw is None:
        raw = []
    validate_against_schema(raw, "suite.schema.json", ConfigError)
    entries = list(raw["checks"] if isinstance(raw, dict) else raw)
    for n, entry in enumerate(entries):
        spec = CHECKS.get(entry["check"])
        if spec is not None and spec.finding and "perturb" in entry:
            raise ConfigError(f"entry {n}: {entry['check']} records a finding and cannot be perturbed")
    return entries


def run_suite(config: Union[str, dict, list, None] = None, base_opts: Optional[OptimizerOptions] = None,
              base_dir: Optional[str] = None) -> List[hc.CheckReport]:
    """Run every enabled entry; reports come back ordered by check name, then inputs."""
    if config is None:
        config = DEFAULT_SUITE
    if isinstance(config, str):
        base_dir = base_dir or os.path.dirname(os.path.abspath(config))
        entries = load_suite(config)
    else:
        entries = normalize_suite(config)
    base_dir = base_dir or "."

    reports = []
    for n, entry in enumerate(entries):
        if not entry.get("enabled", True):
            log(f"skip {entry['check']} (entry {n}, disabled)")
            continue
        opts = OptimizerOptions.from_dict(entry.get("options"), base_opts)
        report = run_check(entry["check"], entry.get("inputs", []), entry.get("params"), opts,
                           entry.get("tolerance"), base_dir)
        if "perturb" in entry:
            report.perturb(entry["perturb"])
        tag = "ok" if report.passed else "fail"
        log(f"{report.check_name} {report.inputs}: lhs={report.computed_lhs:.6f} "
            f"rhs={report.computed_rhs:.6f} ({report.wall_time:.2f}s)", tag)
        reports.append(report)

    reports.sort(key=lambda r: (r.check_name, json.dumps(r.inputs), json.dumps(r.params, sort_keys=True)))
    return reports
