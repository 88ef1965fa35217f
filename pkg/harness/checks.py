"""
Verification checks for the direct-sum identities, the reduction
constructions and the entanglement-monotone laws.

Each check returns a CheckReport. Optimizer-backed sides always receive the
part witnesses (embedded into the larger space) as warm starts, so the
one-sided feasibility inequalities hold independent of optimizer luck; the
two-sided comparison is what the tolerance decides.
"""

from __future__ import annotations

import dataclasses
import math
import time
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from common.errors import ConfigError, DimensionError, SumcapError
from calc.matcore import (
    DensityMatrix,
    PureState,
    binary_entropy,
    bipartite_block_index,
    bipartite_dims,
    bipartite_direct_sum,
    bipartite_tensor,
    direct_sum_mat,
    maximally_entangled,
    partial_trace,
    prob_dist,
    renyi_entropy,
)
from calc.channels import (
    Channel,
    apply,
    choi,
    choi_distance,
    direct_sum,
    embed_sector,
    is_unital,
    pad_output,
    reindex_channel,
    sector_indices,
    sector_order,
    tensor,
    werner_holevo,
)
from calc.quantities import (
    Ensemble,
    OptimizerOptions,
    alpha_label,
    as_density_matrix,
    block_weight_objective,
    coherent_information,
    constrained_holevo,
    convex_closure_output_entropy,
    eof,
    holevo_capacity,
    hsw_smin_gap,
    min_output_renyi,
    mutual_information,
    optimal_block_weights,
    pure_ensemble,
    pure_members,
)

TWO_SIDED = "two-sided"
LHS_AT_MOST = "lhs<=rhs"
LHS_AT_LEAST = "lhs>=rhs"
FINDING = "finding"

FEASIBLE_TOL = 1e-9
CHI_FEASIBLE_TOL = 1e-6
WEIGHT_FORM_TOL = 1e-10
UNION_PRUNE = 1e-10


@dataclasses.dataclass
class CheckReport:
    check_name: str
    inputs: List[str]
    computed_lhs: float
    computed_rhs: float
    tolerance: float
    passed: bool
    comparison: str = TWO_SIDED
    conditions: Dict[str, bool] = dataclasses.field(default_factory=dict)
    values: Dict[str, Any] = dataclasses.field(default_factory=dict)
    params: Dict[str, Any] = dataclasses.field(default_factory=dict)
    options: Dict[str, Any] = dataclasses.field(default_factory=dict)
    wall_time: float = 0.0

    def recheck(self) -> bool:
        diff = self.computed_lhs - self.computed_rhs
        if self.comparison == TWO_SIDED:
            ok = abs(diff) <= self.tolerance
        elif self.comparison == LHS_AT_MOST:
            ok = diff <= self.tolerance
        elif self.comparison == LHS_AT_LEAST:
            ok = diff >= -self.tolerance
        else:
            ok = True
        self.passed = bool(ok and all(self.conditions.values()))
        return self.passed

    def perturb(self, delta: float) -> None:
        """Shift the computed rhs (negative control) and re-decide pass/fail."""
        if self.comparison == FINDING:
            raise ConfigError(f"{self.check_name} records a finding; there is no rhs margin to perturb")
        self.computed_rhs += float(delta)
        self.values["perturbed_by"] = float(delta)
        self.recheck()

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d.pop("wall_time")
        return _jsonable(d)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    return x


def _report(name: str, labels: Sequence[str], lhs: float, rhs: float, tol: float, started: float,
            opts: Optional[OptimizerOptions] = None, comparison: str = TWO_SIDED,
            conditions: Optional[Dict[str, bool]] = None, values: Optional[Dict[str, Any]] = None,
            params: Optional[Dict[str, Any]] = None) -> CheckReport:
    r = CheckReport(
        check_name=name,
        inputs=list(labels),
        computed_lhs=float(lhs),
        computed_rhs=float(rhs),
        tolerance=float(tol),
        passed=False,
        comparison=comparison,
        conditions={k: bool(v) for k, v in (conditions or {}).items()},
        values=values or {},
        params=params or {},
        options=opts.to_dict() if opts else {},
        wall_time=time.perf_counter() - started,
    )
    r.recheck()
    return r


def _label(x) -> str:
    if isinstance(x, Channel):
        return x.label or f"channel({x.d_in}->{x.d_out})"
    dims = getattr(x, "dims", None)
    return f"state{tuple(dims)}" if dims else "state"


# ----------------- warm-start plumbing -----------------

def _embed_members(source, indices: Sequence[int], total: int, weight: float = 1.0):
    p, vecs = pure_members(source)
    out = np.zeros((len(p), total), dtype=complex)
    out[:, np.asarray(indices, dtype=int)] = vecs
    return weight * p, out


def _union(parts) -> Ensemble:
    p = np.concatenate([w for w, _ in parts])
    vecs = np.vstack([v for _, v in parts])
    keep = p > UNION_PRUNE
    return pure_ensemble(p[keep], vecs[keep])


def _block_range(dims: Sequence[int], i: int) -> np.ndarray:
    off = int(sum(dims[:i]))
    return np.arange(off, off + dims[i])


def _embed_pure(psi: PureState, dims: Sequence[int], i: int) -> PureState:
    v = np.zeros(int(sum(dims)), dtype=complex)
    v[_block_range(dims, i)] = psi.vec
    return PureState(v, (v.size,))


def _product_ensemble(e1, e2, regroup: Optional[Tuple[int, int, int, int]] = None) -> Ensemble:
    """Members u (x) v; with regroup=(a, b, a2, b2) the vector is reordered to (A A')(B B')."""
    p1, v1 = pure_members(e1)
    p2, v2 = pure_members(e2)
    ps, vs = [], []
    for x, u in zip(p1, v1):
        for y, v in zip(p2, v2):
            w = np.kron(u, v)
            if regroup:
                w = w.reshape(regroup).transpose(0, 2, 1, 3).reshape(-1)
            ps.append(x * y)
            vs.append(w)
    return _union([(np.asarray(ps), np.asarray(vs))])


# ----------------- direct-sum identities -----------------

def check_direct_sum_smin(T1: Channel, T2: Channel, alpha: float = 1, opts: Optional[OptimizerOptions] = None,
                          tol: float = 1e-3) -> CheckReport:
    """S_min,alpha(T1 (+) T2) = min_i S_min,alpha(T_i)."""
    started = time.perf_counter()
    opts = opts or OptimizerOptions()
    r1 = min_output_renyi(T1, alpha, opts)
    r2 = min_output_renyi(T2, alpha, opts)
    dims = [T1.d_in, T2.d_in]
    warm = [_embed_pure(r1.witness, dims, 0), _embed_pure(r2.witness, dims, 1)]
    big = min_output_renyi(direct_sum([T1, T2]), alpha, opts, initial=warm)
    rhs = min(r1.value, r2.value)
    return _report("smin-dsum", [_label(T1), _label(T2)], big.value, rhs, tol, started, opts,
                   conditions={"one_sided": big.value <= rhs + FEASIBLE_TOL},
                   values={"parts": [r1.value, r2.value], "converged": big.converged},
                   params={"alpha": alpha_label(alpha)})


def check_direct_sum_coherent(T1: Channel, T2: Channel, opts: Optional[OptimizerOptions] = None,
                              tol: float = 5e-3) -> CheckReport:
    """J(T1 (+) T2) = max_i J(T_i)."""
    started = time.perf_counter()
    opts = opts or OptimizerOptions()
    r1 = coherent_information(T1, opts)
    r2 = coherent_information(T2, opts)
    z1, z2 = np.zeros((T1.d_in, T1.d_in)), np.zeros((T2.d_in, T2.d_in))
    warm = [DensityMatrix(direct_sum_mat([r1.witness.mat, z2]), (T1.d_in + T2.d_in,)),
            DensityMatrix(direct_sum_mat([z1, r2.witness.mat]), (T1.d_in + T2.d_in,))]
    big = coherent_information(direct_sum([T1, T2]), opts, initial=warm)
    rhs = max(r1.value, r2.value)
    return _report("coherent-dsum", [_label(T1), _label(T2)], big.value, rhs, tol, started, opts,
                   conditions={"one_sided": big.value >= rhs - FEASIBLE_TOL},
                   values={"parts": [r1.value, r2.value], "converged": big.converged})


def check_direct_sum_mutual(T1: Channel, T2: Channel, opts: Optional[OptimizerOptions] = None,
                            tol: float = 1e-3) -> CheckReport:
    """I(T1 (+) T2) three ways: direct optimization, weight form, log2 sum 2^I_i."""
    started = time.perf_counter()
    opts = opts or OptimizerOptions()
    r1 = mutual_information(T1, opts)
    r2 = mutual_information(T2, opts)
    c = [r1.value, r2.value]
    lam, closed = optimal_block_weights(c)
    weight_form = block_weight_objective(lam, c)
    l1, l2 = lam.weights
    warm = DensityMatrix(direct_sum_mat([l1 * r1.witness.mat, l2 * r2.witness.mat]), (T1.d_in + T2.d_in,))
    big = mutual_information(direct_sum([T1, T2]), opts, initial=[warm])
    return _report("mutual-dsum", [_label(T1), _label(T2)], big.value, closed, tol, started, opts,
                   conditions={"weight_form": abs(weight_form - closed) <= WEIGHT_FORM_TOL,
                               "one_sided": big.value >= closed - CHI_FEASIBLE_TOL},
                   values={"parts": c, "weight_form": weight_form, "block_weights": list(lam.weights)})


def _block_union(results, dims: Sequence[int], weights: Sequence[float]) -> Ensemble:
    total = int(sum(dims))
    return _union([_embed_members(r.witness, _block_range(dims, i), total, w)
                   for i, (r, w) in enumerate(zip(results, weights))])


def check_direct_sum_holevo(T1: Channel, T2: Channel, opts: Optional[OptimizerOptions] = None,
                            tol: float = 5e-3) -> CheckReport:
    """chi(T1 (+) T2) three ways: direct optimization, weight form, log2 sum 2^chi_i."""
    started = time.perf_counter()
    opts = opts or OptimizerOptions()
    r1 = holevo_capacity(T1, opts)
    r2 = holevo_capacity(T2, opts)
    c = [r1.value, r2.value]
    lam, closed = optimal_block_weights(c)
    weight_form = block_weight_objective(lam, c)
    warm = _block_union([r1, r2], [T1.d_in, T2.d_in], lam.weights)
    big = holevo_capacity(direct_sum([T1, T2]), opts, initial=[warm])
    return _report("chi-dsum", [_label(T1), _label(T2)], big.value, closed, tol, started, opts,
                   conditions={"weight_form": abs(weight_form - closed) <= WEIGHT_FORM_TOL,
                               "one_sided": big.value >= closed - CHI_FEASIBLE_TOL},
                   values={"parts": c, "weight_form": weight_form, "block_weights": list(lam.weights)})


# ----------------- reduction constructions -----------------

def check_tensor_distributes(T1: Channel, T2: Channel, T3: Channel, T4: Channel,
                             tol: float = 1e-10) -> CheckReport:
    """(T1 (+) T2) (x) (T3 (+) T4), rewritten sector by sector, equals
    (T1 (x) T3) (+) (T1 (x) T4) (+) (T2 (x) T3) (+) (T2 (x) T4)."""
    started = time.perf_counter()
    big = tensor(direct_sum([T1, T2]), direct_sum([T3, T4]))
    perm_in = sector_order([T1.d_in, T2.d_in], [T3.d_in, T4.d_in])
    perm_out = sector_order([T1.d_out, T2.d_out], [T3.d_out, T4.d_out])
    sectors = direct_sum([tensor(T1, T3), tensor(T1, T4), tensor(T2, T3), tensor(T2, T4)])
    dist = choi_distance(choi(reindex_channel(big, perm_in, perm_out)), choi(sectors))
    return _report("tensor-distributes", [_label(t) for t in (T1, T2, T3, T4)], dist, 0.0, tol, started,
                   comparison=LHS_AT_MOST)


def equalize_smin(T1: Channel, T2: Channel, alpha: float = 1, opts: Optional[OptimizerOptions] = None,
                  tol: float = 1e-3) -> Tuple[Channel, Channel, CheckReport]:
    """Pad each channel with the other's optimal output so both share S_min,alpha(T1) + S_min,alpha(T2)."""
    started = time.perf_counter()
    opts = opts or OptimizerOptions()
    r1 = min_output_renyi(T1, alpha, opts)
    r2 = min_output_renyi(T2, alpha, opts)
    sigma1, sigma2 = apply(T1, r1.witness), apply(T2, r2.witness)
    T1p, T2p = pad_output(T1, sigma2), pad_output(T2, sigma1)
    s1 = min_output_renyi(T1p, alpha, opts, initial=[r1.witness])
    s2 = min_output_renyi(T2p, alpha, opts, initial=[r2.witness])
    target = r1.value + r2.value
    report = _report("equalize-smin", [_label(T1), _label(T2)], s1.value, target, tol, started, opts,
                     conditions={"second_padded": abs(s2.value - target) <= tol},
                     values={"parts": [r1.value, r2.value], "padded": [s1.value, s2.value]},
                     params={"alpha": alpha_label(alpha)})
    return T1p, T2p, report


def check_equalize_smin(T1: Channel, T2: Channel, alpha: float = 1, opts: Optional[OptimizerOptions] = None,
                        tol: float = 1e-3) -> CheckReport:
    return equalize_smin(T1, T2, alpha, opts, tol)[2]


def check_prop2_chi_expansion(T1: Channel, T2: Channel, opts: Optional[OptimizerOptions] = None,
                              tol: float = 5e-3) -> CheckReport:
    """chi((T1 (+) T2)^(x)2) = log2[2^(2 chi1) + 2^(2 chi2) + 2^(chi1 + chi2 + 1)], plus the
    sector form with numeric chi(T_i (x) T_j)."""
    started = time.perf_counter()
    opts = opts or OptimizerOptions()
    r1 = holevo_capacity(T1, opts)
    r2 = holevo_capacity(T2, opts)
    c1, c2 = r1.value, r2.value
    lam, _ = optimal_block_weights([c1, c2])
    block = _block_union([r1, r2], [T1.d_in, T2.d_in], lam.weights)
    S = direct_sum([T1, T2])
    big_opts = opts.replace(restarts=min(opts.restarts, 2), ensemble_size=opts.ensemble_size or 32,
                            max_iterations=min(opts.max_iterations, 50))
    lhs = holevo_capacity(tensor(S, S), big_opts, initial=[_product_ensemble(block, block)]).value
    rhs = math.log2(2 ** (2 * c1) + 2 ** (2 * c2) + 2 ** (c1 + c2 + 1))

    def sector(A, B, ra, rb) -> float:
        return holevo_capacity(tensor(A, B), opts, initial=[_product_ensemble(ra.witness, rb.witness)]).value

    x11, x22, x12 = sector(T1, T1, r1, r1), sector(T2, T2, r2, r2), sector(T1, T2, r1, r2)
    sector_form = math.log2(2 ** x11 + 2 ** x22 + 2 * 2 ** x12)
    return _report("prop2-chi", [_label(T1), _label(T2)], lhs, rhs, tol, started, big_opts,
                   conditions={"sector_form": abs(sector_form - rhs) <= tol,
                               "one_sided": lhs >= rhs - CHI_FEASIBLE_TOL},
                   values={"parts": [c1, c2], "sector_values": [x11, x22, x12], "sector_form": sector_form})


def check_superadditivity_embedding(T1: Channel, T2: Channel, rho, opts: Optional[OptimizerOptions] = None,
                                    tol: float = 1e-3) -> CheckReport:
    """H of (T1 (+) T2)^(x)2 at rho placed in sector (block 1 of copy 1, block 2 of copy 2)
    equals H_{T1 (x) T2}(rho); also H_{T1 (x) T2}(rho) >= H_T1(rho_1) + H_T2(rho_2)."""
    started = time.perf_counter()
    opts = opts or OptimizerOptions()
    rho = as_density_matrix(rho)
    d1, d2 = T1.d_in, T2.d_in
    if rho.dim != d1 * d2:
        raise DimensionError(f"state of dimension {rho.dim} for inputs {d1}x{d2}")
    S = direct_sum([T1, T2])
    idx = sector_indices([d1, d2], [d1, d2], 0, 1)
    D = (d1 + d2) ** 2
    direct = convex_closure_output_entropy(tensor(T1, T2), rho, opts)
    warm = _union([_embed_members(direct.witness, idx, D)])
    big = convex_closure_output_entropy(tensor(S, S), embed_sector(rho, idx, D), opts, initial=[warm])
    h1 = convex_closure_output_entropy(T1, DensityMatrix(partial_trace(rho.mat, [d1, d2], [0]), (d1,)), opts)
    h2 = convex_closure_output_entropy(T2, DensityMatrix(partial_trace(rho.mat, [d1, d2], [1]), (d2,)), opts)
    return _report("superadditivity", [_label(T1), _label(T2), _label(rho)], big.value, direct.value, tol,
                   started, opts,
                   conditions={"chain": direct.value >= h1.value + h2.value - tol},
                   values={"marginal_values": [h1.value, h2.value]})


# ----------------- entanglement-monotone laws -----------------

def _block_embedded_roof(states: Sequence[DensityMatrix], weights: Sequence[float], parts) -> Ensemble:
    dims = [bipartite_dims(s) for s in states]
    dims_a, dims_b = [d[0] for d in dims], [d[1] for d in dims]
    total = sum(dims_a) * sum(dims_b)
    return _union([_embed_members(r.witness, bipartite_block_index(dims_a, dims_b, i), total, w)
                   for i, (r, w) in enumerate(zip(parts, weights))])


def check_monotone_affinity(states: Sequence, weights, opts: Optional[OptimizerOptions] = None,
                            tol: float = 1e-3) -> CheckReport:
    """E_F(sum_i lambda_i rho_i on (+A_i) (x) (+B_i)) = sum_i lambda_i E_F(rho_i)."""
    started = time.perf_counter()
    opts = opts or OptimizerOptions()
    states = [as_density_matrix(s) for s in states]
    w = prob_dist(weights).weights
    if len(states) != len(w):
        raise DimensionError(f"{len(states)} states for {len(w)} weights")
    parts = [eof(s, opts) for s in states]
    rhs = float(sum(x * r.value for x, r in zip(w, parts)))
    rho = bipartite_direct_sum(states, w)
    big = eof(rho, opts, initial=[_block_embedded_roof(states, w, parts)])
    return _report("affinity", [_label(s) for s in states], big.value, rhs, tol, started, opts,
                   values={"parts": [r.value for r in parts]},
                   params={"weights": [float(x) for x in w]})


def check_weak_to_strong_monotone(rho1, rho2, opts: Optional[OptimizerOptions] = None,
                                  tol: float = 1e-3) -> CheckReport:
    """For rho = (rho1 (+) rho2)/2: E_F(rho (x) rho) = 2 E_F(rho) = (1/4) sum_ij E_F(rho_i (x) rho_j)."""
    started = time.perf_counter()
    opts = opts or OptimizerOptions()
    states = [as_density_matrix(rho1), as_density_matrix(rho2)]
    parts = [eof(s, opts) for s in states]
    rho = bipartite_direct_sum(states, [0.5, 0.5])
    f_rho = eof(rho, opts, initial=[_block_embedded_roof(states, [0.5, 0.5], parts)])

    def f_pair(x, y, rx, ry):
        a, b = bipartite_dims(x)
        a2, b2 = bipartite_dims(y)
        return eof(bipartite_tensor(x, y), opts,
                   initial=[_product_ensemble(rx.witness, ry.witness, (a, b, a2, b2))]).value

    pair_values = [[f_pair(states[i], states[j], parts[i], parts[j]) for j in range(2)] for i in range(2)]
    quarter = sum(sum(row) for row in pair_values) / 4.0
    f_rr = f_pair(rho, rho, f_rho, f_rho)
    return _report("weak-to-strong", [_label(s) for s in states], f_rr, 2.0 * f_rho.value, tol, started, opts,
                   conditions={"block_expansion": abs(f_rr - quarter) <= tol},
                   values={"f_rho": f_rho.value, "pair_values": pair_values, "quarter_sum": quarter,
                           "parts": [r.value for r in parts]})


# ----------------- Werner-Holevo -----------------

def wh_counterexample(p: float, opts: Optional[OptimizerOptions] = None, tol: float = 1e-9,
                      confirm: bool = True) -> CheckReport:
    """Two-copy Renyi-p output entropy of the d=3 Werner-Holevo channel on the maximally
    entangled input against 2 S_min,p = 2. A violation is a finding, not a failure; the
    check fails only if the supporting computations disagree."""
    started = time.perf_counter()
    opts = opts or OptimizerOptions()
    phi = werner_holevo(3)
    big = tensor(phi, phi)
    omega = maximally_entangled(3)
    two_copy = renyi_entropy(apply(big, omega), p)
    small = opts.replace(restarts=min(opts.restarts, 4))
    single = min_output_renyi(phi, p, small)
    rhs = 2.0
    conditions = {"single_copy": abs(single.value - 1.0) <= 1e-6}
    values: Dict[str, Any] = {"violation": bool(two_copy < rhs - tol), "single_copy_numeric": single.value}
    if confirm:
        conf = min_output_renyi(big, p, small, initial=[omega])
        conditions["optimizer_confirms"] = conf.value <= two_copy + FEASIBLE_TOL
        values["two_copy_optimizer"] = conf.value
    return _report("wh", ["werner_holevo(3)"], two_copy, rhs, tol, started, small, comparison=FINDING,
                   conditions=conditions, values=values, params={"p": alpha_label(p)})


# ----------------- supplementary identities -----------------

def check_constrained_block_formula(T1: Channel, T2: Channel, rho1, rho2, lam: float,
                                    opts: Optional[OptimizerOptions] = None, tol: float = 1e-3) -> CheckReport:
    """chi(T1 (+) T2, lam rho1 (+) (1-lam) rho2) = h(lam) + lam chi(T1, rho1) + (1-lam) chi(T2, rho2)."""
    started = time.perf_counter()
    if not 0 <= lam <= 1:
        raise SumcapError(f"block weight lambda={lam!r} outside [0, 1]")
    opts = opts or OptimizerOptions()
    rho1, rho2 = as_density_matrix(rho1), as_density_matrix(rho2)
    a = constrained_holevo(T1, rho1, opts)
    b = constrained_holevo(T2, rho2, opts)
    rho = DensityMatrix(direct_sum_mat([lam * rho1.mat, (1 - lam) * rho2.mat]), (rho1.dim + rho2.dim,))
    warm = _block_union([a, b], [T1.d_in, T2.d_in], [lam, 1 - lam])
    big = constrained_holevo(direct_sum([T1, T2]), rho, opts, initial=[warm])
    rhs = binary_entropy(lam) + lam * a.value + (1 - lam) * b.value
    return _report("constrained-dsum", [_label(T1), _label(T2), _label(rho1), _label(rho2)], big.value, rhs,
                   tol, started, opts,
                   conditions={"one_sided": big.value >= rhs - CHI_FEASIBLE_TOL},
                   values={"parts": [a.value, b.value]}, params={"lambda": float(lam)})


def check_product_additivity(T1: Channel, T2: Channel, rho1, rho2, opts: Optional[OptimizerOptions] = None,
                             tol: float = 1e-3) -> CheckReport:
    """H_{T1 (x) T2}(rho1 (x) rho2) = H_T1(rho1) + H_T2(rho2) for channels with known values."""
    started = time.perf_counter()
    opts = opts or OptimizerOptions()
    rho1, rho2 = as_density_matrix(rho1), as_density_matrix(rho2)
    h1 = convex_closure_output_entropy(T1, rho1, opts)
    h2 = convex_closure_output_entropy(T2, rho2, opts)
    prod = DensityMatrix(np.kron(rho1.mat, rho2.mat), (rho1.dim, rho2.dim))
    big = convex_closure_output_entropy(tensor(T1, T2), prod, opts,
                                        initial=[_product_ensemble(h1.witness, h2.witness)])
    rhs = h1.value + h2.value
    return _report("product-additivity", [_label(T1), _label(T2), _label(rho1), _label(rho2)], big.value,
                   rhs, tol, started, opts,
                   conditions={"one_sided": big.value <= rhs + FEASIBLE_TOL},
                   values={"parts": [h1.value, h2.value]})


def check_hsw_smin_gap(T: Channel, opts: Optional[OptimizerOptions] = None, tol: float = 1e-3) -> CheckReport:
    """log2 d_out - S_min(T) - chi(T) >= 0, with equality required for unital qubit channels."""
    started = time.perf_counter()
    opts = opts or OptimizerOptions()
    gap = hsw_smin_gap(T, opts)
    unital_qubit = T.d_in == T.d_out == 2 and is_unital(T)
    conditions = {"unital_qubit_equality": abs(gap) <= tol} if unital_qubit else {}
    return _report("hsw-gap", [_label(T)], gap, 0.0, tol, started, opts, comparison=LHS_AT_LEAST,
                   conditions=conditions, values={"unital_qubit": unital_qubit})
