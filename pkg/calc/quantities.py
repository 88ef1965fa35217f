"""
Numerical evaluation of channel information quantities.

Every optimizer returns a QuantityResult whose witness re-evaluates to the
reported value. Restart r draws its start from default_rng(seed + r); warm
starts passed as `initial=[...]` run after the random restarts with indices
restarts, restarts + 1, ... The best value wins, ties go to the lowest index.

Search strategies:
  S_min,alpha  majorize/minimize fixed point over pure inputs (top eigenvector
               of the adjoint of the output linearization), monotone
  J, I         L-BFGS-B over rho = A A^dag / tr(A A^dag), analytic gradient
  chi          Blahut-Arimoto weight updates alternating with L-BFGS-B over
               the (unnormalized) member vectors
  H_T          Riemannian descent over isometries U; decomposition rows
               w_k = (U diag(sqrt(lambda)) V^T)_k of rho
"""

from __future__ import annotations

import dataclasses
import math
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from scipy.optimize import minimize
from threadpoolctl import threadpool_limits

from common.errors import ConfigError, DimensionError
from common.utils import log, worker_count
from calc.matcore import (
    LOG_FLOOR,
    DensityMatrix,
    ProbDist,
    PureState,
    as_matrix,
    binary_entropy,
    bipartite_dims,
    check_alpha,
    density,
    ginibre,
    herm_log,
    herm_power,
    hermitian_spectrum,
    hermitianize,
    prob_dist,
    random_haar_unitary,
    renyi_entropy,
    rng_for,
    shannon_entropy,
    spectrum_renyi,
    von_neumann_entropy,
)
from calc.channels import (
    Channel,
    adjoint,
    adjoint_times_vecs,
    apply,
    apply_pure,
    apply_pure_many,
    apply_raw,
    complementary,
    partial_trace_channel,
    state_to_json,
)

LN2 = math.log(2.0)

EXACT = "exact-closed-form"
UPPER = "upper-bound"
LOWER = "lower-bound"

STALL_STEPS = 5
AGREE_TOL = 1e-6
PRUNE = 1e-14
RANK_TOL = 1e-12
BA_STEPS = 20
CHI_OUTER = 200
CHI_INNER = 100
ARMIJO = 1e-4
MIN_STEP = 1e-12


# ----------------- configuration and results -----------------

@dataclasses.dataclass(frozen=True)
class OptimizerOptions:
    restarts: int = 32
    max_iterations: int = 10_000
    objective_tolerance: float = 1e-9
    seed: int = 0
    ensemble_size: Optional[int] = None
    decomposition_size: Optional[int] = None
    n_jobs: Optional[int] = None

    def __post_init__(self):
        if int(self.restarts) < 1:
            raise ConfigError(f"restarts must be >= 1, got {self.restarts}")
        if int(self.max_iterations) < 1:
            raise ConfigError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if not self.objective_tolerance > 0:
            raise ConfigError(f"objective_tolerance must be > 0, got {self.objective_tolerance}")
        for name in ("ensemble_size", "decomposition_size", "n_jobs"):
            v = getattr(self, name)
            if v is not None and int(v) < 1:
                raise ConfigError(f"{name} must be >= 1 when given, got {v}")

    def replace(self, **changes) -> "OptimizerOptions":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, raw: Optional[dict], base: Optional["OptimizerOptions"] = None) -> "OptimizerOptions":
        base = base or cls()
        raw = dict(raw or {})
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ConfigError(f"unknown optimizer option(s): {', '.join(unknown)}")
        return dataclasses.replace(base, **raw)


@dataclasses.dataclass(frozen=True, eq=False)
class Ensemble:
    probs: ProbDist
    states: List[DensityMatrix]

    def __len__(self) -> int:
        return len(self.states)

    @property
    def dim(self) -> int:
        return self.states[0].dim

    def average(self) -> np.ndarray:
        return sum(w * s.mat for w, s in zip(self.probs.weights, self.states))


def make_ensemble(probs, states: Sequence) -> Ensemble:
    p = probs if isinstance(probs, ProbDist) else prob_dist(probs)
    mats = [as_density_matrix(s) for s in states]
    if len(mats) != len(p):
        raise DimensionError(f"ensemble has {len(p)} weights for {len(mats)} states")
    if len({m.dim for m in mats}) != 1:
        raise DimensionError("ensemble states must share one dimension")
    ens = Ensemble(p, mats)
    density(ens.average())
    return ens


@dataclasses.dataclass
class QuantityResult:
    value: float
    witness: Any
    bound_kind: str
    restarts_used: int
    best_restart_index: int
    converged: bool = True
    witness_value: Optional[float] = None
    details: Dict[str, Any] = dataclasses.field(default_factory=dict)

    def to_dict(self, emit_witness: bool = False) -> dict:
        return {
            "value": float(self.value),
            "bound_kind": self.bound_kind,
            "restarts_used": int(self.restarts_used),
            "best_restart_index": int(self.best_restart_index),
            "converged": bool(self.converged),
            "witness_value": None if self.witness_value is None else float(self.witness_value),
            "witness": witness_summary(self.witness, emit_witness),
            "details": self.details,
        }


def witness_summary(w, emit: bool = False) -> dict:
    if isinstance(w, Ensemble):
        out = {"kind": "ensemble", "dim": w.dim, "members": len(w),
               "probs": [float(x) for x in w.probs.weights]}
        if emit:
            out["states"] = [state_to_json(s) for s in w.states]
        return out
    if isinstance(w, PureState):
        out = {"kind": "pure", "dim": w.dim}
    elif isinstance(w, DensityMatrix):
        out = {"kind": "density", "dim": w.dim,
               "rank": int((np.linalg.eigvalsh(w.mat) > RANK_TOL).sum())}
    else:
        return {"kind": "none"}
    if emit:
        out["state"] = state_to_json(w)
    return out


def alpha_label(alpha: float):
    return "inf" if math.isinf(alpha) else float(alpha)


def as_density_matrix(rho) -> DensityMatrix:
    if isinstance(rho, DensityMatrix):
        return rho
    if isinstance(rho, PureState):
        return rho.density()
    return density(rho)


# ----------------- restart runner -----------------

@dataclasses.dataclass
class _Run:
    value: float
    witness: Any
    converged: bool
    iterations: int = 0


@dataclasses.dataclass
class _Outcome:
    best: _Run
    best_index: int
    restarts_used: int


def _run_restarts(label: str, task: Callable[[int, Any], _Run], opts: OptimizerOptions,
                  warm: Optional[Sequence] = None, maximize: bool = False,
                  early_stop: bool = False) -> _Outcome:
    randoms = [(r, None) for r in range(opts.restarts)]
    warms = [(opts.restarts + j, w) for j, w in enumerate(warm or [])]
    jobs = randoms + warms
    workers = min(worker_count(opts.n_jobs), len(jobs))

    if early_stop:
        # accept once two consecutive converged restarts agree
        done: List[Tuple[int, _Run]] = []
        for i, w in randoms:
            done.append((i, task(i, w)))
            if len(done) >= 2:
                a, b = done[-2][1], done[-1][1]
                if a.converged and b.converged and abs(a.value - b.value) <= AGREE_TOL:
                    break
        done += [(i, task(i, w)) for i, w in warms]
    elif workers > 1:
        with threadpool_limits(limits=1):
            runs = Parallel(n_jobs=workers, prefer="threads")(delayed(task)(i, w) for i, w in jobs)
        done = [(i, r) for (i, _), r in zip(jobs, runs)]
    else:
        done = [(i, task(i, w)) for i, w in jobs]

    best_i, best = done[0]
    for i, r in done[1:]:
        if (r.value > best.value) if maximize else (r.value < best.value):
            best_i, best = i, r
    stuck = sum(1 for _, r in done if not r.converged)
    if stuck:
        log(f"{label}: {stuck}/{len(done)} restart(s) stopped before converging", "warn")
    return _Outcome(best, best_i, len(done))


# ----------------- shared numerics -----------------

def _entropy_log(M: np.ndarray) -> Tuple[Any, np.ndarray]:
    """Entropy in nats and floored natural log; accepts stacks of Hermitian matrices."""
    w, V = np.linalg.eigh(M)
    wc = np.clip(w, 0.0, None)
    S = -np.sum(wc * np.log(np.where(wc > 0, wc, 1.0)), axis=-1)
    L = (V * np.log(np.maximum(w, LOG_FLOOR))[..., None, :]) @ np.conj(np.swapaxes(V, -1, -2))
    return S, L


def _pack(Z: np.ndarray) -> np.ndarray:
    return np.concatenate([Z.real.ravel(), Z.imag.ravel()])


def _unpack(x: np.ndarray, shape: Tuple[int, int]) -> np.ndarray:
    n = shape[0] * shape[1]
    return (x[:n] + 1j * x[n:]).reshape(shape)


def _lbfgs(fun, x0: np.ndarray, args: tuple, maxiter: int, ftol: float):
    """L-BFGS-B that never returns a point worse than the start. Status 1 (iteration cap) is
    the only non-converged outcome; line-search stops sit at the float precision floor."""
    f0 = fun(x0, *args)[0]
    res = minimize(fun, x0, args=args, jac=True, method="L-BFGS-B",
                   options={"maxiter": maxiter, "ftol": ftol, "gtol": 1e-10})
    if res.fun <= f0:
        return res.x, float(res.fun), res.status != 1, int(res.nit)
    return x0, float(f0), res.status != 1, int(res.nit)


def pure_members(ens) -> Tuple[np.ndarray, np.ndarray]:
    """Refine an ensemble (or one state) into pure members: weights and unit row vectors."""
    if isinstance(ens, Ensemble):
        probs, mats = ens.probs.weights, [s.mat for s in ens.states]
    else:
        probs, mats = [1.0], [as_matrix(ens)]
    ws, vs = [], []
    for p, m in zip(probs, mats):
        lam, V = hermitian_spectrum(m)
        for l, v in zip(lam, V.T):
            if p * l > PRUNE:
                ws.append(p * l)
                vs.append(v)
    ws = np.asarray(ws, dtype=float)
    return ws / ws.sum(), np.asarray(vs)


def pure_ensemble(p: np.ndarray, vecs: np.ndarray) -> Ensemble:
    """Ensemble of normalized pure members, weights below 1e-14 dropped."""
    p = np.asarray(p, dtype=float)
    keep = p > PRUNE
    p = p[keep] / p[keep].sum()
    d = vecs.shape[1]
    states = [DensityMatrix(np.outer(v, v.conj()) / np.vdot(v, v).real, (d,)) for v in vecs[keep]]
    return Ensemble(ProbDist(p), states)


# ----------------- evaluators -----------------

def holevo_quantity(T: Channel, ensemble: Ensemble) -> float:
    """S(T(sum p_k rho_k)) - sum p_k S(T(rho_k))."""
    return von_neumann_entropy(apply(T, ensemble.average())) - average_output_entropy(T, ensemble)


def average_output_entropy(T: Channel, ensemble: Ensemble) -> float:
    return float(sum(p * von_neumann_entropy(apply(T, s))
                     for p, s in zip(ensemble.probs.weights, ensemble.states)))


def evaluate_coherent(T: Channel, rho) -> float:
    m = as_matrix(rho)
    return von_neumann_entropy(apply(T, m)) - von_neumann_entropy(apply(complementary(T), m))


def evaluate_mutual(T: Channel, rho) -> float:
    return von_neumann_entropy(as_matrix(rho)) + evaluate_coherent(T, rho)


# ----------------- minimal output Renyi entropy -----------------

def _pure_out_renyi(T: Channel, w: np.ndarray, alpha: float) -> float:
    return spectrum_renyi(np.clip(np.linalg.eigvalsh(apply_pure(T, w)), 0.0, None), alpha)


def _linearization(out: np.ndarray, alpha: float) -> np.ndarray:
    if alpha == 1:
        return herm_log(out)
    if math.isinf(alpha):
        _, V = np.linalg.eigh(out)
        u = V[:, -1]
        return np.outer(u, u.conj())
    return herm_power(out, alpha - 1)


def _start_vector(d: int, init, rng) -> np.ndarray:
    if init is None:
        v = ginibre(d, 1, rng).reshape(-1)
    elif isinstance(init, PureState):
        v = init.vec
    else:
        m = np.asarray(as_matrix(init))
        if m.ndim == 1:
            v = m
        else:
            _, V = hermitian_spectrum(m)
            v = V[:, 0]
    v = np.asarray(v, dtype=complex)
    if v.shape != (d,):
        raise DimensionError(f"warm start of shape {v.shape} for a {d}-dim input")
    return v / np.linalg.norm(v)


def min_output_renyi(T: Channel, alpha: float = 1, opts: Optional[OptimizerOptions] = None,
                     initial: Optional[Sequence] = None) -> QuantityResult:
    """Minimal output alpha-Renyi entropy over pure inputs (upper bound)."""
    check_alpha(alpha)
    opts = opts or OptimizerOptions()
    tol = opts.objective_tolerance

    def run(index: int, init) -> _Run:
        w = _start_vector(T.d_in, init, rng_for(opts.seed + index))
        val = _pure_out_renyi(T, w, alpha)
        stall, converged, it = 0, False, 0
        for it in range(1, opts.max_iterations + 1):
            H = adjoint(T, _linearization(apply_pure(T, w), alpha))
            _, V = np.linalg.eigh(hermitianize(H))
            cand = V[:, -1]
            new = _pure_out_renyi(T, cand, alpha)
            if not new < val:
                converged = True
                break
            stall = stall + 1 if val - new < tol else 0
            w, val = cand, new
            if stall >= STALL_STEPS:
                converged = True
                break
        return _Run(val, w, converged, it)

    out = _run_restarts(f"smin[{T.label}]", run, opts, initial)
    psi = PureState(out.best.witness, (T.d_in,))
    value = renyi_entropy(apply(T, psi), alpha)
    return QuantityResult(value, psi, UPPER, out.restarts_used, out.best_index, out.best.converged,
                          value, {"alpha": alpha_label(alpha)})


# ----------------- coherent and mutual information -----------------

def _start_factor(d: int, init) -> np.ndarray:
    m = as_matrix(as_density_matrix(init))
    if m.shape != (d, d):
        raise DimensionError(f"warm start of shape {m.shape} for a {d}-dim input")
    lam, V = hermitian_spectrum(m)
    keep = lam > PRUNE
    return V[:, keep] * np.sqrt(lam[keep])


def _information_search(T: Channel, opts: OptimizerOptions, initial, with_input: bool,
                        label: str) -> _Outcome:
    Tc = complementary(T)
    d = T.d_in
    ranks = [d] + list(range(1, d))
    eye = np.eye(d)

    def fun(x, r):
        A = _unpack(x, (d, r))
        t = float(np.vdot(A, A).real)
        rho = A @ A.conj().T / t
        s_out, L_out = _entropy_log(apply_raw(T, rho))
        s_env, L_env = _entropy_log(apply_raw(Tc, rho))
        F = s_out - s_env
        G = adjoint(Tc, L_env) - adjoint(T, L_out)
        if with_input:
            s_in, L_in = _entropy_log(rho)
            F += s_in
            G = G - L_in
        G = hermitianize(G)
        G = G - float(np.trace(G @ rho).real) * eye
        g = 2.0 * (G @ A) / t
        return -F / LN2, -_pack(g) / LN2

    def run(index: int, init) -> _Run:
        if init is None:
            A0 = ginibre(d, ranks[index % len(ranks)], rng_for(opts.seed + index))
        else:
            A0 = _start_factor(d, init)
        r = A0.shape[1]
        x, f, converged, nit = _lbfgs(fun, _pack(A0), (r,), opts.max_iterations, opts.objective_tolerance)
        A = _unpack(x, (d, r))
        rho = A @ A.conj().T
        return _Run(-f, DensityMatrix(hermitianize(rho / np.trace(rho).real), (d,)), converged, nit)

    return _run_restarts(label, run, opts, initial, maximize=True, early_stop=with_input)


def coherent_information(T: Channel, opts: Optional[OptimizerOptions] = None,
                         initial: Optional[Sequence] = None) -> QuantityResult:
    """sup_rho S(T(rho)) - S(T_c(rho)) (lower bound); rank-1 restarts keep pure inputs available."""
    opts = opts or OptimizerOptions()
    out = _information_search(T, opts, initial, False, f"coherent[{T.label}]")
    value = evaluate_coherent(T, out.best.witness)
    return QuantityResult(value, out.best.witness, LOWER, out.restarts_used, out.best_index,
                          out.best.converged, value)


def mutual_information(T: Channel, opts: Optional[OptimizerOptions] = None,
                       initial: Optional[Sequence] = None) -> QuantityResult:
    """sup_rho S(rho) + S(T(rho)) - S(T_c(rho)); concave, so agreeing restarts stop the search."""
    opts = opts or OptimizerOptions()
    out = _information_search(T, opts, initial, True, f"mutual[{T.label}]")
    value = evaluate_mutual(T, out.best.witness)
    return QuantityResult(value, out.best.witness, EXACT, out.restarts_used, out.best_index,
                          out.best.converged, value)


# ----------------- HSW capacity -----------------

def _chi_parts(T: Channel, X: np.ndarray, p: np.ndarray):
    t = np.sum(np.abs(X) ** 2, axis=1)
    psi = X / np.sqrt(t)[:, None]
    outs = apply_pure_many(T, psi)
    S_k, L_k = _entropy_log(outs)
    avg = np.einsum("m,mab->ab", p, outs)
    S_avg, L_avg = _entropy_log(avg)
    return t, psi, outs, S_k, L_k, S_avg, L_avg


def _blahut_arimoto(T: Channel, X: np.ndarray, p: np.ndarray, steps: int) -> np.ndarray:
    for _ in range(steps):
        _, _, outs, S_k, _, _, L_avg = _chi_parts(T, X, p)
        # D(rho_k || avg) in nats
        D = -S_k - np.einsum("mab,ba->m", outs, L_avg).real
        p = p * np.exp(D - D.max())
        p = p / p.sum()
    return p


def holevo_capacity(T: Channel, opts: Optional[OptimizerOptions] = None,
                    initial: Optional[Sequence[Ensemble]] = None) -> QuantityResult:
    """Max Holevo quantity over ensembles of pure inputs (lower bound)."""
    opts = opts or OptimizerOptions()
    d = T.d_in
    m_default = opts.ensemble_size or d * d
    tol = opts.objective_tolerance

    def chi_of(X, p) -> float:
        _, _, _, S_k, _, S_avg, _ = _chi_parts(T, X, p)
        return float(S_avg - p @ S_k) / LN2

    def fun(x, p, m):
        X = _unpack(x, (m, d))
        t, psi, _, S_k, L_k, S_avg, L_avg = _chi_parts(T, X, p)
        chi = S_avg - p @ S_k
        GX = adjoint_times_vecs(T, p[:, None, None] * (L_k - L_avg), psi)
        c = np.sum(psi.conj() * GX, axis=1).real
        g = 2.0 * (GX - c[:, None] * psi) / np.sqrt(t)[:, None]
        return -chi / LN2, -_pack(g) / LN2

    def run(index: int, init) -> _Run:
        if init is None:
            rng = rng_for(opts.seed + index)
            X = ginibre(m_default, d, rng)
            p = np.full(m_default, 1.0 / m_default)
        else:
            p, X = pure_members(init)
            if X.shape[1] != d:
                raise DimensionError(f"warm-start ensemble of dimension {X.shape[1]} for a {d}-dim input")
        m = X.shape[0]
        best = (chi_of(X, p), X, p)
        val, converged, rounds = best[0], False, 0
        for rounds in range(1, min(opts.max_iterations, CHI_OUTER) + 1):
            p = _blahut_arimoto(T, X, p, BA_STEPS)
            x, _, _, _ = _lbfgs(fun, _pack(X), (p, m), CHI_INNER, tol)
            X = _unpack(x, (m, d))
            new = chi_of(X, p)
            if new > best[0]:
                best = (new, X, p)
            if new - val < tol:
                converged = True
                break
            val = new
        return _Run(best[0], pure_ensemble(best[2], best[1]), converged, rounds)

    out = _run_restarts(f"chi[{T.label}]", run, opts, initial, maximize=True)
    value = holevo_quantity(T, out.best.witness)
    return QuantityResult(value, out.best.witness, LOWER, out.restarts_used, out.best_index,
                          out.best.converged, value, {"ensemble_size": m_default})


# ----------------- convex closure of output entropy -----------------

def _stiefel_project(U: np.ndarray, E: np.ndarray) -> np.ndarray:
    H = U.conj().T @ E
    return E - U @ ((H + H.conj().T) / 2)


def _polar(Y: np.ndarray) -> np.ndarray:
    P, _, Qh = np.linalg.svd(Y, full_matrices=False)
    return P @ Qh


def _decomposition_basis(rho: np.ndarray) -> np.ndarray:
    """Rows sqrt(lambda_i) v_i^T over the support of rho."""
    lam, V = hermitian_spectrum(rho)
    keep = lam > RANK_TOL
    return (V[:, keep] * np.sqrt(lam[keep])).T


def _start_isometry(init, C: np.ndarray, m: int) -> np.ndarray:
    p, vecs = pure_members(init)
    W = np.sqrt(p)[:, None] * vecs
    lam = np.sum(np.abs(C) ** 2, axis=1)
    U = (W @ C.conj().T) / lam
    if U.shape[0] < m:
        U = np.vstack([U, np.zeros((m - U.shape[0], U.shape[1]), dtype=complex)])
    return _polar(U)


def convex_closure_output_entropy(T: Channel, rho, opts: Optional[OptimizerOptions] = None,
                                  initial: Optional[Sequence[Ensemble]] = None) -> QuantityResult:
    """H_T(rho): least average output entropy over pure decompositions of rho (upper bound).
    The spectral decomposition always runs as the first warm start."""
    opts = opts or OptimizerOptions()
    rho = as_density_matrix(rho)
    if rho.dim != T.d_in:
        raise DimensionError(f"state of dimension {rho.dim} for {T!r}")
    C = _decomposition_basis(rho.mat)
    r = C.shape[0]
    m = max(opts.decomposition_size or r * r, r)
    tol = opts.objective_tolerance

    def fg(U):
        W = U @ C
        p = np.sum(np.abs(W) ** 2, axis=1)
        S_X, L_X = _entropy_log(apply_pure_many(T, W))
        logp = np.log(np.where(p > 0, p, 1.0))
        f = float(np.sum(S_X + p * logp))
        Gam = 2.0 * (logp[:, None] * W - adjoint_times_vecs(T, L_X, W))
        return f / LN2, (Gam @ C.conj().T) / LN2

    def run(index: int, init) -> _Run:
        if init is None:
            U = random_haar_unitary(m, rng_for(opts.seed + index))[:, :r]
        elif isinstance(init, str):
            U = np.eye(m, r, dtype=complex)
        else:
            U = _start_isometry(init, C, m)
        f, E = fg(U)
        grad = _stiefel_project(U, E)
        step, stall, converged, it = 1.0, 0, False, 0
        for it in range(1, opts.max_iterations + 1):
            gn = float(np.vdot(grad, grad).real)
            if gn < 1e-24:
                converged = True
                break
            while True:
                Un = _polar(U - step * grad)
                fn, En = fg(Un)
                if fn <= f - ARMIJO * step * gn or step < MIN_STEP:
                    break
                step *= 0.5
            if step < MIN_STEP or not fn < f:
                converged = True
                break
            stall = stall + 1 if f - fn < tol else 0
            U, f, grad = Un, fn, _stiefel_project(Un, En)
            step = min(step * 2.0, 1e3)
            if stall >= STALL_STEPS:
                converged = True
                break
        W = U @ C
        return _Run(f, pure_ensemble(np.sum(np.abs(W) ** 2, axis=1), W), converged, it)

    warm = ["spectral"] + list(initial or [])
    out = _run_restarts(f"roof[{T.label}]", run, opts, warm)
    value = average_output_entropy(T, out.best.witness)
    return QuantityResult(value, out.best.witness, UPPER, out.restarts_used, out.best_index,
                          out.best.converged, value, {"rank": r, "decomposition_size": m})


def constrained_holevo(T: Channel, rho, opts: Optional[OptimizerOptions] = None,
                       initial: Optional[Sequence[Ensemble]] = None) -> QuantityResult:
    """chi(T, rho) = S(T(rho)) - H_T(rho) (lower bound)."""
    rho = as_density_matrix(rho)
    roof = convex_closure_output_entropy(T, rho, opts, initial)
    value = von_neumann_entropy(apply(T, rho)) - roof.value
    return QuantityResult(value, roof.witness, LOWER, roof.restarts_used, roof.best_restart_index,
                          roof.converged, holevo_quantity(T, roof.witness), dict(roof.details))


# ----------------- entanglement of formation -----------------

_SYSY = np.kron(np.array([[0, -1j], [1j, 0]]), np.array([[0, -1j], [1j, 0]]))


def concurrence(rho) -> float:
    """Two-qubit concurrence max(0, l1 - l2 - l3 - l4) from the spin-flipped state."""
    m = as_matrix(rho)
    if m.shape != (4, 4):
        raise DimensionError(f"concurrence needs a two-qubit state, got shape {m.shape}")
    flipped = _SYSY @ m.conj() @ _SYSY
    s = herm_power(m, 0.5)
    ev = np.sqrt(np.clip(np.linalg.eigvalsh(hermitianize(s @ flipped @ s)), 0.0, None))[::-1]
    return float(max(0.0, ev[0] - ev[1] - ev[2] - ev[3]))


def eof_two_qubit(rho) -> float:
    c = min(concurrence(rho), 1.0)
    return binary_entropy((1.0 + math.sqrt(1.0 - c * c)) / 2.0)


def eof(rho, opts: Optional[OptimizerOptions] = None,
        initial: Optional[Sequence[Ensemble]] = None) -> QuantityResult:
    """Entanglement of formation as the convex roof of the partial trace. For two qubits the
    concurrence closed form is evaluated too and the smaller value is reported; the roof
    witness keeps its own value in witness_value."""
    rho = as_density_matrix(rho)
    dA, dB = bipartite_dims(rho)
    T = partial_trace_channel(dA, dB, "B")
    roof = convex_closure_output_entropy(T, rho, opts, initial)
    if (dA, dB) != (2, 2):
        return roof
    c = concurrence(rho)
    closed = eof_two_qubit(rho)
    details = dict(roof.details, concurrence=c, closed_form=closed)
    return QuantityResult(min(closed, roof.value), roof.witness, EXACT, roof.restarts_used,
                          roof.best_restart_index, roof.converged, roof.value, details)


# ----------------- block weights and the HSW/S_min gap -----------------

def optimal_block_weights(c: Sequence[float]) -> Tuple[ProbDist, float]:
    """lambda_i = 2^c_i / sum_j 2^c_j, value log2 sum_i 2^c_i."""
    c = np.asarray(c, dtype=float).reshape(-1)
    if c.size == 0:
        raise DimensionError("optimal_block_weights needs at least one block value")
    top = float(c.max())
    e = np.exp2(c - top)
    return ProbDist(e / e.sum()), top + math.log2(float(e.sum()))


def block_weight_objective(weights, c: Sequence[float]) -> float:
    """S({lambda_i}) + sum_i lambda_i c_i for any block distribution."""
    w = weights.weights if isinstance(weights, ProbDist) else np.asarray(weights, dtype=float)
    c = np.asarray(c, dtype=float)
    if w.shape != c.shape:
        raise DimensionError(f"{w.size} weights for {c.size} block values")
    return shannon_entropy(w) + float(w @ c)


def hsw_smin_gap(T: Channel, opts: Optional[OptimizerOptions] = None) -> float:
    """log2 d_out - S_min(T) - chi(T)."""
    opts = opts or OptimizerOptions()
    smin = min_output_renyi(T, 1, opts)
    chi = holevo_capacity(T, opts)
    return math.log2(T.d_out) - smin.value - chi.value
