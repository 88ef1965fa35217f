"""
Dense complex linear algebra, entropies, purification and seeded randomness.

Conventions (used everywhere above this module):
  - matrices are numpy complex arrays, row-major;
  - kron(A, B): A's indices are the slow (outer) ones;
  - all logarithms are base 2, entropies in bits, 0·log 0 := 0;
  - alpha = math.inf selects the min-entropy -log2(lambda_max).
"""

from __future__ import annotations

import dataclasses
import math
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import block_diag, qr

from common.errors import DimensionError, InvalidStateError, SumcapError

HERMITIAN_TOL = 1e-10
EIG_CLIP = 1e-10
TRACE_TOL = 1e-10
NORM_TOL = 1e-12
PROB_TOL = 1e-12
LOG_FLOOR = 1e-12

INF = math.inf

Seed = Union[int, np.random.Generator, None]


# ----------------- types -----------------

@dataclasses.dataclass(frozen=True, eq=False)
class DensityMatrix:
    mat: np.ndarray
    dims: Tuple[int, ...]

    @property
    def dim(self) -> int:
        return self.mat.shape[0]


@dataclasses.dataclass(frozen=True, eq=False)
class PureState:
    vec: np.ndarray
    dims: Tuple[int, ...]

    @property
    def dim(self) -> int:
        return self.vec.shape[0]

    def density(self) -> DensityMatrix:
        return DensityMatrix(np.outer(self.vec, self.vec.conj()), self.dims)


@dataclasses.dataclass(frozen=True, eq=False)
class ProbDist:
    weights: np.ndarray

    def __len__(self) -> int:
        return len(self.weights)


def _dims_for(d: int, dims: Optional[Sequence[int]]) -> Tuple[int, ...]:
    if dims is None:
        return (d,)
    dims = tuple(int(x) for x in dims)
    if int(np.prod(dims)) != d:
        raise DimensionError(f"subsystem dims {dims} do not multiply to {d}")
    return dims


def hermitianize(A: np.ndarray) -> np.ndarray:
    return (A + A.conj().T) / 2


def density(mat, dims: Optional[Sequence[int]] = None) -> DensityMatrix:
    """Validate and wrap a matrix as a DensityMatrix."""
    m = np.asarray(mat, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise InvalidStateError(f"density matrix must be square, got shape {m.shape}")
    scale = max(1.0, float(np.abs(m).max()))
    if np.abs(m - m.conj().T).max() > HERMITIAN_TOL * scale:
        raise InvalidStateError("density matrix is not Hermitian")
    m = hermitianize(m)
    tr = float(np.trace(m).real)
    if abs(tr - 1.0) > TRACE_TOL:
        raise InvalidStateError(f"density matrix trace is {tr!r}, expected 1")
    w = np.linalg.eigvalsh(m)
    if w.min() < -EIG_CLIP:
        raise InvalidStateError(f"density matrix has eigenvalue {w.min():.3e} < -{EIG_CLIP}")
    return DensityMatrix(m, _dims_for(m.shape[0], dims))


def pure_state(vec, dims: Optional[Sequence[int]] = None) -> PureState:
    v = np.asarray(vec, dtype=complex).reshape(-1)
    n = np.linalg.norm(v)
    if abs(n - 1.0) > NORM_TOL:
        raise InvalidStateError(f"pure state norm is {n!r}, expected 1")
    return PureState(v, _dims_for(v.shape[0], dims))


def prob_dist(weights) -> ProbDist:
    w = np.asarray(weights, dtype=float).reshape(-1)
    if w.size == 0:
        raise InvalidStateError("empty probability distribution")
    if (w < 0).any():
        raise InvalidStateError("probability weights must be non-negative")
    if abs(w.sum() - 1.0) > PROB_TOL:
        raise InvalidStateError(f"probability weights sum to {w.sum()!r}, expected 1")
    return ProbDist(w)


def as_matrix(rho) -> np.ndarray:
    if isinstance(rho, DensityMatrix):
        return rho.mat
    if isinstance(rho, PureState):
        return np.outer(rho.vec, rho.vec.conj())
    return np.asarray(rho, dtype=complex)


# ----------------- linear algebra -----------------

def kron(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return np.kron(A, B)


def direct_sum_mat(blocks: Sequence[np.ndarray]) -> np.ndarray:
    if not blocks:
        raise DimensionError("direct sum of an empty list")
    for b in blocks:
        b = np.asarray(b)
        if b.ndim != 2 or b.shape[0] != b.shape[1]:
            raise DimensionError(f"direct sum block must be square, got shape {b.shape}")
    return block_diag(*[np.asarray(b, dtype=complex) for b in blocks])


def partial_trace(M: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Trace out every subsystem not listed in keep; kept factors stay in order."""
    M = np.asarray(M)
    dims = [int(d) for d in dims]
    D = int(np.prod(dims))
    if M.shape != (D, D):
        raise DimensionError(f"dims {dims} do not match matrix shape {M.shape}")
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise DimensionError(f"keep indices {keep} out of range for {len(dims)} subsystems")
    n = len(dims)
    T = M.reshape(dims + dims)
    for i in reversed(range(n)):
        if i in keep:
            continue
        cur = T.ndim // 2
        T = np.trace(T, axis1=i, axis2=i + cur)
    dk = int(np.prod([dims[k] for k in keep])) if keep else 1
    return T.reshape(dk, dk)


def hermitian_spectrum(M: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Eigenvalues in descending order and matching orthonormal eigenvector columns."""
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"spectrum of a non-square matrix {M.shape}")
    scale = max(1.0, float(np.abs(M).max()))
    if np.abs(M - M.conj().T).max() > HERMITIAN_TOL * scale:
        raise InvalidStateError("hermitian_spectrum called on a non-Hermitian matrix")
    w, V = np.linalg.eigh(hermitianize(M))
    return w[::-1], V[:, ::-1]


def herm_log(M: np.ndarray, floor: float = LOG_FLOOR) -> np.ndarray:
    """Natural log of a PSD matrix, eigenvalues floored at `floor`."""
    w, V = np.linalg.eigh(hermitianize(M))
    lw = np.log(np.maximum(w, floor))
    return (V * lw) @ V.conj().T


def herm_power(M: np.ndarray, p: float) -> np.ndarray:
    w, V = np.linalg.eigh(hermitianize(M))
    pw = np.maximum(w, 0.0) ** p
    return (V * pw) @ V.conj().T


# ----------------- entropies -----------------

def clipped_spectrum(M: np.ndarray) -> np.ndarray:
    """Eigenvalues of a PSD matrix with roundoff negatives in [-1e-10, 0) set to 0."""
    w = np.linalg.eigvalsh(hermitianize(np.asarray(M, dtype=complex)))
    if w.size and w.min() < -EIG_CLIP:
        raise InvalidStateError(f"eigenvalue {w.min():.3e} below -{EIG_CLIP}")
    return np.clip(w, 0.0, None)


def spectrum_entropy(w: np.ndarray) -> float:
    w = np.asarray(w, dtype=float)
    w = w[w > 0]
    if w.size == 0:
        return 0.0
    return float(-np.sum(w * np.log2(w)))


def spectrum_renyi(w: np.ndarray, alpha: float) -> float:
    w = np.asarray(w, dtype=float)
    w = w[w > 0]
    if w.size == 0:
        return 0.0
    if alpha == 1:
        return spectrum_entropy(w)
    lmax = float(w.max())
    if math.isinf(alpha):
        return -math.log2(lmax)
    # log2 tr rho^a = a log2 lmax + log2 sum (w/lmax)^a, stable for large a
    log_tr = alpha * math.log2(lmax) + math.log2(float(np.sum((w / lmax) ** alpha)))
    return log_tr / (1.0 - alpha)


def von_neumann_entropy(rho) -> float:
    return spectrum_entropy(clipped_spectrum(as_matrix(rho)))


def renyi_entropy(rho, alpha: float) -> float:
    check_alpha(alpha)
    return spectrum_renyi(clipped_spectrum(as_matrix(rho)), alpha)


def check_alpha(alpha: float) -> None:
    if not (alpha >= 1):
        raise SumcapError(f"Renyi order alpha must be >= 1, got {alpha!r}")


def shannon_entropy(p) -> float:
    w = p.weights if isinstance(p, ProbDist) else np.asarray(p, dtype=float)
    return spectrum_entropy(w)


def binary_entropy(x: float) -> float:
    return spectrum_entropy(np.array([x, 1.0 - x]))


# ----------------- purification -----------------

def purify(rho) -> PureState:
    """|Psi> = sum_i sqrt(l_i) |v_i> (x) |i>, reference system second."""
    m = as_matrix(rho)
    d = m.shape[0]
    w, V = hermitian_spectrum(m)
    w = np.clip(w, 0.0, None)
    vec = np.zeros(d * d, dtype=complex)
    for i in range(d):
        if w[i] > 0:
            vec += math.sqrt(w[i]) * np.kron(V[:, i], np.eye(d)[i])
    vec /= np.linalg.norm(vec)
    return PureState(vec, (d, d))


# ----------------- state constructors -----------------

def maximally_mixed(d: int) -> DensityMatrix:
    return DensityMatrix(np.eye(d, dtype=complex) / d, (d,))


def pure_density(vec, dims: Optional[Sequence[int]] = None) -> DensityMatrix:
    v = np.asarray(vec, dtype=complex).reshape(-1)
    v = v / np.linalg.norm(v)
    return DensityMatrix(np.outer(v, v.conj()), _dims_for(v.shape[0], dims))


def maximally_entangled(d: int) -> PureState:
    vec = np.eye(d, dtype=complex).reshape(-1) / math.sqrt(d)
    return PureState(vec, (d, d))


def bell_state() -> DensityMatrix:
    return maximally_entangled(2).density()


def product_state(*vecs) -> DensityMatrix:
    """Pure product state; defaults to |00>."""
    if not vecs:
        vecs = ([1, 0], [1, 0])
    v = np.array([1.0 + 0j])
    dims = []
    for x in vecs:
        x = np.asarray(x, dtype=complex).reshape(-1)
        x = x / np.linalg.norm(x)
        v = np.kron(v, x)
        dims.append(x.shape[0])
    return pure_density(v, dims)


def werner_state(fidelity: float) -> DensityMatrix:
    """Two-qubit Werner state with singlet fidelity f."""
    singlet = np.array([0, 1, -1, 0], dtype=complex) / math.sqrt(2)
    P = np.outer(singlet, singlet.conj())
    m = fidelity * P + (1.0 - fidelity) / 3.0 * (np.eye(4) - P)
    return density(m, (2, 2))


def bipartite_dims(rho) -> Tuple[int, int]:
    dims = getattr(rho, "dims", None)
    if dims is None or len(dims) != 2:
        raise DimensionError(f"expected a bipartite state with dims (dA, dB), got {dims}")
    return int(dims[0]), int(dims[1])


def bipartite_tensor(rho, sigma) -> DensityMatrix:
    """rho_AB (x) sigma_A'B' regrouped as a state on (A A') (x) (B B')."""
    a, b = bipartite_dims(rho)
    a2, b2 = bipartite_dims(sigma)
    D = a * b * a2 * b2
    M = np.kron(as_matrix(rho), as_matrix(sigma)).reshape(a, b, a2, b2, a, b, a2, b2)
    M = M.transpose(0, 2, 1, 3, 4, 6, 5, 7).reshape(D, D)
    return DensityMatrix(M, (a * a2, b * b2))


def bipartite_block_index(dims_a: Sequence[int], dims_b: Sequence[int], i: int) -> np.ndarray:
    """Basis indices of A_i (x) B_i inside (A_1 + A_2 + ...) (x) (B_1 + B_2 + ...)."""
    off_a, off_b, DB = int(sum(dims_a[:i])), int(sum(dims_b[:i])), int(sum(dims_b))
    return np.array([(off_a + x) * DB + off_b + y for x in range(dims_a[i]) for y in range(dims_b[i])], dtype=int)


def bipartite_direct_sum(states: Sequence, weights: Sequence[float]) -> DensityMatrix:
    """sum_i w_i rho_i with rho_i placed on A_i (x) B_i of (+A_i) (x) (+B_i)."""
    if len(states) != len(weights) or not states:
        raise DimensionError(f"{len(states)} states for {len(weights)} weights")
    dims = [bipartite_dims(s) for s in states]
    dims_a = [d[0] for d in dims]
    dims_b = [d[1] for d in dims]
    D = sum(dims_a) * sum(dims_b)
    out = np.zeros((D, D), dtype=complex)
    for i, (s, w) in enumerate(zip(states, weights)):
        idx = bipartite_block_index(dims_a, dims_b, i)
        out[np.ix_(idx, idx)] += w * as_matrix(s)
    return DensityMatrix(out, (sum(dims_a), sum(dims_b)))


# ----------------- randomness -----------------

def rng_for(seed: Seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def ginibre(rows: int, cols: int, seed: Seed) -> np.ndarray:
    rng = rng_for(seed)
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / math.sqrt(2)


def random_haar_unitary(d: int, seed: Seed = None) -> np.ndarray:
    """Haar unitary: QR of a complex Ginibre matrix with R's diagonal phases absorbed."""
    if d < 1:
        raise DimensionError(f"dimension must be >= 1, got {d}")
    z = ginibre(d, d, seed)
    q, r = qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_pure(d: int, seed: Seed = None) -> PureState:
    v = ginibre(d, 1, seed).reshape(-1)
    return PureState(v / np.linalg.norm(v), (d,))


def random_density(d: int, rank: Optional[int] = None, seed: Seed = None) -> DensityMatrix:
    rank = d if rank is None else int(rank)
    if not 1 <= rank <= d:
        raise DimensionError(f"rank must be in [1, {d}], got {rank}")
    A = ginibre(d, rank, seed)
    m = A @ A.conj().T
    return DensityMatrix(hermitianize(m / np.trace(m).real), (d,))
