"""
Quantum channels in Kraus form, their Choi matrices, and the constructors
used by the quantities and the verification harness.

Kraus operators are stored stacked as one array of shape (k, d_out, d_in).
Choi convention: C = sum_ij |i><j| (x) T(|i><j|), input factor first.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Callable, List, Optional, Sequence, Union

import numpy as np

from common.errors import DimensionError, InvalidChannelError, InvalidStateError
from common.utils import load_json, save_json, validate_against_schema
from calc.matcore import (
    DensityMatrix,
    PureState,
    ProbDist,
    Seed,
    as_matrix,
    density,
    hermitian_spectrum,
    hermitianize,
    prob_dist,
    pure_state,
    random_haar_unitary,
)

TP_TOL = 1e-8
CHOI_PSD_TOL = 1e-8
KRAUS_CUTOFF = 1e-10
PAD_CUTOFF = 1e-12
UNITAL_TOL = 1e-9


@dataclasses.dataclass(frozen=True, eq=False)
class Channel:
    kraus: np.ndarray
    label: str = ""

    @property
    def d_in(self) -> int:
        return self.kraus.shape[2]

    @property
    def d_out(self) -> int:
        return self.kraus.shape[1]

    @property
    def n_kraus(self) -> int:
        return self.kraus.shape[0]

    def __repr__(self) -> str:
        return f"Channel({self.label or '?'}, d_in={self.d_in}, d_out={self.d_out}, k={self.n_kraus})"


@dataclasses.dataclass(frozen=True, eq=False)
class ChoiMatrix:
    mat: np.ndarray
    d_in: int
    d_out: int


def make_channel(kraus, label: str = "", tol: float = TP_TOL) -> Channel:
    """Stack and validate Kraus operators; raises InvalidChannelError naming the violated invariant."""
    if isinstance(kraus, np.ndarray) and kraus.ndim == 3:
        K = kraus.astype(complex)
    else:
        mats = [np.asarray(k, dtype=complex) for k in kraus]
        if not mats:
            raise InvalidChannelError("Kraus count must be >= 1")
        shapes = {m.shape for m in mats}
        if len(shapes) != 1 or mats[0].ndim != 2:
            raise InvalidChannelError(f"Kraus operators must share one 2-d shape, got {sorted(shapes)}")
        K = np.stack(mats)
    if K.shape[0] < 1:
        raise InvalidChannelError("Kraus count must be >= 1")
    if K.shape[1] < 1 or K.shape[2] < 1:
        raise InvalidChannelError(f"Kraus operators have empty shape {K.shape[1:]}")
    gram = np.einsum("kai,kaj->ij", K.conj(), K)
    err = float(np.abs(gram - np.eye(K.shape[2])).max())
    if err > tol:
        raise InvalidChannelError(f"trace preservation violated: max|sum K^dag K - I| = {err:.3e} > {tol:g}")
    return Channel(K, label)


# ----------------- application -----------------

def apply_raw(T: Channel, M: np.ndarray) -> np.ndarray:
    """sum_k K M K^dag on any d_in x d_in matrix, no state validation."""
    M = np.asarray(M, dtype=complex)
    if M.shape != (T.d_in, T.d_in):
        raise DimensionError(f"{T!r} expects {T.d_in}x{T.d_in} input, got {M.shape}")
    return np.einsum("kab,bc,kdc->ad", T.kraus, M, T.kraus.conj())


def apply(T: Channel, rho) -> DensityMatrix:
    m = as_matrix(rho)
    return DensityMatrix(hermitianize(apply_raw(T, m)), (T.d_out,))


def apply_pure(T: Channel, w: np.ndarray) -> np.ndarray:
    """T(|w><w|) for an unnormalized vector, without forming the input projector."""
    V = T.kraus @ w  # (k, d_out)
    return hermitianize(V.T @ V.conj())


def apply_pure_many(T: Channel, W: np.ndarray) -> np.ndarray:
    """Stack of T(|w_m><w_m|) for the rows w_m of W."""
    V = np.einsum("kab,mb->mka", T.kraus, W)
    out = np.einsum("mka,mkb->mab", V, V.conj())
    return (out + out.conj().swapaxes(1, 2)) / 2


def adjoint_times_vecs(T: Channel, Ys: np.ndarray, W: np.ndarray) -> np.ndarray:
    """Rows T^dag(Y_m) w_m."""
    V = np.einsum("kab,mb->mka", T.kraus, W)
    YV = np.einsum("mca,mka->mkc", Ys, V)
    return np.einsum("kcb,mkc->mb", T.kraus.conj(), YV)


def adjoint(T: Channel, Y: np.ndarray) -> np.ndarray:
    """Heisenberg-picture map: sum_k K^dag Y K."""
    Y = np.asarray(Y, dtype=complex)
    if Y.shape != (T.d_out, T.d_out):
        raise DimensionError(f"adjoint of {T!r} expects {T.d_out}x{T.d_out}, got {Y.shape}")
    return np.einsum("kba,bc,kcd->ad", T.kraus.conj(), Y, T.kraus)


# ----------------- Choi -----------------

def choi(T: Channel) -> ChoiMatrix:
    vs = T.kraus.transpose(0, 2, 1).reshape(T.n_kraus, -1)
    C = vs.T @ vs.conj()
    return ChoiMatrix(hermitianize(C), T.d_in, T.d_out)


def make_choi(mat, d_in: int, d_out: int, tol: float = CHOI_PSD_TOL) -> ChoiMatrix:
    C = np.asarray(mat, dtype=complex)
    if C.shape != (d_in * d_out, d_in * d_out):
        raise DimensionError(f"Choi matrix must be {d_in * d_out} square, got {C.shape}")
    if np.abs(C - C.conj().T).max() > tol:
        raise InvalidChannelError("Choi matrix is not Hermitian")
    C = hermitianize(C)
    wmin = float(np.linalg.eigvalsh(C).min())
    if wmin < -tol:
        raise InvalidChannelError(f"Choi matrix not PSD: min eigenvalue {wmin:.3e}")
    tr_out = np.trace(C.reshape(d_in, d_out, d_in, d_out), axis1=1, axis2=3)
    err = float(np.abs(tr_out - np.eye(d_in)).max())
    if err > tol:
        raise InvalidChannelError(f"Choi trace preservation violated: max|tr_out C - I| = {err:.3e}")
    return ChoiMatrix(C, d_in, d_out)


def kraus_from_choi(C: ChoiMatrix, label: str = "") -> Channel:
    """Spectral Kraus set; eigenvalues below 1e-10 are dropped (the only lossy conversion)."""
    C = make_choi(C.mat, C.d_in, C.d_out)
    w, U = hermitian_spectrum(C.mat)
    keep = w > KRAUS_CUTOFF
    if not keep.any():
        raise InvalidChannelError("Choi matrix has no eigenvalue above the Kraus cutoff")
    vs = U[:, keep] * np.sqrt(w[keep])
    K = vs.T.reshape(-1, C.d_in, C.d_out).transpose(0, 2, 1)
    return make_channel(K, label)


def apply_via_choi(C: ChoiMatrix, rho) -> np.ndarray:
    """T(rho) = tr_in[(rho^T (x) I) C]."""
    m = as_matrix(rho)
    if m.shape != (C.d_in, C.d_in):
        raise DimensionError(f"Choi expects {C.d_in}x{C.d_in} input, got {m.shape}")
    C4 = C.mat.reshape(C.d_in, C.d_out, C.d_in, C.d_out)
    return np.einsum("ij,iajb->ab", m, C4)


def choi_of_map(f: Callable[[np.ndarray], np.ndarray], d_in: int, d_out: int) -> ChoiMatrix:
    """Choi matrix of an arbitrary linear map given as a callable; no CPTP check."""
    C = np.zeros((d_in * d_out, d_in * d_out), dtype=complex)
    for i in range(d_in):
        for j in range(d_in):
            E = np.zeros((d_in, d_in), dtype=complex)
            E[i, j] = 1.0
            out = np.asarray(f(E), dtype=complex)
            if out.shape != (d_out, d_out):
                raise DimensionError(f"map returned shape {out.shape}, expected {(d_out, d_out)}")
            C[i * d_out:(i + 1) * d_out, j * d_out:(j + 1) * d_out] = out
    return ChoiMatrix(C, d_in, d_out)


def choi_distance(A: ChoiMatrix, B: ChoiMatrix) -> float:
    if (A.d_in, A.d_out) != (B.d_in, B.d_out):
        return math.inf
    return float(np.abs(A.mat - B.mat).max())


# ----------------- compositions -----------------

def tensor(T1: Channel, T2: Channel) -> Channel:
    A, B = T1.kraus, T2.kraus
    K = np.einsum("iab,jcd->ijacbd", A, B).reshape(
        A.shape[0] * B.shape[0], T1.d_out * T2.d_out, T1.d_in * T2.d_in)
    return Channel(K, f"{T1.label}⊗{T2.label}")


def direct_sum(channels: Sequence[Channel]) -> Channel:
    """Block embedding of every part's Kraus operators, zero outside its block."""
    channels = list(channels)
    if not channels:
        raise InvalidChannelError("direct sum of an empty channel list")
    D_in = sum(c.d_in for c in channels)
    D_out = sum(c.d_out for c in channels)
    K = np.zeros((sum(c.n_kraus for c in channels), D_out, D_in), dtype=complex)
    k0 = o0 = i0 = 0
    for c in channels:
        K[k0:k0 + c.n_kraus, o0:o0 + c.d_out, i0:i0 + c.d_in] = c.kraus
        k0 += c.n_kraus
        o0 += c.d_out
        i0 += c.d_in
    return Channel(K, "⊕".join(c.label for c in channels))


def pad_output(T: Channel, sigma) -> Channel:
    """rho -> T(rho) (x) sigma."""
    s = as_matrix(sigma)
    w, V = hermitian_spectrum(s)
    parts = []
    for mu, v in zip(w, V.T):
        if mu < PAD_CUTOFF:
            continue
        L = math.sqrt(mu) * v[:, None]
        parts.append(np.einsum("kab,cd->kacbd", T.kraus, L).reshape(T.n_kraus, T.d_out * s.shape[0], T.d_in))
    if not parts:
        raise InvalidStateError("padding state has no positive eigenvalue")
    return make_channel(np.concatenate(parts), f"{T.label}⊗σ")


def complementary(T: Channel) -> Channel:
    """Environment output of the Stinespring isometry V = sum_k K_k (x) |k>; output dimension k."""
    return Channel(np.ascontiguousarray(T.kraus.transpose(1, 0, 2)), f"{T.label}^c")


def reindex_channel(T: Channel, perm_in: Sequence[int], perm_out: Sequence[int]) -> Channel:
    """Rewrite T in permuted bases: new basis vector n is old basis vector perm[n]."""
    perm_in = np.asarray(perm_in, dtype=int)
    perm_out = np.asarray(perm_out, dtype=int)
    for name, perm, d in (("input", perm_in, T.d_in), ("output", perm_out, T.d_out)):
        if perm.shape != (d,) or sorted(perm.tolist()) != list(range(d)):
            raise DimensionError(f"{name} reindexing is not a permutation of range({d})")
    K = T.kraus[:, perm_out][:, :, perm_in]
    return Channel(K, T.label)


def sector_indices(blocks_a: Sequence[int], blocks_b: Sequence[int], i: int, j: int) -> np.ndarray:
    """Indices of the sector (block i of the first factor) (x) (block j of the second) in the
    tensor product of two direct-sum spaces."""
    off_a = int(sum(blocks_a[:i]))
    off_b = int(sum(blocks_b[:j]))
    D_b = int(sum(blocks_b))
    return np.array([(off_a + a) * D_b + (off_b + b)
                     for a in range(blocks_a[i]) for b in range(blocks_b[j])], dtype=int)


def sector_order(blocks_a: Sequence[int], blocks_b: Sequence[int]) -> np.ndarray:
    """Sector-major ordering of the product basis: (0,0), (0,1), ..., (1,0), ..."""
    return np.concatenate([sector_indices(blocks_a, blocks_b, i, j)
                           for i in range(len(blocks_a)) for j in range(len(blocks_b))])


def embed_sector(rho, indices: Sequence[int], total_dim: int) -> DensityMatrix:
    m = as_matrix(rho)
    idx = np.asarray(indices, dtype=int)
    if m.shape != (idx.size, idx.size):
        raise DimensionError(f"state of shape {m.shape} does not fit a sector of size {idx.size}")
    out = np.zeros((total_dim, total_dim), dtype=complex)
    out[np.ix_(idx, idx)] = m
    return DensityMatrix(out, (total_dim,))


# ----------------- constructors -----------------

def _check_dim(d: int, name: str = "d") -> int:
    if int(d) != d or d < 1:
        raise InvalidChannelError(f"{name} must be a positive integer, got {d!r}")
    return int(d)


def identity(d: int) -> Channel:
    d = _check_dim(d)
    return Channel(np.eye(d, dtype=complex)[None], f"id{d}")


def weyl_operators(d: int) -> List[np.ndarray]:
    """X^a Z^b for a, b in range(d); (0, 0) first."""
    X = np.roll(np.eye(d, dtype=complex), 1, axis=0)
    Z = np.diag(np.exp(2j * math.pi * np.arange(d) / d))
    return [np.linalg.matrix_power(X, a) @ np.linalg.matrix_power(Z, b) for a in range(d) for b in range(d)]


def depolarizing(d: int, lam: float) -> Channel:
    """rho -> lam rho + (1 - lam) tr(rho) I/d, lam in [-1/(d^2-1), 1]."""
    d = _check_dim(d)
    lo = -1.0 / (d * d - 1) if d > 1 else -math.inf
    if not (lo - 1e-12 <= lam <= 1 + 1e-12):
        raise InvalidChannelError(f"depolarizing lambda={lam!r} outside [{lo:.6g}, 1] for d={d}")
    lam = min(max(lam, lo), 1.0)
    base = (1.0 - lam) / (d * d)
    kraus = []
    for n, W in enumerate(weyl_operators(d)):
        c = lam + base if n == 0 else base
        if c > 0:
            kraus.append(math.sqrt(c) * W)
    return make_channel(kraus, f"depol{d}({lam:g})")


def dephasing(d: int, p: float = 1.0) -> Channel:
    """rho -> (1 - p) rho + p diag(rho)."""
    d = _check_dim(d)
    if not 0 <= p <= 1:
        raise InvalidChannelError(f"dephasing strength p={p!r} outside [0, 1]")
    kraus = []
    if p < 1:
        kraus.append(math.sqrt(1 - p) * np.eye(d))
    for i in range(d):
        E = np.zeros((d, d), dtype=complex)
        E[i, i] = math.sqrt(p)
        kraus.append(E)
    return make_channel(kraus, f"deph{d}({p:g})")


def unitary_channel(U) -> Channel:
    U = np.asarray(U, dtype=complex)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise InvalidChannelError(f"unitary must be square, got shape {U.shape}")
    if np.abs(U.conj().T @ U - np.eye(U.shape[0])).max() > TP_TOL:
        raise InvalidChannelError("matrix is not unitary")
    return Channel(U[None], f"U{U.shape[0]}")


def constant_channel(sigma, d_in: Optional[int] = None) -> Channel:
    """rho -> tr(rho) sigma; input dimension defaults to dim(sigma)."""
    s = density(as_matrix(sigma)).mat
    d_out = s.shape[0]
    d_in = d_out if d_in is None else _check_dim(d_in, "d_in")
    w, V = hermitian_spectrum(s)
    kraus = []
    for mu, v in zip(w, V.T):
        if mu < PAD_CUTOFF:
            continue
        for i in range(d_in):
            K = np.zeros((d_out, d_in), dtype=complex)
            K[:, i] = math.sqrt(mu) * v
            kraus.append(K)
    return make_channel(kraus, f"const{d_out}")


def partial_trace_channel(dA: int, dB: int, side: str = "B") -> Channel:
    """Trace out subsystem `side` of an A (x) B input."""
    dA, dB = _check_dim(dA, "dA"), _check_dim(dB, "dB")
    side = side.upper()
    if side == "B":
        kraus = [np.kron(np.eye(dA), np.eye(dB)[j:j + 1]) for j in range(dB)]
    elif side == "A":
        kraus = [np.kron(np.eye(dA)[i:i + 1], np.eye(dB)) for i in range(dA)]
    else:
        raise InvalidChannelError(f"side must be 'A' or 'B', got {side!r}")
    return make_channel(kraus, f"tr{side}({dA},{dB})")


def werner_holevo(d: int) -> Channel:
    """rho -> (tr(rho) I - rho^T)/(d - 1)."""
    d = _check_dim(d)
    if d < 2:
        raise InvalidChannelError("werner_holevo needs d >= 2")
    kraus = []
    for i in range(d):
        for j in range(i + 1, d):
            A = np.zeros((d, d), dtype=complex)
            A[i, j] = 1.0
            A[j, i] = -1.0
            kraus.append(A / math.sqrt(d - 1))
    return make_channel(kraus, f"wh{d}")


def mixed_unitary(p: Union[ProbDist, Sequence[float]], Us: Sequence) -> Channel:
    p = p if isinstance(p, ProbDist) else prob_dist(p)
    Us = [np.asarray(U, dtype=complex) for U in Us]
    if len(Us) != len(p):
        raise InvalidChannelError(f"{len(p)} weights for {len(Us)} unitaries")
    if len({U.shape for U in Us}) != 1:
        raise InvalidChannelError("mixed_unitary unitaries must share one dimension")
    for U in Us:
        unitary_channel(U)
    kraus = [math.sqrt(w) * U for w, U in zip(p.weights, Us) if w > 0]
    return make_channel(kraus, f"mixU{Us[0].shape[0]}")


def random_channel(d_in: int, d_out: int, env_dim: int, seed: Seed = None) -> Channel:
    """Kraus operators cut from a Haar isometry C^{d_in} -> C^{d_out} (x) C^{env_dim}."""
    d_in, d_out, env_dim = _check_dim(d_in, "d_in"), _check_dim(d_out, "d_out"), _check_dim(env_dim, "env_dim")
    if d_in > d_out * env_dim:
        raise InvalidChannelError(f"no isometry from {d_in} into {d_out}x{env_dim} dimensions")
    U = random_haar_unitary(d_out * env_dim, seed)
    V = U[:, :d_in].reshape(d_out, env_dim, d_in)
    return make_channel(V.transpose(1, 0, 2), f"rand({d_in}->{d_out},k={env_dim})")


def is_unital(T: Channel) -> bool:
    if T.d_in != T.d_out:
        raise DimensionError(f"is_unital needs a square channel, got {T.d_in}->{T.d_out}")
    I = np.eye(T.d_in) / T.d_in
    return bool(np.abs(apply_raw(T, I) - I).max() <= UNITAL_TOL)


# ----------------- JSON codec -----------------

def encode_matrix(M: np.ndarray) -> list:
    M = np.asarray(M, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in M]


def decode_matrix(rows) -> np.ndarray:
    arr = np.asarray(rows, dtype=float)
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise DimensionError(f"complex matrix must be rows x cols x [re, im], got shape {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def channel_to_json(T: Channel) -> dict:
    return {
        "label": T.label,
        "d_in": T.d_in,
        "d_out": T.d_out,
        "kraus": [encode_matrix(K) for K in T.kraus],
    }


def channel_from_json(obj) -> Channel:
    validate_against_schema(obj, "channel.schema.json", InvalidChannelError)
    try:
        mats = [decode_matrix(k) for k in obj["kraus"]]
    except DimensionError as e:
        raise InvalidChannelError(f"malformed Kraus operator: {e}") from e
    for n, K in enumerate(mats):
        if K.shape != (obj["d_out"], obj["d_in"]):
            raise InvalidChannelError(
                f"Kraus operator {n} has shape {K.shape}, declared d_out x d_in = {obj['d_out']}x{obj['d_in']}")
    return make_channel(mats, obj.get("label", ""))


def load_channel(path: str) -> Channel:
    return channel_from_json(load_json(path))


def save_channel(T: Channel, path: str) -> None:
    save_json(path, channel_to_json(T))


def state_to_json(state, label: str = "") -> dict:
    if isinstance(state, PureState):
        return {"label": label, "dims": list(state.dims),
                "vec": [[float(z.real), float(z.imag)] for z in state.vec]}
    dims = list(state.dims) if isinstance(state, DensityMatrix) else [as_matrix(state).shape[0]]
    return {"label": label, "dims": dims, "mat": encode_matrix(as_matrix(state))}


def state_from_json(obj) -> Union[DensityMatrix, PureState]:
    validate_against_schema(obj, "state.schema.json", InvalidStateError)
    dims = obj.get("dims")
    if "vec" in obj:
        v = np.asarray(obj["vec"], dtype=float)
        return pure_state(v[:, 0] + 1j * v[:, 1], dims)
    return density(decode_matrix(obj["mat"]), dims)


def load_state(path: str) -> Union[DensityMatrix, PureState]:
    return state_from_json(load_json(path))


def save_state(state, path: str, label: str = "") -> None:
    save_json(path, state_to_json(state, label))
