"""Dense complex linear-algebra kernels.

Tensor and partial operations, matrix square roots, the trace norm, root
fidelity and the Bures angle, and the Takagi factorization of complex
symmetric matrices. Everything operates on plain ndarrays (state wrappers
are accepted where meaningful) and returns new arrays; nothing mutates
its inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .states import (
    DEFAULT_TOLS,
    BipartiteState,
    DimensionMismatch,
    InvariantError,
    Tolerances,
    as_bipartite,
    as_density,
    as_matrix,
    as_square,
    hermiticity_residual,
)


def tensor(a, b) -> np.ndarray:
    """Kronecker product with the left factor as the slow index."""
    return np.kron(as_matrix(a, "left factor"), as_matrix(b, "right factor"))


def _side_axis(side) -> int:
    if side in ("A", "a", 0):
        return 0
    if side in ("B", "b", 1):
        return 1
    raise InvariantError(f"side must be 'A' or 'B', got {side!r}")


def partial_trace(m, dims, side="B") -> np.ndarray:
    """Trace out one factor of a matrix on a (d_A * d_B)-dimensional space."""
    d_a, d_b = int(dims[0]), int(dims[1])
    a = as_square(m, "bipartite matrix")
    if a.shape[0] != d_a * d_b:
        raise DimensionMismatch(f"matrix dimension {a.shape[0]} is not {d_a}*{d_b}")
    t = a.reshape(d_a, d_b, d_a, d_b)
    if _side_axis(side) == 0:
        return np.trace(t, axis1=0, axis2=2)
    return np.trace(t, axis1=1, axis2=3)


def partial_transpose(state, side="B", dims=None) -> BipartiteState:
    """Entrywise transpose on one factor of a bipartite state.

    The result is Hermitian and trace-one but may fail positivity, so the
    returned state suppresses the PSD check. Applying the same transpose
    twice returns the input exactly.
    """
    s = as_bipartite(state, dims=dims)
    d_a, d_b = s.dims
    t = s.mat.reshape(d_a, d_b, d_a, d_b)
    if _side_axis(side) == 0:
        t = t.transpose(2, 1, 0, 3)
    else:
        t = t.transpose(0, 3, 2, 1)
    return BipartiteState.from_matrix(t.reshape(s.dim, s.dim), s.dims,
                                      tol=s.state.tol, check_psd=False)


def psd_sqrt(m, tol: Tolerances = DEFAULT_TOLS) -> np.ndarray:
    """Hermitian PSD square root via eigendecomposition.

    Eigenvalues in [-tol.psd, 0) are clipped to zero; anything more
    negative raises.
    """
    a = as_square(m, "matrix")
    res = hermiticity_residual(a)
    if res > tol.herm:
        raise InvariantError(f"psd_sqrt needs a Hermitian input (residual {res:.3e})")
    w, v = np.linalg.eigh((a + a.conj().T) / 2)
    if w.min() < -tol.psd:
        raise InvariantError(f"psd_sqrt: eigenvalue {w.min():.3e} < -tol_psd")
    root = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T
    return (root + root.conj().T) / 2


def trace_norm(m) -> float:
    """Sum of singular values. For Hermitian inputs, the sum of |eigenvalues|."""
    return float(np.linalg.svd(as_square(m, "matrix"), compute_uv=False).sum())


def root_fidelity(rho, sigma, tol: Tolerances = DEFAULT_TOLS) -> float:
    """Root fidelity of two states, clamped to [0, 1].

    Computed as the nuclear norm of sqrt(rho) @ sqrt(sigma), which equals
    the usual trace of the nested square root but takes one fewer matrix
    root. Equals |<psi|phi>| on pure inputs.
    """
    r = as_density(rho, tol=tol)
    s = as_density(sigma, tol=tol)
    if r.dim != s.dim:
        raise DimensionMismatch(f"state dimensions differ: {r.dim} vs {s.dim}")
    val = trace_norm(psd_sqrt(r.mat, tol) @ psd_sqrt(s.mat, tol))
    return float(min(max(val, 0.0), 1.0))


def bures_angle(rho, sigma, tol: Tolerances = DEFAULT_TOLS) -> float:
    """Bures angle arccos(root fidelity), a metric on states, in [0, pi/2]."""
    return float(np.arccos(root_fidelity(rho, sigma, tol)))


@dataclass(frozen=True)
class TakagiFactorization:
    """Factorization S = Q diag(sigma) Q^T with Q unitary, sigma >= 0 descending."""

    q: np.ndarray
    sigma: np.ndarray
    tol: Tolerances = DEFAULT_TOLS

    def __post_init__(self):
        q = as_square(self.q, "Takagi unitary")
        res = float(np.abs(q.conj().T @ q - np.eye(q.shape[0])).max())
        if res > 10 * self.tol.herm:
            raise InvariantError(f"Takagi factor not unitary (residual {res:.3e})")
        s = np.asarray(self.sigma, dtype=float).reshape(-1)
        if s.size != q.shape[0] or np.any(s < -self.tol.psd) or np.any(np.diff(s) > self.tol.psd):
            raise InvariantError("Takagi values must be nonnegative and descending")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "sigma", np.clip(s, 0.0, None))

    def reconstruct(self) -> np.ndarray:
        return (self.q * self.sigma) @ self.q.T


def takagi(s, tol: Tolerances = DEFAULT_TOLS) -> TakagiFactorization:
    """Takagi factorization of a complex symmetric matrix.

    Finds unitary Q and nonnegative descending sigma with
    ``S = Q diag(sigma) Q^T``; sigma are the singular values of S.

    The construction runs one SVD ``S = U diag(sigma) V^dag`` and corrects
    U by a square root of the unitary ``N = U^dag conj(V)``. Symmetry of S
    forces N to be block diagonal over groups of equal singular values and
    symmetric on every block with nonzero singular value, so a blockwise
    principal square root gives ``Q = U sqrt(N)``. Nearly degenerate
    singular values are clustered into one block, which keeps the
    correction stable.

    Each column of Q is sign-normalized so its largest-magnitude entry has
    positive real part (positive imaginary part on ties), making the output
    deterministic. Raises on non-symmetric input.
    """
    a = as_square(s, "matrix")
    sym_res = float(np.abs(a - a.T).max())
    if sym_res > tol.herm:
        raise InvariantError(f"takagi needs a complex symmetric matrix (residual {sym_res:.3e})")

    u, sv, vh = np.linalg.svd(a)
    v = vh.conj().T
    n = u.conj().T @ v.conj()

    # cluster singular values; a gap below cluster_gap joins the block
    cluster_gap = 1e-8 * max(1.0, float(sv[0])) if sv.size else 0.0
    blocks, start = [], 0
    for i in range(1, sv.size + 1):
        if i == sv.size or sv[start] - sv[i] > cluster_gap:
            blocks.append(range(start, i))
            start = i

    r = np.zeros_like(n)
    for blk in blocks:
        idx = np.ix_(blk, blk)
        r[idx] = scipy.linalg.sqrtm(n[idx]) if len(blk) > 1 else np.sqrt(n[idx])
    q = u @ r

    for k in range(q.shape[1]):
        z = q[np.argmax(np.abs(q[:, k])), k]
        if z.real < 0 or (z.real == 0 and z.imag < 0):
            q[:, k] = -q[:, k]

    fact = TakagiFactorization(q, sv, tol=tol)
    rec_res = float(np.abs(fact.reconstruct() - a).max())
    if rec_res > tol.rec:
        raise InvariantError(f"Takagi reconstruction residual {rec_res:.3e} exceeds tolerance")
    return fact
