"""Constructive pure-state decompositions of density matrices.

Two constructions are provided. The conjugate-orthogonal decomposition
rotates the eigen-ensemble of ``rho`` so that the weighted conjugate
overlaps ``sqrt(w_i w_j) <mu_i|mu_j*>`` become diagonal; it minimizes the
ensemble-average imaginarity, and its diagonal values sum to the root
fidelity between ``rho`` and its transpose. The equal-imaginarity
decomposition then evens out the members with weight-preserving 2x2 real
rotations until every member's imaginarity matches that of ``rho``
itself.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import root_fidelity, takagi
from .measures import geometric_imaginarity, geometric_imaginarity_pure
from .states import (
    DEFAULT_TOLS,
    ConvergenceError,
    DensityMatrix,
    InvariantError,
    PureState,
    Tolerances,
    as_density,
    as_square,
)

# ensemble members below this weight are dropped (null eigenvectors of
# rank-deficient inputs)
WEIGHT_PRUNE = 1e-12


@dataclass(frozen=True)
class Ensemble:
    """Weighted list of pure states mixing to a density matrix."""

    weights: np.ndarray
    states: tuple[PureState, ...]
    tol: Tolerances = DEFAULT_TOLS

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if w.size != len(self.states) or w.size == 0:
            raise InvariantError("ensemble needs one weight per state")
        if np.any(w <= 0) or np.any(w > 1 + self.tol.norm):
            raise InvariantError("ensemble weights must lie in (0, 1]")
        if abs(w.sum() - 1.0) > 100 * self.tol.norm:
            raise InvariantError(f"ensemble weights sum to {w.sum():.12g}, not 1")
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "states", tuple(self.states))

    @property
    def members(self) -> list[tuple[float, PureState]]:
        return [(float(w), s) for w, s in zip(self.weights, self.states)]

    @property
    def size(self) -> int:
        return len(self.states)

    def mixture(self) -> DensityMatrix:
        acc = sum(w * np.outer(s.vec, s.vec.conj())
                  for w, s in zip(self.weights, self.states))
        return DensityMatrix(acc, tol=self.tol)

    def column_matrix(self) -> np.ndarray:
        """d x r matrix whose columns are the subnormalized vectors sqrt(w_i) |psi_i>."""
        return np.column_stack([np.sqrt(w) * s.vec
                                for w, s in zip(self.weights, self.states)])

    @classmethod
    def from_columns(cls, cols: np.ndarray, tol: Tolerances = DEFAULT_TOLS,
                     prune: float = WEIGHT_PRUNE) -> "Ensemble":
        """Build from subnormalized column vectors, pruning negligible weights."""
        w = np.linalg.norm(cols, axis=0) ** 2
        keep = w > prune
        if not np.any(keep):
            raise InvariantError("all candidate members fell below the pruning weight")
        states = tuple(PureState(cols[:, i] / np.sqrt(w[i]), tol=tol)
                       for i in np.nonzero(keep)[0])
        return cls(w[keep], states, tol=tol)


@dataclass(frozen=True)
class EnsembleRotation:
    """Unitary relating two ensembles of the same state.

    Columns of the new ensemble's subnormalized matrix are
    ``C = B @ u.conj().T``, i.e. sqrt(q_i)|phi_i> = sum_j conj(u_ij) sqrt(p_j)|psi_j>.
    """

    u: np.ndarray
    tol: Tolerances = DEFAULT_TOLS

    def __post_init__(self):
        u = as_square(self.u, "ensemble rotation")
        res = float(np.abs(u.conj().T @ u - np.eye(u.shape[0])).max())
        if res > 10 * self.tol.herm:
            raise InvariantError(f"ensemble rotation not unitary (residual {res:.3e})")
        object.__setattr__(self, "u", u)


def rotate_ensemble(e: Ensemble, rotation) -> Ensemble:
    """Apply an ensemble rotation; the mixture is preserved exactly."""
    rot = rotation if isinstance(rotation, EnsembleRotation) else EnsembleRotation(rotation)
    b = e.column_matrix()
    if rot.u.shape[0] != b.shape[1]:
        raise InvariantError(
            f"rotation size {rot.u.shape[0]} does not match ensemble size {b.shape[1]}")
    return Ensemble.from_columns(b @ rot.u.conj().T, tol=e.tol)


@dataclass(frozen=True)
class ConjugateOrthogonalEnsemble:
    """Ensemble whose weighted conjugate Gram matrix is diagonal.

    ``diag[j]`` holds the nonnegative values D_j with
    sqrt(w_i w_j) <mu_i|mu_j*> = delta_ij D_j; their sum equals the root
    fidelity between the mixture and its transpose.
    """

    ensemble: Ensemble
    diag: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.diag, dtype=float).reshape(-1)
        if d.size != self.ensemble.size or np.any(d < -self.ensemble.tol.psd):
            raise InvariantError("diagonal values must be nonnegative, one per member")
        b = self.ensemble.column_matrix()
        gram = (b.T @ b).conj()
        res = float(np.abs(gram - np.diag(d)).max())
        if res > self.ensemble.tol.rec:
            raise InvariantError(f"ensemble is not conjugate-orthogonal (residual {res:.3e})")
        mix = self.ensemble.mixture()
        gap = abs(float(d.sum()) - root_fidelity(mix, mix.transpose()))
        if gap > self.ensemble.tol.rec:
            raise InvariantError(
                f"diagonal sum misses the root fidelity of the mixture by {gap:.3e}")
        object.__setattr__(self, "diag", d)


def conjugate_orthogonal_decomposition(rho, tol: Tolerances = DEFAULT_TOLS
                                       ) -> ConjugateOrthogonalEnsemble:
    """Optimal decomposition for the ensemble-average imaginarity.

    Eigendecomposes ``rho``, forms the weighted conjugate Gram matrix
    ``A_ij = sqrt(p_i p_j) <psi_i|psi_j*>`` (complex symmetric), factors it
    as ``A = Q diag(D) Q^T``, and rotates the subnormalized eigenvectors by
    the unitary ``Q^dag``. The resulting members satisfy

        sqrt(w_i w_j) <mu_i|mu_j*> = delta_ij D_j,

    their average imaginarity equals the geometric imaginarity of ``rho``,
    and sum(D) equals the root fidelity of ``rho`` with its transpose.
    """
    r = as_density(rho, tol=tol)
    w, v = np.linalg.eigh(r.mat)
    keep = w > WEIGHT_PRUNE
    w, v = w[keep], v[:, keep]
    b = v * np.sqrt(w)
    # <psi_i|psi_j*> = conj(psi_i^T psi_j), so A is conj of the plain Gram
    a = (b.T @ b).conj()
    fact = takagi(a, tol=tol)
    # U = Q^dag in the ensemble-rotation convention, so C = B Q
    cols = b @ fact.q
    # rotated weights stay above the smallest kept eigenvalue, but prune
    # the members and the diagonal with one mask to keep them aligned
    wts = np.linalg.norm(cols, axis=0) ** 2
    mask = wts > WEIGHT_PRUNE
    ensemble = Ensemble(wts[mask],
                        tuple(PureState(cols[:, i] / np.sqrt(wts[i]), tol=tol)
                              for i in np.nonzero(mask)[0]),
                        tol=tol)
    return ConjugateOrthogonalEnsemble(ensemble, fact.sigma[mask])


def average_conjugate_product(e: Ensemble) -> complex:
    """Ensemble average of the conjugate products <psi_i|psi_i*>.

    Real and nonnegative for the ensembles constructed here, where it
    equals ``1 - 2 * geometric_imaginarity(mixture)``; arbitrary ensembles
    may yield a genuinely complex value, which is returned as-is.
    """
    total = 0.0 + 0.0j
    for w, s in zip(e.weights, e.states):
        total += w * np.sum(s.vec * s.vec).conjugate()
    return complex(total)


def _rotated_member_imaginarity(v1: np.ndarray, v2: np.ndarray, angle: float) -> float:
    w = np.cos(angle) * v1 + np.sin(angle) * v2
    return geometric_imaginarity_pure(w / np.linalg.norm(w))


def equal_imaginarity_decomposition(rho, tol: Tolerances = DEFAULT_TOLS,
                                    tol_equal: float = 1e-8,
                                    bisect_tol: float = 1e-12,
                                    max_iter: int = 200) -> Ensemble:
    """Decomposition whose members all share the imaginarity of ``rho``.

    Starts from the conjugate-orthogonal decomposition, whose average
    member imaginarity already equals the target. While any member
    deviates, the members of largest and smallest imaginarity are mixed by
    a 2x2 real rotation of their subnormalized vectors; the rotation
    preserves both the mixture and the average conjugate product, and the
    rotated first member's imaginarity varies continuously from one
    extreme to the other, so a bisection on the angle pins it to the
    target. Each round fixes one member, and the conserved average drags
    the last member to the target automatically.

    Raises ConvergenceError if the bisection bracket collapses without
    reaching ``tol_equal`` (tolerance too tight for the input's scale).
    """
    r = as_density(rho, tol=tol)
    target = geometric_imaginarity(r, tol=tol)
    start = conjugate_orthogonal_decomposition(r, tol=tol).ensemble
    cols = [c.copy() for c in start.column_matrix().T]

    done: list[np.ndarray] = []
    active = cols
    while len(active) > 1:
        weights = np.array([np.vdot(v, v).real for v in active])
        values = np.array([geometric_imaginarity_pure(v / np.sqrt(wi))
                           for v, wi in zip(active, weights)])
        dev = np.abs(values - target)
        if dev.max() <= tol_equal / 10:
            break
        hi = int(np.argmax(values))
        lo = int(np.argmin(values))
        if values[hi] <= target or values[lo] >= target:
            # conservation guarantees a straddling pair unless we are done
            if dev.max() <= tol_equal:
                break
            raise ConvergenceError(
                f"no straddling pair left at deviation {dev.max():.3e}")
        v1, v2 = active[hi], active[lo]
        lft, rgt = 0.0, np.pi / 2
        f_left = _rotated_member_imaginarity(v1, v2, lft) - target
        converged = False
        for _ in range(max_iter):
            mid = 0.5 * (lft + rgt)
            f_mid = _rotated_member_imaginarity(v1, v2, mid) - target
            if f_left * f_mid <= 0.0:
                rgt = mid
            else:
                lft, f_left = mid, f_mid
            if rgt - lft < bisect_tol:
                converged = True
                break
        if not converged:
            raise ConvergenceError(
                f"angle bisection did not reach {bisect_tol:g} in {max_iter} steps")
        angle = 0.5 * (lft + rgt)
        done.append(np.cos(angle) * v1 + np.sin(angle) * v2)
        active = [-np.sin(angle) * v1 + np.cos(angle) * v2] + \
            [active[i] for i in range(len(active)) if i not in (hi, lo)]

    result = Ensemble.from_columns(np.column_stack(done + active), tol=tol)
    final_dev = max(abs(geometric_imaginarity_pure(s) - target) for s in result.states)
    if final_dev > tol_equal:
        raise ConvergenceError(
            f"member imaginarity deviates by {final_dev:.3e} > tol_equal={tol_equal:g}")
    return result
