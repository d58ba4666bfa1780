"""Core state types, numerical tolerances, and the error hierarchy.

All operators live in one fixed computational basis; transposition and
conjugation are always entrywise in that basis. No basis parameter is
exposed anywhere in the library: callers who work in a different basis
rotate their inputs themselves.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class InvariantError(ValueError):
    """An object failed one of its defining invariants."""


class DimensionMismatch(InvariantError):
    """Operands or declared dimensions are incompatible."""


class CovarianceError(InvariantError):
    """A Kraus set is not (transpose-)covariant. Carries the worst residual."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


class ConvergenceError(RuntimeError):
    """An iterative routine did not reach its tolerance within its budget."""


class SolverError(RuntimeError):
    """A conic solve failed outright."""


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances used by constructors and kernels.

    Defaults assume double-precision eigensolvers on dimensions up to a
    few hundred, which deliver residuals around 1e-12.
    """

    herm: float = 1e-9   # Hermiticity / symmetry / unitarity residual
    tr: float = 1e-9     # unit-trace residual
    norm: float = 1e-9   # unit-norm residual for state vectors
    psd: float = 1e-8    # most negative admissible eigenvalue
    rec: float = 1e-8    # reconstruction residual (factorizations, ensembles)


DEFAULT_TOLS = Tolerances()

# Entries with |imag| at or below this are considered real. Matches the
# Hermiticity tolerance scale.
REALNESS_TOL = 1e-9


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite, two-dimensional complex ndarray."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise InvariantError(f"{name} must be two-dimensional, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvariantError(f"{name} contains non-finite entries")
    return a


def as_square(m, name: str = "matrix") -> np.ndarray:
    a = as_matrix(m, name)
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {a.shape}")
    return a


def as_vector(v, name: str = "vector") -> np.ndarray:
    a = np.asarray(v, dtype=complex).reshape(-1)
    if a.size == 0 or not np.all(np.isfinite(a)):
        raise InvariantError(f"{name} must be a finite, nonempty vector")
    return a


def hermiticity_residual(m: np.ndarray) -> float:
    return float(np.abs(m - m.conj().T).max())


def max_imag(m) -> float:
    return float(np.abs(np.imag(m)).max())


@dataclass(frozen=True)
class DensityMatrix:
    """Complex Hermitian PSD unit-trace operator in the fixed basis.

    ``check_psd=False`` skips the positivity check; partial transposes of
    entangled states legitimately carry negative eigenvalues.
    """

    mat: np.ndarray
    tol: Tolerances = DEFAULT_TOLS
    check_psd: bool = True

    def __post_init__(self):
        a = as_square(self.mat, "density matrix")
        res = hermiticity_residual(a)
        if res > self.tol.herm:
            raise InvariantError(f"density matrix not Hermitian (residual {res:.3e})")
        tr = np.trace(a)
        if abs(tr - 1.0) > self.tol.tr:
            raise InvariantError(f"density matrix trace {tr:.12g} is not 1")
        if self.check_psd:
            lmin = float(np.linalg.eigvalsh((a + a.conj().T) / 2).min())
            if lmin < -self.tol.psd:
                raise InvariantError(f"density matrix has eigenvalue {lmin:.3e} < -tol_psd")
        a = a.copy()
        a.setflags(write=False)
        object.__setattr__(self, "mat", a)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def transpose(self) -> "DensityMatrix":
        """Entrywise transpose; a valid state with the same spectrum."""
        return DensityMatrix(self.mat.T, tol=self.tol, check_psd=False)

    def is_real(self, tol: float = REALNESS_TOL) -> bool:
        return max_imag(self.mat) <= tol


@dataclass(frozen=True)
class PureState:
    """Unit-norm state vector in the fixed basis."""

    vec: np.ndarray
    tol: Tolerances = DEFAULT_TOLS

    def __post_init__(self):
        v = as_vector(self.vec, "pure state")
        nrm = float(np.linalg.norm(v))
        if abs(nrm - 1.0) > self.tol.norm:
            raise InvariantError(f"pure state norm {nrm:.12g} is not 1")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "vec", v)

    @property
    def dim(self) -> int:
        return self.vec.size

    def conjugate(self) -> "PureState":
        return PureState(self.vec.conj(), tol=self.tol)

    def density(self) -> DensityMatrix:
        m = np.outer(self.vec, self.vec.conj())
        return DensityMatrix(m / np.trace(m).real, tol=self.tol)

    def is_real(self, tol: float = REALNESS_TOL) -> bool:
        return max_imag(self.vec) <= tol


@dataclass(frozen=True)
class BipartiteState:
    """Density matrix on a two-factor space with declared local dimensions.

    The tensor index convention is A-major: row index ``a * d_B + b``.
    """

    dims: tuple[int, int]
    state: DensityMatrix

    def __post_init__(self):
        d_a, d_b = self.dims
        if d_a < 1 or d_b < 1 or d_a * d_b != self.state.dim:
            raise DimensionMismatch(
                f"declared dims {self.dims} do not match matrix dimension {self.state.dim}"
            )
        object.__setattr__(self, "dims", (int(d_a), int(d_b)))

    @classmethod
    def from_matrix(cls, mat, dims, tol: Tolerances = DEFAULT_TOLS,
                    check_psd: bool = True) -> "BipartiteState":
        return cls(tuple(dims), DensityMatrix(mat, tol=tol, check_psd=check_psd))

    @property
    def mat(self) -> np.ndarray:
        return self.state.mat

    @property
    def dim(self) -> int:
        return self.state.dim


def as_density(rho, tol: Tolerances = DEFAULT_TOLS, check_psd: bool = True) -> DensityMatrix:
    """Coerce a DensityMatrix, BipartiteState, PureState, or array to a DensityMatrix."""
    if isinstance(rho, DensityMatrix):
        return rho
    if isinstance(rho, BipartiteState):
        return rho.state
    if isinstance(rho, PureState):
        return rho.density()
    return DensityMatrix(rho, tol=tol, check_psd=check_psd)


def as_pure(psi, tol: Tolerances = DEFAULT_TOLS) -> PureState:
    if isinstance(psi, PureState):
        return psi
    return PureState(psi, tol=tol)


def as_bipartite(state, dims=None, tol: Tolerances = DEFAULT_TOLS,
                 check_psd: bool = True) -> BipartiteState:
    """Coerce to a BipartiteState; ``dims`` is required for raw matrices."""
    if isinstance(state, BipartiteState):
        if dims is not None and tuple(dims) != state.dims:
            raise DimensionMismatch(f"dims {tuple(dims)} conflict with state dims {state.dims}")
        return state
    if dims is None:
        raise DimensionMismatch("local dimensions (d_A, d_B) are required for raw matrices")
    mat = state.mat if isinstance(state, DensityMatrix) else np.asarray(state, dtype=complex)
    return BipartiteState.from_matrix(mat, dims, tol=tol, check_psd=check_psd)
