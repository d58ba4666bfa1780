"""Semidefinite programs deciding and optimizing conversions under real operations.

Two programs are implemented over a conic modeling layer (cvxpy), so any
installed solver with PSD-cone support plugs in:

* ``feasibility_alpha`` decides whether a real trace-preserving map sends
  ``rho`` to ``sigma``. It minimizes Tr[Z] subject to

      I (x) Z  >=  X1 (x) rho + X2 (x) rho^T,
      Tr(sigma^T X1 + sigma X2) = 1,     X1, X2 >= 0,

  with Z Hermitian on the rho-space and X1, X2 PSD on the sigma-space.
  The transformation is feasible exactly when the optimum equals one.
  Complex Hermitian unknowns are modeled through the doubled real
  symmetric embedding [[Re, -Im], [Im, Re]] so the whole program stays
  real; see :func:`real_embed`.

* ``optimal_fidelity_pure_target`` maximizes the fidelity of mapping an
  arbitrary state to a pure target at a prescribed success probability,
  optimizing directly over real symmetric Choi matrices: real maps are
  exactly those with a real symmetric Choi matrix, so no embedding is
  needed, and Hermitian data matrices enter through their symmetric real
  parts (the antisymmetric imaginary parts trace to zero against a
  symmetric variable).

Choi-matrix plumbing (building one from Kraus operators and applying it
to states) lives here as well.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import cvxpy as cp
import numpy as np

from .linalg import partial_trace
from .states import (
    DEFAULT_TOLS,
    DimensionMismatch,
    InvariantError,
    SolverError,
    Tolerances,
    as_density,
    as_pure,
    as_square,
    hermiticity_residual,
)
from .transforms import KrausSet

# |alpha - 1| up to this counts as feasible; interior-point gaps at these
# sizes sit near 1e-8, leaving two orders of margin
ALPHA_TOL = 1e-6


class SolverStatus(str, enum.Enum):
    OPTIMAL = "optimal"
    NEAR_OPTIMAL = "near_optimal"
    INFEASIBLE_NUMERIC = "infeasible_numeric"
    FAILED = "failed"


_STATUS_MAP = {
    cp.OPTIMAL: SolverStatus.OPTIMAL,
    cp.OPTIMAL_INACCURATE: SolverStatus.NEAR_OPTIMAL,
    cp.INFEASIBLE: SolverStatus.INFEASIBLE_NUMERIC,
    cp.INFEASIBLE_INACCURATE: SolverStatus.INFEASIBLE_NUMERIC,
}


@dataclass(frozen=True)
class SolverConfig:
    """Solver tolerance and iteration caps for both programs."""

    gap: float = 1e-8
    max_iters: int = 200
    solver: str = "CLARABEL"

    def options(self) -> dict:
        if self.solver.upper() == "CLARABEL":
            return {"solver": "CLARABEL", "tol_gap_abs": self.gap,
                    "tol_gap_rel": self.gap, "max_iter": self.max_iters}
        if self.solver.upper() == "SCS":
            # first-order solver: iteration cap scales differently
            return {"solver": "SCS", "eps": self.gap,
                    "max_iters": max(self.max_iters, 20000)}
        return {"solver": self.solver}


DEFAULT_SOLVER = SolverConfig()


@dataclass(frozen=True)
class ChoiMatrix:
    """Unnormalized Choi matrix of a CP trace-non-increasing map.

    Lives on input (x) output with the input index slow. A map is real
    exactly when its Choi matrix is real symmetric.
    """

    d_in: int
    d_out: int
    mat: np.ndarray
    tol: Tolerances = DEFAULT_TOLS

    def __post_init__(self):
        a = as_square(self.mat, "Choi matrix")
        if a.shape[0] != self.d_in * self.d_out:
            raise DimensionMismatch(
                f"Choi dimension {a.shape[0]} is not d_in*d_out = {self.d_in * self.d_out}")
        res = hermiticity_residual(a)
        if res > 100 * self.tol.herm:
            raise InvariantError(f"Choi matrix not Hermitian (residual {res:.3e})")
        a = (a + a.conj().T) / 2
        lmin = float(np.linalg.eigvalsh(a).min())
        if lmin < -self.tol.psd:
            raise InvariantError(f"Choi matrix has eigenvalue {lmin:.3e} < -tol_psd")
        marginal = partial_trace(a, (self.d_in, self.d_out), side="B")
        excess = float(np.linalg.eigvalsh(
            (marginal + marginal.conj().T) / 2 - np.eye(self.d_in)).max())
        if excess > 10 * self.tol.psd:
            raise InvariantError(f"map increases trace (marginal excess {excess:.3e})")
        a.setflags(write=False)
        object.__setattr__(self, "mat", a)

    def is_real(self, tol: float = 1e-9) -> bool:
        return (float(np.abs(self.mat.imag).max()) <= tol
                and float(np.abs(self.mat - self.mat.T).max()) <= tol)


def choi_from_kraus(k: KrausSet, tol: Tolerances = DEFAULT_TOLS) -> ChoiMatrix:
    """Choi matrix sum_ij |i><j| (x) K |i><j| K^dag of a Kraus map."""
    d_in, d_out = k.d_in, k.d_out
    acc = np.zeros((d_in * d_out, d_in * d_out), dtype=complex)
    for op in k.ops:
        v = op.T.reshape(-1)  # component (i, b) equals K[b, i]
        acc += np.outer(v, v.conj())
    return ChoiMatrix(d_in, d_out, acc, tol=tol)


def apply_choi(c: ChoiMatrix, rho) -> np.ndarray:
    """Act with a Choi matrix: output = Tr_in [ C (rho^T (x) I) ]."""
    r = as_density(rho)
    if r.dim != c.d_in:
        raise DimensionMismatch(f"state dimension {r.dim} != Choi input {c.d_in}")
    m = c.mat @ np.kron(r.mat.T, np.eye(c.d_out))
    out = partial_trace(m, (c.d_in, c.d_out), side="A")
    return (out + out.conj().T) / 2


def real_embed(h) -> np.ndarray:
    """Real symmetric embedding [[Re, -Im], [Im, Re]] of a Hermitian matrix.

    Doubles the dimension and the multiplicity of every eigenvalue; the
    embedding is PSD exactly when the input is.
    """
    a = as_square(h, "matrix")
    res = hermiticity_residual(a)
    if res > 100 * DEFAULT_TOLS.herm:
        raise InvariantError(f"real_embed needs a Hermitian input (residual {res:.3e})")
    return np.block([[a.real, -a.imag], [a.imag, a.real]])


@dataclass(frozen=True)
class FeasibilityReport:
    """Outcome of the conversion-feasibility program."""

    alpha: float
    feasible: bool
    z_cert: np.ndarray | None
    x1_cert: np.ndarray | None
    x2_cert: np.ndarray | None
    solver_status: SolverStatus
    tol_alpha: float = ALPHA_TOL

    def __post_init__(self):
        claimed = (self.solver_status in (SolverStatus.OPTIMAL, SolverStatus.NEAR_OPTIMAL)
                   and abs(self.alpha - 1.0) <= self.tol_alpha)
        if self.feasible != claimed:
            raise InvariantError("feasible flag inconsistent with alpha and solver status")


@dataclass(frozen=True)
class SdpSolution:
    """Optimal value and optimizing Choi matrix of a conversion program."""

    objective: float
    choi: ChoiMatrix | None
    solver_status: SolverStatus


def _embedded_psd(re_part, im_part):
    return cp.bmat([[re_part, -im_part], [im_part, re_part]]) >> 0


_STATUS_RANK = {SolverStatus.OPTIMAL: 0, SolverStatus.NEAR_OPTIMAL: 1,
                SolverStatus.INFEASIBLE_NUMERIC: 2, SolverStatus.FAILED: 3}


def _solve(problem: cp.Problem, config: SolverConfig) -> SolverStatus:
    try:
        problem.solve(**config.options())
    except cp.error.SolverError as exc:
        raise SolverError(str(exc)) from exc
    status = _STATUS_MAP.get(problem.status, SolverStatus.FAILED)
    if status in (SolverStatus.OPTIMAL, SolverStatus.INFEASIBLE_NUMERIC):
        return status
    # inaccurate or failed: retry once on the alternate solver
    snapshot = {var: var.value for var in problem.variables()}
    fallback = "SCS" if config.solver.upper() != "SCS" else "CLARABEL"
    try:
        problem.solve(**SolverConfig(gap=config.gap, max_iters=config.max_iters,
                                     solver=fallback).options())
        retried = _STATUS_MAP.get(problem.status, SolverStatus.FAILED)
    except cp.error.SolverError:
        retried = SolverStatus.FAILED
    if _STATUS_RANK[retried] < _STATUS_RANK[status]:
        return retried
    for var, value in snapshot.items():
        var.value = value
    return status


def feasibility_alpha(rho, sigma, config: SolverConfig = DEFAULT_SOLVER,
                      tol_alpha: float = ALPHA_TOL) -> FeasibilityReport:
    """Decide convertibility of ``rho`` into ``sigma`` under real CPTP maps.

    Reports the program optimum ``alpha`` raw (never rounded), the
    Hermitian certificates reassembled from their real embeddings, and
    ``feasible`` = (solve succeeded and |alpha - 1| <= tol_alpha). Solver
    failures yield status ``failed`` and no feasibility claim.
    """
    r = as_density(rho)
    s = as_density(sigma)
    d_b, d_a = r.dim, s.dim
    rho_re, rho_im = r.mat.real, r.mat.imag
    sig_re, sig_im = s.mat.real, s.mat.imag

    z_re = cp.Variable((d_b, d_b), symmetric=True)
    z_im = cp.Variable((d_b, d_b))
    x1_re = cp.Variable((d_a, d_a), symmetric=True)
    x1_im = cp.Variable((d_a, d_a))
    x2_re = cp.Variable((d_a, d_a), symmetric=True)
    x2_im = cp.Variable((d_a, d_a))

    eye_a = np.eye(d_a)
    # real/imag blocks of I (x) Z - X1 (x) rho - X2 (x) rho^T
    lhs_re = (cp.kron(eye_a, z_re)
              - (cp.kron(x1_re, rho_re) - cp.kron(x1_im, rho_im))
              - (cp.kron(x2_re, rho_re) + cp.kron(x2_im, rho_im)))
    lhs_im = (cp.kron(eye_a, z_im)
              - (cp.kron(x1_re, rho_im) + cp.kron(x1_im, rho_re))
              - (cp.kron(x2_im, rho_re) - cp.kron(x2_re, rho_im)))

    constraints = [
        z_im == -z_im.T, x1_im == -x1_im.T, x2_im == -x2_im.T,
        _embedded_psd(x1_re, x1_im),
        _embedded_psd(x2_re, x2_im),
        _embedded_psd(lhs_re, lhs_im),
        # Tr(sigma^T X1 + sigma X2): the imaginary part vanishes identically
        cp.trace(sig_re @ x1_re) + cp.trace(sig_im @ x1_im)
        + cp.trace(sig_re @ x2_re) - cp.trace(sig_im @ x2_im) == 1,
    ]
    problem = cp.Problem(cp.Minimize(cp.trace(z_re)), constraints)
    try:
        status = _solve(problem, config)
    except SolverError:
        return FeasibilityReport(alpha=float("nan"), feasible=False, z_cert=None,
                                 x1_cert=None, x2_cert=None,
                                 solver_status=SolverStatus.FAILED, tol_alpha=tol_alpha)
    if status in (SolverStatus.OPTIMAL, SolverStatus.NEAR_OPTIMAL):
        alpha = float(np.trace(z_re.value))
        z = z_re.value + 1j * z_im.value
        x1 = x1_re.value + 1j * x1_im.value
        x2 = x2_re.value + 1j * x2_im.value
    else:
        alpha, z, x1, x2 = float("nan"), None, None, None
    feasible = (status in (SolverStatus.OPTIMAL, SolverStatus.NEAR_OPTIMAL)
                and abs(alpha - 1.0) <= tol_alpha)
    return FeasibilityReport(alpha=alpha, feasible=feasible, z_cert=z,
                             x1_cert=x1, x2_cert=x2, solver_status=status,
                             tol_alpha=tol_alpha)


def optimal_fidelity_pure_target(rho, psi, p: float,
                                 config: SolverConfig = DEFAULT_SOLVER) -> SdpSolution:
    """Best fidelity for mapping ``rho`` to a pure target at success probability ``p``.

    Maximizes (1/p) Tr[ C (rho^T (x) |psi><psi|) ] over real symmetric PSD
    Choi matrices C with Tr_out C <= I and (1/p) Tr[ C (rho^T (x) I) ] = 1.
    The optimizing Choi matrix is returned alongside the objective;
    statuses other than optimal/near-optimal carry no Choi matrix.
    """
    if p <= 0:
        raise InvariantError(f"success probability must be positive, got {p}")
    r = as_density(rho)
    target = as_pure(psi)
    d_a, d_b = r.dim, target.dim
    n = d_a * d_b

    gain = np.kron(r.mat.T, np.outer(target.vec, target.vec.conj()))
    gain = ((gain + gain.conj().T) / 2).real
    mass = np.kron(r.mat.T, np.eye(d_b))
    mass = ((mass + mass.conj().T) / 2).real

    choi_var = cp.Variable((n, n), symmetric=True)
    constraints = [
        choi_var >> 0,
        cp.partial_trace(choi_var, [d_a, d_b], axis=1) << np.eye(d_a),
        cp.trace(choi_var @ mass) == p,
    ]
    problem = cp.Problem(cp.Maximize(cp.trace(choi_var @ gain) / p), constraints)
    try:
        status = _solve(problem, config)
    except SolverError:
        return SdpSolution(objective=float("nan"), choi=None,
                           solver_status=SolverStatus.FAILED)
    if status not in (SolverStatus.OPTIMAL, SolverStatus.NEAR_OPTIMAL):
        return SdpSolution(objective=float("nan"), choi=None, solver_status=status)
    raw = np.asarray(choi_var.value)
    raw = (raw + raw.T) / 2
    value = float(np.trace(raw @ gain) / p)
    # solver-accuracy tolerances: the optimizer satisfies the cone
    # constraints only to the working gap
    lenient = Tolerances(herm=1e-7, tr=DEFAULT_TOLS.tr, norm=DEFAULT_TOLS.norm,
                         psd=1e-6, rec=DEFAULT_TOLS.rec)
    choi = ChoiMatrix(d_a, d_b, raw.astype(complex), tol=lenient)
    return SdpSolution(objective=value, choi=choi, solver_status=status)
