"""State conversion under real operations: analytic formulas and Kraus constructions.

Covers merging of CP maps, transpose-covariance checks, rewriting
covariant maps with real Kraus operators, the optimal exact conversion
probability from a pure state, the imaginarity extremes over fidelity
balls with their attaining states, and the stochastic-approximate
trade-off curves P_f and F_p for pure sources.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .decompositions import equal_imaginarity_decomposition
from .measures import geometric_imaginarity, geometric_imaginarity_pure
from .states import (
    DEFAULT_TOLS,
    CovarianceError,
    DensityMatrix,
    DimensionMismatch,
    InvariantError,
    PureState,
    Tolerances,
    as_density,
    as_matrix,
    as_pure,
)

# targets with imaginarity at or below this are treated as real, so any
# source converts with certainty (limit of the ratio formula)
REAL_TARGET_CUTOFF = 1e-12

COVARIANCE_TOL = 1e-8


def _clamped_arcsin(x: float) -> float:
    return float(np.arcsin(min(1.0, max(-1.0, x))))


def _clamped_arccos(x: float) -> float:
    return float(np.arccos(min(1.0, max(-1.0, x))))


@dataclass(frozen=True)
class KrausSet:
    """CP (possibly trace-non-increasing) map given by its Kraus operators.

    All operators share one (d_out, d_in) shape. ``trace_preserving`` may
    be passed explicitly or left None to be detected from the completeness
    sum.
    """

    ops: tuple[np.ndarray, ...]
    trace_preserving: bool | None = None
    tol: Tolerances = DEFAULT_TOLS

    def __post_init__(self):
        if not self.ops:
            raise InvariantError("a Kraus set needs at least one operator")
        mats = tuple(as_matrix(k, "Kraus operator") for k in self.ops)
        shape = mats[0].shape
        if any(k.shape != shape for k in mats):
            raise DimensionMismatch("all Kraus operators must share one shape")
        comp = sum(k.conj().T @ k for k in mats)
        eye = np.eye(shape[1])
        tp_res = float(np.abs(comp - eye).max())
        tp = self.trace_preserving
        if tp is None:
            tp = tp_res <= 100 * self.tol.herm
        if tp and tp_res > 100 * self.tol.herm:
            raise InvariantError(f"completeness sum misses identity by {tp_res:.3e}")
        excess = float(np.linalg.eigvalsh((comp + comp.conj().T) / 2 - eye).max())
        if excess > self.tol.psd:
            raise InvariantError(f"map increases trace (excess eigenvalue {excess:.3e})")
        frozen = []
        for k in mats:
            k = k.copy()
            k.setflags(write=False)
            frozen.append(k)
        object.__setattr__(self, "ops", tuple(frozen))
        object.__setattr__(self, "trace_preserving", bool(tp))

    @property
    def d_in(self) -> int:
        return self.ops[0].shape[1]

    @property
    def d_out(self) -> int:
        return self.ops[0].shape[0]

    def is_real(self, tol: float = 1e-9) -> bool:
        return max(float(np.abs(k.imag).max()) for k in self.ops) <= tol

    def apply(self, x) -> np.ndarray:
        """Act on a matrix (not only states): sum_m K_m X K_m^dag."""
        a = as_matrix(x, "operand")
        if a.shape != (self.d_in, self.d_in):
            raise DimensionMismatch(f"operand shape {a.shape} != ({self.d_in}, {self.d_in})")
        return sum(k @ a @ k.conj().T for k in self.ops)

    def conj(self) -> "KrausSet":
        return KrausSet(tuple(k.conj() for k in self.ops),
                        trace_preserving=self.trace_preserving, tol=self.tol)


def _padded_pair(e1: KrausSet, e2: KrausSet) -> tuple[list, list]:
    if (e1.d_out, e1.d_in) != (e2.d_out, e2.d_in):
        raise DimensionMismatch(
            f"Kraus shapes differ: {(e1.d_out, e1.d_in)} vs {(e2.d_out, e2.d_in)}")
    p, q = list(e1.ops), list(e2.ops)
    zero = np.zeros((e1.d_out, e1.d_in), dtype=complex)
    while len(p) < len(q):
        p.append(zero)
    while len(q) < len(p):
        q.append(zero)
    return p, q


def merge_cp_maps(e1: KrausSet, e2: KrausSet) -> KrausSet:
    """Kraus set of the equal mixture of two CP maps.

    The operators {(P_j + Q_j)/2, i(P_j - Q_j)/2} act as half the first
    map plus half the second; the shorter list is padded with zeros.
    """
    p, q = _padded_pair(e1, e2)
    ops = [(pj + qj) / 2 for pj, qj in zip(p, q)] + \
          [1j * (pj - qj) / 2 for pj, qj in zip(p, q)]
    tp = e1.trace_preserving and e2.trace_preserving
    return KrausSet(tuple(ops), trace_preserving=tp if tp else None, tol=e1.tol)


def _matrix_units(d: int):
    for i in range(d):
        for j in range(d):
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = 1.0
            yield e


def covariance_residual(k: KrausSet) -> float:
    """Worst-case violation of transpose covariance over the matrix-unit basis."""
    worst = 0.0
    for e in _matrix_units(k.d_in):
        diff = k.apply(e.T) - k.apply(e).T
        worst = max(worst, float(np.abs(diff).max()))
    return worst


def is_covariant(k: KrausSet, tol_cov: float = COVARIANCE_TOL) -> bool:
    """True when the map commutes with transposition on every matrix unit."""
    return covariance_residual(k) <= tol_cov


def _symmetrized_ops(k: KrausSet) -> tuple[np.ndarray, ...]:
    # equal mixture of {K_j} and {K_j*}; both represent the same channel on
    # the relevant inputs, so the action is preserved and the output is real
    ops = [(kj + kj.conj()) / 2 for kj in k.ops] + \
          [1j * (kj - kj.conj()) / 2 for kj in k.ops]
    return tuple(op.real.astype(complex) for op in ops)


def realify_covariant(k: KrausSet, tol_cov: float = COVARIANCE_TOL) -> KrausSet:
    """Rewrite a covariant CP map with all-real Kraus operators.

    A covariant map is represented by both {K_j} and {K_j*}, so merging
    the two representations yields real operators with identical action.
    Refuses non-covariant inputs, whose realified action would differ.
    """
    res = covariance_residual(k)
    if res > tol_cov:
        raise CovarianceError("Kraus set is not covariant", res)
    return KrausSet(_symmetrized_ops(k), trace_preserving=k.trace_preserving, tol=k.tol)


def rho_covariance_residual(k: KrausSet, rho) -> float:
    r = as_density(rho)
    return float(np.abs(k.apply(r.mat.T) - k.apply(r.mat).T).max())


def symmetrize_rho_covariant(k: KrausSet, rho, tol_cov: float = COVARIANCE_TOL) -> KrausSet:
    """Real Kraus set acting like ``k`` on one specific state.

    Requires the map to commute with transposition on ``rho`` only. The
    output is the same conjugation-symmetrized set as for fully covariant
    maps; its action agrees with the input's on ``rho`` (not necessarily
    elsewhere).
    """
    res = rho_covariance_residual(k, rho)
    if res > tol_cov:
        raise CovarianceError("Kraus set is not rho-covariant for this state", res)
    return KrausSet(_symmetrized_ops(k), trace_preserving=k.trace_preserving, tol=k.tol)


@dataclass(frozen=True)
class ApproxParams:
    """Angle bookkeeping for the stochastic-approximate trade-off.

    alpha = arcsin of the square-rooted source imaginarity, beta the same
    for the target, k = arccos of the square-rooted fidelity goal, and
    m1 = alpha - beta + k decides the deterministic branch.
    """

    alpha: float
    beta: float
    k: float

    @property
    def m1(self) -> float:
        return self.alpha - self.beta + self.k

    @classmethod
    def from_values(cls, gi_source: float, gi_target: float, f: float) -> "ApproxParams":
        return cls(alpha=_clamped_arcsin(np.sqrt(max(gi_source, 0.0))),
                   beta=_clamped_arcsin(np.sqrt(max(gi_target, 0.0))),
                   k=_clamped_arccos(np.sqrt(max(f, 0.0))))


@dataclass(frozen=True)
class ConversionResult:
    probability: float
    fidelity: float
    params: ApproxParams

    def __post_init__(self):
        if not (0.0 <= self.probability <= 1.0 and 0.0 <= self.fidelity <= 1.0):
            raise InvariantError("probability and fidelity must lie in [0, 1]")


def prob_exact(psi, rho) -> float:
    """Optimal probability of converting a pure state into ``rho`` exactly.

    The ratio of the geometric imaginarities, capped at one. Targets of
    negligible imaginarity are reachable with certainty.
    """
    gi_s = geometric_imaginarity_pure(as_pure(psi))
    gi_t = geometric_imaginarity(as_density(rho))
    if gi_t <= REAL_TARGET_CUTOFF:
        return 1.0
    return float(min(gi_s / gi_t, 1.0))


def prob_upper_bound(source, target) -> float:
    """Ratio bound on the exact-conversion probability for arbitrary sources.

    Only an upper bound in general; it is attained when the source is
    pure (see :func:`prob_exact`).
    """
    gi_s = geometric_imaginarity(as_density(source))
    gi_t = geometric_imaginarity(as_density(target))
    if gi_t <= REAL_TARGET_CUTOFF:
        return 1.0
    return float(min(gi_s / gi_t, 1.0))


def _check_fidelity_goal(f: float):
    if not (0.0 <= f <= 1.0):
        raise InvariantError(f"fidelity goal must lie in [0, 1], got {f}")


def min_geometric_in_ball(rho, f: float) -> float:
    """Least imaginarity among states with fidelity at least ``f`` to ``rho``."""
    _check_fidelity_goal(f)
    p = ApproxParams.from_values(0.0, geometric_imaginarity(as_density(rho)), f)
    return float(np.sin(max(p.beta - p.k, 0.0)) ** 2)


def max_geometric_in_ball_pure(psi, f: float) -> float:
    """Largest imaginarity among states with fidelity at least ``f`` to a pure state."""
    _check_fidelity_goal(f)
    p = ApproxParams.from_values(geometric_imaginarity_pure(as_pure(psi)), 0.0, f)
    return float(np.sin(min(p.alpha + p.k, np.pi / 4)) ** 2)


def real_frame(psi) -> tuple[np.ndarray, np.ndarray | None, float]:
    """Split a pure state into real orthonormal axes and a mixing angle.

    Returns (a, a_perp, alpha) with the input equal, up to a global phase,
    to cos(alpha) a + i sin(alpha) a_perp; alpha lies in [0, pi/4] and
    sin^2(alpha) is the state's geometric imaginarity. Real states return
    a_perp = None in dimension one, otherwise an arbitrary real unit
    vector orthogonal to a.
    """
    v = as_pure(psi).vec
    c = np.sum(v * v)
    w = v * np.exp(-0.5j * np.angle(c)) if abs(c) > 0 else v
    x, y = w.real, w.imag
    nx, ny = float(np.linalg.norm(x)), float(np.linalg.norm(y))
    alpha = float(np.arctan2(ny, nx))
    a = x / nx
    if ny > 1e-14:
        return a, y / ny, alpha
    if v.size == 1:
        return a, None, 0.0
    # real input: complete the frame with any real unit vector orthogonal to a
    basis = np.eye(v.size)
    overlaps = basis @ a
    k = int(np.argmin(np.abs(overlaps)))
    perp = basis[k] - overlaps[k] * a
    return a, perp / np.linalg.norm(perp), 0.0


def min_ball_state(rho, f: float, tol: Tolerances = DEFAULT_TOLS) -> DensityMatrix:
    """State attaining the minimum of :func:`min_geometric_in_ball`.

    Built from an equal-imaginarity decomposition of ``rho``: every member
    cos(alpha) a_i + i sin(alpha) a_perp_i is retracted to the angle
    max(alpha - k, 0) in its own real frame, which keeps the mixture inside
    the fidelity ball while reaching the imaginarity floor.
    """
    _check_fidelity_goal(f)
    r = as_density(rho, tol=tol)
    alpha = _clamped_arcsin(np.sqrt(geometric_imaginarity(r)))
    k = _clamped_arccos(np.sqrt(f))
    beta_t = max(alpha - k, 0.0)
    ensemble = equal_imaginarity_decomposition(r, tol=tol)
    out = np.zeros((r.dim, r.dim), dtype=complex)
    for w, s in zip(ensemble.weights, ensemble.states):
        a, a_perp, _ = real_frame(s)
        if a_perp is None:
            phi = a.astype(complex)
        else:
            phi = np.cos(beta_t) * a + 1j * np.sin(beta_t) * a_perp
        out += w * np.outer(phi, phi.conj())
    return DensityMatrix(out, tol=tol)


def max_ball_state_pure(psi, f: float, tol: Tolerances = DEFAULT_TOLS) -> PureState:
    """Pure state attaining the maximum of :func:`max_geometric_in_ball_pure`."""
    _check_fidelity_goal(f)
    p = as_pure(psi, tol=tol)
    alpha = _clamped_arcsin(np.sqrt(geometric_imaginarity_pure(p)))
    k = _clamped_arccos(np.sqrt(f))
    m = min(alpha + k, np.pi / 4)
    a, a_perp, _ = real_frame(p)
    if a_perp is None:
        if m > 0:
            raise DimensionMismatch("the maximizer needs dimension >= 2")
        return p
    return PureState(np.cos(m) * a + 1j * np.sin(m) * a_perp, tol=tol)


def approx_prob(psi, rho, f: float) -> ConversionResult:
    """Best success probability for reaching ``rho`` from a pure state with fidelity ``f``.

    Equal to one on the branch m1 >= 0; otherwise the source imaginarity
    divided by the imaginarity floor of the target's fidelity ball. At
    f = 1 this reduces to :func:`prob_exact`.
    """
    _check_fidelity_goal(f)
    gi_s = geometric_imaginarity_pure(as_pure(psi))
    gi_t = geometric_imaginarity(as_density(rho))
    params = ApproxParams.from_values(gi_s, gi_t, f)
    if params.m1 >= 0 or gi_t <= REAL_TARGET_CUTOFF:
        prob = 1.0
    else:
        prob = min(gi_s / float(np.sin(params.beta - params.k) ** 2), 1.0)
    return ConversionResult(probability=float(prob), fidelity=float(f), params=params)


def approx_fidelity(psi, rho, p: float) -> ConversionResult:
    """Best fidelity to ``rho`` from a pure state at success probability ``p``.

    One whenever ``p`` does not exceed the exact-conversion probability;
    otherwise cos^2 of the angle gap left after stretching the source's
    imaginarity by 1/p. Inverse to :func:`approx_prob` on the nontrivial
    branch.
    """
    if not (0.0 < p <= 1.0):
        raise InvariantError(f"probability must lie in (0, 1], got {p}")
    gi_s = geometric_imaginarity_pure(as_pure(psi))
    gi_t = geometric_imaginarity(as_density(rho))
    if gi_t <= REAL_TARGET_CUTOFF or p <= gi_s / gi_t:
        fid = 1.0
    else:
        beta = _clamped_arcsin(np.sqrt(gi_t))
        stretched = _clamped_arcsin(np.sqrt(gi_s / p))
        fid = min(float(np.cos(beta - stretched) ** 2), 1.0)
    params = ApproxParams.from_values(gi_s, gi_t, fid)
    return ConversionResult(probability=float(p), fidelity=float(fid), params=params)
