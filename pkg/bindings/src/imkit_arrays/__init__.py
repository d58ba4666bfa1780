"""Array-native bindings for imkit, aimed at notebook workflows.

Every operation of the core library is mirrored here under its original
name, but inputs are plain array-likes and outputs are plain ndarrays,
floats, or small dicts; no library object crosses the boundary unless
wrapped in an explicit :class:`BoundHandle`. Values pass through
unchanged (64-bit floats stay bit-exact), and the underlying library's
exception categories are preserved, with the failing binding named in
the message.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from types import SimpleNamespace

import numpy as np

import imkit as _im

__version__ = "0.1.0"


def _rewrap(name: str, exc: Exception) -> Exception:
    try:
        return type(exc)(f"{name}: {exc}")
    except TypeError:
        # exception types with extra constructor data are re-raised as-is
        return exc


def _binding(func):
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except (_im.InvariantError, _im.SolverError, _im.ConvergenceError) as exc:
            raise _rewrap(func.__name__, exc) from exc
    return wrapper


@dataclass(frozen=True)
class BoundHandle:
    """Opaque reference to a library object plus its dimension metadata."""

    obj: object
    kind: str
    dims: tuple[int, ...]

    def to_array(self):
        """The underlying numeric data, bit-exact."""
        if self.kind == "pure":
            return np.asarray(self.obj.vec)
        if self.kind == "kraus_set":
            return [np.asarray(k) for k in self.obj.ops]
        return np.asarray(self.obj.mat)


def wrap(obj) -> BoundHandle:
    """Wrap a library object (or array-like state) in a handle."""
    if isinstance(obj, BoundHandle):
        return obj
    if isinstance(obj, _im.PureState):
        return BoundHandle(obj, "pure", (obj.dim,))
    if isinstance(obj, _im.BipartiteState):
        return BoundHandle(obj, "bipartite", obj.dims)
    if isinstance(obj, _im.DensityMatrix):
        return BoundHandle(obj, "density", (obj.dim,))
    if isinstance(obj, _im.KrausSet):
        return BoundHandle(obj, "kraus_set", (obj.d_out, obj.d_in))
    arr = np.asarray(obj, dtype=complex)
    if arr.ndim == 1:
        return wrap(_im.PureState(arr))
    return wrap(_im.DensityMatrix(arr))


def _unwrap(x):
    return x.obj if isinstance(x, BoundHandle) else x


def _kraus(ops, trace_preserving=None) -> _im.KrausSet:
    ops = _unwrap(ops)
    if isinstance(ops, _im.KrausSet):
        return ops
    return _im.KrausSet(tuple(np.asarray(k, dtype=complex) for k in ops),
                        trace_preserving=trace_preserving)


def _ops_out(kraus_set: _im.KrausSet) -> list[np.ndarray]:
    return [np.asarray(k) for k in kraus_set.ops]


def _ensemble_out(ensemble) -> tuple[np.ndarray, np.ndarray]:
    states = np.vstack([s.vec for s in ensemble.states])
    return np.asarray(ensemble.weights), states


# ------------------------------------------------------------- linalg

@_binding
def tensor(a, b):
    return _im.tensor(a, b)


@_binding
def partial_trace(m, dims, side="B"):
    return _im.partial_trace(m, dims, side=side)


@_binding
def partial_transpose(state, side="B", dims=None):
    return np.asarray(_im.partial_transpose(_unwrap(state), side=side, dims=dims).mat)


@_binding
def psd_sqrt(m):
    return _im.psd_sqrt(np.asarray(m, dtype=complex))


@_binding
def trace_norm(m):
    return _im.trace_norm(np.asarray(m, dtype=complex))


@_binding
def root_fidelity(rho, sigma):
    return _im.root_fidelity(_unwrap(rho), _unwrap(sigma))


@_binding
def bures_angle(rho, sigma):
    return _im.bures_angle(_unwrap(rho), _unwrap(sigma))


@_binding
def takagi(s):
    fact = _im.takagi(np.asarray(s, dtype=complex))
    return np.asarray(fact.q), np.asarray(fact.sigma)


# ------------------------------------------------------------ measures

@_binding
def geometric_imaginarity_pure(psi):
    return _im.geometric_imaginarity_pure(_unwrap(psi))


@_binding
def geometric_imaginarity(rho):
    return _im.geometric_imaginarity(_unwrap(rho))


@_binding
def real_entanglement_monotone(state, side="B", dims=None):
    return _im.real_entanglement_monotone(_unwrap(state), side=side, dims=dims)


@_binding
def real_entanglement_infidelity(state, side="B", dims=None):
    return _im.real_entanglement_infidelity(_unwrap(state), side=side, dims=dims)


# -------------------------------------------------------- decompositions

@_binding
def conjugate_orthogonal_decomposition(rho):
    result = _im.conjugate_orthogonal_decomposition(_unwrap(rho))
    weights, states = _ensemble_out(result.ensemble)
    return weights, states, np.asarray(result.diag)


@_binding
def equal_imaginarity_decomposition(rho):
    return _ensemble_out(_im.equal_imaginarity_decomposition(_unwrap(rho)))


@_binding
def average_conjugate_product(weights, states):
    ensemble = _im.Ensemble(np.asarray(weights, dtype=float),
                            tuple(_im.PureState(np.asarray(s, dtype=complex))
                                  for s in states))
    return _im.average_conjugate_product(ensemble)


@_binding
def rotate_ensemble(weights, states, unitary):
    ensemble = _im.Ensemble(np.asarray(weights, dtype=float),
                            tuple(_im.PureState(np.asarray(s, dtype=complex))
                                  for s in states))
    return _ensemble_out(_im.rotate_ensemble(ensemble, np.asarray(unitary, dtype=complex)))


# ----------------------------------------------------------- transforms

@_binding
def merge_cp_maps(ops1, ops2):
    return _ops_out(_im.merge_cp_maps(_kraus(ops1), _kraus(ops2)))


@_binding
def is_covariant(ops):
    return _im.is_covariant(_kraus(ops))


@_binding
def covariance_residual(ops):
    return _im.covariance_residual(_kraus(ops))


@_binding
def realify_covariant(ops):
    return _ops_out(_im.realify_covariant(_kraus(ops)))


@_binding
def symmetrize_rho_covariant(ops, rho):
    return _ops_out(_im.symmetrize_rho_covariant(_kraus(ops), _unwrap(rho)))


@_binding
def prob_exact(psi, rho):
    return _im.prob_exact(_unwrap(psi), _unwrap(rho))


@_binding
def prob_upper_bound(source, target):
    return _im.prob_upper_bound(_unwrap(source), _unwrap(target))


@_binding
def min_geometric_in_ball(rho, f):
    return _im.min_geometric_in_ball(_unwrap(rho), f)


@_binding
def max_geometric_in_ball_pure(psi, f):
    return _im.max_geometric_in_ball_pure(_unwrap(psi), f)


@_binding
def min_ball_state(rho, f):
    return np.asarray(_im.min_ball_state(_unwrap(rho), f).mat)


@_binding
def max_ball_state_pure(psi, f):
    return np.asarray(_im.max_ball_state_pure(_unwrap(psi), f).vec)


@_binding
def real_frame(psi):
    return _im.real_frame(_unwrap(psi))


def _conversion_out(result) -> dict:
    return {"probability": result.probability, "fidelity": result.fidelity,
            "alpha": result.params.alpha, "beta": result.params.beta,
            "k": result.params.k, "m1": result.params.m1}


@_binding
def approx_prob(psi, rho, f):
    return _conversion_out(_im.approx_prob(_unwrap(psi), _unwrap(rho), f))


@_binding
def approx_fidelity(psi, rho, p):
    return _conversion_out(_im.approx_fidelity(_unwrap(psi), _unwrap(rho), p))


# ------------------------------------------------------------------ sdp

@_binding
def choi_from_kraus(ops):
    return np.asarray(_im.choi_from_kraus(_kraus(ops)).mat)


@_binding
def apply_choi(choi, rho):
    rho = _unwrap(rho)
    mat = np.asarray(choi, dtype=complex)
    d_in = np.asarray(getattr(rho, "mat", rho)).shape[0]
    d_out = mat.shape[0] // d_in
    return _im.apply_choi(_im.ChoiMatrix(d_in, d_out, mat), rho)


@_binding
def real_embed(h):
    return _im.real_embed(np.asarray(h, dtype=complex))


@_binding
def feasibility_alpha(rho, sigma):
    rep = _im.feasibility_alpha(_unwrap(rho), _unwrap(sigma))
    return {"alpha": rep.alpha, "feasible": rep.feasible,
            "solver_status": rep.solver_status.value,
            "z_cert": rep.z_cert, "x1_cert": rep.x1_cert, "x2_cert": rep.x2_cert}


@_binding
def optimal_fidelity_pure_target(rho, psi, p):
    sol = _im.optimal_fidelity_pure_target(_unwrap(rho), _unwrap(psi), p)
    return {"fidelity": sol.objective,
            "solver_status": sol.solver_status.value,
            "choi": None if sol.choi is None else np.asarray(sol.choi.mat)}


_SURFACE = [
    tensor, partial_trace, partial_transpose, psd_sqrt, trace_norm,
    root_fidelity, bures_angle, takagi,
    geometric_imaginarity_pure, geometric_imaginarity,
    real_entanglement_monotone, real_entanglement_infidelity,
    conjugate_orthogonal_decomposition, equal_imaginarity_decomposition,
    average_conjugate_product, rotate_ensemble,
    merge_cp_maps, is_covariant, covariance_residual, realify_covariant,
    symmetrize_rho_covariant, prob_exact, prob_upper_bound,
    min_geometric_in_ball, max_geometric_in_ball_pure,
    min_ball_state, max_ball_state_pure, real_frame,
    approx_prob, approx_fidelity,
    choi_from_kraus, apply_choi, real_embed,
    feasibility_alpha, optimal_fidelity_pure_target,
]


def bind_all() -> SimpleNamespace:
    """The full mirrored surface as one namespace object."""
    return SimpleNamespace(**{f.__name__: f for f in _SURFACE},
                           wrap=wrap, BoundHandle=BoundHandle)


__all__ = [f.__name__ for f in _SURFACE] + ["BoundHandle", "bind_all", "wrap"]
