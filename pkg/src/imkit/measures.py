"""Imaginarity measures and real-entanglement monotones.

The geometric measure of imaginarity of a state is half the shortfall of
the root fidelity between the state and its entrywise transpose,

    I_g(rho) = (1 - sqrt(F(rho, rho^T))) / 2,

which lies in [0, 1/2] and vanishes exactly on real states. For a pure
state this reduces to (1 - |<psi*|psi>|) / 2.

For bipartite states, the trace distance (and the infidelity) between the
state and its partial transpose cannot increase under local real
operations and classical communication, giving computable monotones of
"real entanglement". Values are reported raw: the trace-distance monotone
ranges over [0, 2], and normalization is left to callers.
"""

from __future__ import annotations

import numpy as np

from .linalg import partial_transpose, root_fidelity, trace_norm
from .states import (
    DEFAULT_TOLS,
    REALNESS_TOL,
    InvariantError,
    Tolerances,
    as_bipartite,
    as_density,
    as_pure,
)


def geometric_imaginarity_pure(psi, tol: Tolerances = DEFAULT_TOLS) -> float:
    """Geometric imaginarity (1 - |sum_k psi_k^2|) / 2 of a pure state."""
    v = as_pure(psi, tol=tol).vec
    val = (1.0 - abs(np.sum(v * v))) / 2.0
    return float(min(max(val, 0.0), 0.5))


def geometric_imaginarity(rho, tol: Tolerances = DEFAULT_TOLS) -> float:
    """Geometric imaginarity of an arbitrary state.

    Agrees with :func:`geometric_imaginarity_pure` on rank-one inputs and
    is symmetric under transposition of the input.
    """
    r = as_density(rho, tol=tol)
    val = (1.0 - root_fidelity(r, r.transpose(), tol=tol)) / 2.0
    return float(min(max(val, 0.0), 0.5))


def real_entanglement_monotone(state, side="B", dims=None) -> float:
    """Trace-norm distance between a bipartite state and its partial transpose.

    Nonnegative; zero exactly when the state is invariant under the chosen
    partial transpose. Monotone under local-real operations and classical
    communication.
    """
    s = as_bipartite(state, dims=dims)
    return trace_norm(s.mat - partial_transpose(s, side=side).mat)


def real_entanglement_infidelity(state, side="B", dims=None) -> float:
    """Infidelity 1 - F between a bipartite state and its partial transpose.

    Fidelity needs both arguments positive semidefinite, so this monotone
    is only defined when the partial transpose is itself a state (all
    separable inputs qualify). For NPT inputs it raises; use
    :func:`real_entanglement_monotone` there instead.
    """
    s = as_bipartite(state, dims=dims)
    pt = partial_transpose(s, side=side)
    lmin = float(np.linalg.eigvalsh(pt.mat).min())
    if lmin < -s.state.tol.psd:
        raise InvariantError(
            f"partial transpose has eigenvalue {lmin:.3e}; the fidelity-based "
            "monotone is undefined for NPT states"
        )
    f = root_fidelity(s.state, pt.state) ** 2
    return float(min(max(1.0 - f, 0.0), 1.0))


def is_real_state(state, tol: float = REALNESS_TOL) -> bool:
    """True when every entry's imaginary part is at most ``tol`` in magnitude."""
    obj = np.asarray(state.vec if hasattr(state, "vec") else
                     state.mat if hasattr(state, "mat") else state)
    return float(np.abs(obj.imag).max()) <= tol
