"""Random states and channels for testing and experimentation."""

from __future__ import annotations

import numpy as np

from .states import DensityMatrix, PureState
from .transforms import KrausSet


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def rand_pure(dim: int, rng=None, real: bool = False) -> PureState:
    """Haar-random pure state (real orthogonal ensemble when ``real``)."""
    g = _rng(rng)
    v = g.standard_normal(dim) + (0 if real else 1j) * g.standard_normal(dim)
    return PureState(v / np.linalg.norm(v))


def rand_density(dim: int, rank: int | None = None, rng=None,
                 real: bool = False) -> DensityMatrix:
    """Random density matrix from a normalized Wishart/Ginibre factor."""
    g = _rng(rng)
    r = rank or dim
    a = g.standard_normal((dim, r)) + (0 if real else 1j) * g.standard_normal((dim, r))
    m = a @ a.conj().T
    return DensityMatrix(m / np.trace(m).real)


def rand_unitary(dim: int, rng=None, real: bool = False) -> np.ndarray:
    """Haar-random unitary (orthogonal when ``real``) via phase-fixed QR."""
    g = _rng(rng)
    z = g.standard_normal((dim, dim)) + (0 if real else 1j) * g.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def rand_cptp_kraus(d_in: int, n_ops: int = 2, d_out: int | None = None,
                    rng=None, real: bool = False) -> KrausSet:
    """Random CPTP Kraus set from a Haar-random (stacked) isometry."""
    g = _rng(rng)
    d_out = d_out or d_in
    rows = d_out * n_ops
    z = g.standard_normal((rows, d_in)) + (0 if real else 1j) * g.standard_normal((rows, d_in))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    iso = q * (d / np.abs(d))
    ops = tuple(iso[m * d_out:(m + 1) * d_out, :] for m in range(n_ops))
    return KrausSet(ops, trace_preserving=True)


def rand_covariant_kraus(dim: int, n_ops: int = 2, rng=None) -> KrausSet:
    """Random transpose-covariant CPTP set with genuinely complex operators.

    Mixes a random channel equally with its entrywise conjugate: the
    combined map commutes with transposition on every input, yet its
    operators stay complex until realified.
    """
    base = rand_cptp_kraus(dim, n_ops=n_ops, rng=rng)
    ops = tuple(op / np.sqrt(2) for op in base.ops) + \
        tuple(op.conj() / np.sqrt(2) for op in base.ops)
    return KrausSet(ops, trace_preserving=True)
