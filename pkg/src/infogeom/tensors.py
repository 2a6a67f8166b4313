"""Dense symmetric tensors, index gymnastics and finite-difference oracles.

Index layout used throughout the package: whenever an array carries a single
upper (contravariant) index, that index is stored *last*.  A mixed tensor
``Tbar^k_{ij}`` therefore lives in ``entries[i, j, k]``, and connection
coefficients ``Gamma^k_{ij}`` in ``gamma[i, j, k]``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg

from .errors import DimMismatch, EvalFailure, SingularMetric

#: relative pivot threshold below which a metric is treated as singular
SINGULAR_RTOL = 1e-12

#: default central-difference steps per derivative order
DEFAULT_STEPS = {1: 1e-4, 2: 1e-4, 3: 1e-3, 4: 5e-3}


def _canonical_symmetrize(arr: np.ndarray) -> np.ndarray:
    """Average over index permutations, then copy the sorted-index value to
    every permutation so the result is symmetric bit-for-bit."""
    order = arr.ndim
    if order < 2:
        return np.array(arr, dtype=float)
    perms = list(itertools.permutations(range(order)))
    avg = sum(np.transpose(arr, p) for p in perms) / len(perms)
    idx = np.sort(np.indices(arr.shape).reshape(order, -1), axis=0)
    return avg[tuple(idx)].reshape(arr.shape)


@dataclass(frozen=True, eq=False)
class SymTensor:
    """Totally symmetric covariant tensor stored densely.

    Construction checks symmetry to exact equality; use :meth:`symmetrized`
    to build one from an array that is only approximately symmetric.
    """

    entries: np.ndarray

    def __post_init__(self):
        arr = np.array(self.entries, dtype=float)
        if arr.ndim > 0 and len(set(arr.shape)) != 1:
            raise DimMismatch(f"symmetric tensor needs equal axes, got {arr.shape}")
        if arr.ndim > 0 and arr.shape[0] < 1:
            raise DimMismatch("dimension must be at least 1")
        for p in itertools.permutations(range(arr.ndim)):
            if not np.array_equal(arr, np.transpose(arr, p)):
                raise ValueError("entries are not invariant under index permutation")
        arr.flags.writeable = False
        object.__setattr__(self, "entries", arr)

    @classmethod
    def symmetrized(cls, arr) -> "SymTensor":
        return cls(_canonical_symmetrize(np.asarray(arr, dtype=float)))

    @property
    def order(self) -> int:
        return self.entries.ndim

    @property
    def dim(self) -> int:
        return self.entries.shape[0] if self.entries.ndim else 1

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.entries
        return self.entries.astype(dtype)

    def __call__(self, *vectors) -> float | np.ndarray:
        """Contract the leading slots with the given vectors."""
        out = self.entries
        for v in vectors:
            out = np.tensordot(np.asarray(v, dtype=float), out, axes=([0], [0]))
        return out

    def __repr__(self):
        return f"SymTensor(order={self.order}, dim={self.dim}, entries={self.entries.tolist()!r})"


@dataclass(frozen=True, eq=False)
class MixedTensor12:
    """``Tbar^k_{ij}``, symmetric in ``(i, j)``; stored as ``entries[i, j, k]``."""

    entries: np.ndarray

    def __post_init__(self):
        arr = np.array(self.entries, dtype=float)
        if arr.ndim != 3 or len(set(arr.shape)) != 1:
            raise DimMismatch(f"mixed (1,2) tensor needs shape (n, n, n), got {arr.shape}")
        if not np.array_equal(arr, arr.transpose(1, 0, 2)):
            raise ValueError("mixed tensor is not symmetric in its lower indices")
        arr.flags.writeable = False
        object.__setattr__(self, "entries", arr)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.entries
        return self.entries.astype(dtype)

    def apply(self, u, v) -> np.ndarray:
        """Bilinear map ``(u, v) -> Tbar(u, v)``."""
        return np.einsum("ijk,i,j->k", self.entries, u, v)

    def operator(self, u) -> np.ndarray:
        """Matrix ``L`` with ``L @ v == Tbar(u, v)``."""
        return np.einsum("ijk,i->kj", self.entries, u)


def metric_inverse(g) -> SymTensor:
    """Inverse of a symmetric nonsingular metric.

    Raises
    ------
    SingularMetric
        If an LU pivot falls below ``1e-12`` relative to the largest entry.
    """
    return SymTensor(_inverse_array(g))


def _inverse_array(g) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise DimMismatch(f"metric must be square, got shape {g.shape}")
    scale = np.max(np.abs(g)) if g.size else 0.0
    if scale == 0.0 or not np.all(np.isfinite(g)):
        raise SingularMetric("metric is zero or non-finite")
    lu, piv = scipy.linalg.lu_factor(g, check_finite=False)
    if np.min(np.abs(np.diag(lu))) < SINGULAR_RTOL * scale:
        raise SingularMetric("metric is numerically singular")
    inv = scipy.linalg.lu_solve((lu, piv), np.eye(g.shape[0]), check_finite=False)
    return 0.5 * (inv + inv.T)


def raise_index(T, g_inv) -> MixedTensor12:
    """``Tbar^k_{ij} = sum_m g^{km} T_{ijm}``."""
    T = np.asarray(T, dtype=float)
    g_inv = np.asarray(g_inv, dtype=float)
    if T.ndim != 3 or g_inv.ndim != 2 or T.shape[0] != g_inv.shape[0]:
        raise DimMismatch(f"cannot raise index of {T.shape} with metric {g_inv.shape}")
    out = np.einsum("ijm,mk->ijk", T, g_inv)
    # restore exact symmetry in the lower pair
    out = 0.5 * (out + out.transpose(1, 0, 2))
    return MixedTensor12(out)


def lower_index(Tbar, g) -> np.ndarray:
    """``T_{ijm} = sum_k Tbar^k_{ij} g_{km}``; inverse of :func:`raise_index`."""
    Tbar = np.asarray(Tbar, dtype=float)
    g = np.asarray(g, dtype=float)
    if Tbar.shape[-1] != g.shape[0]:
        raise DimMismatch(f"cannot lower index of {Tbar.shape} with metric {g.shape}")
    return np.einsum("ijk,km->ijm", Tbar, g)


def _evaluate(f, x) -> float | np.ndarray:
    try:
        val = f(x)
    except Exception as exc:  # noqa: BLE001 - re-raised with context
        raise EvalFailure(f"function evaluation failed at {x!r}: {exc}") from exc
    val = np.asarray(val, dtype=float)
    if not np.all(np.isfinite(val)):
        raise EvalFailure(f"non-finite value at {x!r}")
    return val


def _stencil_derivative(f, x, index, h):
    """Tensor-product central difference ``D_{i1} ... D_{ik} f(x)``.

    Sample points are formed as ``x + h * (sum of signed unit vectors)`` in a
    single addition, so permuted index tuples hit identical points.
    """
    k = len(index)
    acc = 0.0
    for signs in itertools.product((1.0, -1.0), repeat=k):
        offset = np.zeros_like(x)
        for s, i in zip(signs, index):
            offset[i] += s
        acc = acc + math.prod(signs) * _evaluate(f, x + h * offset)
    return acc / (2.0 * h) ** k


def finite_diff(f: Callable, x, order: int, h: float | None = None) -> SymTensor:
    """Symmetric tensor of ``order``-th partial derivatives of a scalar field.

    Central differences with O(h**2) truncation error.  Each sorted
    multi-index is evaluated once and copied to all its permutations.

    Parameters
    ----------
    f : callable
        Scalar field on R^n.
    x : array_like
        Evaluation point.
    order : int
        1 to 4.
    h : float, optional
        Step; defaults to ``1e-4`` (orders 1-2), ``1e-3`` (order 3) and
        ``5e-3`` (order 4).
    """
    if order not in DEFAULT_STEPS:
        raise ValueError(f"finite_diff supports orders 1-4, got {order}")
    h = DEFAULT_STEPS[order] if h is None else float(h)
    if not h > 0:
        raise ValueError("step h must be positive")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = x.size
    out = np.empty((n,) * order)
    for index in itertools.combinations_with_replacement(range(n), order):
        val = float(_stencil_derivative(f, x, index, h))
        for perm in set(itertools.permutations(index)):
            out[perm] = val
    return SymTensor(out)


def jacobian_fd(F: Callable, x, h: float = 1e-4) -> np.ndarray:
    """Central-difference derivative of an array-valued field.

    Returns ``d`` with ``d[a, ...] = dF(x)[...]/dx^a``.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    rows = []
    for a in range(x.size):
        e = np.zeros_like(x)
        e[a] = h
        rows.append((_evaluate(F, x + e) - _evaluate(F, x - e)) / (2.0 * h))
    return np.stack(rows)
