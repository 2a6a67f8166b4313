"""Paracomplex numbers ``x + eps*y`` (``eps**2 = 1``) and the E+/E- splitting.

Values are held in the ``(x, y)`` basis.  The idempotents
``e_plus = (1 + eps)/2`` and ``e_minus = (1 - eps)/2`` give
``x + eps*y = (x + y) e_plus + (x - y) e_minus``, which diagonalises
multiplication.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimMismatch


@dataclass(frozen=True)
class ParacomplexNumber:
    x: float
    y: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError("paracomplex components must be finite")

    def __add__(self, other):
        other = _coerce(other)
        return ParacomplexNumber(self.x + other.x, self.y + other.y)

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other)
        return ParacomplexNumber(self.x - other.x, self.y - other.y)

    def __neg__(self):
        return ParacomplexNumber(-self.x, -self.y)

    def __mul__(self, other):
        return pc_mul(self, _coerce(other))

    __rmul__ = __mul__

    def conj(self) -> "ParacomplexNumber":
        return ParacomplexNumber(self.x, -self.y)

    @property
    def plus(self) -> float:
        return self.x + self.y

    @property
    def minus(self) -> float:
        return self.x - self.y


def _coerce(v) -> ParacomplexNumber:
    if isinstance(v, ParacomplexNumber):
        return v
    return ParacomplexNumber(float(v), 0.0)


EPS = ParacomplexNumber(0.0, 1.0)
E_PLUS = ParacomplexNumber(0.5, 0.5)
E_MINUS = ParacomplexNumber(0.5, -0.5)


def pc_mul(a: ParacomplexNumber, b: ParacomplexNumber) -> ParacomplexNumber:
    return ParacomplexNumber(a.x * b.x + a.y * b.y, a.x * b.y + b.x * a.y)


def pc_norm(z: ParacomplexNumber) -> float:
    """``z * conj(z) = x**2 - y**2``; indefinite."""
    return pc_mul(z, z.conj()).x


def _two_sum(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # error-free transformation: s + err == a + b exactly
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


@dataclass(frozen=True, eq=False)
class SplitVector:
    """Coordinates of a paracomplex vector along ``e_plus`` and ``e_minus``.

    The rounding errors of ``x + y`` and ``x - y`` are kept alongside so that
    :func:`join` recovers the original ``(x, y)`` exactly.
    """

    plus: np.ndarray
    minus: np.ndarray
    _plus_err: np.ndarray | None = field(default=None, repr=False)
    _minus_err: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        plus = np.atleast_1d(np.asarray(self.plus, dtype=float))
        minus = np.atleast_1d(np.asarray(self.minus, dtype=float))
        if plus.shape != minus.shape:
            raise DimMismatch("plus and minus components must have equal length")
        object.__setattr__(self, "plus", plus)
        object.__setattr__(self, "minus", minus)


def split(x, y) -> SplitVector:
    """Split ``x + eps*y`` (componentwise) into ``(x + y, x - y)``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if x.shape != y.shape:
        raise DimMismatch("real and eps parts must have equal shape")
    plus, plus_err = _two_sum(x, y)
    minus, minus_err = _two_sum(x, -y)
    return SplitVector(plus, minus, plus_err, minus_err)


def join(sv: SplitVector) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of :func:`split`: ``x = (plus + minus)/2``, ``y = (plus - minus)/2``."""
    pe = np.zeros_like(sv.plus) if sv._plus_err is None else sv._plus_err
    me = np.zeros_like(sv.minus) if sv._minus_err is None else sv._minus_err
    # exact sums are representable (they equal 2x and 2y), so fsum returns them
    x = np.array([math.fsum(t) for t in zip(sv.plus, pe, sv.minus, me)]) / 2.0
    y = np.array([math.fsum((p, e, -m, -f)) for p, e, m, f in zip(sv.plus, pe, sv.minus, me)]) / 2.0
    return x, y


def project_plus(x, y) -> np.ndarray:
    """E+ components of a sampled curve ``x(t) + eps*y(t)``; arrays of shape ``(T, n)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise DimMismatch("curve parts must have equal shape")
    return x + y


def project_minus(x, y) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise DimMismatch("curve parts must have equal shape")
    return x - y
