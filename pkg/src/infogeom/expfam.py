"""Finite exponential families, simplex charts and a Gaussian reference family.

A family over a finite sample space ``Omega = {w_1, ..., w_m}`` is fixed by a
statistics table ``X`` of shape ``(m, n)`` and an optional base weight vector
``h``.  Densities use the ``+`` sign convention::

    p_theta(w) = h(w) * exp(theta . X(w) - psi(theta))

so that ``psi`` is convex and its derivatives are the cumulants of ``X``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import expit, logsumexp

from .errors import BadFace, DimMismatch, InvalidInput, RankError

MINIMALITY_RTOL = 1e-10
SIMPLEX_ATOL = 1e-12


@dataclass(frozen=True)
class SampleSpace:
    labels: tuple[str, ...]

    def __post_init__(self):
        labels = tuple(str(s) for s in self.labels)
        if not labels:
            raise InvalidInput("sample space needs at least one outcome")
        if len(set(labels)) != len(labels):
            raise InvalidInput(f"outcome labels must be unique: {labels}")
        object.__setattr__(self, "labels", labels)

    def __len__(self):
        return len(self.labels)

    @classmethod
    def of_size(cls, m: int) -> "SampleSpace":
        return cls(tuple(f"w{j + 1}" for j in range(m)))


@dataclass(frozen=True, eq=False)
class ExponentialFamily:
    """Minimal exponential family on a finite sample space.

    Minimality (``[1, X]`` of full column rank) is enforced here, so the
    Fisher metric of every member is positive definite.
    """

    space: SampleSpace
    stats: np.ndarray
    base_weights: np.ndarray | None = None
    log_base: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        X = np.array(self.stats, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        m = len(self.space)
        if X.ndim != 2 or X.shape[0] != m:
            raise DimMismatch(f"stats must have shape ({m}, n), got {X.shape}")
        if X.shape[1] < 1:
            raise RankError("at least one statistic is required")
        if not np.all(np.isfinite(X)):
            raise InvalidInput("statistics must be finite")
        design = np.column_stack([np.ones(m), X])
        sv = np.linalg.svd(design, compute_uv=False)
        rank = int(np.sum(sv > MINIMALITY_RTOL * sv[0]))
        if rank != design.shape[1]:
            raise RankError(
                f"columns of [1, X] have rank {rank} < {design.shape[1]}; family is not minimal"
            )
        if self.base_weights is None:
            w = np.ones(m)
        else:
            w = np.array(self.base_weights, dtype=float)
            if w.shape != (m,) or not np.all(w > 0) or not np.all(np.isfinite(w)):
                raise InvalidInput("base weights must be m positive finite numbers")
        log_w = np.log(w)
        # normalising the base measure leaves densities unchanged; a uniform
        # base then contributes exact zeros to the exponent
        log_w = log_w - np.max(log_w)
        X.flags.writeable = False
        w.flags.writeable = False
        log_w.flags.writeable = False
        object.__setattr__(self, "stats", X)
        object.__setattr__(self, "base_weights", w)
        object.__setattr__(self, "log_base", log_w)

    @property
    def m(self) -> int:
        return self.stats.shape[0]

    @property
    def n(self) -> int:
        return self.stats.shape[1]

    @classmethod
    def from_stats(cls, stats, labels: Sequence[str] | None = None, base_weights=None):
        stats = np.asarray(stats, dtype=float)
        if stats.ndim == 1:
            stats = stats[:, None]
        space = SampleSpace(tuple(labels)) if labels is not None else SampleSpace.of_size(stats.shape[0])
        return cls(space, stats, base_weights)

    @classmethod
    def indicator(cls, m: int, base=None, drop: int | None = None) -> "ExponentialFamily":
        """Atom-indicator statistics with one atom dropped (the last by default)."""
        if m < 2:
            raise InvalidInput("indicator family needs m >= 2")
        drop = m - 1 if drop is None else drop
        keep = [j for j in range(m) if j != drop]
        return cls(SampleSpace.of_size(m), np.eye(m)[:, keep], base)

    def point(self, theta) -> "ThetaPoint":
        return ThetaPoint(theta, self)

    def _theta(self, theta) -> np.ndarray:
        t = np.atleast_1d(np.asarray(theta, dtype=float))
        if t.shape != (self.n,):
            raise DimMismatch(f"theta must have length {self.n}, got {t.shape}")
        return t

    def exponents(self, theta) -> np.ndarray:
        return self.log_base + self.stats @ self._theta(theta)


@dataclass(frozen=True, eq=False)
class ThetaPoint:
    theta: np.ndarray
    family: ExponentialFamily

    def __post_init__(self):
        t = self.family._theta(self.theta).copy()
        if not np.all(np.isfinite(t)):
            raise InvalidInput("theta entries must be finite")
        t.flags.writeable = False
        object.__setattr__(self, "theta", t)

    def __array__(self, dtype=None, copy=None):
        return self.theta if dtype is None else self.theta.astype(dtype)


@dataclass(frozen=True, eq=False)
class ProbVector:
    """Strictly positive probability vector (sums to one within 1e-12)."""

    p: np.ndarray

    def __post_init__(self):
        p = np.array(self.p, dtype=float).reshape(-1)
        if p.size == 0 or not np.all(p > 0):
            raise InvalidInput("probability vector must be strictly positive")
        if abs(p.sum() - 1.0) > SIMPLEX_ATOL:
            raise InvalidInput(f"probabilities sum to {p.sum()!r}, not 1")
        p.flags.writeable = False
        object.__setattr__(self, "p", p)

    def __array__(self, dtype=None, copy=None):
        return self.p if dtype is None else self.p.astype(dtype)

    def __len__(self):
        return self.p.size

    def __getitem__(self, item):
        return self.p[item]


def log_partition(fam: ExponentialFamily, theta) -> float:
    """``psi(theta) = ln sum_w h(w) exp(theta . X(w))`` via log-sum-exp."""
    return float(logsumexp(fam.exponents(theta)))


def density(fam: ExponentialFamily, theta) -> ProbVector:
    a = fam.exponents(theta)
    a = a - np.max(a)
    w = np.exp(a)
    return ProbVector(w / w.sum())


def expectation(fam: ExponentialFamily, theta, f) -> float:
    f = np.asarray(f, dtype=float)
    if f.shape != (fam.m,):
        raise DimMismatch(f"random variable must have length {fam.m}, got {f.shape}")
    return float(density(fam, theta).p @ f)


def mean_statistics(fam: ExponentialFamily, theta) -> np.ndarray:
    """``E_theta[X]``, the gradient of the log-partition function."""
    return density(fam, theta).p @ fam.stats


def score_matrix(fam: ExponentialFamily, theta) -> np.ndarray:
    """Scores ``d_i log p_theta(w) = X_i(w) - E_theta[X_i]``, shape ``(m, n)``.

    Columns are centred exactly with respect to ``density(fam, theta)`` up
    to one rounding of the subtraction.
    """
    return _density_and_scores(fam, theta)[1]


def _density_and_scores(fam: ExponentialFamily, theta) -> tuple[np.ndarray, np.ndarray]:
    p = density(fam, theta).p
    S = fam.stats - p @ fam.stats
    # one correction pass removes the residual mean left by rounding
    return p, S - p @ S


def canonical_to_prob(fam: ExponentialFamily | None, base, x) -> ProbVector:
    """Canonical affine chart around ``base``.

    ``p(w; x) = base(w) exp(sum_a x^a g_a(w) - Psi(x))`` with ``g_a`` the
    statistics of ``fam``.  ``fam=None`` means atom indicators with the last
    atom dropped, the standard chart on the simplex.
    """
    base = np.asarray(base, dtype=float)
    ProbVector(base)
    m = base.size
    if fam is None:
        fam = ExponentialFamily.indicator(m)
    if fam.m != m:
        raise DimMismatch(f"base has {m} outcomes, family has {fam.m}")
    x = fam._theta(x)
    if not np.any(x):
        return ProbVector(base)
    return density(ExponentialFamily(fam.space, fam.stats, base), x)


def ceva_line(fam: ExponentialFamily | None, i: int, t: float, q) -> ProbVector:
    """Point at parameter ``t`` on the Ceva line from vertex ``i`` to ``q``.

    ``p(t) = p_i(t) e_i + (1 - p_i(t)) q`` with ``p_i(t) = 1 / (1 + e^{-t})``,
    the solution of ``dp_i/dt = p_i - p_i**2`` through ``p_i(0) = 1/2``.
    ``fam``, when given, fixes the number of outcomes.
    """
    q = np.asarray(q, dtype=float)
    m = q.size
    if fam is not None and fam.m != m:
        raise DimMismatch(f"q has {m} outcomes, family has {fam.m}")
    if not 0 <= i < m:
        raise InvalidInput(f"vertex index {i} out of range for m={m}")
    if q[i] != 0.0:
        raise BadFace(f"q must have no mass at vertex {i}")
    if np.any(q < 0) or abs(q.sum() - 1.0) > SIMPLEX_ATOL:
        raise InvalidInput("q must be a probability vector on the opposite face")
    p = expit(-t) * q
    p[i] = expit(t)
    return ProbVector(p)


def simplex_fields(p) -> tuple[np.ndarray, np.ndarray]:
    """Rows ``Y_j = e_j - p`` and ``X_j = p_j (e_j - p)`` at ``p``.

    Both families are tangent (each row sums to zero); the ``X_j`` sum to
    the zero vector.
    """
    p = np.asarray(p, dtype=float)
    Y = np.eye(p.size) - p
    return Y, p[:, None] * Y


@dataclass(frozen=True)
class GaussianFamily:
    mu: float
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise InvalidInput("sigma must be positive")


def gaussian_score(gf: GaussianFamily, x) -> tuple[float, float]:
    """``(d/dmu, d/dsigma)`` of ``ln rho_{mu,sigma}(x)``."""
    d = np.asarray(x, dtype=float) - gf.mu
    s2 = gf.sigma**2
    return d / s2, d**2 / (s2 * gf.sigma) - 1.0 / gf.sigma


def gaussian_expectation(gf: GaussianFamily, f, nodes: int = 20) -> float:
    """``E[f(x)]`` under ``N(mu, sigma**2)`` by Gauss-Hermite quadrature."""
    z, w = np.polynomial.hermite_e.hermegauss(nodes)
    return float(w @ np.asarray(f(gf.mu + gf.sigma * z), dtype=float) / np.sqrt(2 * np.pi))
