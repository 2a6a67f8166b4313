"""KL divergence, moment-matching fits and cumulant correlators.

The fit minimises ``K(theta) = KL(target || p_theta)`` by gradient descent.
Its gradient is the moment gap ``E_theta[X] - E_target[X]``, so the
stationary point matches the target's mean statistics.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DimMismatch, EmptyTrace, InvalidInput, IterLimit, NoDescent, UnsupportedOrder
from .expfam import ExponentialFamily, ProbVector, density, mean_statistics, score_matrix
from .geometry import amari_chentsov, fisher_metric
from .paracomplex import split
from .tensors import SymTensor

MAX_HALVINGS = 40


def kl_divergence(p, q) -> float:
    """``sum_j p_j ln(p_j / q_j)`` for strictly positive ``p`` and ``q``."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise DimMismatch(f"distributions have different lengths {p.shape} vs {q.shape}")
    if not (np.all(p > 0) and np.all(q > 0)):
        raise InvalidInput("KL divergence needs strictly positive distributions")
    return float(np.sum(p * (np.log(p) - np.log(q))))


def _target(fam: ExponentialFamily, target) -> np.ndarray:
    t = np.asarray(target, dtype=float)
    if t.shape != (fam.m,):
        raise DimMismatch(f"target must have length {fam.m}, got {t.shape}")
    if not np.all(t > 0):
        raise InvalidInput("target must be strictly positive on every outcome")
    return np.asarray(ProbVector(t))


def kl_objective(fam: ExponentialFamily, theta, target) -> float:
    return kl_divergence(_target(fam, target), density(fam, theta))


def kl_gradient(fam: ExponentialFamily, theta, target) -> np.ndarray:
    """Gradient of ``theta -> KL(target || p_theta)``: ``E_theta[X] - E_target[X]``."""
    t = _target(fam, target)
    return mean_statistics(fam, theta) - t @ fam.stats


def _kl_change(fam, theta, delta, target_mean) -> float:
    """``K(theta + delta) - K(theta)`` without cancellation.

    Equals ``ln E_theta[exp(delta . X)] - delta . E_target[X]``; the log of
    the expectation is taken as ``log1p(E[expm1(.)])`` so the difference is
    resolved even when both objective values agree to machine precision.
    """
    p = density(fam, theta).p
    u = fam.stats @ delta
    shift = np.max(u) if np.max(u) > 1.0 else 0.0
    if shift:
        log_mgf = shift + np.log(p @ np.exp(u - shift))
    else:
        log_mgf = np.log1p(p @ np.expm1(u))
    return float(log_mgf - delta @ target_mean)


@dataclass(frozen=True)
class IterationRecord:
    theta: np.ndarray
    kl_value: float
    moment_residual: float
    delta: np.ndarray
    step_size: float


@dataclass
class LearningTrace:
    """Per-iteration history of a fit.

    ``iterations[k].delta`` is the accepted update from ``theta_k`` to
    ``theta_{k+1}`` (zero on the final record).  KL values are tracked by
    accumulating cancellation-free increments, so they never increase.
    """

    iterations: list[IterationRecord] = field(default_factory=list)
    converged: bool = False
    step_size: float = 0.0

    def __len__(self):
        return len(self.iterations)

    @property
    def thetas(self) -> np.ndarray:
        return np.array([r.theta for r in self.iterations])

    @property
    def kl_values(self) -> np.ndarray:
        return np.array([r.kl_value for r in self.iterations])

    @property
    def moment_residuals(self) -> np.ndarray:
        return np.array([r.moment_residual for r in self.iterations])


def fit_ahs(
    fam: ExponentialFamily,
    target,
    step: float = 1.0,
    tol: float = 1e-10,
    max_iter: int = 5000,
    theta0=None,
    callback: Callable[[IterationRecord], None] | None = None,
    adaptive: bool = True,
):
    """Moment-matching fit of ``fam`` to ``target`` by KL gradient descent.

    Each iteration tries ``theta - eta * grad``; when the objective would
    increase ``eta`` is halved (at most 40 times), so no accepted step
    raises KL.  ``eta`` starts at ``step``.  With ``adaptive`` it is then
    reset every iteration from the last two iterates by the Barzilai-Borwein
    rule ``s.s / s.y``, which copes with ill-conditioned Fisher metrics;
    otherwise the halved step is simply kept.

    Returns
    -------
    (ThetaPoint, LearningTrace)

    Raises
    ------
    NoDescent
        Backtracking exhausted without decrease.
    IterLimit
        ``max_iter`` reached before the moment residual fell below ``tol``.
        Both carry the partial trace as ``.trace``.
    """
    if not step > 0:
        raise InvalidInput("step must be positive")
    t = _target(fam, target)
    target_mean = t @ fam.stats
    theta = np.zeros(fam.n) if theta0 is None else fam._theta(theta0).copy()
    kl = kl_divergence(t, density(fam, theta))
    trace = LearningTrace(step_size=step)
    eta = float(step)
    prev_grad = prev_delta = None

    for _ in range(max_iter + 1):
        grad = mean_statistics(fam, theta) - target_mean
        if adaptive and prev_grad is not None:
            sy = float(prev_delta @ (grad - prev_grad))
            if sy > 0.0:
                eta = float(prev_delta @ prev_delta) / sy
        residual = float(np.max(np.abs(grad)))
        if residual <= tol:
            rec = IterationRecord(theta.copy(), kl, residual, np.zeros_like(theta), eta)
            trace.iterations.append(rec)
            if callback:
                callback(rec)
            trace.converged = True
            trace.step_size = eta
            return fam.point(theta), trace
        if len(trace.iterations) == max_iter:
            break
        for _ in range(MAX_HALVINGS + 1):
            delta = -eta * grad
            change = _kl_change(fam, theta, delta, target_mean)
            if change <= 0.0:
                break
            eta *= 0.5
        else:
            trace.step_size = eta
            raise NoDescent("backtracking exhausted without decreasing KL", trace=trace)
        rec = IterationRecord(theta.copy(), kl, residual, delta, eta)
        trace.iterations.append(rec)
        if callback:
            callback(rec)
        theta = theta + delta
        # KL >= 0; clamping rounding drift keeps the trace non-increasing
        kl = max(kl + change, 0.0)
        prev_grad, prev_delta = grad, delta

    trace.step_size = eta
    raise IterLimit(f"no convergence within {max_iter} iterations", trace=trace)


def _fourth_cumulant(fam: ExponentialFamily, theta) -> np.ndarray:
    p = density(fam, theta).p
    S = score_matrix(fam, theta)
    g = np.asarray(fisher_metric(fam, theta))
    m4 = np.einsum("w,wi,wj,wk,wl->ijkl", p, S, S, S, S)
    return (
        m4
        - np.einsum("ij,kl->ijkl", g, g)
        - np.einsum("ik,jl->ijkl", g, g)
        - np.einsum("il,jk->ijkl", g, g)
    )


def gws_correlator(fam: ExponentialFamily, theta, n: int) -> SymTensor:
    """Order-``n`` derivative tensor of the log-partition function.

    These are the joint cumulants of the statistics: the mean for ``n=1``,
    the Fisher metric for ``n=2``, the Amari-Chentsov tensor for ``n=3`` and
    ``E[s^4] - 3 sym(g g)`` (``s`` the score) for ``n=4``.
    """
    if n == 1:
        return SymTensor(mean_statistics(fam, theta))
    if n == 2:
        return fisher_metric(fam, theta)
    if n == 3:
        return amari_chentsov(fam, theta)
    if n == 4:
        return SymTensor.symmetrized(_fourth_cumulant(fam, theta))
    raise UnsupportedOrder(f"correlators are available for n = 1..4, got {n}")


def trace_split_diagnostics(trace: LearningTrace, fam: ExponentialFamily | None = None) -> np.ndarray:
    """Distances between the E+ and E- images of a learning trajectory.

    Sample ``k`` is the paracomplex vector ``theta_k + eps * delta_k``.  Its
    E+ part ``theta_k + delta_k`` and E- part ``theta_k - delta_k`` are
    compared in the E+ coordinate block, ``d_k = ||plus_k - minus_k||_2``.
    The distances shrink to zero as the updates die out.
    """
    if not trace.iterations:
        raise EmptyTrace("trace has no iterations")
    theta = np.array([r.theta for r in trace.iterations])
    if fam is not None and theta.shape[1] != fam.n:
        raise DimMismatch(f"trace has {theta.shape[1]} parameters, family has {fam.n}")
    delta = np.array([r.delta for r in trace.iterations])
    sv = split(theta.ravel(), delta.ravel())
    plus = sv.plus.reshape(theta.shape)
    minus = sv.minus.reshape(theta.shape)
    return np.linalg.norm(plus - minus, axis=1)
