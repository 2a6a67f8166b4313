"""Statistical metrics, affine connections and their curvature.

Array conventions (see also :mod:`infogeom.tensors`):

* all-lower coefficients ``Gamma_{ijk} = g(nabla_{d_i} d_j, d_k)`` are stored
  as ``lower[i, j, k]``;
* mixed coefficients ``Gamma^k_{ij} = (nabla_{d_i} d_j)^k`` as
  ``gamma[i, j, k]``;
* torsion ``T^k_{ij} = Gamma^k_{ij} - Gamma^k_{ji}`` as ``torsion[i, j, k]``;
* curvature ``R^l_{jkm}``, the ``d_l`` component of ``R(d_k, d_m) d_j``, as
  ``mixed[j, k, m, l]`` and ``R_{ijkm} = g_{il} R^l_{jkm}`` as
  ``lower[i, j, k, m]``.

Derivatives of coefficient fields are central differences (``h = 1e-4``).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import BlowUp, DegeneratePlane, DimMismatch, InvalidInput
from .expfam import ExponentialFamily, _density_and_scores, density, score_matrix
from .tensors import SymTensor, _inverse_array, jacobian_fd, metric_inverse

FD_STEP = 1e-4
BLOWUP_LIMIT = 1e12


# -- statistical tensors --------------------------------------------------------


def _fisher(p, S) -> np.ndarray:
    g = np.einsum("w,wi,wj->ij", p, S, S)
    return 0.5 * (g + g.T)


def _alpha_lower(p, S, g, alpha) -> np.ndarray:
    inner = -g[None, :, :] + 0.5 * (1.0 - alpha) * np.einsum("wi,wj->wij", S, S)
    out = np.einsum("w,wij,wk->ijk", p, inner, S)
    return 0.5 * (out + out.transpose(1, 0, 2))


def fisher_metric(fam: ExponentialFamily, theta) -> SymTensor:
    """Covariance of the score vector, ``g_ij = E[d_i l d_j l]``."""
    return SymTensor(_fisher(*_density_and_scores(fam, theta)))


def amari_chentsov(fam: ExponentialFamily, theta) -> SymTensor:
    """Skewness tensor ``T_ijk = E[d_i l d_j l d_k l]``."""
    p = density(fam, theta).p
    S = score_matrix(fam, theta)
    return SymTensor.symmetrized(np.einsum("w,wi,wj,wk->ijk", p, S, S, S))


def alpha_connection(fam: ExponentialFamily, theta, alpha: float) -> np.ndarray:
    """All-lower alpha-connection coefficients in natural coordinates.

    Evaluated from ``E[(d_i d_j l + (1 - alpha)/2 d_i l d_j l) d_k l]``.  For an
    exponential family ``d_i d_j l = -g_ij`` does not depend on the outcome.
    """
    p, S = _density_and_scores(fam, theta)
    return _alpha_lower(p, S, _fisher(p, S), alpha)


# -- connection fields ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ConnectionField:
    """Affine connection on a chart of R^n.

    ``christoffel(x)`` returns ``Gamma^k_{ij}`` as ``gamma[i, j, k]``.
    ``metric(x)``, when present, is used to lower indices.  ``provenance`` is
    one of ``"alpha"``, ``"levi_civita"``, ``"flat"``, ``"custom"``.
    """

    dim: int
    christoffel: Callable[[np.ndarray], np.ndarray]
    provenance: str = "custom"
    alpha: float | None = None
    metric: Callable[[np.ndarray], np.ndarray] | None = None
    torsionful: bool = False

    def __call__(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if x.shape != (self.dim,):
            raise DimMismatch(f"point must have length {self.dim}, got {x.shape}")
        gamma = np.asarray(self.christoffel(x), dtype=float)
        if gamma.shape != (self.dim,) * 3:
            raise DimMismatch(f"christoffel must return shape {(self.dim,) * 3}, got {gamma.shape}")
        return gamma

    def lower(self, x) -> np.ndarray:
        if self.metric is None:
            raise InvalidInput("connection carries no metric to lower indices with")
        return np.einsum("ijl,lk->ijk", self(x), np.asarray(self.metric(x), dtype=float))

    @classmethod
    def flat(cls, dim: int) -> "ConnectionField":
        zero = np.zeros((dim,) * 3)
        return cls(dim, lambda x: zero, "flat", metric=lambda x: np.eye(dim))

    @classmethod
    def custom(cls, dim: int, christoffel, metric=None, torsionful: bool = False):
        return cls(dim, christoffel, "custom", metric=metric, torsionful=torsionful)

    @classmethod
    def from_alpha(cls, fam: ExponentialFamily, alpha: float) -> "ConnectionField":
        """Alpha-connection of ``fam`` with indices raised by its Fisher metric."""

        def metric(x):
            return np.asarray(fisher_metric(fam, x))

        def christoffel(x):
            p, S = _density_and_scores(fam, x)
            g = _fisher(p, S)
            return np.einsum("ijm,mk->ijk", _alpha_lower(p, S, g, alpha), _inverse_array(g))

        return cls(fam.n, christoffel, "alpha", alpha=float(alpha), metric=metric)

    @classmethod
    def from_metric(cls, metric_field, dim: int, h: float = FD_STEP) -> "ConnectionField":
        """Levi-Civita connection of ``metric_field`` (finite-difference based)."""
        return cls(
            dim,
            lambda x: levi_civita(metric_field, x, h).mixed,
            "levi_civita",
            metric=lambda x: np.asarray(metric_field(x), dtype=float),
        )


class Christoffel(NamedTuple):
    lower: np.ndarray
    mixed: np.ndarray


def levi_civita(metric_field, x, h: float = FD_STEP) -> Christoffel:
    """Christoffel symbols of the metric field at ``x``.

    ``Gamma_{ijk} = (d_j g_ik + d_i g_jk - d_k g_ij) / 2``, raised with
    ``g^{-1}(x)``.  Raises ``SingularMetric`` for a degenerate metric.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    g = np.asarray(metric_field(x), dtype=float)
    dg = jacobian_fd(lambda y: np.asarray(metric_field(y), dtype=float), x, h)  # dg[a, b, c] = d_a g_bc
    lower = 0.5 * (dg.transpose(1, 0, 2) + dg - dg.transpose(1, 2, 0))
    lower = 0.5 * (lower + lower.transpose(1, 0, 2))
    mixed = np.einsum("ijm,mk->ijk", lower, np.asarray(metric_inverse(g)))
    return Christoffel(lower, mixed)


def metric_compatibility_residual(conn: ConnectionField, x, metric_field=None, h: float = FD_STEP) -> float:
    """Max-norm of ``nabla_a g_bc = d_a g_bc - Gamma^s_ab g_sc - Gamma^s_ac g_bs``."""
    metric_field = metric_field or conn.metric
    if metric_field is None:
        raise InvalidInput("a metric field is required")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    g = np.asarray(metric_field(x), dtype=float)
    dg = jacobian_fd(lambda y: np.asarray(metric_field(y), dtype=float), x, h)
    G = conn(x)
    nabla_g = dg - np.einsum("abs,sc->abc", G, g) - np.einsum("acs,bs->abc", G, g)
    return float(np.max(np.abs(nabla_g)))


# -- curvature and torsion --------------------------------------------------------


class Curvature(NamedTuple):
    mixed: np.ndarray
    lower: np.ndarray | None


def _riemann_mixed(G: np.ndarray, dG: np.ndarray) -> np.ndarray:
    # R^l_{jkm} = d_k G^l_{mj} - d_m G^l_{kj} + G^l_{kt} G^t_{mj} - G^l_{mt} G^t_{kj}
    deriv = np.einsum("kmjl->jkml", dG) - np.einsum("mkjl->jkml", dG)
    quad = np.einsum("ktl,mjt->jkml", G, G) - np.einsum("mtl,kjt->jkml", G, G)
    return deriv + quad


def curvature(conn: ConnectionField, x, h: float = FD_STEP, metric=None) -> Curvature:
    """Riemann tensor of ``conn`` at ``x``.

    ``lower`` is filled when a metric (argument or ``conn.metric``) is
    available.  In dimension one the tensor vanishes identically.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = conn.dim
    if n == 1:
        return Curvature(np.zeros((1, 1, 1, 1)), np.zeros((1, 1, 1, 1)))
    G = conn(x)
    dG = jacobian_fd(conn, x, h)
    R = _riemann_mixed(G, dG)
    metric = metric or conn.metric
    lower = None
    if metric is not None:
        lower = np.einsum("jkml,li->ijkm", R, np.asarray(metric(x), dtype=float))
    return Curvature(R, lower)


def torsion(conn: ConnectionField, x) -> np.ndarray:
    G = conn(x)
    return G - G.transpose(1, 0, 2)


def bianchi_residual(conn: ConnectionField, x, h: float = FD_STEP) -> float:
    """Defect of the first Bianchi identity for a connection with torsion.

    Checks ``sum_cyc R(X,Y)Z = sum_cyc [(nabla_X Tor)(Y,Z) + Tor(Tor(X,Y), Z)]``
    on coordinate fields; any smooth connection gives zero up to
    finite-difference noise.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    G = conn(x)
    dG = jacobian_fd(conn, x, h)
    R = _riemann_mixed(G, dG)
    Rop = np.einsum("cabl->abcl", R)  # Rop[a,b,c] = R(d_a, d_b) d_c
    Tor = G - G.transpose(1, 0, 2)
    dTor = dG - dG.transpose(0, 2, 1, 3)  # dTor[a,b,c,l] = d_a Tor^l_bc
    # (nabla_a Tor)(d_b, d_c)
    nabla_tor = (
        dTor
        + np.einsum("bcs,asl->abcl", Tor, G)
        - np.einsum("abs,scl->abcl", G, Tor)
        - np.einsum("acs,bsl->abcl", G, Tor)
    )
    tor_tor = np.einsum("abs,scl->abcl", Tor, Tor)
    rhs = nabla_tor + tor_tor

    def cyclic(t):
        return t + np.einsum("abcl->bcal", t) + np.einsum("abcl->cabl", t)

    return float(np.max(np.abs(cyclic(Rop) - cyclic(rhs))))


def sectional_curvature(metric_field, conn: ConnectionField, x, u, v, h: float = FD_STEP) -> float:
    """``K = <R(u, v) v, u> / (|u|^2 |v|^2 - <u, v>^2)``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    g = np.asarray(metric_field(x), dtype=float)
    uu, vv, uv = u @ g @ u, v @ g @ v, u @ g @ v
    gram = uu * vv - uv**2
    if gram <= 1e-12 * max(uu * vv, 1e-300):
        raise DegeneratePlane("u and v do not span a 2-plane")
    R = curvature(conn, x, h, metric=metric_field).lower
    return float(np.einsum("ijkm,i,j,k,m->", R, u, v, u, v) / gram)


# -- geodesics and transport -----------------------------------------------------


@dataclass(frozen=True, eq=False)
class GeodesicPath:
    times: np.ndarray
    points: np.ndarray
    velocities: np.ndarray

    def __post_init__(self):
        if not (len(self.times) == len(self.points) == len(self.velocities)):
            raise DimMismatch("times, points and velocities must have equal length")
        if np.any(np.diff(self.times) <= 0):
            raise InvalidInput("times must be strictly increasing")


def rk4_step(f, t: float, y: np.ndarray, h: float) -> np.ndarray:
    k1 = f(t, y)
    k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = f(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_integrate(f, y0, t0: float, t1: float, steps: int) -> tuple[np.ndarray, np.ndarray]:
    """Fixed-step classical RK4 for ``y' = f(t, y)``; returns ``(times, states)``.

    Raises ``BlowUp`` (with the partial ``(times, states)``) if a state entry
    leaves ``[-1e12, 1e12]`` or becomes non-finite.
    """
    if steps < 1:
        raise InvalidInput("steps must be >= 1")
    y = np.asarray(y0, dtype=float).copy()
    h = (t1 - t0) / steps
    times = t0 + h * np.arange(steps + 1)
    times[-1] = t1
    states = np.empty((steps + 1,) + y.shape)
    states[0] = y
    for s in range(steps):
        y = rk4_step(f, times[s], y, h)
        if not np.all(np.isfinite(y)) or np.max(np.abs(y)) > BLOWUP_LIMIT:
            raise BlowUp(f"integration blew up at t={times[s + 1]!r}", partial=(times[: s + 1], states[: s + 1]))
        states[s + 1] = y
    return times, states


def geodesic(conn: ConnectionField, x0, v0, t_end: float = 1.0, steps: int = 1000) -> GeodesicPath:
    """Integrate ``x'' + Gamma^k_ij x'^i x'^j = 0`` from ``(x0, v0)`` over ``[0, t_end]``."""
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    v0 = np.atleast_1d(np.asarray(v0, dtype=float))
    n = conn.dim
    if x0.shape != (n,) or v0.shape != (n,):
        raise DimMismatch(f"x0 and v0 must have length {n}")
    if not t_end > 0:
        raise InvalidInput("t_end must be positive")

    def rhs(t, y):
        x, v = y[:n], y[n:]
        return np.concatenate([v, -np.einsum("ijk,i,j->k", conn(x), v, v)])

    try:
        times, states = rk4_integrate(rhs, np.concatenate([x0, v0]), 0.0, t_end, steps)
    except BlowUp as exc:
        t, s = exc.partial
        raise BlowUp(str(exc), partial=GeodesicPath(t, s[:, :n], s[:, n:])) from None
    return GeodesicPath(times, states[:, :n], states[:, n:])


def parallel_transport(conn: ConnectionField, path, w0, points=None) -> np.ndarray:
    """Transport ``w0`` along a sampled curve by ``w'^k = -Gamma^k_ij x'^i w^j``.

    ``path`` is a :class:`GeodesicPath` or an array of sample times (then
    ``points`` holds the curve samples).  Between nodes the curve is the
    straight segment; each segment takes one RK4 step.  Returns one vector
    per sample.
    """
    if isinstance(path, GeodesicPath):
        times, pts = path.times, path.points
    else:
        times = np.asarray(path, dtype=float)
        pts = np.asarray(points, dtype=float)
    pts = pts.reshape(len(times), -1)
    w = np.asarray(w0, dtype=float).copy()
    if w.shape != (conn.dim,):
        raise DimMismatch(f"w0 must have length {conn.dim}")
    out = np.empty((len(times), conn.dim))
    out[0] = w
    for s in range(len(times) - 1):
        dt = times[s + 1] - times[s]
        xa, xb = pts[s], pts[s + 1]
        xdot = (xb - xa) / dt

        def rhs(t, w, xa=xa, xdot=xdot, t0=times[s]):
            return -np.einsum("ijk,i,j->k", conn(xa + (t - t0) * xdot), xdot, w)

        w = rk4_step(rhs, times[s], w, dt)
        if not np.all(np.isfinite(w)) or np.max(np.abs(w)) > BLOWUP_LIMIT:
            raise BlowUp(f"transport blew up at t={times[s + 1]!r}", partial=out[: s + 1])
        out[s + 1] = w
    return out


def logistic_flow(t_end: float, steps: int = 1000, p0: float = 0.5) -> tuple[np.ndarray, np.ndarray]:
    """RK4 solution of the Ceva coordinate flow ``p' = p - p**2`` on ``[0, t_end]``.

    ``t_end`` may be negative (the flow is then integrated backwards).  With
    ``p0 = 1/2`` the exact solution is ``1 / (1 + exp(-t))``.
    """
    if t_end == 0:
        raise InvalidInput("t_end must be nonzero")
    times, states = rk4_integrate(lambda t, p: p - p * p, np.array([p0]), 0.0, t_end, steps)
    return times, states[:, 0]
