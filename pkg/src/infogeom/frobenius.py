"""Pre-Frobenius diagnostics in flat coordinates.

The metric ``g`` is constant in the working chart, so the trivial connection
is its Levi-Civita connection and the multiplication ``u o v`` is obtained
by raising the last index of the cubic tensor ``A``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DimMismatch, NonAssociative, NotSemisimple
from .expfam import ExponentialFamily
from .geometry import ConnectionField, amari_chentsov, curvature, fisher_metric
from .tensors import SymTensor, finite_diff, jacobian_fd, metric_inverse, raise_index

FD_STEP = 1e-4
#: third-derivative step when ``A`` is derived from a potential; the larger
#: step keeps roundoff in ``A`` below what a further derivative can amplify
POTENTIAL_STEP = 1e-2
IDEMPOTENT_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class PreFrobeniusData:
    """Constant metric ``g`` plus a field of symmetric cubic tensors ``A``."""

    g: np.ndarray
    A_field: Callable[[np.ndarray], np.ndarray]
    potential: Callable[[np.ndarray], float] | None = None

    def __post_init__(self):
        g = np.array(self.g, dtype=float)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise DimMismatch(f"metric must be square, got {g.shape}")
        if not np.array_equal(g, g.T):
            raise ValueError("metric must be symmetric")
        metric_inverse(g)  # raises SingularMetric
        g.flags.writeable = False
        object.__setattr__(self, "g", g)

    @property
    def dim(self) -> int:
        return self.g.shape[0]

    @property
    def g_inv(self) -> np.ndarray:
        return np.asarray(metric_inverse(self.g))

    def A(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        a = np.asarray(self.A_field(x), dtype=float)
        if a.shape != (self.dim,) * 3:
            raise DimMismatch(f"A must have shape {(self.dim,) * 3}, got {a.shape}")
        return a

    @classmethod
    def constant(cls, g, A) -> "PreFrobeniusData":
        A = np.asarray(SymTensor(A))
        return cls(g, lambda x: A)

    @classmethod
    def from_potential(cls, g, potential, third=None, h: float = POTENTIAL_STEP):
        """``A = d^3 Phi``; analytic ``third`` derivatives are used when given."""
        if third is None:

            def third(x):
                return np.asarray(finite_diff(potential, x, 3, h))

        return cls(g, third, potential)

    @classmethod
    def statistical(cls, fam: ExponentialFamily, base_theta=None) -> "PreFrobeniusData":
        """``(g, A) = (Fisher, Amari-Chentsov)`` with ``g`` frozen at ``base_theta``."""
        base = np.zeros(fam.n) if base_theta is None else np.asarray(base_theta, dtype=float)
        g = np.asarray(fisher_metric(fam, base))
        return cls(g, lambda x: np.asarray(amari_chentsov(fam, x)))


def structure_constants(data: PreFrobeniusData, x) -> np.ndarray:
    """``C^k_{ij}`` with ``e_i o e_j = sum_k C^k_{ij} e_k``; stored ``[i, j, k]``."""
    return np.asarray(raise_index(data.A(x), data.g_inv))


def circle_product(data: PreFrobeniusData, x, u, v) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != (data.dim,) or v.shape != (data.dim,):
        raise DimMismatch(f"vectors must have length {data.dim}")
    return np.einsum("ijk,i,j->k", structure_constants(data, x), u, v)


def potentiality_residual(data: PreFrobeniusData, x, h: float = FD_STEP) -> float:
    """``max |d_a A_bcd - d_b A_acd|``; vanishes iff ``A`` is locally ``d^3 Phi``."""
    dA = jacobian_fd(data.A, x, h)
    return float(np.max(np.abs(dA - dA.transpose(1, 0, 2, 3))))


def wdvv_residual(data: PreFrobeniusData, x) -> float:
    """``max |A_abe g^ef A_fcd - A_bce g^ef A_fad|`` over all index tuples."""
    A = data.A(x)
    g_inv = data.g_inv
    lhs = np.einsum("abe,ef,fcd->abcd", A, g_inv, A)
    rhs = np.einsum("bce,ef,fad->abcd", A, g_inv, A)
    return float(np.max(np.abs(lhs - rhs)))


def associativity_defect(data: PreFrobeniusData, x) -> np.ndarray:
    """``(e_a o e_b) o e_c - e_a o (e_b o e_c)`` as ``defect[a, b, c, k]``."""
    C = structure_constants(data, x)
    left = np.einsum("abs,sck->abck", C, C)
    right = np.einsum("bcs,ask->abck", C, C)
    return left - right


def structure_connection(data: PreFrobeniusData, lam: float) -> ConnectionField:
    """``nabla_lambda = nabla_0 + lambda (X o .)`` with ``nabla_0`` trivial."""
    return ConnectionField.custom(
        data.dim, lambda x: lam * structure_constants(data, x), metric=lambda x: data.g
    )


def structure_connection_residuals(data: PreFrobeniusData, x, h: float = FD_STEP) -> tuple[float, float]:
    """Max-norms of the ``lambda`` and ``lambda**2`` parts of the pencil curvature.

    The curvature of ``nabla_lambda`` is ``lambda R1 + lambda**2 R2``; it is
    evaluated at ``lambda = +1`` and ``-1`` and split into its odd and even
    parts.  ``R1`` measures failure of potentiality, ``R2`` of associativity.
    """
    r_plus = curvature(structure_connection(data, 1.0), x, h).lower
    r_minus = curvature(structure_connection(data, -1.0), x, h).lower
    R1 = 0.5 * (r_plus - r_minus)
    R2 = 0.5 * (r_plus + r_minus)
    return float(np.max(np.abs(R1))), float(np.max(np.abs(R2)))


def _first_significant(e: np.ndarray) -> tuple[int, float]:
    k = int(np.argmax(np.abs(e) > IDEMPOTENT_TOL))
    return k, -e[k]


def semisimple_idempotents(data: PreFrobeniusData, x, seed: int = 0, attempts: int = 3) -> list[np.ndarray]:
    """Idempotent basis ``e_i o e_j = delta_ij e_i`` of the tangent algebra at ``x``.

    The multiplication operator of a random vector is diagonalised; its
    eigenvectors are rescaled to idempotents and the defining relations are
    verified.  Up to ``attempts`` fresh random vectors are tried.

    Raises
    ------
    NonAssociative
        If the algebra at ``x`` is not associative (defect above 1e-8).
    NotSemisimple
        If no idempotent basis is found.
    """
    defect = np.max(np.abs(associativity_defect(data, x)))
    if defect > IDEMPOTENT_TOL:
        raise NonAssociative(f"associativity defect {defect:.3e} at x")
    C = structure_constants(data, x)
    n = data.dim
    rng = np.random.default_rng(seed)
    scale = max(1.0, float(np.max(np.abs(C))))
    for _ in range(attempts):
        v = rng.standard_normal(n)
        L = np.einsum("ijk,i->kj", C, v)
        evals, evecs = np.linalg.eig(L)
        if np.max(np.abs(evals.imag)) > IDEMPOTENT_TOL * scale:
            continue
        ev = np.sort(evals.real)
        if n > 1 and np.min(np.diff(ev)) <= IDEMPOTENT_TOL * scale:
            continue
        basis = []
        for f in evecs.real.T:
            ff = np.einsum("ijk,i,j->k", C, f, f)
            c = float(f @ ff) / float(f @ f)
            if abs(c) <= IDEMPOTENT_TOL * scale:
                break
            basis.append(f / c)
        if len(basis) != n:
            continue
        E = np.array(basis)
        prods = np.einsum("ijk,ai,bj->abk", C, E, E)
        target = np.einsum("ab,ak->abk", np.eye(n), E)
        err = np.max(np.abs(prods - target)) / max(1.0, float(np.max(np.abs(E))))
        if err > IDEMPOTENT_TOL:
            continue
        return sorted(basis, key=_first_significant)
    raise NotSemisimple("tangent algebra admits no idempotent basis at x")


def monge_ampere_density(fam: ExponentialFamily, theta) -> float:
    """``det Hess psi``, i.e. the determinant of the Fisher metric."""
    return float(np.linalg.det(np.asarray(fisher_metric(fam, theta))))
