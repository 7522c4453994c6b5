import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from .errors import DegenerateInput, DimensionMismatch, NotPositiveDefinite
from .smallalg import (
    DEFAULT_TOL,
    Poly,
    cluster_values,
    matrix_eigen,
    poly_roots,
)

logger = logging.getLogger(__name__)

MAX_DOF = 4
SYMMETRY_TOL = 1e-12
PENCIL_RANK_TOL = 1e-8


def _square(name, matrix, n=None):
    matrix = np.array(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DimensionMismatch(
            "{} must be square, got shape {}.".format(name, matrix.shape)
        )
    if n is not None and matrix.shape[0] != n:
        raise DimensionMismatch(
            "{} has dimension {}, expected {}.".format(name, matrix.shape[0], n)
        )
    if not np.all(np.isfinite(matrix)):
        raise DegenerateInput("{} has non-finite entries.".format(name))
    return matrix


def _project(name, matrix, sign):
    # sign=+1 symmetric part, sign=-1 antisymmetric part.
    residual = np.linalg.norm(matrix - sign * matrix.T)
    if residual > SYMMETRY_TOL * max(1.0, np.linalg.norm(matrix)):
        kind = "symmetric" if sign > 0 else "antisymmetric"
        raise DegenerateInput(
            "{} is not {} (residual {:.3e}).".format(name, kind, residual)
        )
    return (matrix + sign * matrix.T) / 2


def check_positive_definite(M):
    try:
        np.linalg.cholesky(M)
    except np.linalg.LinAlgError:
        raise NotPositiveDefinite("Mass matrix is not positive definite.")


class MechanicalSystem(object):
    """
    Linear system M q'' + (D + G) q' + (K + N) q = 0.

    D and K are stored exactly symmetric, G and N exactly antisymmetric;
    M must be symmetric positive definite. For n = 2, omega() and nu()
    return the upper off-diagonal entries of G and N.
    """

    def __init__(self, M, D=None, G=None, K=None, N=None, labels=None):
        M = _square("M", M)
        n = M.shape[0]
        if n > MAX_DOF:
            raise DimensionMismatch(
                "At most {} degrees of freedom are supported.".format(MAX_DOF)
            )
        zero = np.zeros((n, n))
        self._M = _project("M", M, 1)
        check_positive_definite(self._M)
        self._D = _project("D", _square("D", zero if D is None else D, n), 1)
        self._G = _project("G", _square("G", zero if G is None else G, n), -1)
        self._K = _project("K", _square("K", zero if K is None else K, n), 1)
        self._N = _project("N", _square("N", zero if N is None else N, n), -1)
        for block in (self._M, self._D, self._G, self._K, self._N):
            block.setflags(write=False)
        self._labels = dict(labels or {})

    @classmethod
    def from_matrices(cls, A, B, M, labels=None):
        return decompose(A, B, M, labels=labels)

    def n(self):
        return self._M.shape[0]

    def M(self):
        return self._M

    def D(self):
        return self._D

    def G(self):
        return self._G

    def K(self):
        return self._K

    def N(self):
        return self._N

    def A(self):
        return self._K + self._N

    def B(self):
        return self._D + self._G

    def labels(self):
        return dict(self._labels)

    def omega(self):
        return self._G[0, 1]

    def nu(self):
        return self._N[0, 1]

    def is_mass_identity(self):
        return np.array_equal(self._M, np.eye(self.n()))

    def pencil(self, value):
        """The quadratic pencil λ²M + λB + A evaluated at λ."""
        return value * value * self._M + value * self.B() + self.A()

    def first_order_matrix(self):
        """Companion form [[0, I], [-M⁻¹A, -M⁻¹B]] acting on (q, q')."""
        n = self.n()
        top = np.hstack([np.zeros((n, n)), np.eye(n)])
        bottom = -scipy.linalg.solve(self._M, np.hstack([self.A(), self.B()]))
        return np.vstack([top, bottom])

    def replace(self, **blocks):
        current = dict(M=self._M, D=self._D, G=self._G, K=self._K, N=self._N)
        current.update(blocks)
        return MechanicalSystem(labels=self._labels, **current)

    def __repr__(self):
        return "MechanicalSystem(n={}, labels={})".format(self.n(), self._labels)


@dataclass(frozen=True)
class QuarticPoly:
    """Monic quartic λ⁴ + a1 λ³ + a2 λ² + a3 λ + a4."""

    a1: float
    a2: float
    a3: float
    a4: float

    def __post_init__(self):
        if not np.all(np.isfinite(self.coefficients())):
            raise DegenerateInput("Quartic coefficients must be finite.")

    def coefficients(self):
        return (self.a1, self.a2, self.a3, self.a4)

    def descending(self):
        return np.array((1.0,) + self.coefficients())

    def as_poly(self):
        return Poly.from_descending(self.descending())

    def roots(self, tol=DEFAULT_TOL):
        return poly_roots(self.as_poly(), tol)


@dataclass(frozen=True)
class SpectrumEntry:
    value: complex
    algebraic_multiplicity: int
    geometric_multiplicity: int
    vector: Optional[np.ndarray] = None
    krein_sign: Optional[int] = None

    def __post_init__(self):
        if not 1 <= self.geometric_multiplicity <= self.algebraic_multiplicity:
            raise ValueError(
                "Geometric multiplicity {} not in 1..{}.".format(
                    self.geometric_multiplicity, self.algebraic_multiplicity
                )
            )

    def is_defective(self):
        return self.geometric_multiplicity < self.algebraic_multiplicity


def decompose(A, B, M, labels=None):
    """
    Split positional and velocity matrices into symmetric and
    antisymmetric parts: A = K + N, B = D + G.
    """
    M = _square("M", M)
    n = M.shape[0]
    A = _square("A", A, n)
    B = _square("B", B, n)
    check_positive_definite((M + M.T) / 2)
    return MechanicalSystem(
        M,
        D=(B + B.T) / 2,
        G=(B - B.T) / 2,
        K=(A + A.T) / 2,
        N=(A - A.T) / 2,
        labels=labels,
    )


def char_quartic(system):
    """
    Characteristic polynomial det(λ²I + λB + A) of a mass-normalized
    two degree of freedom system.
    """
    if system.n() != 2:
        raise DimensionMismatch(
            "char_quartic needs n=2, got n={}.".format(system.n())
        )
    if not system.is_mass_identity():
        raise DegenerateInput("M must be the identity; call mass_normalize first.")
    D, K = system.D(), system.K()
    omega, nu = system.omega(), system.nu()
    tr_d, tr_k = np.trace(D), np.trace(K)
    return QuarticPoly(
        a1=float(tr_d),
        a2=float(tr_k + np.linalg.det(D) + omega**2),
        a3=float(tr_k * tr_d - np.trace(K @ D) + 2 * omega * nu),
        a4=float(np.linalg.det(K) + nu**2),
    )


def quartic_from_factors(p1, q1, p2, q2):
    """Coefficients of (λ² + p1 λ + q1)(λ² + p2 λ + q2)."""
    return QuarticPoly(
        a1=p1 + p2, a2=q1 + q2 + p1 * p2, a3=p1 * q2 + p2 * q1, a4=q1 * q2
    )


def mass_normalize(system):
    """Congruence with M^(-1/2), giving an equivalent system with M = I."""
    if system.is_mass_identity():
        return system
    check_positive_definite(system.M())
    w, v = np.linalg.eigh(system.M())
    root = v @ np.diag(1.0 / np.sqrt(w)) @ v.T
    root = (root + root.T) / 2

    def congruent(block):
        return root @ block @ root

    return MechanicalSystem(
        np.eye(system.n()),
        D=congruent(system.D()),
        G=congruent(system.G()),
        K=congruent(system.K()),
        N=congruent(system.N()),
        labels=system.labels(),
    )


def _pencil_scale(system, value):
    return max(
        1.0,
        abs(value) ** 2 * np.linalg.norm(system.M(), 2)
        + abs(value) * np.linalg.norm(system.B(), 2)
        + np.linalg.norm(system.A(), 2),
    )


def eigenvalues(system, tol=DEFAULT_TOL):
    """Raw eigenvalues of the first-order companion form (2n values)."""
    if system.n() > MAX_DOF:
        raise DimensionMismatch("spectrum supports n <= {}.".format(MAX_DOF))
    return np.array([value for value, _ in matrix_eigen(system.first_order_matrix(), tol)])


def spectrum(system, tol=DEFAULT_TOL):
    """
    Eigenvalues of the quadratic pencil with multiplicities.

    Args:
        system (`MechanicalSystem`): at most MAX_DOF degrees of freedom.
        tol: eigen-solver tolerance, also used for clustering.

    Returns:
        list of `SpectrumEntry`, one per distinct eigenvalue. The vector is
        the upper (position) block of the companion eigenvector, which is
        an eigenvector of the pencil.
    """
    if system.n() > MAX_DOF:
        raise DimensionMismatch("spectrum supports n <= {}.".format(MAX_DOF))
    n = system.n()
    pairs = matrix_eigen(system.first_order_matrix(), tol)
    values = [value for value, _ in pairs]
    entries = []
    for centre, members in cluster_values(values, tol):
        scale = _pencil_scale(system, centre)
        rank = np.linalg.matrix_rank(
            system.pencil(centre), tol=PENCIL_RANK_TOL * scale
        )
        algebraic = len(members)
        geometric = min(max(n - rank, 1), algebraic)
        vector = pairs[members[0]][1][:n]
        norm = np.linalg.norm(vector)
        entries.append(
            SpectrumEntry(
                value=centre,
                algebraic_multiplicity=algebraic,
                geometric_multiplicity=geometric,
                vector=vector / norm if norm > 0 else None,
            )
        )
    return entries


def system_abscissa(system, tol=DEFAULT_TOL):
    """Largest real part over the spectrum."""
    return float(np.max(eigenvalues(system, tol).real))


def leading_eigenvalue(system, tol=DEFAULT_TOL):
    values = eigenvalues(system, tol)
    return complex(values[np.argmax(values.real)])
