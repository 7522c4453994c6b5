import logging
import math
from collections import namedtuple
from dataclasses import dataclass
from typing import Tuple

import mpmath
import numpy as np
from mpmath.libmp.libhyper import NoConvergence
from scipy.special import comb

from .errors import (
    DegenerateInput,
    InvalidConstraint,
    NegativeWRadicand,
    NoRealCriticalPoint,
)
from .msystem import QuarticPoly
from .smallalg import DEFAULT_TOL, Poly, poly_roots, poly_roots_batch

logger = logging.getLogger(__name__)

HEAVY_DAMPED = "heavy_damped"
DISCRIMINANT = "discriminant"
OTHER = "other"

REAL_FIELD = "real"
COMPLEX_FIELD = "complex"

# Vertex of the heavy-damping region in (a1, a3, a2) with a4 = 1.
SWALLOWTAIL_VERTEX = (4.0, 4.0, 6.0)

# Working precision of the unclustered root check in heavy_damping_test.
HEAVY_DAMPING_DPS = 50
HEAVY_DAMPING_STEPS = 200

ProbePoint = namedtuple("ProbePoint", ["a1", "a3", "a2", "label", "abscissa"])
AbscissaOptimum = namedtuple("AbscissaOptimum", ["a_star", "attained", "p_star", "h"])


@dataclass(frozen=True)
class WhitneyPoint:
    y1: float
    y2: float
    y3: float

    def residual(self):
        return self.y1 * self.y2 * self.y2 - self.y3 * self.y3

    def on_surface(self, tol=1e-12):
        scale = max(1.0, abs(self.y1 * self.y2 * self.y2), self.y3 * self.y3)
        return self.y1 >= 0 and abs(self.residual()) <= tol * scale


@dataclass(frozen=True)
class AffineConstraint:
    """
    Constraint b0 + b1 a1 + ... + bn an = 0 on the monic polynomials
    λⁿ + a1 λⁿ⁻¹ + ... + an.
    """

    b: Tuple[float, ...]

    def __post_init__(self):
        b = tuple(float(x) for x in self.b)
        object.__setattr__(self, "b", b)
        if len(b) < 2:
            raise InvalidConstraint("Constraint needs b0 and at least b1.")
        if not any(b[1:]):
            raise InvalidConstraint("Coefficients b1..bn are all zero.")

    @classmethod
    def fixed_last(cls, n, value=1.0):
        """The constraint an = value."""
        return cls((-value,) + (0.0,) * (n - 1) + (1.0,))

    @property
    def n(self):
        return len(self.b) - 1

    @property
    def k(self):
        return max(j for j, bj in enumerate(self.b) if j > 0 and bj != 0)

    def h(self):
        """h(λ) = Σ bj C(n, j) λʲ, including the j = 0 term b0."""
        return Poly([bj * comb(self.n, j, exact=True) for j, bj in enumerate(self.b)])

    def residual(self, p):
        """Constraint value at a monic polynomial p."""
        descending = p.normalized().descending()
        return complex(np.dot(self.b, descending[: self.n + 1]))


def whitney_map(x1, x2):
    return WhitneyPoint(x1 * x1, x2, x1 * x2)


def whitney_surface_sample(x1_values, x2_values):
    return [whitney_map(float(x1), float(x2)) for x1 in x1_values for x2 in x2_values]


def bottema_from_whitney(p, branch=1):
    """
    Point (a1, a3, a2) of the slice a4 = 1 with H(a) = y3² − y1 y2².

    a1 = y3/2 + w, a2 = 2 + y2, a3 = −y3/2 + w where w = ±√(y3²/4 + y1 y2)
    and branch selects the sign of w.
    """
    if branch not in (1, -1):
        raise ValueError("branch must be +1 or -1")
    radicand = p.y3 * p.y3 / 4 + p.y1 * p.y2
    if radicand < 0:
        raise NegativeWRadicand(
            "y3^2/4 + y1*y2 = {!r} < 0 at {}.".format(radicand, p)
        )
    w = branch * math.sqrt(radicand)
    return (p.y3 / 2 + w, -p.y3 / 2 + w, 2 + p.y2)


def ep_set_point(a1):
    """
    Quartic (λ² + a1 λ/2 + 1)² on the exceptional-point set.

    Returns:
        (QuarticPoly, roots): roots as (value, multiplicity) pairs, the two
        double roots −a1/4 ∓ √(a1² − 16)/4, merged into one quadruple root
        at a1 = 4.
    """
    if a1 < 0:
        raise DegenerateInput("EP-set is parametrized by a1 >= 0.")
    q = QuarticPoly(a1, 2 + a1 * a1 / 4, a1, 1.0)
    root = np.sqrt(complex(a1 * a1 - 16))
    first = complex(-a1 / 4 - root / 4)
    second = complex(-a1 / 4 + root / 4)
    if first == second:
        return q, [(first, 4)]
    return q, [(first, 2), (second, 2)]


def ep_set_sample(a1_values):
    return [ep_set_point(float(a1)) for a1 in a1_values]


def poly_abscissa(p, tol=DEFAULT_TOL):
    return max(root.real for root, _ in poly_roots(p, tol))


def heavy_damping_test(q, tol=1e-9, dps=HEAVY_DAMPING_DPS):
    """
    True when all four roots are real, negative and pairwise farther
    apart than tol.

    The roots are taken unclustered from `mpmath.polyroots` at `dps`
    digits, so tight but distinct real roots are not merged into one
    multiple root. Imaginary parts are compared with the absolute tol.
    """
    coeffs = [mpmath.mpf(float(c)) for c in q.descending()]
    try:
        with mpmath.workdps(dps):
            roots = [
                complex(root)
                for root in mpmath.polyroots(coeffs, maxsteps=HEAVY_DAMPING_STEPS)
            ]
    except NoConvergence:
        # Only a root cluster far below tol stalls at this precision.
        logger.info("Root iteration stalled for {}, not heavily damped.".format(q))
        return False
    for root in roots:
        if abs(root.imag) > tol or not root.real < -tol:
            return False
    return all(
        abs(roots[i] - roots[j]) > tol
        for i in range(len(roots))
        for j in range(i + 1, len(roots))
    )


def _real_candidates(h, k, tol):
    candidates = []
    for order in range(k):
        for root, _ in poly_roots(h.derivative(order) if order else h):
            if abs(root.imag) <= tol * max(1.0, abs(root)):
                candidates.append(root.real)
    return candidates


def abscissa_min_affine(c, field=REAL_FIELD, tol=1e-9):
    """
    Smallest spectral abscissa over monic degree-n polynomials satisfying
    an affine constraint.

    Real field: with ζ the largest real zero of h, h', ..., h^(k−1),
    a* = −ζ. The infimum is attained exactly when ζ is a zero of h, by
    p* = (λ − a*)ⁿ. Complex field: with ρ the zero of h of largest real
    part, γ = −ρ, a* = Re γ and p* = (λ − γ)ⁿ.

    Returns:
        `AbscissaOptimum` (a_star, attained, p_star, h); p_star is None
        when the infimum is not attained.
    """
    h = c.h()
    n = c.n
    if field == COMPLEX_FIELD:
        rho = max((root for root, _ in poly_roots(h)), key=lambda z: (z.real, z.imag))
        gamma = -rho
        return AbscissaOptimum(gamma.real, True, Poly.from_roots([gamma] * n), h)
    if field != REAL_FIELD:
        raise ValueError("field must be 'real' or 'complex', got {!r}".format(field))

    candidates = _real_candidates(h, c.k, tol)
    if not candidates:
        raise NoRealCriticalPoint("No real zero of h or its derivatives.")
    zeta = max(candidates)
    a_star = -zeta
    scale = max(1.0, float(np.max(np.abs(h.coeffs()))) * max(1.0, abs(zeta)) ** h.degree())
    attained = bool(abs(h(zeta)) <= tol * scale)
    p_star = Poly.from_roots([a_star] * n) if attained else None
    if not attained:
        logger.info("Abscissa infimum {!r} not attained for {}.".format(a_star, c))
    return AbscissaOptimum(a_star, attained, p_star, h)


def _rows(points):
    # (a1, a3, a2) triples with a4 = 1 to descending quartic rows.
    points = np.atleast_2d(np.asarray(points, dtype=float))
    ones = np.ones(len(points))
    return np.column_stack([ones, points[:, 0], points[:, 2], points[:, 1], ones])


def _labels(roots, tol, imag_tol=1e-7):
    count = roots.shape[1]
    i, j = np.triu_indices(count, k=1)
    distances = np.abs(roots[:, i] - roots[:, j])
    closest = np.argmin(distances, axis=1)
    separation = distances[np.arange(len(roots)), closest]
    rows = np.arange(len(roots))
    pair_mean = (roots[rows, i[closest]] + roots[rows, j[closest]]) / 2
    scale = np.maximum(1.0, np.abs(roots))
    real = np.all(np.abs(roots.imag) <= imag_tol * scale, axis=1)
    negative = np.all(roots.real < 0, axis=1)
    repeated_real = (separation <= tol) & (np.abs(pair_mean.imag) <= tol)
    labels = np.where(
        repeated_real,
        DISCRIMINANT,
        np.where(real & negative & (separation > tol), HEAVY_DAMPED, OTHER),
    )
    return labels


def discriminant_swallowtail_probe(a1_values, a3_values, a2_values, tol=1e-3):
    """
    Label a grid of quartics (a4 = 1) against the discriminant geometry.

    A point is "discriminant" when two roots agree within tol and sit on
    the real axis, "heavy_damped" when all roots are real, negative and
    farther apart than tol, and "other" otherwise.

    Returns:
        list of `ProbePoint` in grid order (a1 slowest, a2 fastest).
    """
    grid = np.array(
        [(a1, a3, a2) for a1 in a1_values for a3 in a3_values for a2 in a2_values],
        dtype=float,
    )
    roots = poly_roots_batch(_rows(grid))
    labels = _labels(roots, tol)
    abscissae = np.max(roots.real, axis=1)
    return [
        ProbePoint(float(a1), float(a3), float(a2), str(label), float(top))
        for (a1, a3, a2), label, top in zip(grid, labels, abscissae)
    ]


def _vertex_defect(points):
    """
    Newton estimate of the offset from each point (a1, a3, a2) to the
    quadruple-root vertex.

    The depressed quartic about the mean root −a1/4 has coefficients
    p, q, r that vanish together only at a quadruple root; one linearized
    step in (a1, a2, a3) gives the offset.
    """
    a1, a3, a2 = points[:, 0], points[:, 1], points[:, 2]
    p = a2 - 3 * a1**2 / 8
    q = a3 - a1 * a2 / 2 + a1**3 / 8
    r = 1 - a1 * a3 / 4 + a1**2 * a2 / 16 - 3 * a1**4 / 256
    jacobian = np.empty((len(points), 3, 3))
    jacobian[:, 0] = np.column_stack([-3 * a1 / 4, np.ones_like(a1), np.zeros_like(a1)])
    jacobian[:, 1] = np.column_stack([-a2 / 2 + 3 * a1**2 / 8, -a1 / 2, np.ones_like(a1)])
    jacobian[:, 2] = np.column_stack(
        [-a3 / 4 + a1 * a2 / 8 - 3 * a1**3 / 64, a1**2 / 16, -a1 / 4]
    )
    residual = np.column_stack([p, q, r])[:, :, None]
    step = np.linalg.pinv(jacobian) @ residual
    return np.linalg.norm(step[:, :, 0], axis=1)


def locate_swallowtail_cusp(centre=(4.5, 4.5, 6.5), half_width=1.0, points=11, steps=15):
    """
    Locate the vertex of the heavy-damping region by shrinking boxes.

    Each step evaluates a points³ grid over the box, recentres on the
    point with the smallest quadruple-root defect and halves the box.

    Returns:
        ((a1, a3, a2), spread) with spread the root spread (largest
        pairwise root distance) at the final centre.
    """
    centre = np.asarray(centre, dtype=float)
    offsets = np.linspace(-1.0, 1.0, points)
    mesh = np.stack(np.meshgrid(offsets, offsets, offsets, indexing="ij"), -1).reshape(-1, 3)
    for _ in range(steps):
        grid = centre + half_width * mesh
        best = grid[np.argmin(_vertex_defect(grid))]
        centre = best
        half_width /= 2
    roots = poly_roots_batch(_rows(centre))[0]
    spread = max(abs(x - y) for x in roots for y in roots)
    logger.info("Swallowtail vertex estimate {} (root spread {:.3e}).".format(centre, spread))
    return tuple(float(x) for x in centre), float(spread)


def arnold_unfolding(alpha, mu1, mu2):
    """Versal unfolding [[i+α, 1], [μ1+iμ2, i+α]] of a 2×2 Jordan block at i."""
    return np.array([[1j + alpha, 1.0], [mu1 + 1j * mu2, 1j + alpha]], dtype=complex)


def unfolding_to_whitney(alpha, mu1, mu2):
    """
    Whitney coordinates of the unfolding: the unfolding has a purely
    imaginary eigenvalue exactly when this point lies on the umbrella.
    """
    return WhitneyPoint(4 * alpha * alpha - 4 * mu1, alpha, mu2)
