import logging

import numpy as np
import numpy.polynomial.polynomial as npoly
import scipy.linalg

from .errors import DegenerateInput, DimensionMismatch, NonConvergence

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-12
MAX_ITER = 500
# Offset of the initial Aberth circle so that real polynomials do not start
# on a symmetric configuration.
START_ANGLE = 0.4
EPS = np.finfo(float).eps


class Poly(object):
    """
    Polynomial with complex coefficients in ascending order.

    ``coeffs()[j]`` multiplies ``λ**j``. Trailing zero coefficients are
    trimmed on construction, so the degree is the index of the last
    nonzero coefficient.
    """

    def __init__(self, coeffs):
        coeffs = np.atleast_1d(np.asarray(coeffs, dtype=complex))
        if coeffs.ndim != 1:
            raise DimensionMismatch("Polynomial coefficients must be a flat list.")
        if not np.all(np.isfinite(coeffs)):
            raise DegenerateInput("Polynomial coefficients must be finite.")
        nonzero = np.flatnonzero(coeffs)
        if len(nonzero) == 0:
            raise DegenerateInput("Polynomial has no nonzero coefficient.")
        self._coeffs = coeffs[: nonzero[-1] + 1].copy()
        self._coeffs.setflags(write=False)

    @classmethod
    def from_descending(cls, coeffs):
        return cls(np.asarray(coeffs, dtype=complex)[::-1])

    @classmethod
    def from_roots(cls, roots, leading=1.0):
        return cls.from_descending(leading * np.atleast_1d(np.poly(roots)))

    def coeffs(self):
        return self._coeffs

    def descending(self):
        return self._coeffs[::-1].copy()

    def degree(self):
        return len(self._coeffs) - 1

    def leading(self):
        return self._coeffs[-1]

    def normalized(self):
        # Dividing by the leading coefficient keeps the roots unchanged.
        return Poly(self._coeffs / self._coeffs[-1])

    def is_real(self):
        return bool(np.all(self._coeffs.imag == 0.0))

    def derivative(self, order=1):
        if order > self.degree():
            raise DegenerateInput(
                "Derivative of order {} of a degree {} polynomial vanishes.".format(
                    order, self.degree()
                )
            )
        return Poly(npoly.polyder(self._coeffs, order))

    def __call__(self, z):
        return npoly.polyval(z, self._coeffs)

    def __eq__(self, other):
        return isinstance(other, Poly) and np.array_equal(self._coeffs, other._coeffs)

    def __repr__(self):
        return "Poly({})".format(list(self._coeffs))


class SmallMatrix(object):
    """Dense complex square matrix of dimension at most MAX_DIM."""

    MAX_DIM = 8

    def __init__(self, entries):
        entries = np.array(entries, dtype=complex)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise DimensionMismatch(
                "Expected a square matrix, got shape {}.".format(entries.shape)
            )
        if not 1 <= entries.shape[0] <= SmallMatrix.MAX_DIM:
            raise DimensionMismatch(
                "Matrix dimension {} outside 1..{}.".format(
                    entries.shape[0], SmallMatrix.MAX_DIM
                )
            )
        if not np.all(np.isfinite(entries)):
            raise DegenerateInput("Matrix entries must be finite.")
        self._entries = entries
        self._entries.setflags(write=False)

    def entries(self):
        return self._entries

    def dim(self):
        return self._entries.shape[0]

    def norm(self):
        return np.linalg.norm(self._entries, 2)

    def conj_transpose(self):
        return SmallMatrix(self._entries.conj().T)

    def _checked(self, other):
        other = as_small_matrix(other)
        if other.dim() != self.dim():
            raise DimensionMismatch(
                "Dimension mismatch: {} vs {}.".format(self.dim(), other.dim())
            )
        return other.entries()

    def __add__(self, other):
        return SmallMatrix(self._entries + self._checked(other))

    def __sub__(self, other):
        return SmallMatrix(self._entries - self._checked(other))

    def __matmul__(self, other):
        return SmallMatrix(self._entries @ self._checked(other))

    def __repr__(self):
        return "SmallMatrix({})".format(self._entries.tolist())


def as_small_matrix(matrix):
    if isinstance(matrix, SmallMatrix):
        return matrix
    return SmallMatrix(matrix)


def companion_matrix(p):
    """Frobenius companion matrix whose eigenvalues are the roots of p."""
    monic = p.normalized().descending()
    n = len(monic) - 1
    companion = np.zeros((n, n), dtype=complex)
    companion[0, :] = -monic[1:]
    companion[1:, :-1] = np.eye(n - 1)
    return companion


def _horner(monic, deriv, z):
    value = np.broadcast_to(monic[:, :1], z.shape).astype(complex)
    bound = np.abs(value)
    abs_z = np.abs(z)
    for k in range(1, monic.shape[1]):
        value = value * z + monic[:, k : k + 1]
        bound = bound * abs_z + np.abs(monic[:, k : k + 1])
    slope = np.broadcast_to(deriv[:, :1], z.shape).astype(complex)
    for k in range(1, deriv.shape[1]):
        slope = slope * z + deriv[:, k : k + 1]
    # Rounding error level of the Horner evaluation.
    return value, slope, 4 * monic.shape[1] * EPS * bound


def _aberth(monic, tol, max_iter):
    """
    Simultaneous Aberth-Ehrlich iteration on a batch of monic polynomials.

    Args:
        monic: (count, n+1) array of descending coefficients, leading 1.

    Returns:
        (roots, converged): roots has shape (count, n); converged flags
        the rows where every root either evaluates to the rounding level
        of p or made a step below tol.
    """
    count, width = monic.shape
    n = width - 1
    radius = 1.0 + np.max(np.abs(monic[:, 1:]), axis=1)
    angles = 2.0 * np.pi * np.arange(n) / n + START_ANGLE
    z = radius[:, None] * np.exp(1j * angles)[None, :]
    deriv = monic[:, :-1] * np.arange(n, 0, -1)
    off_diagonal = ~np.eye(n, dtype=bool)
    settled = np.zeros((count, n), dtype=bool)

    for _ in range(max_iter):
        value, slope, bound = _horner(monic, deriv, z)
        at_noise = np.abs(value) <= bound
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(slope != 0, value / slope, value)
            diff = z[:, :, None] - z[:, None, :]
            repulsion = np.where(off_diagonal, 1.0 / diff, 0.0).sum(axis=2)
            step = ratio / (1.0 - ratio * repulsion)
        step = np.where(np.isfinite(step), step, ratio)
        step = np.where(at_noise, 0.0, step)
        z = z - step
        settled = at_noise | (np.abs(step) <= tol * np.maximum(1.0, np.abs(z)))
        if np.all(settled):
            break
    return z, np.all(settled, axis=1)


def _monic_rows(coeff_rows):
    rows = np.atleast_2d(np.asarray(coeff_rows, dtype=complex))
    if rows.shape[1] < 2:
        raise DegenerateInput("Polynomials must have degree at least 1.")
    if np.any(rows[:, 0] == 0):
        raise DegenerateInput("Leading coefficient is zero.")
    return rows / rows[:, :1]


def poly_roots_batch(coeff_rows, tol=DEFAULT_TOL, max_iter=MAX_ITER):
    """
    Raw roots of many polynomials of equal degree.

    Args:
        coeff_rows: (count, n+1) descending coefficients.

    Returns:
        (count, n) complex array. Rows on which the Aberth iteration did
        not settle are recomputed from the companion matrix.
    """
    monic = _monic_rows(coeff_rows)
    roots, converged = _aberth(monic, tol, max_iter)
    if not np.all(converged):
        stalled = np.flatnonzero(~converged)
        logger.warning(
            "Aberth iteration did not settle for {} of {} polynomials, "
            "using companion eigenvalues.".format(len(stalled), len(monic))
        )
        n = monic.shape[1] - 1
        companions = np.zeros((len(stalled), n, n), dtype=complex)
        companions[:, 0, :] = -monic[stalled, 1:]
        companions[:, 1:, :-1] = np.eye(n - 1)
        roots[stalled] = np.linalg.eigvals(companions)
    return roots


def cluster_values(values, tol=DEFAULT_TOL):
    """
    Group numerically coincident values.

    A group of m values counts as one m-fold value when all of them lie
    within tol**(1/m) (relative to max(1, max|value|)) of their centroid.
    Larger groups are searched first.

    Returns:
        list of (centroid, member_indices), ordered by decreasing real
        part, then decreasing imaginary part.
    """
    values = np.asarray(values, dtype=complex).ravel()
    if len(values) == 0:
        return []
    scale = max(1.0, float(np.max(np.abs(values))))
    remaining = list(range(len(values)))
    clusters = []
    while remaining:
        found = None
        for size in range(len(remaining), 1, -1):
            radius = tol ** (1.0 / size) * scale
            for seed in remaining:
                near = sorted(
                    remaining, key=lambda k: (abs(values[k] - values[seed]), k)
                )[:size]
                centre = values[near].mean()
                if np.max(np.abs(values[near] - centre)) <= radius:
                    found = near
                    break
            if found is not None:
                break
        if found is None:
            found = [remaining[0]]
        clusters.append((complex(values[found].mean()), tuple(sorted(found))))
        remaining = [k for k in remaining if k not in found]
    clusters.sort(key=lambda c: (-c[0].real, -c[0].imag))
    return clusters


def _enforce_conjugacy(entries, tol):
    # Real polynomials: snap near-real clusters onto the axis and make
    # complex clusters exact conjugate pairs.
    snapped = []
    for root, multiplicity in entries:
        radius = tol ** (1.0 / multiplicity) * max(1.0, abs(root))
        if abs(root.imag) <= radius:
            root = complex(root.real, 0.0)
        snapped.append([root, multiplicity])
    upper = [e for e in snapped if e[0].imag > 0]
    lower = [e for e in snapped if e[0].imag < 0]
    if len(upper) != len(lower):
        return [tuple(e) for e in snapped]
    for entry in upper:
        partner = min(
            (e for e in lower if e[1] == entry[1]),
            key=lambda e: abs(e[0] - entry[0].conjugate()),
            default=None,
        )
        if partner is None:
            continue
        lower.remove(partner)
        mean = (entry[0] + partner[0].conjugate()) / 2
        entry[0] = mean
        partner[0] = mean.conjugate()
    return [tuple(e) for e in snapped]


def _backward_error(p, roots):
    rebuilt = np.atleast_1d(np.poly(roots))
    monic = p.normalized().descending()
    return np.linalg.norm(rebuilt - monic) / np.linalg.norm(monic)


def _polish(p, centre, multiplicity, tol, steps=8):
    # An m-fold root is a simple root of the (m-1)-th derivative.
    if multiplicity == 1:
        return centre
    q = p.derivative(multiplicity - 1)
    dq = p.derivative(multiplicity)
    z = centre
    for _ in range(steps):
        slope = dq(z)
        if slope == 0:
            break
        step = q(z) / slope
        z = z - step
        if abs(step) <= EPS * max(1.0, abs(z)):
            break
    if abs(z - centre) <= tol ** (1.0 / multiplicity) * max(1.0, abs(centre)):
        return complex(z)
    return centre


def poly_roots(p, tol=DEFAULT_TOL):
    """
    Roots of p with multiplicities.

    Args:
        p (`Poly`): polynomial of degree at least 1.
        tol: relative tolerance; m-fold roots are recognised when m
            computed roots lie within tol**(1/m) of their centroid.

    Returns:
        list of (root, multiplicity), ordered by decreasing real part.
        For real p the result is closed under conjugation.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if p.degree() < 1:
        raise DegenerateInput("Cannot find roots of a constant polynomial.")
    monic = p.normalized().descending()
    roots, converged = _aberth(monic[None, :], tol, MAX_ITER)
    roots = roots[0]
    check = max(tol, 100 * EPS)
    if not converged[0] or _backward_error(p, roots) > check:
        logger.warning(
            "Aberth iteration did not settle for {}, using companion "
            "eigenvalues.".format(p)
        )
        best = roots
        roots = np.linalg.eigvals(companion_matrix(p))
        if _backward_error(p, roots) > check:
            raise NonConvergence(
                "Root finding failed for {} within {} iterations.".format(p, MAX_ITER),
                best=best,
            )
    entries = [
        (_polish(p, centre, len(members), tol), len(members))
        for centre, members in cluster_values(roots, tol)
    ]
    if p.is_real():
        entries = _enforce_conjugacy(entries, tol)
    entries.sort(key=lambda e: (-e[0].real, -e[0].imag))
    return entries


def matrix_eigen(matrix, tol=DEFAULT_TOL):
    """
    Eigenpairs of a small dense matrix.

    Defective eigenvalues appear repeated; use geometric_multiplicity to
    recover the size of their eigenspace.

    Returns:
        list of (value, unit vector).
    """
    a = as_small_matrix(matrix).entries()
    values, vectors = scipy.linalg.eig(a)
    scale = np.linalg.norm(a, 2)
    check = max(tol, 100 * EPS)
    pairs = []
    for k, value in enumerate(values):
        u = vectors[:, k] / np.linalg.norm(vectors[:, k])
        pairs.append((complex(value), u))
    residual = max(np.linalg.norm(a @ u - value * u) for value, u in pairs)
    if residual > check * max(scale, EPS):
        raise NonConvergence(
            "Eigenpair residual {:.3e} exceeds tolerance.".format(residual), best=pairs
        )
    return pairs


def geometric_multiplicity(matrix, value, rank_tol=1e-8):
    """Dimension of the kernel of (A - λI), with rank threshold rank_tol·scale."""
    a = as_small_matrix(matrix).entries()
    shifted = a - value * np.eye(a.shape[0])
    scale = max(1.0, np.linalg.norm(a, 2))
    return a.shape[0] - np.linalg.matrix_rank(shifted, tol=rank_tol * scale)
