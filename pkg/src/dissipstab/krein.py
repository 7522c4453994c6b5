import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
import scipy.linalg

from .errors import DegenerateInput, NotHermitian
from .msystem import SpectrumEntry
from .smallalg import (
    DEFAULT_TOL,
    as_small_matrix,
    cluster_values,
    geometric_multiplicity,
    matrix_eigen,
)

logger = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-12
# Eigenvalues with |Im λ| above IMAG_TOL·max(1, |λ|) count as non-real.
IMAG_TOL = 1e-8
REFINE_TOL = 1e-10

COLLISION = "collision"
SEPARATION = "separation"


class IndefiniteMetric(object):
    """
    Hermitian Gram matrix defining [u, v] = v̄ᵀ G u.

    The signature (n₊, n₋, n₀) is read off the eigenvalues of G.
    """

    def __init__(self, gram):
        gram = np.array(gram, dtype=complex)
        if gram.ndim != 2 or gram.shape[0] != gram.shape[1]:
            raise NotHermitian("Gram matrix must be square.")
        scale = max(1.0, np.linalg.norm(gram))
        if np.linalg.norm(gram - gram.conj().T) > HERMITIAN_TOL * scale:
            raise NotHermitian("Gram matrix is not Hermitian.")
        self._gram = (gram + gram.conj().T) / 2
        self._gram.setflags(write=False)
        values = np.linalg.eigvalsh(self._gram)
        zero = HERMITIAN_TOL * scale * len(values)
        self._signature = (
            int(np.sum(values > zero)),
            int(np.sum(values < -zero)),
            int(np.sum(np.abs(values) <= zero)),
        )

    def gram(self):
        return self._gram

    def n(self):
        return self._gram.shape[0]

    def signature(self):
        return self._signature

    def is_definite(self):
        n_pos, n_neg, n_zero = self._signature
        return n_zero == 0 and (n_pos == 0 or n_neg == 0)

    def form(self, u):
        """The (real for Hermitian G) number ūᵀ G u."""
        u = np.asarray(u, dtype=complex)
        return complex(np.vdot(u, self._gram @ u))

    def sign_tol(self, eig_tol=DEFAULT_TOL):
        return 100 * eig_tol * np.linalg.norm(self._gram, 2)


@dataclass(frozen=True)
class KreinPath:
    name: str
    grid: Tuple[float, ...]
    entries: Tuple[Tuple[SpectrumEntry, ...], ...]

    def __post_init__(self):
        if np.any(np.diff(self.grid) <= 0):
            raise DegenerateInput("Krein path grid must be strictly increasing.")


@dataclass(frozen=True)
class CollisionEvent:
    """
    Change in the number of non-real eigenvalues along a path.

    kind is COLLISION when real eigenvalues become complex as the
    parameter increases, SEPARATION for the reverse. values holds the
    collision points λ_d (real parts of the emerging pairs) and
    signs_before the Krein signs of the real eigenvalues that merge.
    """

    kind: str
    bracket: Tuple[float, float]
    values: Tuple[float, ...]
    signs_before: Tuple[int, ...]

    def is_krein_collision(self):
        return 1 in self.signs_before and -1 in self.signs_before


def krein_sign(metric, u, value, tol=None):
    """
    Sign of ūᵀ G u for an eigenpair (λ, u).

    Non-real eigenvalues are isotropic, (λ − λ̄) ūᵀGu = 0, so they get 0,
    as does any |ūᵀGu| at or below tol.
    """
    if tol is None:
        tol = metric.sign_tol()
    value = complex(value)
    if abs(value.imag) > IMAG_TOL * max(1.0, abs(value)):
        return 0
    form = metric.form(u).real
    if abs(form) <= tol:
        return 0
    return 1 if form > 0 else -1


def negative_square_count(metric):
    return metric.signature()[1]


def _is_nonreal(value):
    return abs(value.imag) > IMAG_TOL * max(1.0, abs(value))


def nonreal_count(values):
    return sum(1 for value in values if _is_nonreal(complex(value)))


def krein_spectrum(matrix, metric, tol=DEFAULT_TOL):
    """
    Eigenvalues of a matrix that is self-adjoint in metric, with Krein signs.

    Defective and non-real eigenvalues get sign 0. A semisimple multiple
    eigenvalue gets the common sign of its computed vectors, or 0 if
    they disagree.
    """
    pairs = matrix_eigen(matrix, tol)
    sign_tol = metric.sign_tol(tol)
    entries = []
    for centre, members in cluster_values([value for value, _ in pairs], tol):
        algebraic = len(members)
        geometric = min(max(geometric_multiplicity(matrix, centre), 1), algebraic)
        vector = pairs[members[0]][1]
        if geometric < algebraic:
            sign = 0
        else:
            signs = {krein_sign(metric, pairs[k][1], centre, sign_tol) for k in members}
            sign = signs.pop() if len(signs) == 1 else 0
        entries.append(
            SpectrumEntry(
                value=centre,
                algebraic_multiplicity=algebraic,
                geometric_multiplicity=geometric,
                vector=vector,
                krein_sign=sign,
            )
        )
    return entries


def energy_metric(system):
    """
    Self-adjoint form of a gyroscopic conservative system (D = 0, N = 0).

    Returns:
        (matrix, metric): matrix = -i times the companion matrix, whose
        eigenvalues are the real frequencies ω of the modes e^{iωt};
        metric = diag(K, M), the energy form.
    """
    if np.any(system.D()) or np.any(system.N()):
        raise DegenerateInput("Energy metric needs D = 0 and N = 0.")
    matrix = -1j * system.first_order_matrix()
    metric = IndefiniteMetric(scipy.linalg.block_diag(system.K(), system.M()))
    return as_small_matrix(matrix), metric


def _eigenvalues(family, x, tol):
    matrix, _ = family(x)
    return [value for value, _ in matrix_eigen(matrix, tol)]


def _collision_values(values):
    upper = sorted(value.real for value in values if _is_nonreal(value) and value.imag > 0)
    return tuple(upper)


def _merging_signs(entries, points):
    signs = []
    for point in points:
        real_entries = [e for e in entries if not _is_nonreal(e.value)]
        nearest = sorted(real_entries, key=lambda e: abs(e.value - point))[:2]
        for entry in nearest:
            signs.extend([entry.krein_sign] * entry.algebraic_multiplicity)
    return tuple(signs)


def collision_scan(family, grid, name="parameter", tol=DEFAULT_TOL, refine_tol=REFINE_TOL):
    """
    Follow the Krein-signed spectrum along a one-parameter family.

    Args:
        family: callable x -> (matrix, `IndefiniteMetric`), the matrix
            being self-adjoint in the metric.
        grid: strictly increasing parameter values.
        name: parameter name recorded in the path.

    Returns:
        (`KreinPath`, list of `CollisionEvent`). An event is emitted
        between consecutive grid points whose counts of non-real
        eigenvalues differ; its bracket is refined by bisection to
        refine_tol.
    """
    grid = tuple(float(x) for x in grid)
    entries = []
    counts = []
    for x in grid:
        matrix, metric = family(x)
        spectrum = krein_spectrum(matrix, metric, tol)
        entries.append(tuple(spectrum))
        counts.append(
            sum(e.algebraic_multiplicity for e in spectrum if _is_nonreal(e.value))
        )
    path = KreinPath(name=name, grid=grid, entries=tuple(entries))

    events = []
    for i in range(len(grid) - 1):
        if counts[i] == counts[i + 1]:
            continue
        lo, hi = grid[i], grid[i + 1]
        count_lo = counts[i]
        while hi - lo > refine_tol:
            mid = 0.5 * (lo + hi)
            if nonreal_count(_eigenvalues(family, mid, tol)) == count_lo:
                lo = mid
            else:
                hi = mid
        lo_values = _eigenvalues(family, lo, tol)
        hi_values = _eigenvalues(family, hi, tol)
        if nonreal_count(hi_values) > nonreal_count(lo_values):
            kind, complex_side, real_side = COLLISION, hi_values, lo
        else:
            kind, complex_side, real_side = SEPARATION, lo_values, hi
        points = _collision_values(complex_side)
        matrix, metric = family(real_side)
        signs = _merging_signs(krein_spectrum(matrix, metric, tol), points)
        event = CollisionEvent(kind, (lo, hi), points, signs)
        logger.info(
            "{} {} in [{!r}, {!r}] at {}".format(name, kind, lo, hi, points)
        )
        events.append(event)
    return path, events
