import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .errors import DegenerateInput, NegativeRadicand, NoOnsetFound
from .msystem import system_abscissa
from .workers import resolve_threads

logger = logging.getLogger(__name__)

# Abscissa above which a system counts as unstable in onset searches.
ONSET_TOL = 1e-9
LOAD_TOL = 1e-8
SCAN_POINTS = 61


def _symmetric_2x2(name, matrix):
    matrix = np.array(matrix, dtype=float)
    if matrix.shape != (2, 2):
        raise DegenerateInput("{} must be 2x2.".format(name))
    if matrix[0, 1] != matrix[1, 0]:
        raise DegenerateInput("{} must be symmetric.".format(name))
    return matrix


@dataclass(frozen=True)
class ParadoxReport:
    """
    Circulatory flutter thresholds of a two degree of freedom system.

    nu0 is the threshold without damping, nucr the limit of the damped
    threshold as damping vanishes along the ray `direction` (trace
    normalized to 1). gap is the difference of squares ν₀² − ν_cr².
    """

    nu0: float
    nucr: float
    gap: float
    direction: Tuple[Tuple[float, float], Tuple[float, float]]
    tr_k: float
    tr_d: float
    tr_kd: float
    gap_label: str = "nu0^2 - nucr^2"


def circulatory_thresholds(K, Dray):
    K = _symmetric_2x2("K", K)
    Dray = _symmetric_2x2("Dray", Dray)
    trace = np.trace(Dray)
    if not trace > 0:
        raise DegenerateInput("Damping ray needs a positive trace.")
    direction = Dray / trace
    tr_k = float(np.trace(K))
    tr_d = float(np.trace(direction))
    tr_kd = float(np.trace(K @ direction))
    nu0_squared = (tr_k / 2) ** 2 - np.linalg.det(K)
    if nu0_squared < 0:
        raise NegativeRadicand(
            "K admits no circulatory threshold (nu0^2 = {!r}).".format(nu0_squared)
        )
    gap = ((2 * tr_kd - tr_k * tr_d) / (2 * tr_d)) ** 2
    nucr_squared = nu0_squared - gap
    if nucr_squared < 0:
        logger.warning(
            "Damping ray {}: nu_cr^2 = {!r} < 0, no stable circulatory "
            "window with vanishing damping.".format(direction.tolist(), nucr_squared)
        )
        nucr = 0.0
    else:
        nucr = math.sqrt(nucr_squared)
    return ParadoxReport(
        nu0=math.sqrt(nu0_squared),
        nucr=nucr,
        gap=float(gap),
        direction=tuple(map(tuple, direction.tolist())),
        tr_k=tr_k,
        tr_d=tr_d,
        tr_kd=tr_kd,
    )


def bottema_circulatory_bound(k11, k22, d11, d12, d22):
    """
    Upper bound on ν² for stability (H <= 0) of a damped circulatory
    system with k12 = 0 and no gyroscopic forces, keeping d12 and the
    finite-damping term.
    """
    tr_d = d11 + d22
    if tr_d == 0:
        raise DegenerateInput("Damping trace must be nonzero.")
    det_d = d11 * d22 - d12 * d12
    numerator = (d11 - d22) ** 2 * (k11 - k22) ** 2 - 4 * (
        k11 * d22 + k22 * d11
    ) * det_d * tr_d
    return (k11 - k22) ** 2 / 4 - numerator / (4 * tr_d**2)


class UmbrellaApproximation(object):
    """
    First order approximation of ν_cr over a two-parameter damping plane
    D(δ) = δ1 D1 + δ2 D2:

        ν_cr ≈ ν0 − (n1 δ1 + n2 δ2)² / (2 ν0 (t1 δ1 + t2 δ2)²)

    with n_i = tr(K D_i) − tr K tr D_i / 2 and t_i = tr D_i. The
    correction is homogeneous of degree zero, so level sets are rays.
    """

    def __init__(self, K, D1, D2):
        self.K = _symmetric_2x2("K", K)
        self.D1 = _symmetric_2x2("D1", D1)
        self.D2 = _symmetric_2x2("D2", D2)
        tr_k = np.trace(self.K)
        nu0_squared = (tr_k / 2) ** 2 - np.linalg.det(self.K)
        if not nu0_squared > 0:
            raise NegativeRadicand("Umbrella approximation needs nu0 > 0.")
        self.nu0 = math.sqrt(nu0_squared)
        self.n1 = float(np.trace(self.K @ self.D1) - tr_k * np.trace(self.D1) / 2)
        self.n2 = float(np.trace(self.K @ self.D2) - tr_k * np.trace(self.D2) / 2)
        self.t1 = float(np.trace(self.D1))
        self.t2 = float(np.trace(self.D2))

    def coefficients(self):
        return (self.nu0, self.n1, self.n2, self.t1, self.t2)

    def correction(self, delta1, delta2):
        trace = self.t1 * delta1 + self.t2 * delta2
        if trace == 0:
            raise DegenerateInput("Damping direction with zero trace.")
        return ((self.n1 * delta1 + self.n2 * delta2) / trace) ** 2

    def nu_cr(self, delta1, delta2):
        return self.nu0 - self.correction(delta1, delta2) / (2 * self.nu0)

    def samples(self, angles, radii):
        """Rows (δ1, δ2, ν_cr) on rays through the origin."""
        rows = []
        for angle in angles:
            for radius in radii:
                d1, d2 = radius * math.cos(angle), radius * math.sin(angle)
                rows.append((d1, d2, self.nu_cr(d1, d2)))
        return rows

    def ray_spread(self, angles, radii):
        """Largest variation of ν_cr along any sampled ray."""
        spread = 0.0
        for angle in angles:
            values = [self.nu_cr(r * math.cos(angle), r * math.sin(angle)) for r in radii]
            spread = max(spread, max(values) - min(values))
        return spread


@dataclass(frozen=True)
class OnsetRow:
    eps: float
    onset: float
    crossings: Tuple[float, ...]


@dataclass(frozen=True)
class VanishingDampingTable:
    rows: Tuple[OnsetRow, ...]
    raw_limit: float
    extrapolated: float
    undamped_onset: Optional[float] = None
    multiple_crossings: bool = False

    def gap(self):
        if self.undamped_onset is None:
            return None
        return self.undamped_onset - self.extrapolated


def find_crossings(system_at, load_range, count=SCAN_POINTS, tol=ONSET_TOL, load_tol=LOAD_TOL):
    """
    Loads where the system changes between stable and unstable.

    A grid of `count` loads is scanned for changes of the predicate
    abscissa > tol; every change is refined by bisection until the
    bracket is below load_tol·max(1, |load|).

    Returns:
        list of (load, becomes_unstable) in increasing load order.
    """
    lo_load, hi_load = load_range
    loads = np.linspace(lo_load, hi_load, count)

    def unstable(load):
        return system_abscissa(system_at(load)) > tol

    flags = [unstable(load) for load in loads]
    crossings = []
    for i in range(count - 1):
        if flags[i] == flags[i + 1]:
            continue
        lo, hi = loads[i], loads[i + 1]
        while hi - lo > load_tol * max(1.0, abs(lo)):
            mid = 0.5 * (lo + hi)
            if unstable(mid) == flags[i]:
                lo = mid
            else:
                hi = mid
        crossings.append((0.5 * (lo + hi), not flags[i]))
    return crossings


def critical_load(system_at, load_range, **kwargs):
    """First load in range at which the system loses stability."""
    crossings = find_crossings(system_at, load_range, **kwargs)
    onsets = [load for load, becomes_unstable in crossings if becomes_unstable]
    if not onsets:
        raise NoOnsetFound(
            "Abscissa does not change sign in [{!r}, {!r}].".format(*load_range)
        )
    return onsets[0], tuple(load for load, _ in crossings)


def richardson_limit(values):
    """
    Three-point extrapolation of a converging sequence with unknown
    geometric rate (Aitken form). Falls back to the last value when the
    sequence has already settled to noise level.
    """
    if len(values) < 3:
        return values[-1]
    x1, x2, x3 = values[-3:]
    d1, d2 = x2 - x1, x3 - x2
    denominator = d2 - d1
    if denominator == 0 or abs(d2) >= abs(d1):
        return x3
    correction = d2 * d2 / denominator
    if abs(correction) > 10 * (abs(d1) + abs(d2)):
        return x3
    return x3 - correction


def vanishing_damping_scan(
    family, load_range, eps_list, include_undamped=True, threads=None, **kwargs
):
    """
    Critical load as the damping scale ε goes to zero.

    Args:
        family: callable (load, eps) -> `MechanicalSystem`.
        load_range: (low, high) load interval containing the onset.
        eps_list: positive, strictly decreasing damping scales.
        include_undamped: also locate the onset at ε = 0.
        threads: worker threads for the independent ε evaluations,
            resolved by `resolve_threads`.

    Returns:
        `VanishingDampingTable` with the raw smallest-ε onset and the
        extrapolated limit of the ε > 0 branch.
    """
    eps_list = [float(eps) for eps in eps_list]
    if not eps_list or any(eps <= 0 for eps in eps_list):
        raise DegenerateInput("eps_list must hold positive values.")
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise DegenerateInput("eps_list must be strictly decreasing.")

    def evaluate(eps):
        return critical_load(lambda load: family(load, eps), load_range, **kwargs)

    scales = list(eps_list) + ([0.0] if include_undamped else [])
    with ThreadPoolExecutor(max_workers=resolve_threads(threads)) as executor:
        results = list(executor.map(evaluate, scales))

    rows = []
    multiple = False
    for eps, (onset, crossings) in zip(eps_list, results):
        if len(crossings) > 1:
            multiple = True
            logger.warning(
                "Damping scale {!r}: {} stability changes in range, using the "
                "first onset {!r}.".format(eps, len(crossings), onset)
            )
        rows.append(OnsetRow(eps, onset, crossings))
    onsets = [row.onset for row in rows]
    return VanishingDampingTable(
        rows=tuple(rows),
        raw_limit=onsets[-1],
        extrapolated=richardson_limit(onsets),
        undamped_onset=results[-1][0] if include_undamped else None,
        multiple_crossings=multiple,
    )
