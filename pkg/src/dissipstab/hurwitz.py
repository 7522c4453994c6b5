import logging
import math
from collections import namedtuple
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DegenerateInput, NonPositiveA4
from .msystem import QuarticPoly, char_quartic, eigenvalues, mass_normalize
from .smallalg import DEFAULT_TOL, cluster_values, poly_roots

logger = logging.getLogger(__name__)

CLASSIFY_TOL = 1e-9

ASYMPTOTICALLY_STABLE = "AsymptoticallyStable"
MARGINALLY_STABLE = "MarginallyStable"
UNSTABLE = "Unstable"

COND_A_STRICT = "CondA_strict"
COND_A_BOUNDARY = "CondA_boundary_subcase"
COND_B = "CondB"
VIOLATED_CONDITION = "ViolatedCondition"
IMAGINARY_PAIR_AT = "ImaginaryPairAt"
ROOT_ORACLE = "RootOracle"

# Shell exit codes of the stability command, keyed by class.
EXIT_CODES = {ASYMPTOTICALLY_STABLE: 0, UNSTABLE: 1, MARGINALLY_STABLE: 2}

SurfacePoint = namedtuple("SurfacePoint", ["a1", "a2", "a3", "kind"])
DiscontinuityGap = namedtuple("DiscontinuityGap", ["g1", "g2", "gap"])


@dataclass(frozen=True)
class StabilityVerdict:
    """
    Stability class with the condition that certifies it.

    When a quartic is attached, the abscissa is computed from its roots on
    first access; verdicts built from a spectrum carry it directly.
    """

    stability: str
    certificate: str
    detail: str = ""
    quartic: Optional[QuarticPoly] = None
    imaginary_pair: Optional[float] = None
    known_abscissa: Optional[float] = field(default=None, repr=False)

    @property
    def abscissa(self):
        if self.known_abscissa is None:
            roots = self.quartic.roots()
            object.__setattr__(
                self, "known_abscissa", max(root.real for root, _ in roots)
            )
        return self.known_abscissa

    def is_stable(self):
        return self.stability != UNSTABLE

    def describe(self):
        text = "{} ({}".format(self.stability, self.certificate)
        if self.imaginary_pair is not None:
            text += " mu={!r}".format(self.imaginary_pair)
        if self.detail:
            text += ": " + self.detail
        return text + ")"


def hurwitz_H(q):
    """H = a1² a4 + a3² − a1 a2 a3, exactly as written."""
    return q.a1 * q.a1 * q.a4 + q.a3 * q.a3 - q.a1 * q.a2 * q.a3


def _unstable(q, condition):
    return StabilityVerdict(UNSTABLE, VIOLATED_CONDITION, condition, quartic=q)


def _marginal(q, certificate, detail, tol, imaginary_pair=None):
    # Marginal stability fails when an imaginary root repeats.
    axis_tol = math.sqrt(tol)
    axis_roots = [
        root for root, multiplicity in poly_roots(q.as_poly(), DEFAULT_TOL)
        for _ in range(multiplicity)
        if abs(root.real) <= axis_tol
    ]
    for centre, members in cluster_values(axis_roots, tol):
        if len(members) > 1:
            return _unstable(
                q, "repeated imaginary root {!r} (secular growth)".format(centre)
            )
    return StabilityVerdict(
        MARGINALLY_STABLE, certificate, detail, quartic=q, imaginary_pair=imaginary_pair
    )


def classify(q, tol=CLASSIFY_TOL):
    """
    Exact stability class of a real quartic.

    Condition A: a1>0, a2>0, a3>0, a4>=0 and a2 >= (a1² a4 + a3²)/(a1 a3).
    Condition B: a1=0, a3=0, a2>0, a4>0 and a2 > 2√a4.
    Quantities within tol of zero count as zero.

    Args:
        q (`QuarticPoly`): the quartic to classify.
        tol: absolute tolerance on the coefficient expressions.

    Returns:
        `StabilityVerdict`. Strict A gives AsymptoticallyStable; the
        boundary subcases of A and condition B give MarginallyStable
        unless an imaginary root repeats; everything else is Unstable
        with the first violated condition named.
    """
    a1, a2, a3, a4 = q.coefficients()

    def zero(x):
        return abs(x) <= tol

    if zero(a1) and zero(a3):
        if a2 <= tol:
            return _unstable(q, "a2>0")
        if a4 <= tol:
            return _unstable(q, "a4>0")
        if a2 - 2 * math.sqrt(a4) <= tol:
            return _unstable(q, "a2>2*sqrt(a4) (repeated imaginary roots)")
        return _marginal(q, COND_B, "a1=a3=0, a2>2*sqrt(a4)", tol)
    if zero(a1):
        return _unstable(q, "a1=0 with a3!=0")
    if zero(a3):
        return _unstable(q, "a3=0 with a1!=0")
    if a1 < 0:
        return _unstable(q, "a1>0")
    if a2 <= tol:
        return _unstable(q, "a2>0")
    if a3 < 0:
        return _unstable(q, "a3>0")
    if a4 < -tol:
        return _unstable(q, "a4>=0")

    h = hurwitz_H(q)
    if h > tol:
        return _unstable(q, "a2>=(a1^2*a4+a3^2)/(a1*a3)")
    if not zero(a4) and not zero(h):
        return StabilityVerdict(ASYMPTOTICALLY_STABLE, COND_A_STRICT, quartic=q)
    if zero(a4) and zero(h):
        return _marginal(
            q,
            COND_A_BOUNDARY,
            "a4=0 and H=0 together: zero root and an imaginary pair; "
            "this combination is not separated by the criterion",
            tol,
        )
    if zero(a4):
        return _marginal(q, COND_A_BOUNDARY, "a4=0 with H<0: simple zero root", tol)
    return _marginal(
        q, IMAGINARY_PAIR_AT, "H=0 with a1, a2, a3 > 0", tol, math.sqrt(a3 / a1)
    )


def classify_roots(roots, tol=CLASSIFY_TOL):
    """
    Verdict read off a list of roots or eigenvalues (with repetitions).

    Asymptotically stable when max Re < -tol; marginal when the roots
    within tol of the imaginary axis are simple; unstable otherwise.
    """
    values = np.asarray(roots, dtype=complex).ravel()
    top = float(np.max(values.real))
    if top < -tol:
        return StabilityVerdict(ASYMPTOTICALLY_STABLE, ROOT_ORACLE, known_abscissa=top)
    if top > tol:
        return StabilityVerdict(
            UNSTABLE, ROOT_ORACLE, "root in right half-plane", known_abscissa=top
        )
    axis = values[np.abs(values.real) <= tol]
    for centre, members in cluster_values(axis, tol):
        if len(members) > 1:
            return StabilityVerdict(
                UNSTABLE,
                ROOT_ORACLE,
                "repeated imaginary root {!r}".format(centre),
                known_abscissa=top,
            )
    return StabilityVerdict(MARGINALLY_STABLE, ROOT_ORACLE, known_abscissa=top)


def system_verdict(system, tol=CLASSIFY_TOL):
    """Criterion verdict for n=2 systems, spectrum verdict otherwise."""
    if system.n() == 2:
        return classify(char_quartic(mass_normalize(system)), tol)
    return classify_roots(eigenvalues(system), tol)


def scale_normalize(q):
    """
    Substitute λ = cμ with c = a4^(1/4) so that the constant term becomes 1.

    Returns:
        (QuarticPoly with a4 = 1, c)
    """
    if not q.a4 > 0:
        raise NonPositiveA4("Scaling needs a4 > 0, got {!r}.".format(q.a4))
    c = q.a4**0.25
    return QuarticPoly(q.a1 / c, q.a2 / c**2, q.a3 / c**3, 1.0), c


def surface_V_sample(m_range, a1_range, counts):
    """
    Points of the cubic surface H = 0 in the slice a4 = 1, sampled along
    its rulings a3 = m a1, a2 = m + 1/m.

    The a2-axis (a1 = a3 = 0, a2 >= 2) is the double line of the surface;
    its points are marked with kind "double_line", the rest with "ruling".
    """
    m_lo, m_hi = m_range
    a1_lo, a1_hi = a1_range
    m_count, a1_count = counts
    if m_lo <= 0 or a1_lo < 0:
        raise DegenerateInput("Rulings need m > 0 and a1 >= 0.")
    points = []
    for m in np.linspace(m_lo, m_hi, m_count):
        a2 = m + 1.0 / m
        a1_values = np.linspace(a1_lo, a1_hi, a1_count)
        if a1_values[0] != 0.0:
            points.append(SurfacePoint(0.0, a2, 0.0, "double_line"))
        for a1 in a1_values:
            kind = "double_line" if a1 == 0.0 else "ruling"
            points.append(SurfacePoint(float(a1), float(a2), float(m * a1), kind))
    return points


def tangent_cone_contains(p, tol=CLASSIFY_TOL):
    """Membership of (a1, a3, a2) in the cone a1 = a3 > 0, a2 > 2."""
    a1, a3, a2 = p
    return abs(a1 - a3) <= tol and a1 > 0 and a2 > 2


def stability_domain_contains(p):
    """Asymptotic stability region of the slice a4 = 1, for p = (a1, a3, a2)."""
    a1, a3, a2 = p
    if not (a1 > 0 and a3 > 0):
        return False
    return a2 > 2 + (a1 - a3) ** 2 / (a1 * a3)


def bottema_discontinuity(b1, b3, a4):
    """
    Limits of the a2 bound when a1 = εb1, a3 = εb3 and ε → 0.

    Returns:
        `DiscontinuityGap` with the damped bound g1 = (b1² a4 + b3²)/(b1 b3),
        the undamped bound g2 = 2√a4, and g1 − g2 = (b1√a4 − b3)²/(b1 b3).
        The gap vanishes only on the ray b3 = b1√a4.
    """
    if not a4 > 0:
        raise NonPositiveA4("a4 must be positive, got {!r}.".format(a4))
    root = math.sqrt(a4)
    g1 = (b1 * b1 * a4 + b3 * b3) / (b1 * b3)
    g2 = 2 * root
    gap = (b1 * root - b3) ** 2 / (b1 * b3)
    return DiscontinuityGap(g1, g2, gap)
