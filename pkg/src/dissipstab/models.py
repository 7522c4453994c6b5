"""
Catalog of model systems with their closed-form critical quantities.

Units: Ziegler's pendulum in m = c = l = 1 unless given, Maclaurin
spheroids in πGρ = 1, Sobolev's top keeps ρ explicit.
"""

import logging
import math
from abc import ABC, abstractmethod
from collections import namedtuple
from dataclasses import asdict, dataclass, fields, replace
from typing import Any, Optional

import numpy as np
import scipy.linalg
from scipy.optimize import brentq

from .errors import (
    BracketFailure,
    ConfigError,
    DegenerateInput,
    MissingRadiativeCoefficients,
    NoOnsetFound,
    OverdampedWindowClosed,
    SingularA,
)
from .hurwitz import (
    ASYMPTOTICALLY_STABLE,
    MARGINALLY_STABLE,
    UNSTABLE,
    StabilityVerdict,
    classify,
    hurwitz_H,
    system_verdict,
)
from .krein import IndefiniteMetric, energy_metric, krein_spectrum
from .msystem import (
    MechanicalSystem,
    QuarticPoly,
    char_quartic,
    decompose,
    eigenvalues,
    leading_eigenvalue,
    mass_normalize,
)
from .paradox import critical_load
from .smallalg import SmallMatrix

logger = logging.getLogger(__name__)

OMEGA0 = 0.663490
SERIES_BELOW = 0.05
MACLAURIN_BRACKET = (0.5, 0.999)
MACLAURIN_ONSET_RANGE = (0.7, 0.999)
ROOT_XTOL = 1e-12
MIN_RK4_STEPS = 1000
FLOQUET_TOL = 1e-8
GROWTH_RATE_TOL = 1e-6

FLOQUET_MULTIPLIERS = "FloquetMultipliers"
SPECTRUM = "Spectrum"

ZieglerCriticals = namedtuple("ZieglerCriticals", ["undamped", "damped", "limit"])
BrouwerVerdict = namedtuple("BrouwerVerdict", ["stable", "case", "window"])
LagrangePoint = namedtuple("LagrangePoint", ["params", "gascheau"])
MaclaurinProfile = namedtuple("MaclaurinProfile", ["omega2", "b"])
MaclaurinCriticals = namedtuple(
    "MaclaurinCriticals", ["meyer_liouville", "riemann", "riemann_sine"]
)
CombResInterval = namedtuple("CombResInterval", ["undamped", "damped"])
Monodromy = namedtuple("Monodromy", ["matrix", "multipliers"])


def _require(condition, message):
    if not condition:
        raise DegenerateInput(message)


# Ziegler's pendulum


@dataclass(frozen=True)
class ZieglerParams:
    m: float = 1.0
    c: float = 1.0
    l: float = 1.0
    P: float = 0.0
    b: float = 0.0

    def __post_init__(self):
        _require(self.m > 0 and self.c > 0 and self.l > 0, "m, c, l must be positive.")
        _require(self.b >= 0, "Joint damping b must be nonnegative.")


def build_ziegler(p):
    """Double pendulum with a follower load P and equal joint damping b."""
    ml2 = p.m * p.l * p.l
    M = ml2 * np.array([[3.0, 1.0], [1.0, 1.0]])
    B = p.b * np.array([[2.0, -1.0], [-1.0, 1.0]])
    Pl = p.P * p.l
    A = np.array([[-Pl + 2 * p.c, Pl - p.c], [-p.c, p.c]])
    return decompose(A, B, M, labels={"model": "ziegler", "P": p.P, "b": p.b})


def ziegler_criticals(p):
    """
    Critical follower loads: without damping, with damping b, and the
    limit of the damped value as b → 0 (which differs from the first).
    """
    limit = 41 * p.c / (28 * p.l)
    return ZieglerCriticals(
        undamped=(3.5 - math.sqrt(2)) * p.c / p.l,
        damped=limit + p.b * p.b / (2 * p.m * p.l**3),
        limit=limit,
    )


# Brouwer's rotating vessel and the Lagrange triangular points


@dataclass(frozen=True)
class BrouwerParams:
    g: float = 1.0
    k1: float = 1.0
    k2: float = 1.0
    omega: float = 0.0
    c1: float = 0.0
    c2: float = 0.0

    def __post_init__(self):
        _require(self.g > 0, "Gravity g must be positive.")


def build_brouwer(p):
    """Heavy particle in a rotating vessel with curvatures k1, k2 (rotating frame)."""
    w2 = p.omega * p.omega
    B = np.array([[p.c1, -2 * p.omega], [2 * p.omega, p.c2]])
    A = np.diag([p.g * p.k1 - w2, p.g * p.k2 - w2])
    labels = {"model": "brouwer", "omega": p.omega, "c1": p.c1, "c2": p.c2}
    return decompose(A, B, np.eye(2), labels=labels)


def brouwer_undamped_verdict(p):
    """
    Stability of the undamped vessel from the case list on the curvatures.

    Curvatures are ordered so that k1 >= k2. Boundary equalities count as
    unstable.

    Returns:
        `BrouwerVerdict` (stable, case, window), window being the stable
        interval of ω² for the saddle case and None otherwise.
    """
    if p.c1 != 0 or p.c2 != 0:
        raise DegenerateInput("Undamped verdict needs c1 = c2 = 0.")
    k1, k2 = max(p.k1, p.k2), min(p.k1, p.k2)
    g, w2 = p.g, p.omega * p.omega
    if k2 > 0:
        return BrouwerVerdict(w2 < g * k2 or w2 > g * k1, "minimum", None)
    if k1 <= 0:
        return BrouwerVerdict(False, "maximum", None)
    if k1 + k2 >= 0:
        return BrouwerVerdict(w2 > g * k1, "saddle, k1+k2>=0", None)
    if 3 * k1 + k2 <= 0:
        return BrouwerVerdict(False, "saddle, 3k1+k2<=0", None)
    upper = -(g / 8) * (k1 - k2) ** 2 / (k1 + k2)
    window = (g * k1, upper)
    return BrouwerVerdict(window[0] < w2 < window[1], "saddle, 3k1+k2>0", window)


@dataclass(frozen=True)
class LagrangeParams:
    mass_ratio: float = 0.01
    c1: float = 0.0
    c2: float = 0.0

    def __post_init__(self):
        _require(0 <= self.mass_ratio <= 1, "Mass ratio must lie in [0, 1].")


def gascheau_mass_ratio():
    """Smaller root of 27μ(1−μ) = 1."""
    return (1 - math.sqrt(23.0 / 27.0)) / 2


def lagrange_point_params(mass_ratio, c1=0.0, c2=0.0):
    """
    Triangular libration points as a Brouwer vessel with ω = g = 1.

    Returns:
        `LagrangePoint` (BrouwerParams, gascheau) with gascheau = 1 − 27μ(1−μ),
        positive exactly when the undamped point is stable (μ > 0).
    """
    _require(0 <= mass_ratio <= 1, "Mass ratio must lie in [0, 1].")
    product = mass_ratio * (1 - mass_ratio)
    root = math.sqrt(1 - 3 * product)
    params = BrouwerParams(
        g=1.0, k1=-0.5 + 1.5 * root, k2=-0.5 - 1.5 * root, omega=1.0, c1=c1, c2=c2
    )
    return LagrangePoint(params, 1 - 27 * product)


# Maclaurin spheroids


def maclaurin_profile(e):
    """
    Squared angular velocity Ω²(e) and the coefficient b(e) of the
    spheroid with eccentricity e. Below SERIES_BELOW both are evaluated
    from their Taylor series in e².
    """
    _require(0 < e < 1, "Eccentricity must lie in (0, 1), got {!r}.".format(e))
    x = e * e
    root = math.sqrt(1 - x)
    if e < SERIES_BELOW:
        omega2 = x * (8.0 / 15 + 8.0 / 105 * x - 64.0 / 3465 * x**3)
        b = root / 4 * (16.0 / 15 + 8.0 / 35 * x + 2.0 / 21 * x**2 + 5.0 / 99 * x**3)
        return MaclaurinProfile(omega2, b)
    arc = math.asin(e)
    omega2 = 2 * (3 - 2 * x) * arc * root / e**3 - 6 * (1 - x) / x
    b = root / (4 * e**5) * (e * (3 - 2 * x) * root + (4 * x - 3) * arc)
    return MaclaurinProfile(omega2, b)


def _riemann_sine_form(e):
    x = e * e
    return e - math.sin(e * (3 + 4 * x) * math.sqrt(1 - x) / (3 + 2 * x - 4 * x * x))


def _bracketed_root(f, bracket, name):
    lo, hi = bracket
    f_lo, f_hi = f(lo), f(hi)
    if f_lo * f_hi > 0:
        raise BracketFailure(
            "{}: no sign change on [{!r}, {!r}] ({!r}, {!r}).".format(name, lo, hi, f_lo, f_hi)
        )
    return brentq(f, lo, hi, xtol=ROOT_XTOL)


def maclaurin_criticals(bracket=MACLAURIN_BRACKET):
    """
    Meyer-Liouville point 4b = 2Ω² and Riemann point 4b = Ω², the latter
    also from its equivalent sine form.
    """

    def meyer_liouville(e):
        omega2, b = maclaurin_profile(e)
        return 4 * b - 2 * omega2

    def riemann(e):
        omega2, b = maclaurin_profile(e)
        return 4 * b - omega2

    return MaclaurinCriticals(
        meyer_liouville=_bracketed_root(meyer_liouville, bracket, "4b=2*Omega^2"),
        riemann=_bracketed_root(riemann, bracket, "4b=Omega^2"),
        riemann_sine=_bracketed_root(_riemann_sine_form, bracket, "sine form"),
    )


class RadiativeTable(object):
    """
    Tabulated radiative coefficient as a function of eccentricity, read
    from two-column text (e, value) and linearly interpolated. Queries
    outside the table are clamped to its ends.
    """

    def __init__(self, e_values, values, name="q"):
        self._e = np.asarray(e_values, dtype=float)
        self._values = np.asarray(values, dtype=float)
        self._name = name
        if self._e.ndim != 1 or self._e.shape != self._values.shape or len(self._e) < 2:
            raise ConfigError("Radiative table {} needs at least two rows.".format(name))
        if np.any(np.diff(self._e) <= 0):
            raise ConfigError(
                "Radiative table {} must have increasing eccentricities.".format(name)
            )

    @classmethod
    def load(cls, path, name="q"):
        try:
            data = np.loadtxt(path, ndmin=2)
        except (OSError, ValueError) as e:
            raise ConfigError("Cannot read radiative table {}: {}".format(path, e))
        if data.shape[1] != 2:
            raise ConfigError(
                "Radiative table {} must have two columns, found {}.".format(
                    path, data.shape[1]
                )
            )
        return cls(data[:, 0], data[:, 1], name)

    def name(self):
        return self._name

    def __call__(self, e):
        if e < self._e[0] or e > self._e[-1]:
            logger.warning(
                "{} e={!r}: outside the tabulated range [{!r}, {!r}], clamping.".format(
                    self._name, e, self._e[0], self._e[-1]
                )
            )
        return float(np.interp(e, self._e, self._values))


@dataclass(frozen=True)
class MaclaurinParams:
    e: float = 0.5
    mu: float = 0.0
    delta: float = 0.0
    q1: Any = None
    q2: Any = None

    def __post_init__(self):
        _require(0 < self.e < 1, "Eccentricity must lie in (0, 1).")
        _require(self.mu >= 0, "Viscosity mu must be nonnegative.")
        _require(self.delta >= 0, "Radiation coefficient delta must be nonnegative.")

    def radiative_coefficients(self):
        if self.q1 is None or self.q2 is None:
            raise MissingRadiativeCoefficients(
                "Radiative variants need q1 and q2 (numbers or tables)."
            )
        return tuple(q(self.e) if callable(q) else float(q) for q in (self.q1, self.q2))


MACLAURIN_VARIANTS = ("inviscid", "viscous", "radiative", "combined")


def build_maclaurin(p, variant="inviscid"):
    """
    Matrix polynomial of the bar-mode oscillations of a Maclaurin spheroid.

    inviscid and viscous share the velocity block [[0, −4Ω], [Ω, 0]]
    (plus 10μ·I with viscosity); the block is not antisymmetric and is
    split into D + G. radiative assembles the gyroscopic, damping,
    potential and positional matrices of gravitational radiation reaction
    with coefficients q1, q2; combined adds viscosity to it.
    """
    if variant not in MACLAURIN_VARIANTS:
        raise DegenerateInput("Unknown Maclaurin variant {!r}.".format(variant))
    omega2, b = maclaurin_profile(p.e)
    omega = math.sqrt(omega2)
    identity = np.eye(2)
    labels = {"model": "maclaurin", "variant": variant, "e": p.e}
    if variant in ("inviscid", "viscous"):
        B = np.array([[0.0, -4 * omega], [omega, 0.0]])
        if variant == "viscous":
            B = B + 10 * p.mu * identity
        A = (4 * b - 2 * omega2) * identity
        return decompose(A, B, identity, labels=labels)

    q1, q2 = p.radiative_coefficients()
    G = 2.5 * np.array([[0.0, -omega], [omega, 0.0]])
    d = 16 * p.delta * omega2 * (6 * b - omega2)
    D = np.array([[d, -1.5 * omega], [-1.5 * omega, d]])
    if variant == "combined":
        D = D + 10 * p.mu * identity
    K = (4 * b - omega2) * identity
    N = p.delta * np.array([[2 * q1, 2 * q2], [-q2 / 2, 2 * q1]])
    return decompose(K + N, G + D, identity, labels=labels)


def damping_ratio(mu, delta):
    """Ratio X of viscous to radiative damping strengths."""
    _require(delta > 0, "Damping ratio needs delta > 0.")
    return 25 / (2 * OMEGA0**4) * mu / delta


def growth_rate_residual(e, mu, value):
    """
    Residual of the growth-rate relation of the viscous spheroid,
    25Ω²μ² + (x+5μ)²(Ω² − x² − 10xμ − 4b) with x = Re λ.
    """
    omega2, b = maclaurin_profile(e)
    x = complex(value).real
    return 25 * omega2 * mu * mu + (x + 5 * mu) ** 2 * (omega2 - x * x - 10 * x * mu - 4 * b)


def growth_rate_check(e, mu, tol=GROWTH_RATE_TOL):
    """Largest growth-rate residual over the viscous spectrum at (e, mu)."""
    system = build_maclaurin(MaclaurinParams(e=e, mu=mu), "viscous")
    worst = 0.0
    for value in eigenvalues(system):
        residual = abs(growth_rate_residual(e, mu, value))
        if residual > tol:
            logger.warning(
                "maclaurin e={!r}: growth-rate residual {:.3e} at {!r}.".format(
                    e, residual, value
                )
            )
        worst = max(worst, residual)
    return worst


def viscous_onset(mu, e_range=MACLAURIN_ONSET_RANGE, **kwargs):
    """Smallest eccentricity in e_range at which the viscous spheroid is unstable."""
    _require(mu >= 0, "Viscosity must be nonnegative.")

    def system_at(e):
        return build_maclaurin(MaclaurinParams(e=e, mu=mu), "viscous")

    try:
        onset, _ = critical_load(system_at, e_range, **kwargs)
    except NoOnsetFound as e:
        raise BracketFailure("mu={!r}: {}".format(mu, e))
    return onset


def maclaurin_krein_family(e):
    """
    Inviscid spheroid as a self-adjoint matrix with its energy metric.

    Scaling the first coordinate by 2 turns the velocity block into the
    skew matrix [[0, −2Ω], [2Ω, 0]] without changing the spectrum.
    """
    omega2, b = maclaurin_profile(e)
    omega = math.sqrt(omega2)
    system = MechanicalSystem(
        np.eye(2),
        G=np.array([[0.0, -2 * omega], [2 * omega, 0.0]]),
        K=(4 * b - 2 * omega2) * np.eye(2),
    )
    return energy_metric(system)


# Sobolev's top with a fluid-filled ellipsoidal cavity


@dataclass(frozen=True)
class SobolevParams:
    a: float = 1.0
    c: float = 2.0
    rho: float = 1.0
    A1: float = 0.0
    C1: float = 0.0
    M1: float = 0.0
    l1: float = 0.0
    l2: float = 0.0
    M2: Optional[float] = None
    g: float = 0.0
    Omega: float = 1.0

    def __post_init__(self):
        _require(self.a > 0 and self.c > 0 and self.rho > 0, "a, c, rho must be positive.")

    def fluid_mass(self):
        if self.M2 is not None:
            return self.M2
        return 4 * math.pi / 3 * self.rho * self.a**2 * self.c

    def potential_constant(self):
        return self.g * (self.l1 * self.M1 + self.l2 * self.fluid_mass())

    def L(self):
        """C1 + C2 − A1 − A2 − K/Ω² with the fluid moments of inertia."""
        a, c = self.a, self.c
        s = 4 * math.pi * self.rho / 15
        C2 = 2 * s * a**4 * c
        A2 = self.l2**2 * self.fluid_mass() + s * a * a * c * (a * a + c * c)
        K = self.potential_constant()
        if K != 0:
            _require(self.Omega != 0, "Omega must be nonzero when K != 0.")
            return self.C1 + C2 - self.A1 - A2 - K / self.Omega**2
        return self.C1 + C2 - self.A1 - A2


def build_sobolev(p):
    """
    Reduced three-mode model of the top: returns (B, metric) with
    B = A⁻¹C, self-adjoint in the metric (G B is Hermitian).
    """
    a2, c2 = p.a * p.a, p.c * p.c
    s = 4 * math.pi * p.rho / 15
    S = c2 + a2
    m = (c2 - a2) / S
    L = p.L()
    inertia = p.A1 + p.l2**2 * p.fluid_mass() + s * a2 * p.c * (c2 - a2) ** 2 / S
    scale = max(1.0, abs(p.A1) + abs(p.l2**2 * p.fluid_mass()) + s * a2 * p.c * S)
    if abs(inertia) <= 1e-14 * scale:
        raise SingularA(
            "Transverse inertia vanishes (a={!r}, c={!r}).".format(p.a, p.c)
        )
    A = np.diag([1.0, inertia, S])
    C = np.array(
        [
            [0.0, 1.0, 0.0],
            [
                L,
                p.C1 - 2 * p.A1 - 2 * p.l2**2 * p.fluid_mass() - 2 * s * a2 * p.c**3 * m * m,
                -2 * s * a2 * a2 * p.c**3 * m * m,
            ],
            [0.0, -2.0, -2 * a2],
        ]
    )
    B = scipy.linalg.solve(A, C)
    gram = np.diag([L, inertia, s * a2 * a2 * p.c**3 * (c2 - a2) ** 2 / S])
    return SmallMatrix(B), IndefiniteMetric(gram)


def sobolev_massless_spectrum(a, c):
    """
    Eigenvalues of the massless-shell top: −1 and −1/2 ± √(1 + 8a²/(a²−c²))/2,
    the pair being complex exactly for a < c < 3a.
    """
    _require(a > 0 and c > 0, "Semiaxes must be positive.")
    _require(c != a, "c = a is the spherical cavity; the pair is undefined.")
    root = np.sqrt(complex(1 + 8 * a * a / (a * a - c * c)))
    return [complex(-1.0), complex(-0.5 + root / 2), complex(-0.5 - root / 2)]


def sobolev_krein_family(p):
    """c ↦ (B, metric) for Krein path scans over the cavity height."""

    def family(c):
        return build_sobolev(replace(p, c=c))

    return family


# Combination resonance of two parametrically forced oscillators


@dataclass(frozen=True)
class CombResParams:
    Omega: float = 0.5
    eps: float = 0.01
    mu: float = 0.0
    omega0: Optional[float] = None
    delta_plus: float = 0.0
    delta_minus: float = 0.0
    mu_plus: float = 0.0
    mu_minus: float = 0.0

    def __post_init__(self):
        _require(self.eps >= 0, "Forcing strength eps must be nonnegative.")

    def forcing_frequency(self):
        """ω0, from δ₊ = (ω0 − W)·W/ε with W = ω1 + ω2 when not given."""
        if self.omega0 is not None:
            return self.omega0
        w = sum(combres_frequencies(self.Omega))
        return w + self.eps * self.delta_plus / w


def combres_frequencies(Omega):
    """Natural frequencies √(1+Ω²) ± Ω of the unforced rotating pair."""
    root = math.sqrt(1 + Omega * Omega)
    return root + Omega, root - Omega


class PeriodicSystem(object):
    """x' = A(t) x with A(t) = base + cos(ω0 t)·forcing."""

    def __init__(self, base, forcing, omega0):
        _require(omega0 > 0, "Forcing frequency must be positive.")
        self._base = np.asarray(base, dtype=float)
        self._forcing = np.asarray(forcing, dtype=float)
        self._omega0 = omega0

    def n(self):
        return self._base.shape[0]

    def omega0(self):
        return self._omega0

    def period(self):
        return 2 * math.pi / self._omega0

    def matrix(self, t):
        return self._base + math.cos(self._omega0 * t) * self._forcing


def build_combres(p):
    """
    Two oscillators with gyroscopic coupling 2Ω, parametric forcing
    ε cos ω0t and damping 2εμ, in the state (x, y, x', y').

    The detunings δ₋ and μ± split stiffness and damping between the
    oscillators: stiffness 1 ± εδ₋/2, damping 2ε(μ + μ1), 2ε(μ + μ2)
    with μ1,2 = (μ₊ ± μ₋)/2.
    """
    mu1 = (p.mu_plus + p.mu_minus) / 2
    mu2 = (p.mu_plus - p.mu_minus) / 2
    kx = 1 + p.eps * p.delta_minus / 2
    ky = 1 - p.eps * p.delta_minus / 2
    base = np.array(
        [
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [-kx, 0.0, -2 * p.eps * (p.mu + mu1), -2 * p.Omega],
            [0.0, -ky, 2 * p.Omega, -2 * p.eps * (p.mu + mu2)],
        ]
    )
    forcing = np.zeros((4, 4))
    forcing[2, 0] = forcing[3, 1] = -p.eps
    return PeriodicSystem(base, forcing, p.forcing_frequency())


def combres_interval(mu, omega0):
    """
    Half-widths of the instability interval in δ₊.

    Without damping the interval is |δ₊| <= 1; with damping μ (normalized
    as in the damped half-width ω0√(1/4 − μ²/ω0²)) it does not tend to 1
    as μ → 0 but to ω0/2.
    """
    _require(mu >= 0 and omega0 > 0, "Need mu >= 0 and omega0 > 0.")
    radicand = 0.25 - (mu / omega0) ** 2
    if radicand < 0:
        raise OverdampedWindowClosed(
            "mu/omega0 = {!r} > 1/2: no instability interval.".format(mu / omega0)
        )
    return CombResInterval(undamped=1.0, damped=omega0 * math.sqrt(radicand))


def monodromy(system, steps=2000):
    """
    Fundamental matrix over one period by fixed-step RK4, and its
    eigenvalues (the Floquet multipliers).
    """
    if steps < MIN_RK4_STEPS:
        raise ValueError("monodromy needs at least {} steps.".format(MIN_RK4_STEPS))
    h = system.period() / steps
    phi = np.eye(system.n())
    for k in range(steps):
        t = k * h
        a0 = system.matrix(t)
        a1 = system.matrix(t + h / 2)
        a2 = system.matrix(t + h)
        k1 = a0 @ phi
        k2 = a1 @ (phi + h / 2 * k1)
        k3 = a1 @ (phi + h / 2 * k2)
        k4 = a2 @ (phi + h * k3)
        phi = phi + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return Monodromy(phi, np.linalg.eigvals(phi))


def floquet_unstable(multipliers, tol=FLOQUET_TOL):
    return bool(np.max(np.abs(multipliers)) > 1 + tol)


def combres_floquet_interval(
    p, span=None, count=25, steps=2000, tol=FLOQUET_TOL, bisect_tol=1e-4
):
    """
    Instability interval in δ₊ located by Floquet multipliers.

    δ₊ is scanned over [−span, span] (default 1.5·max(1, W/2)); the
    outermost stability changes are refined by bisection.

    Returns:
        (left, right) endpoints of the unstable δ₊ interval.
    """
    w = sum(combres_frequencies(p.Omega))
    if span is None:
        span = 1.5 * max(1.0, w / 2)

    def unstable(delta):
        params = replace(p, omega0=None, delta_plus=delta)
        return floquet_unstable(monodromy(build_combres(params), steps).multipliers, tol)

    grid = np.linspace(-span, span, count)
    flags = [unstable(delta) for delta in grid]
    if not any(flags):
        raise NoOnsetFound("No Floquet instability for |delta_plus| <= {!r}.".format(span))
    if flags[0] or flags[-1]:
        raise BracketFailure("Instability reaches the scan edge; widen span.")
    first = flags.index(True)
    last = len(flags) - 1 - flags[::-1].index(True)

    def refine(lo, hi, lo_flag):
        while hi - lo > bisect_tol:
            mid = 0.5 * (lo + hi)
            if unstable(mid) == lo_flag:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    left = refine(grid[first - 1], grid[first], False)
    right = refine(grid[last], grid[last + 1], True)
    return left, right


# Registry used by the command line and by sweeps


@dataclass(frozen=True)
class Evaluation:
    verdict: StabilityVerdict
    leading: complex
    H: Optional[float] = None
    krein_signs: Optional[tuple] = None

    @property
    def abscissa(self):
        return self.verdict.abscissa


def _signs(entries):
    signs = []
    for entry in entries:
        signs.extend([entry.krein_sign] * entry.algebraic_multiplicity)
    return tuple(signs)


class Model(ABC):
    """
    A catalog model: a parameter dataclass, a builder and closed-form
    criticals.

    LOAD names the parameter scanned for instability onsets, DAMPING the
    parameter acting as damping scale (None if the model has none).
    """

    PARAMS = None
    VARIANTS = (None,)
    LOAD = None
    DAMPING = None
    LOAD_RANGE = None

    @classmethod
    def create_model(cls, name, params=None, variant=None):
        if name not in cls.get_model_types():
            raise ConfigError("Unknown model {!r}.".format(name))
        model_class = cls.get_model_types()[name]
        return model_class(model_class.make_params(params or {}), variant)

    @classmethod
    def get_model_types(cls):
        return MODEL_TYPES

    @classmethod
    def parameter_names(cls):
        return [f.name for f in fields(cls.PARAMS)]

    @classmethod
    def make_params(cls, values):
        unknown = set(values) - set(cls.parameter_names())
        if unknown:
            raise ConfigError(
                "Unknown parameters for {}: {}".format(cls.PARAMS.__name__, sorted(unknown))
            )
        try:
            return cls.PARAMS(**values)
        except (TypeError, DegenerateInput) as e:
            raise ConfigError("Invalid parameters: {}".format(e))

    def __init__(self, params, variant=None):
        if variant is None:
            variant = self.VARIANTS[0]
        if variant not in self.VARIANTS:
            raise ConfigError(
                "{} has no variant {!r}; choose from {}.".format(
                    type(self).__name__, variant, self.VARIANTS
                )
            )
        self._params = params
        self._variant = variant

    def params(self):
        return self._params

    def variant(self):
        return self._variant

    def at(self, **values):
        try:
            return replace(self._params, **values)
        except (TypeError, DegenerateInput) as e:
            raise ConfigError("Invalid parameter values {}: {}".format(values, e))

    def system(self, **values):
        return self.build(self.at(**values))

    @abstractmethod
    def build(self, params):
        pass

    @abstractmethod
    def info(self):
        pass

    def krein_signs(self, system):
        if np.any(system.D()) or np.any(system.N()):
            return None
        matrix, metric = energy_metric(system)
        return _signs(krein_spectrum(matrix, metric))

    def evaluate(self, tol, **values):
        system = self.system(**values)
        verdict = system_verdict(system, tol)
        H = None
        if system.n() == 2:
            H = hurwitz_H(char_quartic(mass_normalize(system)))
        return Evaluation(verdict, leading_eigenvalue(system), H, self.krein_signs(system))

    def family(self):
        """(load, eps) ↦ system, for vanishing damping scans."""
        if self.DAMPING is None:
            raise DegenerateInput("{} has no damping scale.".format(type(self).__name__))

        def build_at(load, eps):
            return self.system(**{self.LOAD: load, self.DAMPING: eps})

        return build_at

    def describe(self):
        values = asdict(self._params)
        return {k: v for k, v in values.items() if not callable(v)}


class ZieglerModel(Model):
    PARAMS = ZieglerParams
    LOAD = "P"
    DAMPING = "b"
    LOAD_RANGE = (0.0, 3.0)

    def build(self, params):
        return build_ziegler(params)

    def info(self):
        return ziegler_criticals(self._params)._asdict()


class BrouwerModel(Model):
    PARAMS = BrouwerParams
    LOAD = "omega"

    def build(self, params):
        return build_brouwer(params)

    def info(self):
        p = self._params
        result = {"a1": p.c1 + p.c2}
        if p.c1 == 0 and p.c2 == 0:
            verdict = brouwer_undamped_verdict(p)
            result.update(stable=verdict.stable, case=verdict.case, window=verdict.window)
        return result


class LagrangeModel(Model):
    PARAMS = LagrangeParams
    LOAD = "mass_ratio"

    def build(self, params):
        point = lagrange_point_params(params.mass_ratio, params.c1, params.c2)
        return build_brouwer(point.params)

    def info(self):
        point = lagrange_point_params(self._params.mass_ratio)
        return {
            "gascheau": point.gascheau,
            "gascheau_mass_ratio": gascheau_mass_ratio(),
            "k1": point.params.k1,
            "k2": point.params.k2,
        }


class MaclaurinModel(Model):
    PARAMS = MaclaurinParams
    VARIANTS = MACLAURIN_VARIANTS
    LOAD = "e"
    LOAD_RANGE = MACLAURIN_ONSET_RANGE

    @property
    def DAMPING(self):
        return "mu" if self._variant == "viscous" else None

    def build(self, params):
        return build_maclaurin(params, self._variant)

    def krein_signs(self, system):
        if self._variant != "inviscid":
            return None
        matrix, metric = maclaurin_krein_family(system.labels()["e"])
        return _signs(krein_spectrum(matrix, metric))

    def info(self):
        p = self._params
        criticals = maclaurin_criticals()
        profile = maclaurin_profile(p.e)
        result = dict(criticals._asdict(), omega2=profile.omega2, b=profile.b)
        if p.delta > 0:
            result["damping_ratio"] = damping_ratio(p.mu, p.delta)
        return result


class SobolevModel(Model):
    PARAMS = SobolevParams
    LOAD = "c"

    def build(self, params):
        return build_sobolev(params)

    def evaluate(self, tol, **values):
        params = self.at(**values)
        B, metric = build_sobolev(params)
        entries = krein_spectrum(B, metric)
        # x(t) ~ exp(iΩλt): growth rate −Ω·Im λ.
        rates = [complex(1j * params.Omega * entry.value) for entry in entries]
        leading = max(rates, key=lambda z: z.real)
        top = leading.real
        if top > tol:
            stability = UNSTABLE
        elif any(entry.is_defective() for entry in entries):
            stability = UNSTABLE
        else:
            stability = MARGINALLY_STABLE
        verdict = StabilityVerdict(stability, SPECTRUM, known_abscissa=max(top, 0.0))
        return Evaluation(verdict, leading, None, _signs(entries))

    def info(self):
        p = self._params
        B, metric = build_sobolev(p)
        result = {"L": p.L(), "signature": metric.signature()}
        if p.A1 == 0 and p.C1 == 0 and p.M1 == 0 and p.l2 == 0 and p.c != p.a:
            result["massless_spectrum"] = sobolev_massless_spectrum(p.a, p.c)
        return result


class CombResModel(Model):
    PARAMS = CombResParams
    LOAD = "delta_plus"

    def build(self, params):
        return build_combres(params)

    def evaluate(self, tol, **values):
        system = build_combres(self.at(**values))
        multipliers = monodromy(system).multipliers
        leading = complex(multipliers[np.argmax(np.abs(multipliers))])
        top = math.log(abs(leading)) / system.period()
        if abs(leading) > 1 + FLOQUET_TOL:
            stability = UNSTABLE
        elif abs(leading) < 1 - FLOQUET_TOL:
            stability = ASYMPTOTICALLY_STABLE
        else:
            stability = MARGINALLY_STABLE
        verdict = StabilityVerdict(stability, FLOQUET_MULTIPLIERS, known_abscissa=top)
        return Evaluation(verdict, leading)

    def info(self):
        p = self._params
        w1, w2 = combres_frequencies(p.Omega)
        w = w1 + w2
        result = {"omega1": w1, "omega2": w2, "omega0": p.forcing_frequency()}
        normalized = 2 * p.mu * w
        try:
            interval = combres_interval(normalized, w)
            result.update(undamped=interval.undamped, damped=interval.damped)
        except OverdampedWindowClosed:
            result.update(undamped=1.0, damped=None)
        return result


@dataclass(frozen=True)
class QuarticParams:
    a1: float = 0.0
    a2: float = 0.0
    a3: float = 0.0
    a4: float = 0.0


class QuarticModel(Model):
    PARAMS = QuarticParams

    def build(self, params):
        return QuarticPoly(params.a1, params.a2, params.a3, params.a4)

    def evaluate(self, tol, **values):
        q = self.build(self.at(**values))
        verdict = classify(q, tol)
        leading = max((root for root, _ in q.roots()), key=lambda z: (z.real, z.imag))
        return Evaluation(verdict, leading, hurwitz_H(q))

    def info(self):
        q = self.build(self._params)
        return {"H": hurwitz_H(q), "verdict": classify(q).describe()}


MODEL_TYPES = {
    "ziegler": ZieglerModel,
    "brouwer": BrouwerModel,
    "lagrange": LagrangeModel,
    "maclaurin": MaclaurinModel,
    "sobolev": SobolevModel,
    "combres": CombResModel,
    "quartic": QuarticModel,
}


def create_model(name, params=None, variant=None):
    return Model.create_model(name, params, variant)
