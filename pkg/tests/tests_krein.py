import logging
import unittest

import numpy as np

from dissipstab.errors import DegenerateInput, NotHermitian
from dissipstab.krein import (
    COLLISION,
    SEPARATION,
    CollisionEvent,
    IndefiniteMetric,
    KreinPath,
    collision_scan,
    energy_metric,
    krein_sign,
    krein_spectrum,
    negative_square_count,
    nonreal_count,
)
from dissipstab.models import (
    SobolevParams,
    build_sobolev,
    maclaurin_krein_family,
    sobolev_krein_family,
)
from dissipstab.msystem import MechanicalSystem
from dissipstab.smallalg import matrix_eigen

logging.basicConfig(filename="tests.log", level=logging.WARNING, filemode="w")


def massless_top(c, a=1.0):
    return build_sobolev(SobolevParams(a=a, c=c))


class TestIndefiniteMetric(unittest.TestCase):
    def test_identity_is_definite(self):
        metric = IndefiniteMetric(np.eye(3))
        self.assertEqual(metric.signature(), (3, 0, 0))
        self.assertTrue(metric.is_definite())

    def test_negative_squares(self):
        metric = IndefiniteMetric(np.diag([1.0, -1.0, -1.0]))
        self.assertEqual(negative_square_count(metric), 2)
        self.assertFalse(metric.is_definite())

    def test_degenerate_signature(self):
        self.assertEqual(IndefiniteMetric(np.diag([2.0, 0.0])).signature(), (1, 0, 1))

    def test_complex_hermitian(self):
        metric = IndefiniteMetric([[1.0, 1j], [-1j, 2.0]])
        self.assertEqual(metric.signature(), (2, 0, 0))
        self.assertAlmostEqual(metric.form([1.0, 0.0]), 1.0)

    def test_rejects_non_hermitian(self):
        with self.assertRaises(NotHermitian):
            IndefiniteMetric([[1.0, 1.0], [0.0, 1.0]])
        with self.assertRaises(NotHermitian):
            IndefiniteMetric(np.ones((2, 3)))


class TestKreinSign(unittest.TestCase):
    def test_definite_metric_positive(self):
        metric = IndefiniteMetric(np.eye(2))
        u = np.array([1.0, 1j]) / np.sqrt(2)
        self.assertEqual(krein_sign(metric, u, 0.5), 1)

    def test_negative_direction(self):
        metric = IndefiniteMetric(np.diag([1.0, -1.0]))
        self.assertEqual(krein_sign(metric, [0.0, 1.0], 2.0), -1)

    def test_nonreal_eigenvalue_gets_zero(self):
        metric = IndefiniteMetric(np.eye(2))
        self.assertEqual(krein_sign(metric, [1.0, 0.0], 1 + 1j), 0)

    def test_isotropic_vector_gets_zero(self):
        metric = IndefiniteMetric(np.diag([1.0, -1.0]))
        u = np.array([1.0, 1.0]) / np.sqrt(2)
        self.assertEqual(krein_sign(metric, u, 1.0), 0)


class TestSobolevSpectrum(unittest.TestCase):
    def test_oblate_cavity_definite(self):
        matrix, metric = massless_top(0.5)
        self.assertEqual(negative_square_count(metric), 0)
        entries = krein_spectrum(matrix, metric)
        self.assertEqual(nonreal_count([e.value for e in entries]), 0)
        self.assertTrue(all(e.krein_sign == 1 for e in entries))
        minus_one = [e for e in entries if abs(e.value + 1) < 1e-9]
        self.assertEqual(len(minus_one), 1)

    def test_greenhill_zone_pair_is_isotropic(self):
        matrix, metric = massless_top(2.0)
        self.assertEqual(negative_square_count(metric), 1)
        entries = krein_spectrum(matrix, metric)
        signs = [e.krein_sign for e in entries if abs(e.value.imag) > 1e-6]
        self.assertEqual(signs, [0, 0])

    def test_sum_rule_on_real_spectrum(self):
        for c in (3.5, 5.0):
            matrix, metric = massless_top(c)
            entries = krein_spectrum(matrix, metric)
            self.assertEqual(nonreal_count([e.value for e in entries]), 0)
            negative = sum(1 for e in entries if e.krein_sign == -1)
            self.assertEqual(negative, negative_square_count(metric))

    def test_pontryagin_bound(self):
        for c in np.linspace(0.2, 5.0, 25):
            if abs(c - 1.0) < 1e-9:
                continue
            matrix, metric = massless_top(c)
            pairs = nonreal_count(value for value, _ in matrix_eigen(matrix)) // 2
            self.assertLessEqual(pairs, negative_square_count(metric))

    def test_metric_makes_matrix_self_adjoint(self):
        for c in (0.5, 2.0, 3.5):
            matrix, metric = massless_top(c)
            product = metric.gram() @ matrix.entries()
            np.testing.assert_allclose(product, product.conj().T, atol=1e-9)

    def test_isotropy_identity(self):
        families = [massless_top(c) for c in (0.5, 2.0, 2.9, 3.5)]
        families += [maclaurin_krein_family(e) for e in (0.5, 0.9, 0.97)]
        for matrix, metric in families:
            for value, u in matrix_eigen(matrix):
                residual = (value - np.conj(value)) * metric.form(u)
                self.assertLess(abs(residual), 1e-9)


class TestCollisionScan(unittest.TestCase):
    def test_sobolev_greenhill_boundary(self):
        family = sobolev_krein_family(SobolevParams(a=1.0))
        path, events = collision_scan(family, np.linspace(2.05, 4.05, 21), name="c")
        self.assertEqual(len(path.grid), 21)
        self.assertEqual(path.name, "c")
        self.assertEqual(len(events), 1)
        event = events[0]
        self.assertEqual(event.kind, SEPARATION)
        lo, hi = event.bracket
        self.assertLessEqual(lo, 3.0 + 1e-6)
        self.assertGreaterEqual(hi, 3.0 - 1e-6)
        self.assertLess(hi - lo, 1e-6)
        self.assertEqual(len(event.values), 1)
        self.assertLess(abs(event.values[0] + 0.5), 1e-8)

    def test_both_zone_boundaries(self):
        family = sobolev_krein_family(SobolevParams(a=1.0))
        _, events = collision_scan(family, np.linspace(1.6, 3.6, 9), name="c")
        self.assertEqual([e.kind for e in events], [SEPARATION])
        _, events = collision_scan(family, np.linspace(1.05, 1.45, 9), name="c")
        self.assertEqual(events, [])

    def test_maclaurin_hamilton_hopf(self):
        path, events = collision_scan(
            maclaurin_krein_family, np.linspace(0.9, 0.99, 10), name="e"
        )
        self.assertEqual(len(events), 1)
        event = events[0]
        self.assertEqual(event.kind, COLLISION)
        self.assertLess(abs(np.mean(event.bracket) - 0.9529), 1e-3)

    def test_definite_path_has_no_events(self):
        family = sobolev_krein_family(SobolevParams(a=1.0))
        path, events = collision_scan(family, np.linspace(0.2, 0.8, 7), name="c")
        self.assertEqual(events, [])
        for entries in path.entries:
            self.assertTrue(all(e.krein_sign == 1 for e in entries))

    def test_grid_must_increase(self):
        with self.assertRaises(DegenerateInput):
            KreinPath("c", (1.0, 1.0), ((), ()))

    def test_krein_collision_flag(self):
        event = CollisionEvent(COLLISION, (0.0, 1.0), (0.5,), (1, -1))
        self.assertTrue(event.is_krein_collision())
        event = CollisionEvent(COLLISION, (0.0, 1.0), (0.5,), (1, 1))
        self.assertFalse(event.is_krein_collision())


class TestEnergyMetric(unittest.TestCase):
    def test_gyroscopic_frequencies_real(self):
        system = MechanicalSystem(
            np.eye(2), G=[[0.0, 3.0], [-3.0, 0.0]], K=np.diag([-1.0, -1.0])
        )
        matrix, metric = energy_metric(system)
        self.assertEqual(negative_square_count(metric), 2)
        entries = krein_spectrum(matrix, metric)
        self.assertEqual(nonreal_count([e.value for e in entries]), 0)
        self.assertEqual(sorted(e.krein_sign for e in entries), [-1, -1, 1, 1])

    def test_rejects_damping(self):
        system = MechanicalSystem(np.eye(2), D=np.eye(2), K=np.eye(2))
        with self.assertRaises(DegenerateInput):
            energy_metric(system)
