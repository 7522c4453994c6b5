import logging
import unittest

import numpy as np

from dissipstab.errors import InvalidConstraint, NegativeWRadicand
from dissipstab.hurwitz import (
    ASYMPTOTICALLY_STABLE,
    classify,
    hurwitz_H,
    tangent_cone_contains,
)
from dissipstab.msystem import QuarticPoly
from dissipstab.smallalg import Poly, poly_roots, poly_roots_batch
from dissipstab.umbrella import (
    COMPLEX_FIELD,
    DISCRIMINANT,
    HEAVY_DAMPED,
    OTHER,
    SWALLOWTAIL_VERTEX,
    AffineConstraint,
    WhitneyPoint,
    abscissa_min_affine,
    arnold_unfolding,
    bottema_from_whitney,
    discriminant_swallowtail_probe,
    ep_set_point,
    ep_set_sample,
    heavy_damping_test,
    locate_swallowtail_cusp,
    poly_abscissa,
    unfolding_to_whitney,
    whitney_map,
    whitney_surface_sample,
)
from .testing_tools import quartic_from_roots

logging.basicConfig(filename="tests.log", level=logging.WARNING, filemode="w")

# Heavily damped quartic with a4 = 1 close to the vertex.
INTERIOR_ROOTS = [-0.9, -0.95, -1.05, -1 / (0.9 * 0.95 * 1.05)]


class TestWhitney(unittest.TestCase):
    def test_handle(self):
        self.assertEqual(whitney_map(0.0, 3.0), WhitneyPoint(0.0, 3.0, 0.0))

    def test_map_values(self):
        self.assertEqual(whitney_map(1.0, 1.0), WhitneyPoint(1.0, 1.0, 1.0))
        point = whitney_map(-2.0, 3.0)
        self.assertEqual(point, WhitneyPoint(4.0, 3.0, -6.0))
        self.assertEqual(point.residual(), 0)

    def test_sample_on_surface(self):
        points = whitney_surface_sample(np.linspace(-2, 2, 9), np.linspace(-1, 3, 5))
        self.assertEqual(len(points), 45)
        self.assertTrue(all(p.on_surface() for p in points))

    def test_off_surface(self):
        self.assertFalse(WhitneyPoint(1.0, 1.0, 2.0).on_surface())
        self.assertFalse(WhitneyPoint(-1.0, 0.0, 0.0).on_surface())


class TestBottemaBridge(unittest.TestCase):
    def test_double_line(self):
        self.assertEqual(bottema_from_whitney(WhitneyPoint(0.0, 1.5, 0.0)), (0.0, 0.0, 3.5))

    def test_inside_stability_domain(self):
        a1, a3, a2 = bottema_from_whitney(WhitneyPoint(1.0, 1.0, 0.0))
        self.assertEqual((a1, a3, a2), (1.0, 1.0, 3.0))
        self.assertEqual(hurwitz_H(QuarticPoly(a1, a2, a3, 1.0)), -1)

    def test_surface_point_maps_to_surface(self):
        a1, a3, a2 = bottema_from_whitney(WhitneyPoint(1.0, 2.0, 2.0))
        self.assertAlmostEqual(hurwitz_H(QuarticPoly(a1, a2, a3, 1.0)), 0.0, places=12)

    def test_transform_identity(self):
        rng = np.random.default_rng(19)
        checked = 0
        for y1, y2, y3 in rng.uniform([0, -2, -5], [5, 5, 5], size=(15000, 3)):
            point = WhitneyPoint(y1, y2, y3)
            if y3 * y3 / 4 + y1 * y2 < 0:
                continue
            expected = y3 * y3 - y1 * y2 * y2
            for branch in (1, -1):
                a1, a3, a2 = bottema_from_whitney(point, branch)
                value = hurwitz_H(QuarticPoly(a1, a2, a3, 1.0))
                scale = max(1.0, a1 * a1 + a3 * a3 + abs(a1 * a2 * a3))
                self.assertLessEqual(abs(value - expected), 1e-9 * scale)
            checked += 1
        self.assertGreater(checked, 10000)

    def test_negative_radicand(self):
        with self.assertRaises(NegativeWRadicand):
            bottema_from_whitney(WhitneyPoint(1.0, -1.0, 0.0))

    def test_branch_checked(self):
        with self.assertRaises(ValueError):
            bottema_from_whitney(WhitneyPoint(1.0, 1.0, 0.0), branch=0)


class TestEPSet(unittest.TestCase):
    def test_umbrella_point(self):
        q, roots = ep_set_point(0.0)
        self.assertEqual(q.coefficients(), (0.0, 2.0, 0.0, 1.0))
        self.assertEqual(roots, [(-1j, 2), (1j, 2)])

    def test_quadruple_root(self):
        q, roots = ep_set_point(4.0)
        self.assertEqual(q.coefficients(), (4.0, 6.0, 4.0, 1.0))
        self.assertEqual(roots, [(-1.0, 4)])
        self.assertAlmostEqual(poly_abscissa(q.as_poly()), -1.0, places=6)

    def test_real_double_roots(self):
        _, roots = ep_set_point(5.0)
        self.assertEqual(roots, [(-2.0, 2), (-0.5, 2)])

    def test_double_root_structure(self):
        for q, expected in ep_set_sample(np.linspace(0.5, 6.0, 12)):
            if len(expected) == 1:
                continue
            computed = poly_roots(q.as_poly())
            self.assertEqual(sorted(m for _, m in computed), [2, 2])
            for value, _ in expected:
                distance = min(abs(value - root) for root, _ in computed)
                self.assertLess(distance, 1e-6)

    def test_inside_tangent_cone_and_stable(self):
        for q, _ in ep_set_sample(np.linspace(0.5, 4.0, 8)):
            self.assertTrue(tangent_cone_contains((q.a1, q.a3, q.a2)))
            self.assertEqual(classify(q).stability, ASYMPTOTICALLY_STABLE)


class TestHeavyDamping(unittest.TestCase):
    def test_distinct_negative_roots(self):
        self.assertTrue(heavy_damping_test(quartic_from_roots([-1, -2, -3, -4])))

    def test_quadruple_root(self):
        self.assertFalse(heavy_damping_test(QuarticPoly(4, 6, 4, 1)))

    def test_interior_probe(self):
        q = quartic_from_roots(INTERIOR_ROOTS)
        self.assertAlmostEqual(q.a4, 1.0)
        self.assertTrue(heavy_damping_test(q))

    def test_perturbed_vertex_is_not_heavily_damped(self):
        # (λ + 1)⁴ = 0.1 has two complex roots.
        self.assertFalse(heavy_damping_test(QuarticPoly(4, 6, 4, 0.9)))

    def test_imaginary_pairs(self):
        self.assertFalse(heavy_damping_test(QuarticPoly(0, 2, 0, 1)))

    def test_positive_root(self):
        self.assertFalse(heavy_damping_test(quartic_from_roots([1, -2, -3, -4])))

    def test_tight_distinct_roots(self):
        # Dyadic roots keep the coefficients exact. They lie closer than
        # the quadruple-root clustering radius of poly_roots.
        step = 2.0**-12
        roots = [-1.0, -1.0 - 2 * step, -1.0 + 2 * step, -1.0 - step]
        q = quartic_from_roots(roots)
        self.assertTrue(heavy_damping_test(q))
        self.assertFalse(heavy_damping_test(q, tol=3e-4))

    def test_imaginary_part_uses_absolute_tol(self):
        q = quartic_from_roots([-100 + 0.01j, -100 - 0.01j, -1, -2])
        self.assertFalse(heavy_damping_test(q, tol=1e-3))
        self.assertTrue(heavy_damping_test(q, tol=0.015))


class TestAbscissa(unittest.TestCase):
    def test_examples(self):
        quadruple = Poly.from_descending([1, 4, 6, 4, 1])
        self.assertAlmostEqual(poly_abscissa(quadruple), -1, places=6)
        self.assertAlmostEqual(poly_abscissa(Poly.from_descending([1, 0, 6, 0, 25])), 1)
        self.assertAlmostEqual(poly_abscissa(Poly.from_descending([1, 0, 1])), 0)

    def test_fixed_last_coefficient(self):
        for n in (2, 3, 4, 6):
            optimum = abscissa_min_affine(AffineConstraint.fixed_last(n))
            self.assertAlmostEqual(optimum.a_star, -1.0, places=9)
            self.assertTrue(optimum.attained)
            expected = Poly.from_roots([-1.0] * n)
            np.testing.assert_allclose(
                optimum.p_star.descending(), expected.descending(), atol=1e-12
            )

    def test_printed_h(self):
        optimum = abscissa_min_affine(AffineConstraint.fixed_last(4))
        np.testing.assert_array_equal(optimum.h.descending(), [1, 0, 0, 0, -1])

    def test_complex_field(self):
        optimum = abscissa_min_affine(AffineConstraint.fixed_last(4), COMPLEX_FIELD)
        self.assertAlmostEqual(optimum.a_star, -1.0, places=9)
        self.assertTrue(optimum.attained)

    def test_not_attained(self):
        # a2 = -1 for monic quadratics: infimum 0 is never reached.
        optimum = abscissa_min_affine(AffineConstraint((1.0, 0.0, 1.0)))
        self.assertAlmostEqual(optimum.a_star, 0.0, places=9)
        self.assertFalse(optimum.attained)
        self.assertIsNone(optimum.p_star)

    def test_constraint_checks(self):
        with self.assertRaises(InvalidConstraint):
            AffineConstraint((1.0, 0.0, 0.0))
        with self.assertRaises(InvalidConstraint):
            AffineConstraint((1.0,))
        self.assertEqual(AffineConstraint((-1.0, 0.0, 1.0, 0.0)).k, 2)

    def test_constraint_residual(self):
        constraint = AffineConstraint.fixed_last(4)
        self.assertEqual(constraint.residual(Poly.from_roots([-1.0] * 4)), 0)

    def test_field_checked(self):
        with self.assertRaises(ValueError):
            abscissa_min_affine(AffineConstraint.fixed_last(2), "quaternion")

    def test_quadratic_grid_search(self):
        a1 = np.arange(-3.0, 5.0 + 1e-9, 1e-3)
        rows = np.column_stack([np.ones_like(a1), a1, np.ones_like(a1)])
        abscissae = np.max(poly_roots_batch(rows).real, axis=1)
        self.assertGreaterEqual(abscissae.min(), -1 - 1e-3)
        self.assertAlmostEqual(a1[np.argmin(abscissae)], 2.0, delta=1e-2)

    def test_no_perturbation_beats_vertex(self):
        rng = np.random.default_rng(23)
        rows = np.ones((100000, 5))
        rows[:, 1:4] = np.array([4.0, 6.0, 4.0]) + rng.uniform(-0.5, 0.5, size=(100000, 3))
        abscissae = np.max(poly_roots_batch(rows).real, axis=1)
        self.assertGreaterEqual(abscissae.min(), -1 - 1e-7)


class TestSwallowtail(unittest.TestCase):
    def test_vertex_on_discriminant(self):
        probe = discriminant_swallowtail_probe([4.0], [4.0], [6.0])
        self.assertEqual(probe[0].label, DISCRIMINANT)
        self.assertAlmostEqual(probe[0].abscissa, -1.0, delta=2e-3)

    def test_umbrella_point_is_other(self):
        self.assertEqual(discriminant_swallowtail_probe([0.0], [0.0], [2.0])[0].label, OTHER)

    def test_interior_point(self):
        q = quartic_from_roots(INTERIOR_ROOTS)
        probe = discriminant_swallowtail_probe([q.a1], [q.a3], [q.a2])
        self.assertEqual(probe[0].label, HEAVY_DAMPED)

    def test_labels_agree_with_roots(self):
        probe = discriminant_swallowtail_probe([4.5], [4.5], [6.8])
        q = QuarticPoly(4.5, 6.8, 4.5, 1.0)
        expected = HEAVY_DAMPED if heavy_damping_test(q) else OTHER
        self.assertEqual(probe[0].label, expected)

    def test_grid_order(self):
        probe = discriminant_swallowtail_probe([1.0, 2.0], [3.0], [4.0, 5.0])
        self.assertEqual(
            [(p.a1, p.a3, p.a2) for p in probe],
            [(1.0, 3.0, 4.0), (1.0, 3.0, 5.0), (2.0, 3.0, 4.0), (2.0, 3.0, 5.0)],
        )

    def test_cusp_localization(self):
        vertex, spread = locate_swallowtail_cusp()
        np.testing.assert_allclose(vertex, SWALLOWTAIL_VERTEX, atol=1e-3)
        self.assertLess(spread, 0.5)


class TestUnfolding(unittest.TestCase):
    def test_imaginary_eigenvalue_on_umbrella(self):
        values = np.linalg.eigvals(arnold_unfolding(0.5, 0.16, 0.3))
        self.assertTrue(any(abs(value - 0.7j) < 1e-12 for value in values))
        point = unfolding_to_whitney(0.5, 0.16, 0.3)
        self.assertAlmostEqual(point.y1, 0.36)
        self.assertTrue(point.on_surface())

    def test_umbrella_family(self):
        for alpha in (-0.7, -0.2, 0.3, 1.1):
            for mu2 in (-0.4, 0.1, 0.6):
                mu1 = alpha * alpha - mu2 * mu2 / (4 * alpha * alpha)
                point = unfolding_to_whitney(alpha, mu1, mu2)
                self.assertTrue(point.on_surface(tol=1e-10))
                values = np.linalg.eigvals(arnold_unfolding(alpha, mu1, mu2))
                self.assertLess(min(abs(value.real) for value in values), 1e-10)

    def test_off_umbrella(self):
        self.assertFalse(unfolding_to_whitney(0.5, 0.0, 0.3).on_surface())
        values = np.linalg.eigvals(arnold_unfolding(0.5, 0.0, 0.3))
        self.assertGreater(min(abs(value.real) for value in values), 1e-3)
