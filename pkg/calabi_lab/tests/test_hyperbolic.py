"""
Unit tests for hyperbolic rotational surfaces
"""
import math
import unittest

import numpy as np
from numpy.testing import assert_allclose

from calabi_lab.core.diffgeom import parametric_curvature
from calabi_lab.core.hyperbolic import (Completeness, completeness_classifier, domain_halfwidth, grim_reaper,
                                        halfwidth_closed_form, hyperbolic_gauss_curvature, hyperbolic_partner,
                                        hyperbolic_pde_residual, hyperbolic_profile, hyperbolic_revolve,
                                        partner_points)
from calabi_lab.core.weights import WeightKind
from calabi_lab.utils.errors import GridError, ProfileError


class TestHyperbolicProfile(unittest.TestCase):
    def test_alpha_minus_one_is_a_line(self):
        p = hyperbolic_profile(-1.0, 2.0, x_extent=1.0, h=1e-2)
        assert_allclose(p.u, 2.0)
        assert_allclose(p.z, 0.0)
        self.assertEqual(len(p), 201)
        self.assertEqual(p.halfwidth, math.inf)
        self.assertEqual(hyperbolic_pde_residual(p), 0.0)

    def test_alpha_one_reaches_the_light_cone(self):
        """Test the first integral and the light-cone end of the alpha = 1 profile"""
        p = hyperbolic_profile(1.0, 1.0, h=1e-3)
        self.assertLessEqual(np.max(p.first_integral_defect()), 1e-8)
        self.assertTrue(np.all(np.diff(p.x) > 0))
        self.assertTrue(np.all(np.diff(p.z) < 0))
        assert_allclose(p.u, p.u[::-1], atol=1e-12)
        end = (p.u < 0.01) & (p.x > 0)
        self.assertTrue(end.any())
        self.assertTrue(np.all(p.slope()[end] < -0.99))
        self.assertFalse(p.uniform[-1])
        self.assertLess(hyperbolic_pde_residual(p), 1e-3)
        self.assertEqual(p.weight().kind, WeightKind.LOG_ALPHA)

    def test_alpha_minus_two_is_entire(self):
        """Test that the convex alpha = -2 profile tends to the light-cone slope at both ends"""
        p = hyperbolic_profile(-2.0, 1.0, x_extent=50.0, h=1e-2)
        slope = p.slope()
        self.assertGreater(slope[-1], 0.99)
        self.assertLess(slope[0], -0.99)
        self.assertTrue(p.uniform.all())
        self.assertEqual(p.halfwidth, math.inf)

    def test_bad_arguments(self):
        with self.assertRaises(ProfileError):
            hyperbolic_profile(1.0, 0.0)
        with self.assertRaises(ProfileError):
            hyperbolic_profile(1.0, 1.0, h=-1e-3)


class TestHalfwidth(unittest.TestCase):
    def test_values(self):
        """Test the quadrature half-width against known values"""
        self.assertEqual(domain_halfwidth(-2.0, 1.0), math.inf)
        self.assertAlmostEqual(domain_halfwidth(0.0, 1.0), 0.5 * math.pi, places=8)
        self.assertAlmostEqual(domain_halfwidth(1.0, 3.0), halfwidth_closed_form(1.0, 3.0), places=9)
        self.assertEqual(halfwidth_closed_form(-3.0, 1.0), math.inf)

    def test_profile_end_matches_halfwidth(self):
        p = hyperbolic_profile(1.0, 1.0, h=1e-3)
        self.assertAlmostEqual(p.x[-1], p.halfwidth, delta=1e-4)

    def test_line_has_no_halfwidth(self):
        with self.assertRaises(ProfileError):
            domain_halfwidth(-1.0, 1.0)


class TestCurvature(unittest.TestCase):
    def test_closed_form(self):
        self.assertEqual(hyperbolic_gauss_curvature(1.0, 1.0, 1.0), 2.0)
        assert_allclose(hyperbolic_gauss_curvature(-1.0, 3.0, [0.5, 1.0, 4.0]), 0.0)

    def test_decay_for_complete_bowls(self):
        """Test that K tends to 0 at large heights when -2 < alpha < -1"""
        values = np.abs(hyperbolic_gauss_curvature(-1.5, 1.0, [1.0, 1e3, 1e6]))
        self.assertTrue(np.all(np.diff(values) < 0))
        self.assertLess(values[-1], 1e-5)

    def test_alpha_minus_two_is_constant(self):
        assert_allclose(hyperbolic_gauss_curvature(-2.0, 2.0, [1.0, 10.0, 100.0]), -4.0)

    def test_completeness(self):
        self.assertEqual(completeness_classifier(-1.5), Completeness.COMPLETE)
        self.assertEqual(completeness_classifier(-2.0), Completeness.COMPLETE)
        self.assertEqual(completeness_classifier(-3.0), Completeness.INCOMPLETE)
        for alpha in (-1.0, 0.0):
            with self.assertRaises(ProfileError):
                completeness_classifier(alpha)


class TestMeshes(unittest.TestCase):
    def test_revolve_attributes(self):
        """Test per-vertex curvature on the flat and convex orbits"""
        flat = hyperbolic_revolve(hyperbolic_profile(-1.0, 2.0, x_extent=1.0, h=1e-2))
        assert_allclose(flat.attributes['K'], 0.0)
        assert_allclose(flat.attributes['H'], 0.5)

        p = hyperbolic_profile(1.0, 1.0, h=1e-2)
        mesh = hyperbolic_revolve(p, n_t=33)
        self.assertTrue(np.all(mesh.attributes['K'] > 0))
        self.assertEqual(len(mesh.vertices), len(p) * 33)
        center = (len(p) // 2) * 33 + 16
        assert_allclose(mesh.vertices[center], [0.0, 0.0, 1.0], atol=1e-12)

    def test_revolve_needs_samples(self):
        with self.assertRaises(GridError):
            hyperbolic_revolve(hyperbolic_profile(-1.0, 1.0, x_extent=1.0, h=1e-1), n_t=4)

    def test_partner(self):
        """Test the closed-form t coordinate and the sign of the partner's curvature"""
        p = hyperbolic_profile(1.0, 1.0, h=1e-3)
        t = np.linspace(-1.0, 1.0, 2001)
        points = partner_points(p, t)
        assert_allclose(points[0, -1, 1], math.sinh(1.0), rtol=1e-5)
        assert_allclose(points[len(p) // 2, :, 0], 0.0, atol=1e-12)

        rows = np.flatnonzero(p.uniform)[::10]
        sub = points[rows][:, ::10]
        K = parametric_curvature(sub, 10 * p.h, 10 * (t[1] - t[0]))
        self.assertTrue(np.all(K[2:-2, 2:-2] < 0))

    def test_line_partner_is_grim_reaper(self):
        p = hyperbolic_profile(-1.0, 1.0, x_extent=1.0, h=1e-1)
        self.assertEqual(hyperbolic_partner(p).name, 'grim_reaper')


class TestGrimReaper(unittest.TestCase):
    def test_closed_form_mesh(self):
        mesh = grim_reaper(0.0, 1.0)
        assert_allclose(mesh.vertices[16 * 33 + 16], 0.0, atol=1e-12)
        self.assertTrue(np.all(np.abs(mesh.vertices[:, 1]) < 0.5 * math.pi))

    def test_tilted_mesh(self):
        """Test that the t = 0 column of the tilted mesh has first coordinate y/lambda"""
        mesh = grim_reaper(0.5, 1.0, y_range=(-1.0, 1.0), t_range=(-1.0, 1.0), n=(5, 9))
        rows = mesh.vertices.reshape(5, 9, 3)
        assert_allclose(rows[:, 4, 0], 2.0 * np.linspace(-1.0, 1.0, 5), atol=1e-12)
        self.assertEqual(mesh.name, 'tilted_grim_reaper_0.5')

    def test_bad_height(self):
        with self.assertRaises(ProfileError):
            grim_reaper(0.0, 0.0)


if __name__ == '__main__':
    unittest.main()
