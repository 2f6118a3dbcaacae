"""
Unit tests for the Calabi transform
"""
import math
import unittest
from dataclasses import replace

import numpy as np
from numpy.testing import assert_allclose, assert_array_equal

from calabi_lab.core.calabi import (Direction, InvariantReport, fit_dual_exponent, forward_transform, hessian_curl,
                                    hessian_fields, integrate_potential_gradient, inverse_transform,
                                    resample_image_graph, round_trip_defect, verify_pair)
from calabi_lab.core.diffgeom import GraphSurface, Grid2D, Signature, pde_residual, spacelike_mask
from calabi_lab.core.hyperbolic import grim_reaper_source
from calabi_lab.core.radial import Forcing, bowl_profile, lorentz_bowl_profile, profile_to_graph
from calabi_lab.core.weights import WeightKind, make_weight
from calabi_lab.utils.errors import FoldOverError, GridError, IntegrationError


def plane(grid, slope=0.0, signature=Signature.EUCLIDEAN):
    return GraphSurface.from_function(grid, lambda x, y: slope * x, signature)


class TestPotential(unittest.TestCase):
    def setUp(self):
        self.grid = Grid2D.from_bounds(0.0, 1.0, 0.0, 1.0, 0.1)
        self.minimal = make_weight('minimal')

    def test_hessian_of_flat_graph(self):
        """Test that the flat graph prescribes the identity Hessian in both signatures"""
        for signature in Signature:
            Hxx, Hxy, Hyy = hessian_fields(plane(self.grid, signature=signature), self.minimal)
            assert_allclose(Hxx, 1.0)
            assert_allclose(Hxy, 0.0)
            assert_allclose(Hyy, 1.0)

    def test_hessian_of_tilted_plane(self):
        Hxx, Hxy, Hyy = hessian_fields(plane(self.grid, 1.0), self.minimal)
        assert_allclose(Hxx, math.sqrt(2.0))
        assert_allclose(Hxy, 0.0, atol=1e-12)
        assert_allclose(Hyy, 1.0 / math.sqrt(2.0))

    def test_integrate_constant_hessian(self):
        """Test that the identity Hessian integrates to (x, y)"""
        ones = np.ones(self.grid.shape)
        potential = integrate_potential_gradient((ones, np.zeros_like(ones), ones), self.grid)
        X, Y = self.grid.mesh()
        assert_allclose(potential.Px, X, atol=1e-12)
        assert_allclose(potential.Py, Y, atol=1e-12)
        assert_allclose(potential.compat_residual, 0.0, atol=1e-12)
        self.assertTrue(potential.valid.all())

    def test_all_invalid_hessian(self):
        nan = np.full(self.grid.shape, np.nan)
        with self.assertRaises(IntegrationError):
            integrate_potential_gradient((nan, nan, nan), self.grid)

    def test_integrate_over_a_disk(self):
        """Test that a valid region shaped like a disk integrates to (x, y) up to the gauge"""
        grid = Grid2D.from_bounds(-1.0, 1.0, -1.0, 1.0, 0.1)
        X, Y = grid.mesh()
        disk = np.hypot(X, Y) <= 0.9
        ones = np.where(disk, 1.0, np.nan)
        potential = integrate_potential_gradient((ones, np.where(disk, 0.0, np.nan), ones), grid)
        j0, i0 = np.argwhere(disk)[0]
        assert_allclose(potential.Px[disk], (X - X[j0, i0])[disk], atol=1e-12)
        assert_allclose(potential.Py[disk], (Y - Y[j0, i0])[disk], atol=1e-12)
        assert_allclose(potential.compat_residual[disk], 0.0, atol=1e-12)
        self.assertTrue(np.all(np.isnan(potential.Px[~disk])))
        assert_array_equal(potential.valid, disk)

    def test_disconnected_region(self):
        """Test that two separate blobs of valid nodes are refused"""
        grid = Grid2D.from_bounds(-1.0, 1.0, -1.0, 1.0, 0.1)
        X, Y = grid.mesh()
        blobs = (np.hypot(X + 0.5, Y) < 0.3) | (np.hypot(X - 0.5, Y) < 0.3)
        ones = np.where(blobs, 1.0, np.nan)
        with self.assertRaises(IntegrationError):
            integrate_potential_gradient((ones, np.where(blobs, 0.0, np.nan), ones), grid)

    def test_plane_over_a_disk(self):
        """Test the transform and the resampling of a plane known only on a disk"""
        grid = Grid2D.from_bounds(-1.0, 1.0, -1.0, 1.0, 0.1)
        s = GraphSurface.from_function(grid, lambda x, y: np.where(np.hypot(x, y) <= 0.9, 0.0, np.nan))
        pair = forward_transform(s, self.minimal)
        X, Y = grid.mesh()
        ok = pair.valid
        self.assertGreater(np.count_nonzero(ok), 150)
        assert_allclose(pair.image_points[..., 0][ok] - X[ok], pair.image_points[..., 0][ok][0] - X[ok][0],
                        atol=1e-12)
        image = resample_image_graph(pair)
        self.assertTrue(image.valid.all())
        assert_allclose(image.u, 0.0, atol=1e-12)

    def test_boundary_ring_is_entered_from_inside(self):
        """Test that the curl next to the boundary converges at second order on the soliton bowl"""
        w = make_weight('linear', 1.0)
        profile = bowl_profile(w, 0.0, s_max=2.5, h=1e-3)
        ring = []
        for h in (0.05, 0.025):
            grid = Grid2D.from_bounds(-1.0, 1.0, -1.0, 1.0, h)
            curl = hessian_curl(hessian_fields(profile_to_graph(profile, grid), w), grid)
            first = grid.interior_mask(1) & ~grid.interior_mask(2)
            ring.append(np.max(curl[first]))
        self.assertGreater(ring[0] / ring[1], 3.0)

    def test_non_solution_is_not_integrable(self):
        """Test that x^2 y, not weighted minimal, leaves a curl that does not shrink with h"""
        curls = []
        for h in (0.05, 0.025):
            grid = Grid2D.from_bounds(0.0, 1.0, 0.0, 1.0, h)
            s = GraphSurface.from_function(grid, lambda x, y: x ** 2 * y)
            curl = hessian_curl(hessian_fields(s, self.minimal), grid)
            curls.append(np.max(curl[grid.interior_mask()]))
            potential = forward_transform(s, self.minimal).potential
            self.assertGreater(np.nanmax(potential.compat_residual), 1e-3)
        self.assertGreater(curls[1], 0.1)
        self.assertTrue(0.5 <= curls[0] / curls[1] <= 2.0)


class TestTransforms(unittest.TestCase):
    def setUp(self):
        self.grid = Grid2D.from_bounds(0.0, 1.0, 0.0, 1.0, 0.1)
        self.minimal = make_weight('minimal')

    def test_plane_identity(self):
        """Test that the horizontal plane maps to itself"""
        pair = forward_transform(plane(self.grid), self.minimal)
        X, Y = self.grid.mesh()
        assert_allclose(pair.image_points[..., 0], X, atol=1e-12)
        assert_allclose(pair.image_points[..., 1], Y, atol=1e-12)
        assert_allclose(pair.image_points[..., 2], 0.0, atol=1e-12)
        self.assertEqual(pair.direction, Direction.EUCLID_TO_LORENTZ)
        self.assertEqual(pair.dual.kind, WeightKind.MINIMAL)

        image = resample_image_graph(pair)
        self.assertEqual(image.signature, Signature.LORENTZIAN)
        assert_allclose(image.u, 0.0, atol=1e-12)
        report = verify_pair(pair, image, tolerances={'discretization': 1e-12})
        self.assertTrue(report.passed, report.failures())

    def test_tilted_plane(self):
        """Test that u = x maps to the Lorentzian plane X / sqrt 2 with either resampler"""
        pair = forward_transform(plane(self.grid, 1.0), self.minimal)
        for method in ('spline', 'linear'):
            image = resample_image_graph(pair, method)
            TX, _ = image.grid.mesh()
            inner = image.grid.interior_mask()
            assert_allclose(image.u[inner], TX[inner] / math.sqrt(2.0), atol=1e-10, err_msg=method)
            report = verify_pair(pair, image)
            self.assertLessEqual(report.value('gaussmap_defect'), 1e-12)
            self.assertLessEqual(report.value('dual_pde_max'), 1e-8)

    def test_inverse_of_flat_graph(self):
        pair = inverse_transform(plane(self.grid, signature=Signature.LORENTZIAN), self.minimal)
        X, Y = self.grid.mesh()
        assert_allclose(pair.image_points[..., 0], X, atol=1e-12)
        assert_allclose(pair.image_points[..., 1], Y, atol=1e-12)
        self.assertEqual(pair.direction, Direction.LORENTZ_TO_EUCLID)

    def test_inverse_of_tilted_plane(self):
        """Test that a spacelike plane of slope 1/sqrt 2 maps to a plane of slope 1"""
        slope = 1.0 / math.sqrt(2.0)
        pair = inverse_transform(plane(self.grid, slope, Signature.LORENTZIAN), self.minimal)
        X = pair.image_points[..., 0]
        assert_allclose(X, slope * self.grid.mesh()[0], atol=1e-12)
        offset = pair.image_points[..., 2] - X
        assert_allclose(offset, offset[0, 0], atol=1e-12)

    def test_wrong_signature(self):
        with self.assertRaises(GridError):
            forward_transform(plane(self.grid, signature=Signature.LORENTZIAN), self.minimal)
        with self.assertRaises(GridError):
            inverse_transform(plane(self.grid), self.minimal)

    def test_fold_over_is_reported(self):
        """Test that a mirrored image projection is refused with the offending cells"""
        pair = forward_transform(plane(self.grid), self.minimal)
        pair.image_points[..., 0] *= -1.0
        with self.assertRaises(FoldOverError) as ctx:
            resample_image_graph(pair)
        self.assertGreater(len(ctx.exception.cells), 0)

    def test_unknown_resampler(self):
        pair = forward_transform(plane(self.grid), self.minimal)
        with self.assertRaises(ValueError):
            resample_image_graph(pair, 'nearest')

    def test_soliton_bowl_pair(self):
        """Test that the soliton bowl maps to a spacelike graph through a convex potential"""
        w = make_weight('linear', 1.0)
        profile = bowl_profile(w, 0.0, s_max=2.5, h=1e-3)
        grid = Grid2D.from_bounds(-1.0, 1.0, -1.0, 1.0, 0.05)
        pair = forward_transform(profile_to_graph(profile, grid), w)
        self.assertEqual(pair.dual, make_weight('log', -1.0))
        asym, smallest = pair.potential.jacobian_checks()
        self.assertLess(asym, 1e-2)
        self.assertGreater(smallest, 0.0)

        image = resample_image_graph(pair)
        self.assertTrue(image.valid.all())
        self.assertTrue(spacelike_mask(image).all())
        report = verify_pair(pair, image)
        self.assertLessEqual(report.value('gaussmap_defect'), 1e-12)
        self.assertLess(report.value('dual_pde_max'), 1e3 * 0.05 ** 2)

    def test_curvature_of_the_resampled_graph(self):
        """Test that hh and kk read the resampled image graph, not only the source grid"""
        w = make_weight('linear', 1.0)
        profile = bowl_profile(w, 0.0, s_max=2.5, h=1e-3)
        grid = Grid2D.from_bounds(-1.0, 1.0, -1.0, 1.0, 0.05)
        pair = forward_transform(profile_to_graph(profile, grid), w)
        image = resample_image_graph(pair)
        report = verify_pair(pair, image)
        for name in ('hh_max', 'kk_max', 'hh_param_max', 'kk_param_max'):
            self.assertLess(report.value(name), 1e3 * 0.05 ** 2, name)

        TX, TY = image.grid.mesh()
        bent = replace(image, u=image.u - 0.05 * TX ** 2)
        broken = verify_pair(pair, bent)
        self.assertGreater(broken.value('hh_max'), 10.0 * report.value('hh_max'))
        self.assertEqual(broken.value('hh_param_max'), report.value('hh_param_max'))

    def test_lorentzian_bowl_pair(self):
        """Test that the spacelike bowl of f = 1 maps to a graph of the reflected log weight"""
        forcing = Forcing()
        profile = lorentz_bowl_profile(forcing, 1.0, r_max=2.0, h=1e-3)
        grid = Grid2D.from_bounds(-1.0, 1.0, -1.0, 1.0, 0.05)
        pair = inverse_transform(profile_to_graph(profile, grid), forcing.to_weight())
        self.assertEqual(pair.dual, make_weight('scaledlog', -1.0, -1.0))
        image = resample_image_graph(pair)
        self.assertEqual(image.signature, Signature.EUCLIDEAN)
        self.assertGreater(np.count_nonzero(image.valid), 0.95 * image.u.size)
        self.assertTrue(np.all(image.u[image.valid] < 0.0))
        report = verify_pair(pair, image)
        self.assertLessEqual(report.value('gaussmap_defect'), 1e-12)
        self.assertLess(report.value('dual_pde_max'), 1e3 * 0.05 ** 2)

        reflected = GraphSurface(image.grid, -image.u, Signature.EUCLIDEAN, valid=image.valid)
        residual = pde_residual(reflected, make_weight('log', -1.0))
        inner = image.grid.interior_mask()
        assert_allclose(np.nanmax(np.abs(residual[inner])), report.value('dual_pde_max'), rtol=1e-9)

    def test_round_trip_of_minimal_graph(self):
        """Test that Scherk's surface survives forward then inverse up to an affine gauge"""
        grid = Grid2D.from_bounds(-0.6, 0.6, -0.6, 0.6, 0.05)
        s = GraphSurface.from_function(grid, lambda x, y: np.log(np.cos(y) / np.cos(x)))
        defect = round_trip_defect(s, self.minimal)
        self.assertLess(defect['horizontal'], 0.05)
        self.assertLess(defect['height'], 0.05)


class TestDualExponent(unittest.TestCase):
    def test_ruled_surface_exponent(self):
        """Test that sqrt(1 + y^2) is fitted by the exponent -1"""
        grid = Grid2D.from_bounds(0.0, 0.2, -1.0, 1.0, 0.02)
        a, residual = fit_dual_exponent(grim_reaper_source(0.0, 1.0, grid))
        self.assertAlmostEqual(a, -1.0, delta=1e-3)
        self.assertLess(residual, 1e-2)


class TestInvariantReport(unittest.TestCase):
    def test_rules(self):
        report = InvariantReport()
        self.assertTrue(report.add('small', 1.0, 2.0))
        self.assertFalse(report.add('large', 3.0, 2.0))
        self.assertTrue(report.add('ratio', 4.0, 3.0, rule='>='))
        self.assertTrue(report.add('window', -2.01, (-2.05, -1.95), rule='in'))
        self.assertFalse(report.passed)
        self.assertEqual(report.failures(), ['large'])
        with self.assertRaises(ValueError):
            report.add('bad', 1.0, 1.0, rule='<')

    def test_nan_never_passes(self):
        """Test that a NaN residual fails and serializes as null"""
        report = InvariantReport(metadata={'preset': 'test'})
        report.add('missing', math.nan, 1.0)
        report.add('unbounded', 5.0, (3.0, math.inf), rule='in')
        data = report.to_dict()
        self.assertFalse(data['passed'])
        self.assertIsNone(data['entries']['missing']['value'])
        self.assertEqual(data['entries']['unbounded']['tolerance'], [3.0, None])
        self.assertTrue(data['entries']['unbounded']['passed'])
        self.assertEqual(data['metadata'], {'preset': 'test'})


if __name__ == '__main__':
    unittest.main()
