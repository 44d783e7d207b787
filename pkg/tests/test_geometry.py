import math
import unittest

import numpy as np

from irs_toolbox import (
    DomainError,
    ORIGIN,
    PointSet,
    campbell_check,
    lens_area_exact,
    lens_area_formula,
    lens_area_numeric,
    link_distance,
    neighbors_within,
    sample_ppp,
)


class PointProcessTestCase(unittest.TestCase):
    def test_empty_process(self):
        points = sample_ppp(0.0, ORIGIN, 45.0, np.random.default_rng(1), 'IRS')
        self.assertEqual(len(points), 0)
        self.assertEqual(points.points.shape, (0, 2))
        self.assertEqual(points.kind, 'IRS')

    def test_points_inside_window(self):
        points = sample_ppp(1e-2, (10.0, -5.0), 20.0, np.random.default_rng(2)).points
        distances = np.hypot(points[:, 0] - 10.0, points[:, 1] + 5.0)
        self.assertTrue(np.all(distances <= 20.0))

    def test_count_mean_and_dispersion(self):
        rng = np.random.default_rng(3)
        lam, radius, trials = 1e-3, 15.0, 10 ** 5
        counts = np.array([len(sample_ppp(lam, ORIGIN, radius, rng)) for _ in range(trials)])
        expected = lam * math.pi * radius ** 2
        self.assertLess(abs(counts.mean() - expected), 4 * math.sqrt(expected / trials))
        self.assertLess(abs(counts.var(ddof=1) / counts.mean() - 1.0), 0.03)

    def test_uniform_radius(self):
        points = sample_ppp(50.0, ORIGIN, 10.0, np.random.default_rng(4)).points
        fraction = np.mean(np.hypot(points[:, 0], points[:, 1]) <= 5.0)
        self.assertAlmostEqual(fraction, 0.25, delta=0.015)

    def test_invalid_arguments(self):
        rng = np.random.default_rng(5)
        self.assertRaises(DomainError, sample_ppp, -1.0, ORIGIN, 1.0, rng)
        self.assertRaises(DomainError, sample_ppp, 1.0, ORIGIN, 0.0, rng)
        self.assertRaises(ValueError, PointSet, 'UE', np.zeros((0, 2)), ORIGIN, 1.0)

    def test_with_point_first(self):
        points = PointSet('U', [[1.0, 2.0]], ORIGIN, 5.0).with_point_first(ORIGIN)
        self.assertEqual(points.points.tolist(), [[0.0, 0.0], [1.0, 2.0]])


class DistanceTestCase(unittest.TestCase):
    def test_link_distance(self):
        self.assertEqual(link_distance(0.0, (3.0, 0.0), (0.0, 4.0)), 5.0)
        self.assertEqual(link_distance(10.0, ORIGIN, ORIGIN), 10.0)
        self.assertAlmostEqual(link_distance(10.0, ORIGIN, (15.0, 0.0)), math.sqrt(325.0), places=12)

    def test_neighbors_within(self):
        points = np.array([[0.0, 15.0], [15.0001, 0.0], [3.0, 4.0], [-20.0, 0.0]])
        self.assertEqual(neighbors_within(points, ORIGIN, 15.0).tolist(), [0, 2])
        self.assertEqual(neighbors_within(np.zeros((0, 2)), ORIGIN, 15.0).tolist(), [])


class LensAreaTestCase(unittest.TestCase):
    def test_exact_values(self):
        self.assertAlmostEqual(lens_area_exact(7.5, 15.0), 78.93, places=2)
        self.assertLess(lens_area_exact(14.85, 15.0), math.pi * 14.85 ** 2)
        self.assertGreater(lens_area_exact(1e-3, 15.0), 0.0)

    def test_exact_small_b_is_half_disk(self):
        b = 1e-2
        self.assertAlmostEqual(lens_area_exact(b, 15.0) / (math.pi * b * b / 2), 1.0, places=3)

    def test_printed_expression(self):
        self.assertAlmostEqual(lens_area_formula(1e-12, 15.0), 0.0, places=9)
        self.assertTrue(math.isfinite(lens_area_formula(14.9, 15.0)))
        # The printed expression is not the intersection area.
        self.assertAlmostEqual(lens_area_formula(7.5, 15.0), -49.13, places=1)
        self.assertLess(lens_area_formula(7.5, 15.0), 0.0)

    def test_numeric_matches_exact(self):
        area, se = lens_area_numeric(7.5, 15.0, 10 ** 6, np.random.default_rng(6))
        self.assertLess(se / area, 0.005)
        self.assertLess(abs(area - lens_area_exact(7.5, 15.0)), 5 * se)

    def test_numeric_near_full_radius(self):
        area, _ = lens_area_numeric(14.85, 15.0, 10 ** 5, np.random.default_rng(7))
        self.assertLess(area, math.pi * 14.85 ** 2)

    def test_domain(self):
        rng = np.random.default_rng(8)
        for fn in (lens_area_exact, lens_area_formula):
            self.assertRaises(DomainError, fn, 0.0, 15.0)
            self.assertRaises(DomainError, fn, 15.0, 15.0)
            self.assertRaises(DomainError, fn, -1.0, 15.0)
        self.assertRaises(DomainError, lens_area_numeric, 7.5, 15.0, 10 ** 3, rng)


class CampbellTestCase(unittest.TestCase):
    def test_constant_function(self):
        error = campbell_check(1e-2, lambda pts: np.ones(len(pts)), 15.0, 10 ** 5, np.random.default_rng(9))
        self.assertLess(error, 0.01)

    def test_path_loss_function(self):
        h = 10.0
        error = campbell_check(1e-2, lambda pts: 1.0 / (h * h + np.sum(pts ** 2, axis=1)), 15.0, 10 ** 5,
                               np.random.default_rng(10))
        self.assertLess(error, 0.02)

    def test_zero_density(self):
        self.assertEqual(campbell_check(0.0, lambda pts: np.ones(len(pts)), 15.0, 10, np.random.default_rng(11)),
                         0.0)


if __name__ == '__main__':
    unittest.main()
