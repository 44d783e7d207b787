import math
import unittest

import numpy as np

from irs_toolbox import (
    BlockageDraw,
    bs_user_channel,
    directivity_gain,
    draw_blockage,
    irs_element_channels,
    irs_phase,
    default_params,
    rician_coefficients,
    rician_weights,
)


class RicianTestCase(unittest.TestCase):
    def test_weights(self):
        self.assertEqual(rician_weights(math.inf), (1.0, 0.0))
        self.assertEqual(rician_weights(0.0), (0.0, 1.0))
        spec, scat = rician_weights(1.0)
        self.assertAlmostEqual(spec ** 2 + scat ** 2, 1.0, places=15)

    def test_specular_link_has_free_space_amplitude(self):
        rng = np.random.default_rng(1)
        amplitude = 0.01 / (4 * math.pi * 20.0)
        coeffs, phases = rician_coefficients(math.inf, 0.01, 20.0, rng, size=100)
        self.assertTrue(np.allclose(np.abs(coeffs), amplitude, rtol=1e-12, atol=0))
        self.assertTrue(np.all((phases >= 0) & (phases < 2 * math.pi)))

    def test_mean_power(self):
        amplitude = 0.01 / (4 * math.pi * 20.0)
        for kappa in (0.0, 1.0):
            coeffs, _ = rician_coefficients(kappa, 0.01, 20.0, np.random.default_rng(2), size=10 ** 5)
            self.assertAlmostEqual(np.mean(np.abs(coeffs) ** 2) / amplitude ** 2, 1.0, delta=0.02)

    def test_scalar_draw(self):
        coeff, phase = rician_coefficients(1.0, 0.01, 20.0, np.random.default_rng(3))
        self.assertIsInstance(coeff, complex)
        self.assertIsInstance(phase, float)

    def test_elements_are_independent(self):
        p = default_params(q_elems=2, kappa=0.0)
        rng = np.random.default_rng(4)
        draws = np.array([irs_element_channels(p, (0.0, 0.0), (10.0, 0.0), 11.0, rng).coeffs
                          for _ in range(20000)])
        corr = np.corrcoef(np.abs(draws[:, 0]), np.abs(draws[:, 1]))[0, 1]
        self.assertLess(abs(corr), 0.04)

    def test_element_channels_shape(self):
        p = default_params(q_elems=16)
        draws = irs_element_channels(p, (0.0, 0.0), (10.0, 0.0), 1.0, np.random.default_rng(5))
        self.assertEqual(draws.coeffs.shape, (16,))
        self.assertEqual(draws.phases.shape, (16,))


class BlockageTestCase(unittest.TestCase):
    def test_frequency(self):
        p = default_params(p_b=0.3)
        rng = np.random.default_rng(6)
        n = 10 ** 5
        blocked = sum(draw_blockage(p, rng).blocked for _ in range(n))
        self.assertLess(abs(blocked / n - 0.3), 4 * math.sqrt(0.3 * 0.7 / n))

    def test_blocked_link_is_attenuated(self):
        p = default_params(kappa=math.inf)
        free = bs_user_channel(p, (15.0, 0.0), (0.0, 0.0), BlockageDraw(1.0), np.random.default_rng(7))
        blocked = bs_user_channel(p, (15.0, 0.0), (0.0, 0.0), BlockageDraw(p.h_hat), np.random.default_rng(7))
        self.assertAlmostEqual(abs(blocked.coeff) ** 2 / abs(free.coeff) ** 2, p.h_hat, places=12)
        self.assertAlmostEqual(abs(free.coeff), 0.01 / (4 * math.pi * math.sqrt(325.0)), places=15)
        self.assertFalse(BlockageDraw(1.0).blocked)


class DirectivityTestCase(unittest.TestCase):
    def test_main_lobe_and_sidelobe(self):
        self.assertEqual(directivity_gain((0.0, 0.0), (1.0, 0.0), (5.0, 0.0), 0.01, 0.01), 1.0)
        self.assertEqual(directivity_gain((0.0, 0.0), (1.0, 0.0), (-1.0, 0.0), 0.01, 0.01), 0.01)
        self.assertEqual(directivity_gain((0.0, 0.0), (1.0, 0.0), (0.0, 1.0), 0.01, 0.2), 0.2)

    def test_boundary_is_inside(self):
        # cos = 3/5 exactly, threshold 1 - 0.4
        self.assertEqual(directivity_gain((0.0, 0.0), (1.0, 0.0), (3.0, 4.0), 0.4, 0.01), 1.0)

    def test_degenerate_direction(self):
        with self.assertLogs('irs_toolbox.channel', level='WARNING'):
            self.assertEqual(directivity_gain((1.0, 1.0), (1.0, 1.0), (2.0, 0.0), 0.01, 0.01), 1.0)


class PhaseTestCase(unittest.TestCase):
    def test_irs_phase(self):
        self.assertEqual(irs_phase(0.0, 0.0), 0.0)
        self.assertAlmostEqual(irs_phase(1.0, 2.0), 2 * math.pi - 3.0, places=12)
        phases = irs_phase(np.array([0.5, 6.0]), np.array([0.25, 6.0]))
        self.assertTrue(np.all((phases >= 0) & (phases < 2 * math.pi)))
        self.assertTrue(np.allclose(np.exp(1j * (phases + np.array([0.75, 12.0]))), 1.0, atol=1e-12))

    def test_aligned_elements_add_coherently(self):
        p = default_params(kappa=math.inf, q_elems=64)
        rng = np.random.default_rng(8)
        to_irs = irs_element_channels(p, (0.0, 0.0), (10.0, 0.0), p.h_bs - p.h_irs, rng)
        to_user = irs_element_channels(p, (10.0, 0.0), (10.0, 5.0), p.h_irs, rng)
        theta = irs_phase(to_irs.phases, to_user.phases)
        total = np.sum(to_user.coeffs * np.exp(1j * theta) * to_irs.coeffs)
        expected = 64 * np.abs(to_irs.coeffs[0]) * np.abs(to_user.coeffs[0])
        self.assertAlmostEqual(abs(total) / expected, 1.0, places=9)
        self.assertLess(abs(total.imag), 1e-9 * expected)

    def test_other_user_adds_incoherently(self):
        p = default_params(kappa=math.inf, q_elems=10 ** 4)
        rng = np.random.default_rng(9)
        to_irs = irs_element_channels(p, (0.0, 0.0), (10.0, 0.0), p.h_bs - p.h_irs, rng)
        served = irs_element_channels(p, (10.0, 0.0), (10.0, 5.0), p.h_irs, rng)
        other = irs_element_channels(p, (10.0, 0.0), (5.0, 0.0), p.h_irs, rng)
        theta = irs_phase(to_irs.phases, served.phases)
        unit = np.exp(1j * (np.angle(other.coeffs) + theta + np.angle(to_irs.coeffs)))
        self.assertLess(abs(np.mean(unit)), 0.05)


if __name__ == '__main__':
    unittest.main()
