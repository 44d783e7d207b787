import dataclasses
import math
import unittest

import numpy as np

from irs_toolbox import (
    ElementDraws,
    PowerSample,
    TrialStreams,
    build,
    build_from_points,
    capacity,
    conditional_powers,
    default_params,
    received_power,
    scenario_from_json,
    scenario_to_json,
    symbol_average_power,
    symbol_coefficients,
)
from irs_toolbox.validation import frozen_small_scenarios

NO_POINTS = np.zeros((0, 2))


class BuildTestCase(unittest.TestCase):
    def test_empty_network(self):
        p = default_params(lambda_bs=0.0, lambda_irs=0.0)
        s = build(p, np.random.default_rng(1))
        self.assertTrue(np.all(s.bs_of_user == -1))
        self.assertEqual(symbol_coefficients(s), {})
        self.assertEqual(conditional_powers(s), PowerSample(0.0, 0.0, 0.0))

    def test_typical_user_first(self):
        s = build(default_params(q_elems=4), np.random.default_rng(2))
        self.assertEqual(tuple(s.u_set.points[0]), (0.0, 0.0))
        self.assertEqual(s.u_set.radius, 45.0)
        self.assertEqual(s.typical_user, (0.0, 0.0))

    def test_mean_bs_count(self):
        p = default_params(lambda_u=0.0, lambda_irs=0.0)
        rng = np.random.default_rng(3)
        trials = 10 ** 4
        counts = [len(build(p, rng).bs_set) for _ in range(trials)]
        expected = p.lambda_bs * math.pi * (3 * p.r_co) ** 2
        self.assertLess(abs(np.mean(counts) - expected), 4 * math.sqrt(expected / trials))

    def test_uniform_association(self):
        p = default_params(lambda_irs=0.0)
        bs = np.array([[5.0, 0.0], [0.0, -8.0], [-10.0, 10.0]])
        rng = np.random.default_rng(4)
        trials = 10 ** 4
        chosen = np.array([build_from_points(p, bs, NO_POINTS, NO_POINTS, rng).bs_of_user[0]
                           for _ in range(trials)])
        for b in range(3):
            self.assertLess(abs(np.mean(chosen == b) - 1 / 3), 4 * math.sqrt(2 / 9 / trials))

    def test_out_of_range_bs(self):
        p = default_params()
        s = build_from_points(p, np.array([[20.0, 0.0]]), NO_POINTS, NO_POINTS, np.random.default_rng(5))
        self.assertEqual(s.bs_of_user[0], -1)
        self.assertEqual(s.direct, {})

    def test_blocked_links_are_logged(self):
        p = default_params(h_hat=0.5)
        with self.assertLogs('irs_toolbox.scenario', level='DEBUG') as logs:
            s = build_from_points(p, np.array([[5.0, 0.0]]), NO_POINTS, NO_POINTS, np.random.default_rng(17))
        blocked = int(s.blockages[0].blocked)
        self.assertEqual(logs.output, [f'DEBUG:irs_toolbox.scenario:{blocked} of 1 direct links blocked'])

    def test_every_irs_serves_the_only_user(self):
        p = default_params(lambda_u=0.0, q_elems=2, lambda_irs=1e-2)
        s = build(p, np.random.default_rng(6))
        distances = np.hypot(s.irs_set.points[:, 0], s.irs_set.points[:, 1])
        self.assertTrue(np.all((s.user_of_irs == 0) == (distances <= p.r_co)))
        self.assertTrue(np.all(s.user_of_irs[distances > p.r_co] == -1))

    def test_same_seed_same_scenario(self):
        p = default_params(q_elems=4)
        first = build(p, TrialStreams.from_seed(7, 3))
        second = build(p, TrialStreams.from_seed(7, 3))
        self.assertEqual(scenario_to_json(first), scenario_to_json(second))

    def test_common_random_numbers_across_irs_density(self):
        p = default_params(q_elems=4)
        sparse = build(p.with_values(lambda_irs=1e-4), TrialStreams.from_seed(8, 0))
        dense = build(p.with_values(lambda_irs=1e-2), TrialStreams.from_seed(8, 0))
        self.assertTrue(np.array_equal(sparse.bs_set.points, dense.bs_set.points))
        self.assertTrue(np.array_equal(sparse.u_set.points, dense.u_set.points))
        self.assertTrue(np.array_equal(sparse.bs_of_user, dense.bs_of_user))


class CoefficientsTestCase(unittest.TestCase):
    def test_direct_link_only(self):
        p = default_params()
        s = build_from_points(p, np.array([[5.0, 0.0]]), NO_POINTS, NO_POINTS, np.random.default_rng(9))
        self.assertEqual(symbol_coefficients(s), {0: s.direct[0].coeff})
        powers = conditional_powers(s)
        self.assertEqual(powers.p_i, 0.0)
        self.assertAlmostEqual(powers.p_s / (p.sigma_d_sq * abs(s.direct[0].coeff) ** 2), 1.0, places=12)

    def test_aligned_irs(self):
        p = default_params(kappa=math.inf, q_elems=8)
        s = build_from_points(p, np.array([[5.0, 0.0]]), NO_POINTS, np.array([[0.0, 5.0]]),
                              np.random.default_rng(10))
        self.assertEqual(s.bs_of_user[0], 0)
        self.assertEqual(s.user_of_irs[0], 0)

        to_user = p.lambda_wave / (4 * math.pi * math.sqrt(p.h_irs ** 2 + 25.0))
        from_bs = p.lambda_wave / (4 * math.pi * math.sqrt((p.h_bs - p.h_irs) ** 2 + 50.0))
        reflected = p.q_elems * to_user * from_bs
        expected = (s.direct[0].coeff + reflected) * (1.0 + p.delta)
        self.assertLess(abs(symbol_coefficients(s)[0] - expected), 1e-9 * abs(expected))

    def test_irs_without_feeding_bs(self):
        p = default_params(q_elems=4)
        s = build_from_points(p, NO_POINTS, np.array([[0.0, 3.0]]), np.array([[2.0, 2.0]]),
                              np.random.default_rng(11))
        self.assertTrue(np.all(s.irs_phases[0] == 0.0))
        self.assertEqual(conditional_powers(s).p_s, 0.0)

    def test_element_order_does_not_matter(self):
        p = default_params(q_elems=50, lambda_irs=1e-2)
        s = build(p, TrialStreams.from_seed(12, 0))
        order = np.random.default_rng(13).permutation(p.q_elems)

        def shuffle(draws):
            return ElementDraws(draws.coeffs[order], draws.phases[order])

        shuffled = dataclasses.replace(
            s,
            bs_irs={k: shuffle(v) for k, v in s.bs_irs.items()},
            irs_user={k: shuffle(v) for k, v in s.irs_user.items()},
            irs_phases={k: v[order] for k, v in s.irs_phases.items()},
        )
        self.assertEqual(conditional_powers(shuffled), conditional_powers(s))

    def test_powers_scale_with_symbol_power(self):
        p = default_params(q_elems=10)
        s = build(p, TrialStreams.from_seed(14, 0))
        scaled = dataclasses.replace(s, params=p.with_values(sigma_d_sq=4 * p.sigma_d_sq))
        base, more = conditional_powers(s), conditional_powers(scaled)
        self.assertAlmostEqual(more.p_s, 4 * base.p_s, delta=1e-12 * max(base.p_s, 1e-300))
        self.assertAlmostEqual(more.p_i, 4 * base.p_i, delta=1e-12 * max(base.p_i, 1e-300))

    def test_own_symbol_through_other_irs_is_interference(self):
        p = default_params(q_elems=4)
        users = np.array([[0.0, -14.0]])
        irs = np.array([[0.0, 5.0], [0.0, -12.0]])
        for seed in range(64):
            s = build_from_points(p, np.array([[5.0, 0.0]]), users, irs, np.random.default_rng(seed))
            if s.user_of_irs[1] == 1:
                break
        self.assertEqual(list(s.bs_of_user), [0, 0])
        self.assertEqual(list(s.user_of_irs), [0, 1])

        draws = s.irs_user[(1, 0)]
        silent = dataclasses.replace(s, irs_user={
            **s.irs_user, (1, 0): ElementDraws(np.zeros(p.q_elems, dtype=complex), draws.phases)})
        full, signal_only = symbol_coefficients(s), symbol_coefficients(silent)
        leak = full[0] - signal_only[0]
        self.assertGreater(abs(leak), 0.0)

        powers = conditional_powers(s)
        expected_p_s = p.sigma_d_sq * abs(signal_only[0]) ** 2
        expected_p_i = p.sigma_d_sq * (abs(leak) ** 2 + abs(full[1]) ** 2)
        self.assertAlmostEqual(powers.p_s / expected_p_s, 1.0, places=12)
        self.assertAlmostEqual(powers.p_i / expected_p_i, 1.0, places=9)

    def test_matches_symbol_average(self):
        p = default_params()
        rng = np.random.default_rng(15)
        for s in frozen_small_scenarios(p, 3, rng):
            exact = received_power(s)
            estimate, error = symbol_average_power(s, 20000, rng)
            self.assertLessEqual(abs(estimate - exact), max(0.01 * exact, 5 * error))


class CapacityTestCase(unittest.TestCase):
    def test_capacity(self):
        self.assertAlmostEqual(capacity(3.0, 1.0, 1.0), math.log(2.5), places=12)
        self.assertEqual(capacity(0.0, 5.0, 1.0), 0.0)
        self.assertAlmostEqual(capacity(1e-20, 0.0, 1.0), 1e-20, places=30)


class SnapshotTestCase(unittest.TestCase):
    def test_json_round_trip(self):
        p = default_params(q_elems=6, lambda_irs=5e-3)
        s = build(p, TrialStreams.from_seed(16, 0))
        text = scenario_to_json(s)
        restored = scenario_from_json(text)
        self.assertEqual(scenario_to_json(restored), text)
        self.assertEqual(conditional_powers(restored), conditional_powers(s))


if __name__ == '__main__':
    unittest.main()
