"""
Verification scenarios run end to end
"""
import unittest

from calabi_lab.core.presets import PRESETS, run_preset
from calabi_lab.utils.errors import ConfigError


class TestPresets(unittest.TestCase):
    def test_every_preset_passes(self):
        """Test that every named scenario meets its oracle"""
        for name in PRESETS:
            with self.subTest(preset=name):
                report = run_preset(name)
                self.assertTrue(report.passed, f"{name}: {report.failures()}")
                self.assertEqual(report.metadata['preset'], name)

    def test_dual_exponent_sign(self):
        report = run_preset('dual-exponent')
        self.assertAlmostEqual(report.value('fitted_exponent'), -2.0, delta=0.05)
        self.assertEqual(report.metadata['sign'], 'a = -beta/(beta+1)')
        self.assertGreaterEqual(report.value('fit_residual_ratio'), 2.5)

    def test_soliton_bowl_converges_up_to_the_boundary(self):
        """Test second-order convergence of every pair relation at margin 1"""
        report = run_preset('soliton-bowl')
        for name in ('hh_max', 'kk_max', 'conformal_max', 'dual_pde_max'):
            self.assertGreaterEqual(report.value(f"{name}_ratio"), 3.0, name)

    def test_lorentzian_bowl_pair_records_the_reflection(self):
        report = run_preset('lorentz-soliton-pair')
        self.assertTrue(report.metadata['dual'].startswith('scaledlog:'))
        self.assertEqual(report.value('dual_is_reflected_log'), 1.0)
        self.assertIn('log:-1', report.metadata['reflection'])
        self.assertEqual(report.metadata['direction'], 'lorentz_to_euclid')
        self.assertAlmostEqual(report.value('reflected_pde_max'), report.value('dual_pde_max'), places=12)

    def test_unknown_preset(self):
        with self.assertRaises(ConfigError):
            run_preset('sphere')


if __name__ == '__main__':
    unittest.main()
