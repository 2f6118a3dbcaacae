"""
Unit tests for the command line
"""
import json
import os
import shutil
import tempfile
import unittest
from unittest.mock import patch

from calabi_lab.core.diffgeom import Signature, spacelike_mask
from calabi_lab.shell import EXIT_ERROR, EXIT_OK, EXIT_VERIFY_FAILED, run_cli
from calabi_lab.utils.field_io import load_field_csv, load_table
from calabi_lab.utils.mesh import load_mesh_json
from calabi_lab.utils.report_store import ReportStore


class TestShell(unittest.TestCase):
    def setUp(self):
        # Create a temporary directory for test outputs
        self.temp_dir = tempfile.mkdtemp()
        self.env = patch.dict(os.environ, {'CALABI_THREADS': '1'})
        self.env.start()
        os.environ.pop('CALABI_OUTPUT_DIR', None)

    def tearDown(self):
        self.env.stop()
        shutil.rmtree(self.temp_dir)

    def path(self, name):
        return os.path.join(self.temp_dir, name)

    def test_verify_preset(self):
        """Test that a passing preset exits 0 and writes its report"""
        out = self.path('report.json')
        self.assertEqual(run_cli(['verify', '--preset', 'plane-identity', '--out', out]), EXIT_OK)
        with open(out, encoding='utf-8') as f:
            report = json.load(f)
        self.assertTrue(report['passed'])
        self.assertEqual(report['metadata']['preset'], 'plane-identity')

    def test_soliton_bowl_profile(self):
        """Test u ~ r^2/4 near the axis of the exported soliton bowl"""
        out = self.path('bowl.csv')
        self.assertEqual(run_cli(['bowl', '--weight', 'linear:1', '--u0', '0', '--s-max', '1', '--out', out]),
                         EXIT_OK)
        df = load_table(out)
        self.assertEqual(list(df.columns), ['s', 'x', 'u', 'z'])
        row = df.iloc[5]
        self.assertAlmostEqual(2.0 * (row['u'] - df['u'].iloc[0]) / row['x'] ** 2, 0.5, places=4)

    def test_hyperbolic_mesh(self):
        """Test the OBJ and JSON exports of the flat hyperbolic orbit"""
        out = self.path('flat.obj')
        code = run_cli(['hyperbolic', '--alpha', '-1', '--u0', '2', '--x-extent', '1', '--h', '0.01', '--out', out])
        self.assertEqual(code, EXIT_OK)
        self.assertTrue(os.path.exists(out))
        mesh = load_mesh_json(self.path('flat.json'))
        self.assertTrue(all(k == 0.0 for k in mesh.attributes['K']))
        self.assertEqual(len(mesh.vertices), 201 * 33)

    def test_dry_run(self):
        """Test that a dry run validates without writing"""
        out = self.path('never.csv')
        self.assertEqual(run_cli(['bowl', '--weight', 'cubic:1', '--dry-run', '--out', out]), EXIT_ERROR)
        self.assertEqual(run_cli(['bowl', '--weight', 'linear:1', '--dry-run', '--out', out]), EXIT_OK)
        self.assertFalse(os.path.exists(out))

    def test_bad_invocations(self):
        """Test unknown commands, bad numbers and unwritable outputs"""
        self.assertEqual(run_cli(['sphere']), EXIT_ERROR)
        self.assertEqual(run_cli(['bowl', '--h', '-1']), EXIT_ERROR)
        self.assertEqual(run_cli(['bowl', '--grid=0:1:0:1']), EXIT_ERROR)
        self.assertEqual(run_cli(['grim-reaper', '--n', '4']), EXIT_ERROR)
        blocker = self.path('blocker')
        with open(blocker, 'w', encoding='utf-8') as f:
            f.write('not a directory')
        self.assertEqual(run_cli(['bowl', '--out', os.path.join(blocker, 'out.csv')]), EXIT_ERROR)

    def test_profile_error_is_reported(self):
        self.assertEqual(run_cli(['lbowl', '--forcing', 'alpha:1']), EXIT_ERROR)

    def test_deterministic_output(self):
        first, second = self.path('a.csv'), self.path('b.csv')
        for out in (first, second):
            self.assertEqual(run_cli(['bowl', '--weight', 'log:-1', '--u0', '1', '--out', out]), EXIT_OK)
        with open(first, 'rb') as a, open(second, 'rb') as b:
            self.assertEqual(a.read(), b.read())

    def test_transform_pipeline(self):
        """Test sampling a bowl, transforming it and verifying it with an impossible tolerance"""
        field = self.path('field.csv')
        code = run_cli(['bowl', '--weight', 'linear:1', '--u0', '0', '--s-max', '2.5',
                        '--grid=-1:1:-1:1:0.1', '--out', field])
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(len(load_table(field)), 21 * 21)

        image, report = self.path('image.csv'), self.path('report.json')
        code = run_cli(['transform', '--input', field, '--weight', 'linear:1', '--out', image, '--report', report])
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(len(load_table(image)), 21 * 21)
        with open(report, encoding='utf-8') as f:
            self.assertEqual(json.load(f)['metadata']['direction'], 'euclid_to_lorentz')

        code = run_cli(['verify', '--input', field, '--weight', 'linear:1', '--tolerance', '1e-30'])
        self.assertEqual(code, EXIT_VERIFY_FAILED)

    def test_transformed_bowl_field(self):
        """Test sampling the transformed soliton bowl onto a grid from the command line"""
        field = self.path('partner.csv')
        code = run_cli(['bowl', '--weight', 'linear:1', '--u0', '0', '--s-max', '4', '--transformed',
                        '--grid=-1:1:-1:1:0.1', '--out', field])
        self.assertEqual(code, EXIT_OK)
        surface = load_field_csv(field, Signature.LORENTZIAN)
        self.assertEqual(surface.u.size, 21 * 21)
        self.assertTrue(spacelike_mask(surface).all())

    def test_report_store(self):
        store = self.path('store.json')
        run_cli(['verify', '--preset', 'plane-identity', '--store', store])
        run_cli(['verify', '--preset', 'tilted-plane', '--store', store])
        with open(store, encoding='utf-8') as f:
            state = json.load(f)
        self.assertEqual(state['total_runs'], 2)
        self.assertEqual(sorted(state['reports']), ['plane-identity', 'tilted-plane'])

        again = self.path('again.json')
        run_cli(['verify', '--preset', 'plane-identity', '--store', again])
        run_cli(['verify', '--preset', 'tilted-plane', '--store', again])
        self.assertEqual(ReportStore(store).payload(), ReportStore(again).payload())

    def test_revolve_profile(self):
        """Test revolving an exported profile and its transformed curve"""
        profile, curve = self.path('profile.csv'), self.path('curve.csv')
        run_cli(['bowl', '--weight', 'linear:1', '--s-max', '1', '--h', '0.01', '--out', profile])
        run_cli(['bowl', '--weight', 'linear:1', '--s-max', '1', '--h', '0.01', '--transformed', '--out', curve])
        self.assertEqual(list(load_table(curve).columns), ['lambda', 'theta'])
        rows = len(load_table(profile))
        for source in (profile, curve):
            out = self.path(os.path.basename(source) + '.obj')
            self.assertEqual(run_cli(['revolve', '--input', source, '--revolve', '16', '--out', out]), EXIT_OK)
            mesh = load_mesh_json(os.path.splitext(out)[0] + '.json')
            self.assertEqual(len(mesh.vertices), rows * 16)

    def test_environment(self):
        """Test CALABI_THREADS validation and CALABI_OUTPUT_DIR placement"""
        with patch.dict(os.environ, {'CALABI_THREADS': 'abc'}):
            self.assertEqual(run_cli(['verify', '--preset', 'plane-identity']), EXIT_ERROR)
        with patch.dict(os.environ, {'CALABI_OUTPUT_DIR': self.temp_dir}):
            self.assertEqual(run_cli(['grim-reaper', '--n', '9', '--out', 'reaper.obj']), EXIT_OK)
        self.assertTrue(os.path.exists(self.path('reaper.obj')))
        self.assertTrue(os.path.exists(self.path('reaper.json')))


if __name__ == '__main__':
    unittest.main()
