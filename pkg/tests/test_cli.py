import contextlib
import io
import json
import os
import tempfile
import unittest

from irs_toolbox.cli import EXIT_CONFIG, EXIT_NON_FINITE, EXIT_OK, build_parser, main


class CliTestCase(unittest.TestCase):
    def setUp(self):
        self.directory = tempfile.TemporaryDirectory()
        self.addCleanup(self.directory.cleanup)

    def _config(self, document):
        path = os.path.join(self.directory.name, 'config.json')
        with open(path, 'w', encoding='utf-8') as handle:
            json.dump(document, handle)
        return path

    def _main(self, argv):
        out, err = io.StringIO(), io.StringIO()
        with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
            code = main(argv + ['--log-level', 'ERROR'])
        return code, out.getvalue(), err.getvalue()

    def test_parser(self):
        args = build_parser().parse_args(['--config', 'c.json', '--trials', '10', '--out', 'x'])
        self.assertEqual(args.trials, 10)
        self.assertEqual(args.out_dir, 'x')
        self.assertIsNone(args.experiment)

    def test_capacity_run(self):
        out_dir = os.path.join(self.directory.name, 'results')
        path = self._config({'params': {'q_elems': 4},
                             'experiment': {'name': 'fig4_capacity', 'grid': [1e-3]}})
        code, out, _ = self._main(['--config', path, '--trials', '3', '--out', out_dir])
        self.assertEqual(code, EXIT_OK)
        printed = out.split()
        self.assertEqual([os.path.basename(p) for p in printed], ['fig4_capacity.csv', 'fig4_capacity.svg'])
        self.assertTrue(all(os.path.exists(p) for p in printed))

    def test_experiment_flag_overrides_config(self):
        path = self._config({'params': {'q_elems': 4}, 'experiment': {'name': 'fig3_powers', 'grid': [1e-3]}})
        code, out, _ = self._main(['--config', path, '--experiment', 'fig4_capacity', '--trials', '2',
                                   '--out', self.directory.name])
        self.assertEqual(code, EXIT_OK)
        self.assertIn('fig4_capacity.csv', out)

    def test_equal_heights(self):
        path = self._config({'params': {'h_bs': 10.0, 'h_irs': 10.0}, 'experiment': {'name': 'fig3_powers'}})
        code, _, err = self._main(['--config', path])
        self.assertEqual(code, EXIT_CONFIG)
        self.assertIn('heights', err)

    def test_unknown_key(self):
        path = self._config({'params': {'colour': 1}, 'experiment': {'name': 'fig3_powers'}})
        code, _, err = self._main(['--config', path])
        self.assertEqual(code, EXIT_CONFIG)
        self.assertIn('colour', err)

    def test_malformed_experiment_values(self):
        for key, value in (('grid', 0.001), ('grid', ['x']), ('alphas', 'abc'), ('window_factor', 'wide'),
                           ('out_dir', 3)):
            path = self._config({'experiment': {'name': 'fig3_powers', key: value}})
            code, _, err = self._main(['--config', path])
            self.assertEqual(code, EXIT_CONFIG, key)
            self.assertIn(key, err)

    def test_missing_file(self):
        code, _, err = self._main(['--config', os.path.join(self.directory.name, 'missing.json')])
        self.assertEqual(code, EXIT_CONFIG)
        self.assertIn('config error', err)

    def test_non_finite_bound(self):
        path = self._config({'experiment': {'name': 'fig3_powers', 'grid': [1e-7]}})
        code, _, err = self._main(['--config', path, '--trials', '1', '--out', self.directory.name])
        self.assertEqual(code, EXIT_NON_FINITE)
        self.assertIn('non-finite bound', err)


if __name__ == '__main__':
    unittest.main()
