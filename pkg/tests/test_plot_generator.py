import unittest

from irs_toolbox import axis_ticks, format_readable_power, generate_svg_plot


class PlotGeneratorTestCase(unittest.TestCase):
    def test_axis_ticks(self):
        self.assertEqual(axis_ticks(0.002, 3.0, log=True), [0.001, 0.01, 0.1, 1.0, 10.0])
        self.assertEqual(axis_ticks(0.0, 1.0, log=False), [0.0, 0.25, 0.5, 0.75, 1.0])
        self.assertEqual(axis_ticks(10.0, 10.0, log=True), [10.0, 100.0])
        self.assertEqual(axis_ticks(2.0, 2.0, log=False, count=3), [1.5, 2.0, 2.5])

    def test_generate_svg_plot(self):
        svg = generate_svg_plot({'a': [(1, 1), (2, 4)]}, title='T', x_label='x', y_label='y')
        self.assertTrue(svg.startswith('<svg'))
        self.assertTrue(svg.endswith('</svg>'))
        self.assertEqual(svg.count('<polyline'), 1)
        self.assertIn('>T</text>', svg)
        self.assertNotIn('\n', svg)

    def test_generate_svg_plot_pretty(self):
        svg = generate_svg_plot({'a': [(1, 1), (2, 4)]}, pretty=True)
        self.assertIn('\n    <rect', svg)
        self.assertTrue(svg.endswith('\n</svg>'))

    def test_generate_svg_plot_skips_unplottable_points(self):
        series = {'a': [(0.0, 1.0), (1.0, float('nan')), (10.0, 5.0), (100.0, 50.0)], 'empty': [(1.0, -1.0)]}
        svg = generate_svg_plot(series, log_x=True, log_y=True)
        self.assertEqual(svg.count('<polyline'), 1)
        self.assertIn('>empty</text>', svg)

    def test_generate_svg_plot_escapes_labels(self):
        svg = generate_svg_plot({'a<b': [(1, 1)]}, title='P & Q')
        self.assertIn('a&lt;b', svg)
        self.assertIn('P &amp; Q', svg)

    def test_generate_svg_plot_tick_format(self):
        svg = generate_svg_plot({'p': [(1, 0.002), (2, 0.02)]}, log_y=True, tick_format=format_readable_power)
        self.assertIn('1.0 mW', svg)
        self.assertIn('100.0 mW', svg)

    def test_generate_svg_plot_no_series(self):
        svg = generate_svg_plot({})
        self.assertTrue(svg.startswith('<svg'))
        self.assertEqual(svg.count('<polyline'), 0)


if __name__ == '__main__':
    unittest.main()
