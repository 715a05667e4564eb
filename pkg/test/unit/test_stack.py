#
# Copyright (c) 2026, arstack developers
# All rights reserved.
#
# Use of this source code is governed by the BSD-3 license that can be
# found in the LICENSE file.
#
''' Unit tests for rasters, stacks and their file formats
'''
import json
import os
import sys
import unittest

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '../lib'))
# pylint: disable=wrong-import-position
from testlib import TempDirTestCase, random_stack

from arstack.arstack_errors import InvalidArgumentError, StackLoadError
from arstack.stack import ImageStack, Raster, atomic_write, load_stack, \
    pixel_series, read_pgm, read_raster, safe_label, save_stack, \
    write_pgm, write_raster


class TestRaster(unittest.TestCase):
    ''' Test cases for Raster
    '''
    def test_geometry(self):
        raster = Raster(np.zeros((2000, 3000)), pixel_area_m2=1.0)
        self.assertEqual(raster.width, 3000)
        self.assertEqual(raster.height, 2000)
        self.assertEqual(raster.pixels.dtype, np.float32)
        self.assertAlmostEqual(raster.area_km2, 6.0)

    def test_value_is_column_then_row(self):
        raster = Raster([[0, 1, 2], [3, 4, 5]])
        self.assertEqual(raster.value(2, 1), 5.0)
        self.assertEqual(raster.value(0, 1), 3.0)

    def test_read_only(self):
        raster = Raster([[1.0, 2.0]])
        with self.assertRaises(ValueError):
            raster.pixels[0, 0] = 3.0

    def test_invalid(self):
        with self.assertRaises(InvalidArgumentError):
            Raster([1.0, 2.0])
        with self.assertRaises(InvalidArgumentError):
            Raster([[1.0, float('nan')]])
        with self.assertRaises(InvalidArgumentError):
            Raster([[1.0]], pixel_area_m2=0.0)


class TestImageStack(unittest.TestCase):
    ''' Test cases for ImageStack and pixel_series
    '''
    def test_areas_and_labels(self):
        layers = [Raster(np.zeros((20, 30)), 10000.0) for _ in range(8)]
        stack = ImageStack(layers)
        self.assertEqual(stack.n_layers, 8)
        self.assertEqual(len(stack), 8)
        self.assertEqual(stack.labels[0], 'layer00')
        self.assertAlmostEqual(stack.area_km2, 6.0)
        self.assertAlmostEqual(stack.total_area_km2, 48.0)
        self.assertEqual(stack.cube.shape, (8, 20, 30))

    def test_single_layer_rejected(self):
        with self.assertRaisesRegex(InvalidArgumentError,
                                    'stack requires >= 2 layers'):
            ImageStack([Raster(np.zeros((3, 3)))])

    def test_dimension_mismatch_names_layer(self):
        layers = [Raster(np.zeros((10, 10))), Raster(np.zeros((11, 10)))]
        with self.assertRaisesRegex(InvalidArgumentError,
                                    "dimension mismatch: layer 'late'"):
            ImageStack(layers, ['early', 'late'])

    def test_duplicate_labels(self):
        layers = [Raster(np.zeros((2, 2)))] * 2
        with self.assertRaises(InvalidArgumentError):
            ImageStack(layers, ['a', 'a'])

    def test_layer_lookup(self):
        stack = ImageStack.from_cube(np.arange(8.0).reshape(2, 2, 2),
                                     ['a', 'b'])
        self.assertEqual(stack.layer('b').value(0, 0), 4.0)
        with self.assertRaises(InvalidArgumentError):
            stack.layer('c')

    def test_pixel_series(self):
        first = np.zeros((3, 4))
        second = np.zeros((3, 4))
        first[0, 0] = 1.0
        second[0, 0] = 5.0
        stack = ImageStack([Raster(first), Raster(second)])
        self.assertEqual(list(pixel_series(stack, 0, 0)), [1.0, 5.0])
        with self.assertRaises(InvalidArgumentError):
            pixel_series(stack, 4, 0)
        with self.assertRaises(InvalidArgumentError):
            pixel_series(stack, 0, -1)

    def test_pixel_series_injected_values(self):
        cube = np.zeros((8, 5, 9))
        expected = [3.0, -1.0, 4.0, 1.0, -5.0, 9.0, 2.0, 6.0]
        cube[:, 3, 7] = expected
        stack = ImageStack.from_cube(cube)
        self.assertEqual(list(pixel_series(stack, 7, 3)), expected)


class TestStackFiles(TempDirTestCase):
    ''' Test cases for raster, PGM and manifest IO
    '''
    def write_manifest(self, entries, area=1.0, name='manifest.json'):
        path = self.path(name)
        with open(path, 'w') as stream:
            json.dump({'pixel_area_m2': area, 'layers': entries}, stream)
        return path

    def test_save_and_load_stack(self):
        stack = random_stack()
        manifest = save_stack(stack, self.tmpdir)
        loaded = load_stack(manifest)
        self.assertEqual(loaded.labels, stack.labels)
        np.testing.assert_array_equal(loaded.cube, stack.cube)

    def test_manifest_order_is_kept(self):
        for label, value in (('b', 1.0), ('a', 2.0)):
            write_raster(self.path(label + '.raw'),
                         Raster(np.full((2, 3), value)))
        manifest = self.write_manifest([
            {'path': 'b.raw', 'label': 'b', 'width': 3, 'height': 2},
            {'path': 'a.raw', 'label': 'a', 'width': 3, 'height': 2}])
        stack = load_stack(manifest)
        self.assertEqual(stack.labels, ('b', 'a'))
        self.assertEqual(list(pixel_series(stack, 1, 1)), [1.0, 2.0])

    def test_one_layer_manifest(self):
        write_raster(self.path('a.raw'), Raster(np.zeros((2, 2))))
        manifest = self.write_manifest([
            {'path': 'a.raw', 'label': 'a', 'width': 2, 'height': 2}])
        with self.assertRaisesRegex(StackLoadError,
                                    'stack requires >= 2 layers'):
            load_stack(manifest)

    def test_mismatched_layers(self):
        write_raster(self.path('a.raw'), Raster(np.zeros((10, 10))))
        write_raster(self.path('b.raw'), Raster(np.zeros((11, 10))))
        manifest = self.write_manifest([
            {'path': 'a.raw', 'label': 'a', 'width': 10, 'height': 10},
            {'path': 'b.raw', 'label': 'b', 'width': 10, 'height': 11}])
        with self.assertRaisesRegex(StackLoadError, 'dimension mismatch'):
            load_stack(manifest)

    def test_missing_layer_file_names_layer(self):
        write_raster(self.path('a.raw'), Raster(np.zeros((2, 2))))
        manifest = self.write_manifest([
            {'path': 'a.raw', 'label': 'a', 'width': 2, 'height': 2},
            {'path': 'gone.raw', 'label': 'pass6', 'width': 2,
             'height': 2}])
        with self.assertRaisesRegex(StackLoadError, "'pass6'.*gone.raw"):
            load_stack(manifest)

    def test_wrong_size_and_non_finite(self):
        with open(self.path('short.raw'), 'wb') as stream:
            stream.write(np.zeros(3, dtype='<f4').tobytes())
        with self.assertRaisesRegex(StackLoadError, 'holds 3 pixels'):
            read_raster(self.path('short.raw'), 2, 2)
        with open(self.path('nan.raw'), 'wb') as stream:
            stream.write(np.array([0, 1, np.nan, 2], dtype='<f4').tobytes())
        with self.assertRaisesRegex(StackLoadError, 'non-finite'):
            read_raster(self.path('nan.raw'), 2, 2, label='m1p5')

    def test_invalid_manifest(self):
        with open(self.path('bad.json'), 'w') as stream:
            stream.write('{not json')
        with self.assertRaises(StackLoadError):
            load_stack(self.path('bad.json'))
        with self.assertRaises(StackLoadError):
            load_stack(self.path('absent.json'))
        manifest = self.write_manifest([{'label': 'a'}, {'label': 'b'}])
        with self.assertRaises(StackLoadError):
            load_stack(manifest)

    def test_negative_amplitudes_warn(self):
        write_raster(self.path('a.raw'), Raster(np.full((2, 2), -1.0)))
        write_raster(self.path('b.raw'), Raster(np.ones((2, 2))))
        manifest = self.write_manifest([
            {'path': 'a.raw', 'label': 'a', 'width': 2, 'height': 2},
            {'path': 'b.raw', 'label': 'b', 'width': 2, 'height': 2}])
        with self.assertLogs('arstack.stack', 'WARNING') as logs:
            load_stack(manifest)
        self.assertIn("layer 'a' has negative amplitudes", logs.output[0])

    def test_pgm_layers(self):
        pixels = np.array([[0.0, 0.5], [1.0, 0.25]])
        write_pgm(self.path('a.pgm'), Raster(pixels), 0.0, 1.0)
        write_pgm(self.path('b.pgm'), Raster(1.0 - pixels), 0.0, 1.0)
        manifest = self.write_manifest([
            {'path': 'a.pgm', 'label': 'a', 'width': 2, 'height': 2},
            {'path': 'b.pgm', 'label': 'b', 'width': 2, 'height': 2}])
        stack = load_stack(manifest)
        np.testing.assert_allclose(stack.layer('a').pixels, pixels,
                                   atol=1.0 / 255)

    def test_sixteen_bit_pgm_with_comment(self):
        body = np.array([[0, 65535, 1000]], dtype='>u2').tobytes()
        with open(self.path('deep.pgm'), 'wb') as stream:
            stream.write(b'P5\n# sensor dump\n3 1\n65535\n' + body)
        raster = read_pgm(self.path('deep.pgm'))
        np.testing.assert_allclose(raster.pixels,
                                   [[0.0, 1.0, 1000.0 / 65535]], rtol=1e-6)

    def test_not_a_pgm(self):
        with open(self.path('p2.pgm'), 'wb') as stream:
            stream.write(b'P2\n1 1\n255\n0\n')
        with self.assertRaises(StackLoadError):
            read_pgm(self.path('p2.pgm'))

    def test_atomic_write_replaces_and_cleans_up(self):
        target = self.path('out.txt')
        atomic_write(target, 'first')
        atomic_write(target, b'second')
        with open(target, 'rb') as stream:
            self.assertEqual(stream.read(), b'second')
        self.assertEqual(os.listdir(self.tmpdir), ['out.txt'])

    def test_safe_label(self):
        self.assertEqual(safe_label('mission 1/pass 5'), 'mission_1_pass_5')
        self.assertEqual(safe_label('m1p5'), 'm1p5')


if __name__ == '__main__':
    unittest.main()
