#
# Copyright (c) 2026, arstack developers
# All rights reserved.
#
# Use of this source code is governed by the BSD-3 license that can be
# found in the LICENSE file.
#
''' Unit tests for the synthetic stack generator
'''
import json
import os
import sys
import unittest

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '../lib'))
# pylint: disable=wrong-import-position
from testlib import TempDirTestCase, get_fixture

from arstack.arstack_errors import InvalidArgumentError, StackLoadError
from arstack.metrics import GroundTruth
from arstack.stack import Raster, write_raster
from arstack.synth import SynthSpec, Target, frozen_scene_spec, generate, \
    grid_targets, load_synth_spec, synth_spec_from_dict
from arstack.timeseries import fit_yule_walker_batch


class TestSynthSpec(unittest.TestCase):
    ''' Test cases for SynthSpec validation
    '''
    def test_invalid_parameters(self):
        cases = [dict(n_layers=1), dict(clutter_coef=1.0),
                 dict(clutter_coef=-1.0), dict(clutter_sigma=0.0),
                 dict(width=0), dict(seed=-1), dict(seed=2 ** 64),
                 dict(pixel_area_m2=0.0), dict(labels=['a', 'a', 'b']),
                 dict(targets=[Target(3, 1, 1, 5.0, 0.0)]),
                 dict(targets=[Target(0, 8, 1, 5.0, 0.0)]),
                 dict(scene_mean=Raster(np.zeros((2, 2))))]
        for case in cases:
            params = dict(width=8, height=6, n_layers=3, clutter_coef=0.2,
                          clutter_sigma=1.0)
            params.update(case)
            with self.assertRaises(InvalidArgumentError):
                SynthSpec(**params)

    def test_default_labels(self):
        spec = SynthSpec(4, 4, 3, 0.0, 1.0)
        self.assertEqual(spec.layer_labels, ['layer00', 'layer01',
                                             'layer02'])

    def test_grid_targets(self):
        targets = grid_targets(7, 2, 3, (10, 20), 18, 24.0, 1.5)
        self.assertEqual(len(targets), 6)
        self.assertEqual(targets[0], Target(7, 10, 20, 24.0, 1.5))
        self.assertEqual(targets[4], Target(7, 28, 38, 24.0, 1.5))


class TestGenerate(unittest.TestCase):
    ''' Test cases for generate
    '''
    def test_same_seed_same_stack(self):
        spec = SynthSpec(12, 9, 5, -0.3, 2.0, scene_mean=3.0, seed=17)
        first, _ = generate(spec)
        second, _ = generate(spec, threads=4)
        self.assertEqual(first.cube.tobytes(), second.cube.tobytes())
        other, _ = generate(spec._replace(seed=18))
        self.assertNotEqual(first.cube.tobytes(), other.cube.tobytes())

    def test_noiseless_limit(self):
        spec = SynthSpec(10, 10, 4, -0.5, 1e-9, scene_mean=10.0, seed=1)
        stack, truths = generate(spec)
        self.assertEqual(truths, [])
        np.testing.assert_allclose(stack.cube, 10.0, atol=1e-6)

    def test_scene_mean_raster(self):
        mean = Raster(np.arange(20.0).reshape(4, 5))
        spec = SynthSpec(5, 4, 3, 0.0, 1e-9, scene_mean=mean)
        stack, _ = generate(spec)
        np.testing.assert_allclose(stack.layers[2].pixels, mean.pixels,
                                   atol=1e-6)

    def test_targets_and_truth(self):
        targets = [Target(2, 5, 4, 7.0, 1.0), Target(2, 1, 1, 3.0, 0.0),
                   Target(0, 8, 8, 2.0, 0.0)]
        spec = SynthSpec(10, 10, 3, 0.0, 1e-9, targets=targets,
                         labels=['x', 'y', 'z'])
        stack, truths = generate(spec)
        self.assertEqual(truths, [GroundTruth('x', ((8.0, 8.0),)),
                                  GroundTruth('z', ((5.0, 4.0),
                                                    (1.0, 1.0)))])
        layer = stack.layer('z').pixels
        self.assertAlmostEqual(float(layer[4, 5]), 7.0, places=5)
        self.assertAlmostEqual(float(layer[3, 5]), 7.0, places=5)
        self.assertAlmostEqual(float(layer[3, 4]), 0.0, places=5)
        self.assertAlmostEqual(float(layer[1, 1]), 3.0, places=5)
        self.assertEqual(int(np.count_nonzero(layer > 0.5)), 6)

    def test_estimator_consistency(self):
        spec = SynthSpec(16, 16, 4000, -0.6, 1.0, seed=2026)
        stack, _ = generate(spec)
        values = stack.cube.reshape(4000, -1).astype(np.float64)
        coefs, _, _, _ = fit_yule_walker_batch(values, 1)
        self.assertGreaterEqual(coefs.mean(), -0.61)
        self.assertLessEqual(coefs.mean(), -0.59)

    def test_stationary_variance(self):
        spec = SynthSpec(8, 8, 10000, -0.5, 1.0, seed=99)
        stack, _ = generate(spec)
        variance = stack.cube.astype(np.float64).var(axis=0).mean()
        expected = 1.0 / (1.0 - 0.25)
        self.assertLess(abs(variance - expected), 0.05 * expected)


class TestSynthFiles(TempDirTestCase):
    ''' Test cases for synthetic spec files
    '''
    def test_frozen_scene_fixture(self):
        self.assertEqual(load_synth_spec(get_fixture('frozen_scene.json')),
                         frozen_scene_spec())

    def test_frozen_scene_shape(self):
        spec = frozen_scene_spec()
        self.assertEqual((spec.width, spec.height, spec.n_layers),
                         (100, 100, 8))
        self.assertEqual(len(spec.targets), 25)
        self.assertEqual(set(target.layer_index for target in spec.targets),
                         set([7]))

    def test_scene_mean_forms(self):
        write_raster(self.path('mean.raw'), Raster(np.full((2, 3), 4.0)))
        base = {'width': 3, 'height': 2, 'n_layers': 2,
                'clutter_coef': 0.0, 'clutter_sigma': 1.0}
        from_file = synth_spec_from_dict(
            dict(base, scene_mean={'path': 'mean.raw'}), self.tmpdir)
        self.assertEqual(from_file.scene_mean.value(2, 1), 4.0)
        from_list = synth_spec_from_dict(
            dict(base, scene_mean=[[1, 2, 3], [4, 5, 6]]))
        self.assertEqual(from_list.scene_mean.value(0, 1), 4.0)
        explicit = synth_spec_from_dict(dict(base, targets=[
            {'layer': 1, 'x': 2, 'y': 1, 'amplitude': 9.0}]))
        self.assertEqual(explicit.targets, (Target(1, 2.0, 1.0, 9.0, 0.0),))

    def test_invalid_files(self):
        with self.assertRaises(InvalidArgumentError):
            synth_spec_from_dict({'width': 3})
        path = self.path('spec.json')
        with open(path, 'w') as stream:
            json.dump({'width': 3, 'height': 3, 'n_layers': 1,
                       'clutter_coef': 0.0, 'clutter_sigma': 1.0}, stream)
        with self.assertRaises(InvalidArgumentError):
            load_synth_spec(path)
        with self.assertRaises(StackLoadError):
            load_synth_spec(self.path('absent.json'))


if __name__ == '__main__':
    unittest.main()
