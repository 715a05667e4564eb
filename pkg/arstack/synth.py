#
# Copyright (c) 2026, arstack developers
# All rights reserved.
#
# Use of this source code is governed by the BSD-3 license that can be
# found in the LICENSE file.
#
''' Seeded synthetic image stacks.

Every pixel carries a stationary AR(1) clutter sequence

    y[n] = -a y[n-1] + u[n],  u[n] ~ N(0, sigma^2)

with y[1] drawn from the stationary distribution N(0, sigma^2 / (1 - a^2)),
on top of a static scene mean.  Targets are discs of constant amplitude added
to a single layer.  The sign convention is the one the estimator uses, so a
fitted coefficient estimates a itself.

Random numbers are drawn per row from a generator seeded with (seed, row),
so generation is deterministic for any number of threads.
'''
import json
import logging
import os
from collections import namedtuple
from concurrent.futures import ThreadPoolExecutor
from numbers import Integral, Real

import numpy as np

from arstack.arstack_errors import InvalidArgumentError, StackLoadError
from arstack.metrics import GroundTruth
from arstack.stack import ImageStack, Raster, read_raster

LOG = logging.getLogger('arstack.synth')

FROZEN_SEED = 20260418


class Target(namedtuple('Target', ['layer_index', 'x', 'y', 'amplitude',
                                   'radius_px'])):
    ''' A disc of constant amplitude added to one layer.
    '''
    __slots__ = ()


class SynthSpec(namedtuple('SynthSpec', ['width', 'height', 'n_layers',
                                         'clutter_coef', 'clutter_sigma',
                                         'scene_mean', 'targets', 'seed',
                                         'pixel_area_m2', 'labels'])):
    ''' Parameters of a synthetic stack.

        Attributes:
            width (int): Columns.
            height (int): Rows.
            n_layers (int): Layers, >= 2.
            clutter_coef (float): True AR(1) coefficient a, |a| < 1.
            clutter_sigma (float): Innovation standard deviation, > 0.
            scene_mean (float or Raster): Static background.
            targets (tuple of Target): Injected targets.
            seed (int): Seed in [0, 2**64).
            pixel_area_m2 (float): Area of one pixel.
            labels (tuple of str): Layer labels, or None for defaults.
    '''
    __slots__ = ()

    def __new__(cls, width, height, n_layers, clutter_coef, clutter_sigma,
                scene_mean=0.0, targets=(), seed=0, pixel_area_m2=1.0,
                labels=None):
        # pylint: disable=too-many-arguments
        targets = tuple(Target(*target) for target in targets)
        if labels is not None:
            labels = tuple(str(label) for label in labels)
        spec = super(SynthSpec, cls).__new__(
            cls, width, height, n_layers, clutter_coef, clutter_sigma,
            scene_mean, targets, seed, pixel_area_m2, labels)
        spec.validate()
        return spec

    def validate(self):
        ''' Raises:
                InvalidArgumentError: If any invariant is violated.
        '''
        for name in ('width', 'height', 'n_layers'):
            value = getattr(self, name)
            if not isinstance(value, Integral) or value < 1:
                raise InvalidArgumentError('%s must be a positive integer,'
                                           ' got %r' % (name, value))
        if self.n_layers < 2:
            raise InvalidArgumentError('n_layers must be >= 2, got %d'
                                       % self.n_layers)
        if not isinstance(self.clutter_coef, Real) or \
                not -1.0 < self.clutter_coef < 1.0:
            raise InvalidArgumentError('clutter_coef must lie in (-1, 1), got'
                                       ' %r' % (self.clutter_coef,))
        if not isinstance(self.clutter_sigma, Real) or \
                not self.clutter_sigma > 0:
            raise InvalidArgumentError('clutter_sigma must be positive, got %r'
                                       % (self.clutter_sigma,))
        if isinstance(self.scene_mean, Raster):
            if self.scene_mean.shape != (self.height, self.width):
                raise InvalidArgumentError(
                    'scene_mean is %dx%d, expected %dx%d'
                    % (self.scene_mean.width, self.scene_mean.height,
                       self.width, self.height))
        elif not isinstance(self.scene_mean, Real) or \
                not np.isfinite(self.scene_mean):
            raise InvalidArgumentError('scene_mean must be a finite number or'
                                       ' a Raster, got %r'
                                       % (self.scene_mean,))
        if not isinstance(self.seed, Integral) or \
                not 0 <= self.seed < 2 ** 64:
            raise InvalidArgumentError('seed must be an integer in [0, 2**64),'
                                       ' got %r' % (self.seed,))
        if not self.pixel_area_m2 > 0:
            raise InvalidArgumentError('pixel_area_m2 must be positive, got %r'
                                       % (self.pixel_area_m2,))
        if self.labels is not None and (len(self.labels) != self.n_layers or
                                        len(set(self.labels)) !=
                                        self.n_layers):
            raise InvalidArgumentError('labels must be %d unique strings'
                                       % self.n_layers)
        for target in self.targets:
            if not 0 <= target.layer_index < self.n_layers:
                raise InvalidArgumentError('target %r: layer out of range'
                                           % (target,))
            if not (0 <= target.x < self.width and
                    0 <= target.y < self.height):
                raise InvalidArgumentError('target %r: site out of bounds'
                                           % (target,))
            if target.radius_px < 0:
                raise InvalidArgumentError('target %r: negative radius'
                                           % (target,))

    @property
    def layer_labels(self):
        if self.labels is not None:
            return list(self.labels)
        return ['layer%02d' % idx for idx in range(self.n_layers)]


def grid_targets(layer_index, rows, cols, origin, pitch, amplitude,
                 radius_px):
    ''' Targets on a regular grid, row-major from origin=(x, y).
    '''
    # pylint: disable=too-many-arguments
    return [Target(layer_index, origin[0] + col * pitch,
                   origin[1] + row * pitch, amplitude, radius_px)
            for row in range(rows) for col in range(cols)]


def frozen_scene_spec():
    ''' The fixed-seed 100x100x8 scene with 25 square targets in the last
        layer used to check the full pipeline.
    '''
    return SynthSpec(width=100, height=100, n_layers=8, clutter_coef=-0.5,
                     clutter_sigma=1.0, scene_mean=10.0,
                     targets=grid_targets(7, 5, 5, (10, 10), 18, 24.0, 1.5),
                     seed=FROZEN_SEED)


def _disc(height, width, x_pos, y_pos, radius):
    rows, cols = np.ogrid[:height, :width]
    return (cols - x_pos) ** 2 + (rows - y_pos) ** 2 <= radius * radius


def generate(spec, threads=1):
    ''' Draw a synthetic stack.

        Args:
            spec (SynthSpec): Generation parameters.
            threads (int): Worker threads; the output does not depend on it.

        Returns:
            tuple: (ImageStack, list of GroundTruth).  Ground truth is
                listed for the layers that received targets, in layer
                order.

        Raises:
            InvalidArgumentError: If the scene description is invalid.
    '''
    spec.validate()
    n_layers, height, width = spec.n_layers, spec.height, spec.width
    coef = float(spec.clutter_coef)
    sigma = float(spec.clutter_sigma)
    stationary_std = sigma / np.sqrt(1.0 - coef * coef)
    if isinstance(spec.scene_mean, Raster):
        scene = spec.scene_mean.pixels.astype(np.float64)
    else:
        scene = np.full((height, width), float(spec.scene_mean))
    cube = np.empty((n_layers, height, width), dtype=np.float64)

    def row(y_pos):
        rng = np.random.default_rng([spec.seed, y_pos])
        values = np.empty((n_layers, width))
        values[0] = rng.standard_normal(width) * stationary_std
        innovations = rng.standard_normal((n_layers - 1, width)) * sigma
        for idx in range(1, n_layers):
            values[idx] = -coef * values[idx - 1] + innovations[idx - 1]
        cube[:, y_pos, :] = values + scene[y_pos]

    threads = max(1, threads or 1)
    if threads == 1:
        for y_pos in range(height):
            row(y_pos)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(row, range(height)))

    labels = spec.layer_labels
    sites = {}
    for target in spec.targets:
        disc = _disc(height, width, target.x, target.y, target.radius_px)
        cube[target.layer_index][disc] += target.amplitude
        sites.setdefault(target.layer_index, []).append(
            (float(target.x), float(target.y)))
    truths = [GroundTruth(labels[idx], tuple(sites[idx]))
              for idx in sorted(sites)]
    stack = ImageStack.from_cube(cube.astype(np.float32), labels,
                                 spec.pixel_area_m2)
    LOG.info('Generated %d layers of %dx%d with %d targets (seed %d)',
             n_layers, width, height, len(spec.targets), spec.seed)
    return stack, truths


def synth_spec_from_dict(data, base_dir='.'):
    ''' Build a SynthSpec from parsed JSON.

        scene_mean may be a number, a 2-D list of rows, or an object
        {"path": ...} naming a raw float32 raster of width x height
        (relative paths resolve against base_dir).  Targets come from a
        "targets" list of {layer, x, y, amplitude, radius_px} objects and/or
        a "target_grid" object with the arguments of grid_targets.

        Raises:
            InvalidArgumentError: If fields are missing or invalid.
    '''
    try:
        width = int(data['width'])
        height = int(data['height'])
        area = float(data.get('pixel_area_m2', 1.0))
        scene = data.get('scene_mean', 0.0)
        if isinstance(scene, dict):
            scene = read_raster(os.path.join(base_dir, scene['path']), width,
                                height, area, 'scene_mean')
        elif isinstance(scene, list):
            scene = Raster(scene, area)
        else:
            scene = float(scene)
        targets = [Target(int(item['layer']), float(item['x']),
                          float(item['y']), float(item['amplitude']),
                          float(item.get('radius_px', 0.0)))
                   for item in data.get('targets', [])]
        grid = data.get('target_grid')
        if grid is not None:
            targets.extend(grid_targets(
                int(grid['layer']), int(grid['rows']), int(grid['cols']),
                (float(grid['origin'][0]), float(grid['origin'][1])),
                float(grid['pitch']), float(grid['amplitude']),
                float(grid.get('radius_px', 0.0))))
        return SynthSpec(width=width, height=height,
                         n_layers=int(data['n_layers']),
                         clutter_coef=float(data['clutter_coef']),
                         clutter_sigma=float(data['clutter_sigma']),
                         scene_mean=scene, targets=targets,
                         seed=int(data.get('seed', 0)), pixel_area_m2=area,
                         labels=data.get('labels'))
    except (KeyError, TypeError, ValueError, IndexError) as error:
        raise InvalidArgumentError('invalid synthetic spec: missing or bad'
                                   ' field %s' % (error,))


def load_synth_spec(path):
    ''' Read a SynthSpec from a JSON file.

        Raises:
            StackLoadError: If the file cannot be read or parsed.
            InvalidArgumentError: If the scene description is invalid.
    '''
    try:
        with open(path, 'r') as stream:
            data = json.load(stream)
    except (IOError, OSError, ValueError) as error:
        raise StackLoadError('cannot read synthetic spec %s: %s'
                             % (path, error))
    return synth_spec_from_dict(data, os.path.dirname(os.path.abspath(path)))
