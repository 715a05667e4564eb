#
# Copyright (c) 2026, arstack developers
# All rights reserved.
#
# Use of this source code is governed by the BSD-3 license that can be
# found in the LICENSE file.
#
''' Per-pixel ground-scene estimation.

Every pixel's series across the stack is fitted with an AR(p) model and
forecast h steps ahead.  The forecasts form the ground estimate, the
predicted change-free scene every layer is compared against.  The magnitude
of the fitted coefficients is kept as a second raster for inspection.
'''
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from collections import namedtuple
from numbers import Integral

import numpy as np

from arstack.arstack_errors import InvalidArgumentError, StackLoadError
from arstack.stack import Raster, atomic_write, read_raster, write_raster
from arstack.timeseries import fit_yule_walker_batch, forecast_batch

LOG = logging.getLogger('arstack.estimate')

# Pixels handed to one worker at a time.  Chunking never depends on the
# thread count.
CHUNK_PIXELS = 1 << 16

FORECAST_FILE = 'forecast.raw'
COEF_FILE = 'coef.raw'
GROUND_FILE = 'ground.json'


class GroundEstimate(namedtuple('GroundEstimate', ['forecast',
                                                   'coef_magnitude', 'order',
                                                   'steps'])):
    ''' The predicted change-free scene.

        Attributes:
            forecast (Raster): Per-pixel forecast h steps past the stack.
            coef_magnitude (Raster): |a[1]| per pixel for order 1, the
                Euclidean norm of the coefficient vector otherwise.
            order (int): AR model order p.
            steps (int): Forecast horizon h.
    '''
    __slots__ = ()


def _row_chunks(height, width):
    rows = max(1, CHUNK_PIXELS // width)
    return [(start, min(start + rows, height))
            for start in range(0, height, rows)]


def _coefficient_magnitude(coefs):
    if coefs.shape[0] == 1:
        return np.abs(coefs[0])
    total = np.zeros(coefs.shape[1])
    for row in coefs:
        total += row * row
    return np.sqrt(total)


def estimate_ground(stack, order=1, steps=1, threads=1):
    ''' Fit and forecast every pixel of the stack.

        Args:
            stack (ImageStack): Co-registered layers in temporal order.
            order (int): AR model order p, 1 <= p < N.
            steps (int): Forecast horizon h >= 1.
            threads (int): Worker threads.  The result is bit-identical for
                any value.

        Returns:
            GroundEstimate: Forecast and coefficient-magnitude rasters.

        Raises:
            InvalidArgumentError: If order or steps are out of range.
    '''
    n_layers = stack.n_layers
    if isinstance(order, bool) or not isinstance(order, Integral) or \
            not 1 <= order < n_layers:
        raise InvalidArgumentError('order must satisfy 1 <= p < N=%d, got %r'
                                   % (n_layers, order))
    if isinstance(steps, bool) or not isinstance(steps, Integral) or \
            steps < 1:
        raise InvalidArgumentError('forecast horizon must be >= 1, got %r'
                                   % (steps,))
    threads = max(1, threads or 1)
    height, width = stack.height, stack.width
    cube = stack.cube
    forecast = np.empty((height, width), dtype=np.float32)
    magnitude = np.empty((height, width), dtype=np.float32)

    def work(rows):
        start, stop = rows
        values = cube[:, start:stop, :].reshape(n_layers, -1)
        values = values.astype(np.float64)
        coefs, mean, _, _ = fit_yule_walker_batch(values, order)
        predicted = forecast_batch(coefs, mean, values, steps)
        forecast[start:stop] = predicted.reshape(stop - start, width)
        magnitude[start:stop] = _coefficient_magnitude(coefs).reshape(
            stop - start, width)
        LOG.debug('Estimated rows %d-%d', start, stop - 1)

    chunks = _row_chunks(height, width)
    LOG.info('Estimating ground: %dx%d pixels, N=%d, p=%d, h=%d,'
             ' %d chunks on %d threads', width, height, n_layers, order,
             steps, len(chunks), threads)
    if threads == 1 or len(chunks) == 1:
        for rows in chunks:
            work(rows)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            # Consume the iterator so worker exceptions propagate.
            list(pool.map(work, chunks))
    area = stack.pixel_area_m2
    return GroundEstimate(forecast=Raster(forecast, area),
                          coef_magnitude=Raster(magnitude, area),
                          order=order, steps=steps)


def difference_image(surveillance, ground):
    ''' Subtract the ground estimate from a surveillance raster.

        Args:
            surveillance (Raster): The image under test.
            ground (GroundEstimate or Raster): The reference scene.

        Returns:
            Raster: surveillance - forecast, pixelwise; may be negative.

        Raises:
            InvalidArgumentError: If the dimensions differ.
    '''
    reference = ground.forecast if isinstance(ground, GroundEstimate) \
        else ground
    if surveillance.shape != reference.shape:
        raise InvalidArgumentError(
            'dimension mismatch: surveillance is %dx%d, ground is %dx%d'
            % (surveillance.width, surveillance.height, reference.width,
               reference.height))
    return Raster(surveillance.pixels - reference.pixels,
                  surveillance.pixel_area_m2)


def difference_stack(stack, ground):
    ''' Difference every layer of the stack against one ground estimate.

        Returns:
            list of Raster: One difference image per layer, stack order.
    '''
    return [difference_image(layer, ground) for layer in stack.layers]


def save_ground(ground, out_dir):
    ''' Write forecast.raw, coef.raw and ground.json into out_dir.
    '''
    if not os.path.isdir(out_dir):
        os.makedirs(out_dir)
    write_raster(os.path.join(out_dir, FORECAST_FILE), ground.forecast)
    write_raster(os.path.join(out_dir, COEF_FILE), ground.coef_magnitude)
    meta = {'width': ground.forecast.width,
            'height': ground.forecast.height,
            'pixel_area_m2': ground.forecast.pixel_area_m2,
            'order': ground.order,
            'steps': ground.steps,
            'forecast': FORECAST_FILE,
            'coef_magnitude': COEF_FILE}
    atomic_write(os.path.join(out_dir, GROUND_FILE),
                 json.dumps(meta, indent=2, sort_keys=True) + '\n')
    LOG.info('Wrote ground estimate to %s', out_dir)


def load_ground(ground_dir):
    ''' Read a ground estimate written by save_ground.

        Raises:
            StackLoadError: If the metadata or rasters cannot be read.
    '''
    meta_path = os.path.join(ground_dir, GROUND_FILE)
    if not os.path.isfile(meta_path):
        raise StackLoadError('ground estimate metadata not found: %s'
                             % meta_path)
    try:
        with open(meta_path, 'r') as stream:
            meta = json.load(stream)
        width = int(meta['width'])
        height = int(meta['height'])
        area = float(meta['pixel_area_m2'])
        order = int(meta['order'])
        steps = int(meta['steps'])
    except (KeyError, TypeError, ValueError) as error:
        raise StackLoadError('ground estimate metadata %s is invalid: %s'
                             % (meta_path, error))
    forecast = read_raster(os.path.join(ground_dir,
                                        meta.get('forecast', FORECAST_FILE)),
                           width, height, area, 'forecast')
    magnitude = read_raster(os.path.join(ground_dir,
                                         meta.get('coef_magnitude',
                                                  COEF_FILE)),
                            width, height, area, 'coef_magnitude')
    return GroundEstimate(forecast, magnitude, order, steps)
