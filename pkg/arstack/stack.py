#
# Copyright (c) 2026, arstack developers
# All rights reserved.
#
# Use of this source code is governed by the BSD-3 license that can be
# found in the LICENSE file.
#
''' Co-registered raster image stacks.

A stack is described by a JSON manifest:

    {
        "pixel_area_m2": 9.0,
        "layers": [
            {"path": "m1p5.raw", "label": "m1p5", "width": 3000,
             "height": 2000},
            ...
        ]
    }

Layer paths resolve relative to the manifest.  A raster file is headerless
little-endian 32-bit floats in row-major order; its dimensions live in the
manifest.  Paths ending in ``.pgm`` are read as binary PGM (P5) images and
scaled to [0, 1] by their maxval.

Layer order in the manifest is the temporal order of the per-pixel series.
'''
import json
import logging
import os
import re
import tempfile

import numpy as np

from arstack.arstack_errors import InvalidArgumentError, StackLoadError
from arstack.timeseries import Series

LOG = logging.getLogger('arstack.stack')

RASTER_DTYPE = np.dtype('<f4')


class Raster(object):
    ''' A single-channel raster of 32-bit floats with its pixel area.

        Pixels are stored as a read-only (height, width) array, i.e. row
        major; pixel (x, y) is pixels[y, x].
    '''
    __slots__ = ('_pixels', '_pixel_area_m2')

    def __init__(self, pixels, pixel_area_m2=1.0):
        ''' Args:
                pixels (array_like): (height, width) pixel values.
                pixel_area_m2 (float): Square meters covered by one pixel.

            Raises:
                InvalidArgumentError: If the array is not two dimensional
                    and non-empty, holds non-finite values, or the pixel
                    area is not positive.
        '''
        arr = np.array(pixels, dtype=np.float32)
        if arr.ndim != 2 or arr.size == 0:
            raise InvalidArgumentError('raster must be a non-empty 2-D array,'
                                       ' got shape %s' % (arr.shape,))
        if not np.all(np.isfinite(arr)):
            raise InvalidArgumentError('raster contains non-finite pixels')
        if not pixel_area_m2 > 0 or not np.isfinite(pixel_area_m2):
            raise InvalidArgumentError('pixel_area_m2 must be positive, got %r'
                                       % (pixel_area_m2,))
        arr.flags.writeable = False
        self._pixels = arr
        self._pixel_area_m2 = float(pixel_area_m2)

    @property
    def pixels(self):
        ''' Read-only (height, width) float32 array.
        '''
        return self._pixels

    @property
    def width(self):
        return self._pixels.shape[1]

    @property
    def height(self):
        return self._pixels.shape[0]

    @property
    def shape(self):
        return self._pixels.shape

    @property
    def pixel_area_m2(self):
        return self._pixel_area_m2

    @property
    def area_km2(self):
        ''' Imaged area in square kilometers.
        '''
        return self.width * self.height * self._pixel_area_m2 / 1e6

    def value(self, x, y):
        ''' Pixel value at column x, row y.
        '''
        return float(self._pixels[y, x])

    def __repr__(self):
        return 'Raster(%dx%d, pixel_area_m2=%g)' % (self.width, self.height,
                                                    self._pixel_area_m2)


class ImageStack(object):
    ''' An ordered stack of co-registered rasters.

        All layers share width, height and pixel area.  The stack never
        changes after construction, so it can be read from many threads.
    '''
    __slots__ = ('_layers', '_labels', '_cube')

    def __init__(self, layers, labels=None):
        ''' Args:
                layers (list of Raster): Layers in temporal order.
                labels (list of str): Per-layer identifiers.  Defaults to
                    layer00, layer01, ...

            Raises:
                InvalidArgumentError: If there are fewer than two layers,
                    labels do not match the layers one to one, or layers
                    differ in dimensions or pixel area.
        '''
        layers = list(layers)
        if len(layers) < 2:
            raise InvalidArgumentError('stack requires >= 2 layers, got %d'
                                       % len(layers))
        if labels is None:
            labels = ['layer%02d' % idx for idx in range(len(layers))]
        labels = [str(label) for label in labels]
        if len(labels) != len(layers):
            raise InvalidArgumentError('got %d labels for %d layers'
                                       % (len(labels), len(layers)))
        if len(set(labels)) != len(labels):
            raise InvalidArgumentError('layer labels must be unique')
        first = layers[0]
        for label, layer in zip(labels, layers):
            if layer.shape != first.shape:
                raise InvalidArgumentError(
                    'dimension mismatch: layer %r is %dx%d, expected %dx%d'
                    % (label, layer.width, layer.height, first.width,
                       first.height))
            if layer.pixel_area_m2 != first.pixel_area_m2:
                raise InvalidArgumentError(
                    'pixel area mismatch: layer %r has %g m2, expected %g m2'
                    % (label, layer.pixel_area_m2, first.pixel_area_m2))
        self._layers = tuple(layers)
        self._labels = tuple(labels)
        cube = np.stack([layer.pixels for layer in layers])
        cube.flags.writeable = False
        self._cube = cube

    @classmethod
    def from_cube(cls, cube, labels=None, pixel_area_m2=1.0):
        ''' Build a stack from an (N, height, width) array.
        '''
        cube = np.asarray(cube)
        if cube.ndim != 3:
            raise InvalidArgumentError('cube must be (N, height, width), got'
                                       ' shape %s' % (cube.shape,))
        return cls([Raster(layer, pixel_area_m2) for layer in cube], labels)

    @property
    def layers(self):
        return self._layers

    @property
    def labels(self):
        return self._labels

    @property
    def cube(self):
        ''' Read-only (N, height, width) float32 array of all layers.
        '''
        return self._cube

    @property
    def n_layers(self):
        return len(self._layers)

    @property
    def width(self):
        return self._layers[0].width

    @property
    def height(self):
        return self._layers[0].height

    @property
    def pixel_area_m2(self):
        return self._layers[0].pixel_area_m2

    @property
    def area_km2(self):
        ''' Area of a single layer in square kilometers.
        '''
        return self._layers[0].area_km2

    @property
    def total_area_km2(self):
        ''' Area summed over all layers in square kilometers.
        '''
        return self.area_km2 * self.n_layers

    def layer(self, label):
        ''' Return the layer with the given label.

            Raises:
                InvalidArgumentError: If no layer has that label.
        '''
        try:
            return self._layers[self._labels.index(label)]
        except ValueError:
            raise InvalidArgumentError('no layer labelled %r' % (label,))

    def __len__(self):
        return len(self._layers)

    def __repr__(self):
        return 'ImageStack(%d layers of %dx%d)' % (self.n_layers, self.width,
                                                   self.height)


def pixel_series(stack, x, y):
    ''' Extract the amplitudes at (x, y) across all layers.

        Args:
            stack (ImageStack): The stack.
            x (int): Column, 0 <= x < width.
            y (int): Row, 0 <= y < height.

        Returns:
            Series: The length-N series in temporal order.

        Raises:
            InvalidArgumentError: If the coordinates are out of bounds.
    '''
    if not 0 <= x < stack.width or not 0 <= y < stack.height:
        raise InvalidArgumentError('pixel (%r, %r) is outside the %dx%d stack'
                                   % (x, y, stack.width, stack.height))
    return Series(stack.cube[:, y, x])


def safe_label(label):
    ''' Turn a layer label into something usable in a file name.
    '''
    return re.sub(r'[^A-Za-z0-9_.-]+', '_', label) or 'layer'


def atomic_write(path, data):
    ''' Write data to path through a temporary file and a rename, so
        readers never see a partial file.

        Args:
            path (str): Destination file.
            data (bytes or str): Content.  Text is written as UTF-8.
    '''
    if not isinstance(data, bytes):
        data = data.encode('utf-8')
    directory = os.path.dirname(os.path.abspath(path))
    handle = tempfile.NamedTemporaryFile(dir=directory, prefix='.tmp-',
                                         delete=False)
    try:
        with handle:
            handle.write(data)
        os.replace(handle.name, path)
    except BaseException:
        if os.path.exists(handle.name):
            os.remove(handle.name)
        raise


def read_raster(path, width, height, pixel_area_m2=1.0, label=None):
    ''' Read a headerless little-endian float32 raster.

        Raises:
            StackLoadError: If the file is missing, has the wrong size or
                holds non-finite pixels.
    '''
    name = label if label is not None else path
    if not os.path.isfile(path):
        raise StackLoadError('layer %r: raster file not found: %s'
                             % (name, path))
    data = np.fromfile(path, dtype=RASTER_DTYPE)
    if data.size != width * height:
        raise StackLoadError('layer %r: %s holds %d pixels, expected %dx%d=%d'
                             % (name, path, data.size, width, height,
                                width * height))
    if not np.all(np.isfinite(data)):
        raise StackLoadError('layer %r: %s contains non-finite pixels'
                             % (name, path))
    return Raster(data.reshape(height, width), pixel_area_m2)


def write_raster(path, raster):
    ''' Write a raster as headerless little-endian float32, atomically.
    '''
    atomic_write(path, np.ascontiguousarray(raster.pixels,
                                            dtype=RASTER_DTYPE).tobytes())


def _pgm_tokens(data, count):
    ''' Pull count whitespace separated header tokens, skipping comments.
        Returns the tokens and the offset of the first raster byte.
    '''
    tokens = []
    pos = 0
    while len(tokens) < count:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b'#':
            while pos < len(data) and data[pos:pos + 1] not in (b'\n', b'\r'):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ValueError('truncated header')
        tokens.append(data[start:pos])
    # Exactly one whitespace byte separates the header from the raster.
    return tokens, pos + 1


def read_pgm(path, pixel_area_m2=1.0, label=None):
    ''' Read a binary PGM (P5) image scaled to [0, 1] by its maxval.

        Raises:
            StackLoadError: If the file is missing or not a valid P5 image.
    '''
    name = label if label is not None else path
    if not os.path.isfile(path):
        raise StackLoadError('layer %r: PGM file not found: %s'
                             % (name, path))
    with open(path, 'rb') as handle:
        data = handle.read()
    try:
        tokens, offset = _pgm_tokens(data, 4)
        if tokens[0] != b'P5':
            raise ValueError('magic %r is not P5' % tokens[0])
        width, height, maxval = [int(tok) for tok in tokens[1:]]
        if not 0 < maxval < 65536:
            raise ValueError('maxval %d out of range' % maxval)
        dtype = np.dtype('u1') if maxval < 256 else np.dtype('>u2')
        raw = np.frombuffer(data, dtype=dtype, count=width * height,
                            offset=offset)
    except ValueError as error:
        raise StackLoadError('layer %r: %s is not a valid P5 PGM: %s'
                             % (name, path, error))
    pixels = raw.reshape(height, width).astype(np.float64) / maxval
    return Raster(pixels, pixel_area_m2)


def write_pgm(path, raster, low=None, high=None):
    ''' Write an 8-bit PGM view of a raster with a linear stretch.

        Args:
            path (str): Destination file.
            raster (Raster): Raster to render.
            low (float): Value mapped to black.  Defaults to the minimum.
            high (float): Value mapped to white.  Defaults to the maximum.
    '''
    pixels = raster.pixels.astype(np.float64)
    low = float(pixels.min()) if low is None else float(low)
    high = float(pixels.max()) if high is None else float(high)
    span = high - low if high > low else 1.0
    scaled = np.clip((pixels - low) / span, 0.0, 1.0)
    image = np.round(scaled * 255.0).astype(np.uint8)
    header = ('P5\n%d %d\n255\n' % (raster.width, raster.height)).encode()
    atomic_write(path, header + image.tobytes())


def load_stack(manifest_path):
    ''' Load and validate the stack described by a manifest.

        Args:
            manifest_path (str): Path to the JSON manifest.

        Returns:
            ImageStack: Layers in manifest order.

        Raises:
            StackLoadError: If the manifest or any layer cannot be read or
                the layers do not form a valid stack.  Messages name the
                offending file and layer.
    '''
    if not os.path.isfile(manifest_path):
        raise StackLoadError('manifest not found: %s' % manifest_path)
    try:
        with open(manifest_path, 'r') as stream:
            manifest = json.load(stream)
    except ValueError as error:
        raise StackLoadError('manifest %s is not valid JSON: %s'
                             % (manifest_path, error))
    try:
        pixel_area_m2 = float(manifest['pixel_area_m2'])
        entries = list(manifest['layers'])
    except (KeyError, TypeError, ValueError) as error:
        raise StackLoadError('manifest %s: missing or invalid field %s'
                             % (manifest_path, error))
    if len(entries) < 2:
        raise StackLoadError('manifest %s: stack requires >= 2 layers, got %d'
                             % (manifest_path, len(entries)))
    base = os.path.dirname(os.path.abspath(manifest_path))
    layers = []
    labels = []
    for idx, entry in enumerate(entries):
        try:
            label = str(entry.get('label', 'layer%02d' % idx))
            path = os.path.join(base, entry['path'])
            width = int(entry['width'])
            height = int(entry['height'])
        except (AttributeError, KeyError, TypeError, ValueError) as error:
            raise StackLoadError('manifest %s: layer %d: missing or invalid'
                                 ' field %s' % (manifest_path, idx, error))
        try:
            if path.lower().endswith('.pgm'):
                layer = read_pgm(path, pixel_area_m2, label)
                if layer.shape != (height, width):
                    raise StackLoadError(
                        'layer %r: %s is %dx%d, manifest says %dx%d'
                        % (label, path, layer.width, layer.height, width,
                           height))
            else:
                layer = read_raster(path, width, height, pixel_area_m2,
                                    label)
        except InvalidArgumentError as error:
            raise StackLoadError('layer %r: %s' % (label, error))
        if np.any(layer.pixels < 0):
            LOG.warning('layer %r has negative amplitudes', label)
        layers.append(layer)
        labels.append(label)
    try:
        stack = ImageStack(layers, labels)
    except InvalidArgumentError as error:
        raise StackLoadError('manifest %s: %s' % (manifest_path, error))
    LOG.info('Loaded stack of %d layers, %dx%d pixels, %.4f km2 per layer',
             stack.n_layers, stack.width, stack.height, stack.area_km2)
    return stack


def save_stack(stack, out_dir, manifest_name='manifest.json'):
    ''' Write every layer as a raw raster plus a manifest describing them.

        Returns:
            str: Path of the written manifest.
    '''
    if not os.path.isdir(out_dir):
        os.makedirs(out_dir)
    entries = []
    for label, layer in zip(stack.labels, stack.layers):
        filename = '%s.raw' % safe_label(label)
        write_raster(os.path.join(out_dir, filename), layer)
        entries.append({'path': filename, 'label': label,
                        'width': layer.width, 'height': layer.height})
    manifest = {'pixel_area_m2': stack.pixel_area_m2, 'layers': entries}
    path = os.path.join(out_dir, manifest_name)
    atomic_write(path, json.dumps(manifest, indent=2, sort_keys=True) + '\n')
    LOG.info('Wrote stack of %d layers to %s', stack.n_layers, out_dir)
    return path
