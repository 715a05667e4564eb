#
# Copyright (c) 2026, arstack developers
# All rights reserved.
#
# Use of this source code is governed by the BSD-3 license that can be
# found in the LICENSE file.
#
''' Change detection on difference images.

A difference image is thresholded at

    lambda = mu_hat + C * sigma_hat

where mu_hat and sigma_hat are the mean and standard deviation of the
considered difference pixels and C is the detection constant.  The binary
result is cleaned with a morphological opening (erosion then dilation with
a square structuring element) and grouped into 8-connected clusters, each
reported as one detection.

Example:

    >>> spec = make_threshold(diff, 4.5)
    >>> mask, detections = detect_changes(diff, spec)
'''
import logging
from collections import namedtuple
from concurrent.futures import ThreadPoolExecutor
from numbers import Integral

import numpy as np
import pandas as pd
from scipy import ndimage, stats

from arstack.arstack_errors import DegenerateInputError, \
    InvalidArgumentError
from arstack.stack import atomic_write

LOG = logging.getLogger('arstack.detect')

DETECTION_COLUMNS = ['layer_label', 'centroid_x', 'centroid_y',
                     'pixel_count', 'peak_value']
THRESHOLD_COLUMNS = ['layer_label', 'c', 'mu_hat', 'sigma_hat', 'lambda',
                     'two_sided']

HISTOGRAM_BINS = 256
HISTOGRAM_SPAN = 8.0

# 8-connectivity for labeling.
_CONNECTIVITY = np.ones((3, 3), dtype=bool)


class ThresholdSpec(namedtuple('ThresholdSpec', ['c', 'mu_hat', 'sigma_hat',
                                                 'lambda_', 'two_sided'])):
    ''' A detection threshold.

        Attributes:
            c (float): Detection constant C.
            mu_hat (float): Mean of the considered difference pixels.
            sigma_hat (float): Their standard deviation (denominator N).
            lambda_ (float): Absolute threshold mu_hat + c * sigma_hat.
            two_sided (bool): Flag |diff - mu_hat| >= c * sigma_hat instead
                of diff >= lambda_.
    '''
    __slots__ = ()


class Detection(namedtuple('Detection', ['centroid_x', 'centroid_y',
                                         'pixel_count', 'peak_value'])):
    ''' One connected cluster of changed pixels.
    '''
    __slots__ = ()


class BinaryMask(object):
    ''' A read-only boolean raster, row major.
    '''
    __slots__ = ('_bits',)

    def __init__(self, bits):
        arr = np.array(bits, dtype=bool)
        if arr.ndim != 2:
            raise InvalidArgumentError('mask must be 2-D, got shape %s'
                                       % (arr.shape,))
        arr.flags.writeable = False
        self._bits = arr

    @property
    def bits(self):
        return self._bits

    @property
    def width(self):
        return self._bits.shape[1]

    @property
    def height(self):
        return self._bits.shape[0]

    @property
    def shape(self):
        return self._bits.shape

    def count(self):
        ''' Number of set bits.
        '''
        return int(np.count_nonzero(self._bits))

    def issubset(self, other):
        ''' True if every bit set here is set in other.
        '''
        return not np.any(self._bits & ~other.bits)

    def __eq__(self, other):
        if not isinstance(other, BinaryMask):
            return NotImplemented
        return np.array_equal(self._bits, other.bits)

    def __ne__(self, other):
        result = self.__eq__(other)
        return result if result is NotImplemented else not result

    __hash__ = None

    def __repr__(self):
        return 'BinaryMask(%dx%d, %d set)' % (self.width, self.height,
                                              self.count())


def _check_constant(c):
    if not np.isfinite(c):
        raise InvalidArgumentError('detection constant must be finite, got %r'
                                   % (c,))


def _statistics(values):
    values = np.asarray(values, dtype=np.float64).ravel()
    if values.size == 0:
        raise InvalidArgumentError('difference image is empty')
    mu_hat = float(np.mean(values))
    sigma_hat = float(np.sqrt(np.mean((values - mu_hat) ** 2)))
    return mu_hat, sigma_hat


def _spec(c, mu_hat, sigma_hat, two_sided, what):
    if not sigma_hat > 0:
        raise DegenerateInputError('%s is constant (sigma_hat = 0); no'
                                   ' detection is meaningful' % what)
    return ThresholdSpec(c=float(c), mu_hat=mu_hat, sigma_hat=sigma_hat,
                         lambda_=mu_hat + c * sigma_hat,
                         two_sided=bool(two_sided))


def make_threshold(diff, c, two_sided=False):
    ''' Threshold from the statistics of one difference image.

        Args:
            diff (Raster): The difference image.
            c (float): Detection constant C.
            two_sided (bool): Use the two-sided test.

        Returns:
            ThresholdSpec: mu_hat and sigma_hat over all pixels of diff.

        Raises:
            DegenerateInputError: If the difference image is constant.
            InvalidArgumentError: If c is not finite.
    '''
    _check_constant(c)
    mu_hat, sigma_hat = _statistics(diff.pixels)
    return _spec(c, mu_hat, sigma_hat, two_sided, 'difference image')


def make_pooled_threshold(diffs, c, two_sided=False):
    ''' Threshold from the statistics pooled over several difference
        images, e.g. every layer of a stack.

        Raises:
            DegenerateInputError: If the pooled pixels are constant.
            InvalidArgumentError: If c is not finite or diffs is empty.
    '''
    _check_constant(c)
    diffs = list(diffs)
    if not diffs:
        raise InvalidArgumentError('no difference images to pool')
    pooled = np.concatenate([diff.pixels.ravel() for diff in diffs])
    mu_hat, sigma_hat = _statistics(pooled)
    return _spec(c, mu_hat, sigma_hat, two_sided, 'pooled difference stack')


def threshold(diff, spec):
    ''' Flag the pixels of diff that exceed the threshold.

        One-sided: diff >= lambda_.  Two-sided: |diff - mu_hat| >=
        c * sigma_hat.

        Returns:
            BinaryMask: Same dimensions as diff.
    '''
    pixels = diff.pixels.astype(np.float64)
    if spec.two_sided:
        bits = np.abs(pixels - spec.mu_hat) >= spec.c * spec.sigma_hat
    else:
        bits = pixels >= spec.lambda_
    return BinaryMask(bits)


def morph_open(mask, se_radius=1):
    ''' Erode then dilate with a square element of side 2 * se_radius + 1.

        Pixels outside the image count as background.  se_radius=0 returns
        the mask unchanged.

        Raises:
            InvalidArgumentError: If se_radius is negative.
    '''
    if not isinstance(se_radius, Integral) or se_radius < 0:
        raise InvalidArgumentError('se_radius must be an integer >= 0, got %r'
                                   % (se_radius,))
    if se_radius == 0:
        return BinaryMask(mask.bits)
    side = 2 * se_radius + 1
    element = np.ones((side, side), dtype=bool)
    return BinaryMask(ndimage.binary_opening(mask.bits, structure=element,
                                             border_value=0))


def cluster(mask, diff, min_cluster_size=2):
    ''' Group set bits into 8-connected detections.

        Args:
            mask (BinaryMask): Changed pixels.
            diff (Raster): Difference image the peaks are read from.
            min_cluster_size (int): Smaller components are dropped.

        Returns:
            list of Detection: Sorted by descending peak_value, ties by
                centroid_y then centroid_x.

        Raises:
            InvalidArgumentError: If the dimensions differ or
                min_cluster_size < 1.
    '''
    if mask.shape != diff.shape:
        raise InvalidArgumentError('dimension mismatch: mask is %dx%d, diff'
                                   ' is %dx%d' % (mask.width, mask.height,
                                                  diff.width, diff.height))
    if not isinstance(min_cluster_size, Integral) or min_cluster_size < 1:
        raise InvalidArgumentError('min_cluster_size must be >= 1, got %r'
                                   % (min_cluster_size,))
    labels, n_labels = ndimage.label(mask.bits, structure=_CONNECTIVITY)
    if n_labels == 0:
        return []
    flat = labels.ravel()
    rows, cols = np.indices(labels.shape)
    counts = np.bincount(flat, minlength=n_labels + 1)
    sum_x = np.bincount(flat, weights=cols.ravel(), minlength=n_labels + 1)
    sum_y = np.bincount(flat, weights=rows.ravel(), minlength=n_labels + 1)
    index = np.arange(1, n_labels + 1)
    peaks = ndimage.maximum(diff.pixels, labels, index)
    detections = []
    for label, peak in zip(index, peaks):
        count = int(counts[label])
        if count < min_cluster_size:
            continue
        detections.append(Detection(centroid_x=sum_x[label] / count,
                                    centroid_y=sum_y[label] / count,
                                    pixel_count=count,
                                    peak_value=float(peak)))
    detections.sort(key=lambda det: (-det.peak_value, det.centroid_y,
                                     det.centroid_x))
    return detections


def detect_changes(diff, spec, se_radius=1, min_cluster_size=2):
    ''' Threshold, open and cluster one difference image.

        Returns:
            tuple: (opened BinaryMask, list of Detection)
    '''
    raw = threshold(diff, spec)
    opened = morph_open(raw, se_radius)
    detections = cluster(opened, diff, min_cluster_size)
    LOG.debug('C=%g: %d pixels over threshold, %d after opening, %d'
              ' detections', spec.c, raw.count(), opened.count(),
              len(detections))
    return opened, detections


def detect_layers(diffs, c, se_radius=1, min_cluster_size=2,
                  two_sided=False, pooled_stats=False, threads=1):
    ''' Detect changes on several difference images at one C.

        Args:
            diffs (list of Raster): One difference image per layer.
            c (float): Detection constant.
            se_radius (int): Opening element radius.
            min_cluster_size (int): Smallest kept cluster.
            two_sided (bool): Use the two-sided test.
            pooled_stats (bool): Take mu_hat and sigma_hat over all diffs
                together instead of per image.
            threads (int): Images processed in parallel.

        Returns:
            list of tuple: (ThresholdSpec, BinaryMask, list of Detection)
                per image, in input order.
    '''
    # pylint: disable=too-many-arguments
    diffs = list(diffs)
    pooled = None
    if pooled_stats:
        pooled = make_pooled_threshold(diffs, c, two_sided)

    def run(diff):
        spec = pooled if pooled is not None else \
            make_threshold(diff, c, two_sided)
        mask, detections = detect_changes(diff, spec, se_radius,
                                          min_cluster_size)
        return spec, mask, detections

    threads = max(1, threads or 1)
    if threads == 1 or len(diffs) < 2:
        return [run(diff) for diff in diffs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(run, diffs))


def difference_histogram(diff, spec=None, bins=HISTOGRAM_BINS,
                         span=HISTOGRAM_SPAN):
    ''' Histogram of difference values over mu_hat +/- span * sigma_hat.

        Values outside the span are not counted.

        Args:
            diff (Raster): The difference image.
            spec (ThresholdSpec): Supplies mu_hat and sigma_hat.  Computed
                from diff when omitted.

        Returns:
            pandas.DataFrame: Columns bin_left, bin_right, count.
    '''
    if spec is None:
        spec = make_threshold(diff, 0.0)
    low = spec.mu_hat - span * spec.sigma_hat
    high = spec.mu_hat + span * spec.sigma_hat
    counts, edges = np.histogram(diff.pixels.astype(np.float64), bins=bins,
                                 range=(low, high))
    return pd.DataFrame({'bin_left': edges[:-1], 'bin_right': edges[1:],
                         'count': counts},
                        columns=['bin_left', 'bin_right', 'count'])


def difference_moments(diff, exclude=None):
    ''' Sample skewness and excess kurtosis of difference values.

        A difference image of unchanged clutter is close to normal, so both
        should be near zero away from targets.

        Args:
            diff (Raster): The difference image.
            exclude (BinaryMask): Pixels to leave out, e.g. target sites.

        Returns:
            tuple: (skewness, excess kurtosis)
    '''
    values = diff.pixels.astype(np.float64)
    if exclude is not None:
        values = values[~exclude.bits]
    else:
        values = values.ravel()
    return float(stats.skew(values)), float(stats.kurtosis(values))


def detections_frame(labelled):
    ''' Tabulate detections.

        Args:
            labelled (list of tuple): (layer_label, list of Detection) pairs
                in output order.

        Returns:
            pandas.DataFrame: One row per detection, DETECTION_COLUMNS.
    '''
    records = [(label, det.centroid_x, det.centroid_y, det.pixel_count,
                det.peak_value)
               for label, detections in labelled for det in detections]
    frame = pd.DataFrame.from_records(records, columns=DETECTION_COLUMNS)
    return frame.astype({'centroid_x': float, 'centroid_y': float,
                         'pixel_count': int, 'peak_value': float})


def write_detections_csv(path, labelled):
    ''' Write detections as CSV with four decimals, atomically.
    '''
    frame = detections_frame(labelled)
    atomic_write(path, frame.to_csv(index=False, float_format='%.4f'))


def write_thresholds_csv(path, labelled_specs):
    ''' Write (layer_label, ThresholdSpec) pairs as CSV, six decimals.
    '''
    frame = pd.DataFrame.from_records(
        [(label,) + tuple(spec) for label, spec in labelled_specs],
        columns=THRESHOLD_COLUMNS)
    atomic_write(path, frame.to_csv(index=False, float_format='%.6f'))
