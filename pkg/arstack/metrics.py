#
# Copyright (c) 2026, arstack developers
# All rights reserved.
#
# Use of this source code is governed by the BSD-3 license that can be
# found in the LICENSE file.
#
''' Detection scoring: probability of detection, false alarm rate and ROC
    sweeps over the detection constant.

Pd is the number of detected known targets divided by the number of known
targets.  FAR is the number of detections not matched to a known target per
square kilometer of imaged area.  Detections are matched greedily: in their
deterministic order each detection claims the nearest unclaimed target
within the match radius.
'''
import json
import logging
from collections import OrderedDict, namedtuple
from concurrent.futures import ThreadPoolExecutor
from numbers import Integral

import numpy as np
import pandas as pd

from arstack.arstack_errors import InvalidArgumentError, StackLoadError
from arstack.detect import detect_layers
from arstack.estimate import difference_stack
from arstack.stack import atomic_write

LOG = logging.getLogger('arstack.metrics')

DEFAULT_MATCH_RADIUS_PX = 10.0
DEFAULT_C_VALUES = (4.5, 5.0, 5.5, 6.0, 6.5)

TRUTH_COLUMNS = ['layer_label', 'x', 'y']
SCORE_COLUMNS = ['layer_label', 'known_targets', 'detected_targets', 'pd',
                 'area_km2', 'false_alarms', 'far_per_km2']
ROW_COLUMNS = ['layer_label', 'known_targets', 'detected_targets',
               'false_alarms', 'area_km2']
ROC_COLUMNS = ['c', 'far_per_km2', 'pd']
TOTAL_LABEL = 'Total'


class GroundTruth(namedtuple('GroundTruth', ['layer_label', 'targets'])):
    ''' Known target positions in one layer.

        Attributes:
            layer_label (str): Layer the targets belong to.
            targets (tuple): (x, y) pixel positions.
    '''
    __slots__ = ()


class RowInput(namedtuple('RowInput', ['layer_label', 'hits', 'false_alarms',
                                       'known', 'area_km2'])):
    ''' Tallied matches of one layer, the input of score().
    '''
    __slots__ = ()


class ScoreRow(namedtuple('ScoreRow', SCORE_COLUMNS)):
    ''' One line of a detection report.
    '''
    __slots__ = ()


class RocPoint(namedtuple('RocPoint', ['c', 'far_per_km2', 'pd'])):
    __slots__ = ()


class RocCurve(namedtuple('RocCurve', ['points'])):
    ''' Aggregate (FAR, Pd) points ordered by ascending C.
    '''
    __slots__ = ()

    @property
    def c_values(self):
        return [point.c for point in self.points]

    @property
    def pd(self):
        return [point.pd for point in self.points]

    @property
    def far(self):
        return [point.far_per_km2 for point in self.points]


class DetectionParams(namedtuple('DetectionParams',
                                 ['se_radius', 'min_cluster_size',
                                  'match_radius_px', 'two_sided',
                                  'pooled_stats'])):
    ''' Everything besides C that shapes a detection run.
    '''
    __slots__ = ()

    def __new__(cls, se_radius=1, min_cluster_size=2,
                match_radius_px=DEFAULT_MATCH_RADIUS_PX, two_sided=False,
                pooled_stats=False):
        # pylint: disable=too-many-arguments
        return super(DetectionParams, cls).__new__(
            cls, se_radius, min_cluster_size, match_radius_px, two_sided,
            pooled_stats)


class FalseAlarmComparison(namedtuple('FalseAlarmComparison',
                                      ['detected', 'false_alarms',
                                       'reference_detected',
                                       'reference_false_alarms',
                                       'reduction'])):
    ''' Totals of a run set against a reference method on the same data.
    '''
    __slots__ = ()


def match(detections, truth, match_radius_px=DEFAULT_MATCH_RADIUS_PX):
    ''' Match detections to known targets one to one.

        Args:
            detections (list of Detection): In their deterministic order.
            truth (GroundTruth): Known targets of the same layer.
            match_radius_px (float): Largest Euclidean distance in pixels
                between a detection centroid and its target.

        Returns:
            tuple: (hits, false_alarms)

        Raises:
            InvalidArgumentError: If match_radius_px is not positive.
    '''
    if not match_radius_px > 0:
        raise InvalidArgumentError('match_radius_px must be positive, got %r'
                                   % (match_radius_px,))
    targets = np.asarray(truth.targets, dtype=np.float64).reshape(-1, 2)
    claimed = np.zeros(len(targets), dtype=bool)
    radius_sq = float(match_radius_px) ** 2
    hits = 0
    for det in detections:
        if claimed.all():
            break
        dist = ((targets[:, 0] - det.centroid_x) ** 2 +
                (targets[:, 1] - det.centroid_y) ** 2)
        dist[claimed] = np.inf
        nearest = int(np.argmin(dist))
        if dist[nearest] <= radius_sq:
            claimed[nearest] = True
            hits += 1
    return hits, len(detections) - hits


def score(rows_inputs):
    ''' Turn tallied matches into report rows.

        Args:
            rows_inputs (list of RowInput or tuple): (layer_label, hits,
                false_alarms, known, area_km2) per layer.

        Returns:
            tuple: (list of ScoreRow, aggregate ScoreRow).  The aggregate
                Pd is sum(hits) / sum(known), its FAR is
                sum(false_alarms) / sum(area_km2).

        Raises:
            InvalidArgumentError: If a row has no known targets, a
                non-positive area, or more hits than known targets.
    '''
    rows = []
    for raw in rows_inputs:
        item = RowInput(*raw)
        if not isinstance(item.known, Integral) or item.known <= 0:
            raise InvalidArgumentError('layer %r: known targets must be a'
                                       ' positive integer, got %r'
                                       % (item.layer_label, item.known))
        if not item.area_km2 > 0:
            raise InvalidArgumentError('layer %r: area must be positive, got'
                                       ' %r' % (item.layer_label,
                                                item.area_km2))
        if not 0 <= item.hits <= item.known or item.false_alarms < 0:
            raise InvalidArgumentError(
                'layer %r: need 0 <= hits <= known and false_alarms >= 0,'
                ' got hits=%r known=%r false_alarms=%r'
                % (item.layer_label, item.hits, item.known,
                   item.false_alarms))
        rows.append(ScoreRow(layer_label=item.layer_label,
                             known_targets=int(item.known),
                             detected_targets=int(item.hits),
                             pd=float(item.hits) / item.known,
                             area_km2=float(item.area_km2),
                             false_alarms=int(item.false_alarms),
                             far_per_km2=float(item.false_alarms) /
                             item.area_km2))
    if not rows:
        raise InvalidArgumentError('nothing to score')
    known = sum(row.known_targets for row in rows)
    detected = sum(row.detected_targets for row in rows)
    false_alarms = sum(row.false_alarms for row in rows)
    area = sum(row.area_km2 for row in rows)
    total = ScoreRow(layer_label=TOTAL_LABEL, known_targets=known,
                     detected_targets=detected, pd=float(detected) / known,
                     area_km2=area, false_alarms=false_alarms,
                     far_per_km2=float(false_alarms) / area)
    return rows, total


def compare_false_alarms(total, reference_false_alarms,
                         reference_detected=None):
    ''' Compare aggregate counts against a reference method.

        Args:
            total (ScoreRow): Aggregate row of this run.
            reference_false_alarms (int): False alarms of the reference.
            reference_detected (int): Detections of the reference.  Defaults
                to this run's count.

        Returns:
            FalseAlarmComparison: reduction is reference minus ours, so a
                positive value means fewer false alarms here.
    '''
    if reference_detected is None:
        reference_detected = total.detected_targets
    return FalseAlarmComparison(
        detected=total.detected_targets, false_alarms=total.false_alarms,
        reference_detected=int(reference_detected),
        reference_false_alarms=int(reference_false_alarms),
        reduction=int(reference_false_alarms) - total.false_alarms)


def _index_truths(stack, truths):
    indexed = OrderedDict()
    for truth in truths:
        if truth.layer_label not in stack.labels:
            raise InvalidArgumentError('ground truth names layer %r which is'
                                       ' not in the stack'
                                       % (truth.layer_label,))
        if truth.layer_label in indexed:
            raise InvalidArgumentError('ground truth for layer %r given twice'
                                       % (truth.layer_label,))
        for x_pos, y_pos in truth.targets:
            if not (0 <= x_pos < stack.width and 0 <= y_pos < stack.height):
                raise InvalidArgumentError(
                    'target (%g, %g) of layer %r lies outside the %dx%d'
                    ' stack' % (x_pos, y_pos, truth.layer_label, stack.width,
                                stack.height))
        indexed[truth.layer_label] = truth
    for label in stack.labels:
        if label not in indexed:
            LOG.warning('Layer %r has no ground truth and is not scored',
                        label)
    return indexed


def _score_diffs(stack, diffs, indexed, c, params):
    results = detect_layers(diffs, c, se_radius=params.se_radius,
                            min_cluster_size=params.min_cluster_size,
                            two_sided=params.two_sided,
                            pooled_stats=params.pooled_stats)
    inputs = []
    for label, (_, _, detections) in zip(stack.labels, results):
        truth = indexed.get(label)
        if truth is None:
            continue
        hits, false_alarms = match(detections, truth, params.match_radius_px)
        inputs.append(RowInput(label, hits, false_alarms,
                               len(truth.targets), stack.area_km2))
    rows, total = score(inputs)
    return rows, total, results


def score_stack(stack, ground, truths, c, params=None, diffs=None):
    ''' Run detection at one C on every layer and score the layers that
        have ground truth.

        Args:
            stack (ImageStack): The surveillance stack.
            ground (GroundEstimate): Reference scene for differencing.
            truths (list of GroundTruth): Known targets per layer.
            c (float): Detection constant.
            params (DetectionParams): Defaults when omitted.
            diffs (list of Raster): Precomputed difference images.

        Returns:
            tuple: (list of ScoreRow, aggregate ScoreRow, per-layer
                (ThresholdSpec, BinaryMask, detections) results)

        Raises:
            InvalidArgumentError: On unknown or duplicate truth layers, or
                a layer without known targets.
            DegenerateInputError: If a difference image is constant.
    '''
    params = params or DetectionParams()
    indexed = _index_truths(stack, truths)
    if diffs is None:
        diffs = difference_stack(stack, ground)
    rows, total, results = _score_diffs(stack, diffs, indexed, c, params)
    LOG.info('C=%g: Pd=%.4f FAR=%.4f/km2 (%d of %d targets, %d false'
             ' alarms)', c, total.pd, total.far_per_km2,
             total.detected_targets, total.known_targets, total.false_alarms)
    return rows, total, results


def roc_sweep(stack, ground, truths, cs, params=None, threads=1):
    ''' Score the stack at every detection constant in cs.

        Args:
            cs (list of float): Detection constants, non-empty, ascending.
            threads (int): C values processed in parallel.

        Returns:
            RocCurve: Aggregate (FAR, Pd) per C, in the order of cs.

        Raises:
            InvalidArgumentError: If cs is empty or not ascending.
    '''
    cs = [float(c) for c in cs]
    if not cs:
        raise InvalidArgumentError('no detection constants to sweep')
    if any(later < earlier for earlier, later in zip(cs, cs[1:])):
        raise InvalidArgumentError('detection constants must be ascending,'
                                   ' got %s' % cs)
    params = params or DetectionParams()
    indexed = _index_truths(stack, truths)
    diffs = difference_stack(stack, ground)

    def point(c):
        _, total, _ = _score_diffs(stack, diffs, indexed, c, params)
        LOG.debug('Sweep C=%g: Pd=%.4f FAR=%.4f', c, total.pd,
                  total.far_per_km2)
        return RocPoint(c=c, far_per_km2=total.far_per_km2, pd=total.pd)

    threads = max(1, threads or 1)
    if threads == 1 or len(cs) == 1:
        points = [point(c) for c in cs]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            points = list(pool.map(point, cs))
    return RocCurve(points=tuple(points))


def load_ground_truth(path):
    ''' Read a ground-truth CSV with header layer_label,x,y.

        Returns:
            list of GroundTruth: One per layer, in order of first
                appearance.

        Raises:
            StackLoadError: If the file is missing or malformed.
    '''
    try:
        frame = pd.read_csv(path, dtype={'layer_label': str})
    except (IOError, OSError, ValueError) as error:
        raise StackLoadError('cannot read ground truth %s: %s'
                             % (path, error))
    missing = [col for col in TRUTH_COLUMNS if col not in frame.columns]
    if missing:
        raise StackLoadError('ground truth %s lacks columns %s'
                             % (path, ', '.join(missing)))
    try:
        coords = frame[['x', 'y']].astype(float)
    except ValueError as error:
        raise StackLoadError('ground truth %s has non-numeric positions: %s'
                             % (path, error))
    if not np.all(np.isfinite(coords.values)):
        raise StackLoadError('ground truth %s has missing or non-finite'
                             ' positions' % path)
    grouped = OrderedDict()
    for label, x_pos, y_pos in zip(frame['layer_label'], coords['x'],
                                   coords['y']):
        grouped.setdefault(label, []).append((float(x_pos), float(y_pos)))
    return [GroundTruth(label, tuple(targets))
            for label, targets in grouped.items()]


def ground_truth_frame(truths):
    records = [(truth.layer_label, x_pos, y_pos)
               for truth in truths for x_pos, y_pos in truth.targets]
    return pd.DataFrame.from_records(records, columns=TRUTH_COLUMNS)


def write_ground_truth(path, truths):
    ''' Write ground truth as CSV with header layer_label,x,y.
    '''
    atomic_write(path, ground_truth_frame(truths).to_csv(
        index=False, float_format='%.4f'))


def load_score_rows(path):
    ''' Read pre-tallied rows: CSV with header layer_label,known_targets,
        detected_targets,false_alarms,area_km2.

        Returns:
            list of RowInput

        Raises:
            StackLoadError: If the file is missing or malformed.
    '''
    try:
        frame = pd.read_csv(path, dtype={'layer_label': str})
    except (IOError, OSError, ValueError) as error:
        raise StackLoadError('cannot read score rows %s: %s' % (path, error))
    missing = [col for col in ROW_COLUMNS if col not in frame.columns]
    if missing:
        raise StackLoadError('score rows %s lack columns %s'
                             % (path, ', '.join(missing)))
    try:
        return [RowInput(str(rec.layer_label), int(rec.detected_targets),
                         int(rec.false_alarms), int(rec.known_targets),
                         float(rec.area_km2))
                for rec in frame.itertuples(index=False)]
    except (TypeError, ValueError) as error:
        raise StackLoadError('score rows %s are malformed: %s'
                             % (path, error))


def score_frame(rows, total):
    ''' Report rows followed by the aggregate as a DataFrame.
    '''
    return pd.DataFrame([tuple(row) for row in list(rows) + [total]],
                        columns=SCORE_COLUMNS)


def write_score_csv(path, rows, total):
    ''' Machine-readable report, four decimals.
    '''
    atomic_write(path, score_frame(rows, total).to_csv(index=False,
                                                       float_format='%.4f'))


def write_score_json(path, rows, total, comparison=None):
    ''' Machine-readable report as JSON, four decimals.
    '''
    def record(row):
        item = row._asdict()
        for key in ('pd', 'area_km2', 'far_per_km2'):
            item[key] = round(item[key], 4)
        return item

    report = OrderedDict([('rows', [record(row) for row in rows]),
                          ('total', record(total))])
    if comparison is not None:
        report['comparison'] = comparison._asdict()
    atomic_write(path, json.dumps(report, indent=2) + '\n')


def format_score_table(rows, total, comparison=None):
    ''' Human-readable report, two decimals.
    '''
    frame = score_frame(rows, total)
    formatters = {'pd': '{:.2f}'.format, 'area_km2': '{:.2f}'.format,
                  'far_per_km2': '{:.2f}'.format}
    text = frame.to_string(index=False, formatters=formatters) + '\n'
    if comparison is not None:
        text += ('Reference: %d detected with %d false alarms; this run: %d'
                 ' detected with %d false alarms (%d fewer)\n'
                 % (comparison.reference_detected,
                    comparison.reference_false_alarms, comparison.detected,
                    comparison.false_alarms, comparison.reduction))
    return text


def roc_frame(curve):
    return pd.DataFrame([tuple(point) for point in curve.points],
                        columns=ROC_COLUMNS)


def write_roc_csv(path, curve):
    ''' Plot-ready ROC CSV with header c,far_per_km2,pd, four decimals.
    '''
    atomic_write(path, roc_frame(curve).to_csv(index=False,
                                               float_format='%.4f'))
