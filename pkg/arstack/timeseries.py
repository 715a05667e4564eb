#
# Copyright (c) 2026, arstack developers
# All rights reserved.
#
# Use of this source code is governed by the BSD-3 license that can be
# found in the LICENSE file.
#
''' Autoregressive model estimation and forecasting.

The model of order p for a series y[n] is

    y[n] = -a[1] y[n-1] - a[2] y[n-2] - ... - a[p] y[n-p] + u[n]

where u[n] is white noise.  The coefficients a[1..p] are estimated from the
Yule-Walker system R a = -r, where R is the p x p Toeplitz matrix of the
biased autocorrelation r[0..p-1] of the mean-centered series and r holds
r[1..p].  The system is solved with the Levinson-Durbin recursion.

The sample mean is removed before fitting and added back after forecasting.
A series whose lag-zero autocorrelation is numerically zero (a constant
pixel) yields the zero model: all coefficients and the noise variance are 0
and every forecast is the mean.

Each scalar operation delegates to a batch form working on an (N, M) array
holding M series of N samples.  The batch forms only combine values of the
same column, in a fixed order, so the result for one series is bit-identical
whether it is processed alone or together with any other series.

Example:

    >>> from arstack.timeseries import Series, fit_yule_walker, forecast
    >>> series = Series([1, -1, 1, -1, 1, -1, 1, -1])
    >>> model = fit_yule_walker(series, 1)
    >>> model.coefficients
    (0.875,)
    >>> forecast(model, series, 1)
    0.875
'''
import logging
from collections import namedtuple
from numbers import Integral

import numpy as np

from arstack.arstack_errors import InvalidArgumentError, InvalidDataError

LOG = logging.getLogger('arstack.timeseries')

# A series is degenerate when r[0] <= DEGENERATE_VARIANCE * max(1, mean^2).
DEGENERATE_VARIANCE = 1e-12


class Series(object):
    ''' An immutable series of N >= 2 finite amplitude samples.
    '''
    __slots__ = ('_values',)

    def __init__(self, values):
        ''' Copy and validate the samples.

            Args:
                values (sequence of float): The samples in temporal order.

            Raises:
                InvalidDataError: If the samples are not one dimensional,
                    fewer than two, or not all finite.
        '''
        arr = np.array(values, dtype=np.float64)
        if arr.ndim != 1:
            raise InvalidDataError('series must be one dimensional, got'
                                   ' shape %s' % (arr.shape,))
        if arr.size < 2:
            raise InvalidDataError('series requires at least 2 samples,'
                                   ' got %d' % arr.size)
        if not np.all(np.isfinite(arr)):
            raise InvalidDataError('series contains non-finite samples')
        arr.flags.writeable = False
        self._values = arr

    @property
    def values(self):
        ''' Read-only float64 array of the samples.
        '''
        return self._values

    def __len__(self):
        return self._values.size

    def __getitem__(self, idx):
        return float(self._values[idx])

    def __iter__(self):
        return iter(self._values.tolist())

    def __repr__(self):
        return 'Series(%s)' % self._values.tolist()


class ArModel(namedtuple('ArModel', ['order', 'coefficients', 'mean',
                                     'noise_variance',
                                     'reflection_coefficients'])):
    ''' A fitted AR(p) model.

        Attributes:
            order (int): The model order p.
            coefficients (tuple of float): The estimates a[1..p].
            mean (float): Sample mean removed before fitting.
            noise_variance (float): Innovation variance estimate, >= 0.
            reflection_coefficients (tuple of float): Partial
                autocorrelations produced by the recursion, one per order.
    '''
    __slots__ = ()

    @classmethod
    def zero(cls, order, mean):
        ''' The model that forecasts the mean forever.
        '''
        return cls(order, (0.0,) * order, float(mean), 0.0, (0.0,) * order)


def _check_order(order, n_samples, name='order'):
    if not isinstance(order, Integral) or isinstance(order, bool):
        raise InvalidArgumentError('%s must be an integer, got %r'
                                   % (name, order))
    if order < 1 or order >= n_samples:
        raise InvalidArgumentError('%s must satisfy 1 <= %s < N=%d, got %d'
                                   % (name, name, n_samples, order))


def _as_batch(values):
    ''' Return values as a finite float64 (N, M) array.
    '''
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, np.newaxis]
    if arr.ndim != 2:
        raise InvalidDataError('series batch must be (N, M), got shape %s'
                               % (arr.shape,))
    if not np.all(np.isfinite(arr)):
        raise InvalidDataError('series batch contains non-finite samples')
    return arr


def _center(arr):
    ''' Column means (accumulated row by row) and the centered array.
    '''
    total = np.zeros(arr.shape[1])
    for row in arr:
        total += row
    mean = total / arr.shape[0]
    return mean, arr - mean


def _biased_autocorrelation(centered, max_lag):
    n_samples, n_series = centered.shape
    acf = np.zeros((max_lag + 1, n_series))
    for lag in range(max_lag + 1):
        acc = acf[lag]
        for idx in range(n_samples - lag):
            acc += centered[idx] * centered[idx + lag]
    acf /= n_samples
    return acf


def autocorrelation_batch(values, max_lag):
    ''' Biased autocorrelation of every mean-centered column.

        Args:
            values (array_like): (N, M) samples, one series per column.
                A one dimensional input is treated as a single series.
            max_lag (int): Largest lag to compute, 0 <= max_lag < N.

        Returns:
            tuple: ((max_lag + 1, M) array r[0..max_lag], (M,) column means)

        Raises:
            InvalidArgumentError: If max_lag is out of range.
            InvalidDataError: If the samples are not finite.
    '''
    arr = _as_batch(values)
    n_samples = arr.shape[0]
    if (not isinstance(max_lag, Integral) or max_lag < 0 or
            max_lag >= n_samples):
        raise InvalidArgumentError('max_lag must satisfy 0 <= max_lag < N=%d,'
                                   ' got %r' % (n_samples, max_lag))
    mean, centered = _center(arr)
    return _biased_autocorrelation(centered, max_lag), mean


def levinson_durbin(acf, order):
    ''' Solve the Yule-Walker system R a = -r for every column of acf.

        Columns whose prediction error reaches zero before the requested
        order keep the coefficients found so far; the remaining reflection
        coefficients are zero.

        Args:
            acf (array_like): (order + 1, M) autocorrelations r[0..order].
            order (int): Number of coefficients to solve for.

        Returns:
            tuple: ((order, M) coefficients, (M,) prediction error variance
                clamped at 0, (order, M) reflection coefficients)
    '''
    acf = np.asarray(acf, dtype=np.float64)
    if acf.ndim == 1:
        acf = acf[:, np.newaxis]
    if acf.shape[0] < order + 1:
        raise InvalidArgumentError('need %d autocorrelation lags for order'
                                   ' %d, got %d' % (order + 1, order,
                                                    acf.shape[0]))
    n_series = acf.shape[1]
    coefs = np.zeros((order, n_series))
    reflection = np.zeros((order, n_series))
    error = acf[0].copy()
    for stage in range(1, order + 1):
        acc = acf[stage].copy()
        for k in range(1, stage):
            acc += coefs[k - 1] * acf[stage - k]
        kappa = np.zeros(n_series)
        np.divide(-acc, error, out=kappa, where=error > 0)
        previous = coefs[:stage - 1].copy()
        for k in range(1, stage):
            coefs[k - 1] = previous[k - 1] + kappa * previous[stage - k - 1]
        coefs[stage - 1] = kappa
        reflection[stage - 1] = kappa
        error = error * (1.0 - kappa * kappa)
    np.maximum(error, 0.0, out=error)
    return coefs, error, reflection


def fit_yule_walker_batch(values, order):
    ''' Fit an AR(order) model to every column.

        Args:
            values (array_like): (N, M) samples, one series per column.
            order (int): Model order p, 1 <= p < N.

        Returns:
            tuple: ((p, M) coefficients, (M,) means, (M,) noise variances,
                (p, M) reflection coefficients).  Degenerate columns get
                zero coefficients and zero noise variance.

        Raises:
            InvalidArgumentError: If the order is out of range.
            InvalidDataError: If the samples are not finite.
    '''
    arr = _as_batch(values)
    _check_order(order, arr.shape[0])
    mean, centered = _center(arr)
    acf = _biased_autocorrelation(centered, order)
    floor = DEGENERATE_VARIANCE * np.maximum(1.0, mean * mean)
    degenerate = acf[0] <= floor
    if np.any(degenerate):
        LOG.debug('%d of %d series are degenerate, using the zero model',
                  int(np.count_nonzero(degenerate)), degenerate.size)
        acf[:, degenerate] = 0.0
        acf[0, degenerate] = 1.0
    coefs, noise, reflection = levinson_durbin(acf, order)
    noise[degenerate] = 0.0
    return coefs, mean, noise, reflection


def forecast_batch(coefficients, mean, values, steps=1):
    ''' Forecast every column steps samples past its last observation.

        Observed values are used for indices <= N and earlier forecasts for
        indices > N, all on the mean-centered scale.

        Args:
            coefficients (array_like): (p, M) coefficients a[1..p].
            mean (array_like): (M,) series means.
            values (array_like): (N, M) observed samples, N >= p.
            steps (int): Forecast horizon h >= 1.

        Returns:
            numpy.ndarray: (M,) forecasts y[N + h].

        Raises:
            InvalidArgumentError: If steps < 1 or N < p.
    '''
    if not isinstance(steps, Integral) or steps < 1:
        raise InvalidArgumentError('forecast horizon must be an integer >= 1,'
                                   ' got %r' % (steps,))
    arr = _as_batch(values)
    coefs = np.asarray(coefficients, dtype=np.float64)
    if coefs.ndim == 1:
        coefs = coefs[:, np.newaxis]
    mean = np.asarray(mean, dtype=np.float64)
    order = coefs.shape[0]
    n_samples = arr.shape[0]
    if n_samples < order:
        raise InvalidArgumentError('series of length %d is shorter than the'
                                   ' model order %d' % (n_samples, order))
    # Oldest first; history[-k] is the centered value k steps back.
    history = [arr[n_samples - order + idx] - mean for idx in range(order)]
    prediction = np.zeros(arr.shape[1])
    for _ in range(steps):
        prediction = np.zeros(arr.shape[1])
        for k in range(1, order + 1):
            prediction -= coefs[k - 1] * history[-k]
        history = history[1:] + [prediction]
    return prediction + mean


def _as_series(series):
    if isinstance(series, Series):
        return series
    return Series(series)


def autocorrelation(series, max_lag):
    ''' Biased sample autocorrelation of the mean-centered series.

        r[k] = (1/N) sum_{n=1}^{N-k} (y[n] - ybar) (y[n+k] - ybar)

        Args:
            series (Series or sequence of float): The samples.
            max_lag (int): Largest lag, 0 <= max_lag < N.

        Returns:
            list of float: r[0..max_lag]

        Raises:
            InvalidArgumentError: If max_lag is out of range.
            InvalidDataError: If the samples are not finite.
    '''
    series = _as_series(series)
    acf, _ = autocorrelation_batch(series.values, max_lag)
    return acf[:, 0].tolist()


def fit_yule_walker(series, order):
    ''' Fit an AR(order) model to a single series.

        Args:
            series (Series or sequence of float): The samples.
            order (int): Model order p, 1 <= p < N.

        Returns:
            ArModel: The fitted model.  Degenerate series give the zero
                model.

        Raises:
            InvalidArgumentError: If the order is out of range.
            InvalidDataError: If the samples are not finite.
    '''
    series = _as_series(series)
    coefs, mean, noise, reflection = fit_yule_walker_batch(series.values,
                                                           order)
    return ArModel(order=order,
                   coefficients=tuple(coefs[:, 0].tolist()),
                   mean=float(mean[0]),
                   noise_variance=float(noise[0]),
                   reflection_coefficients=tuple(reflection[:, 0].tolist()))


def forecast(model, series, steps=1):
    ''' Forecast a series steps samples ahead with a fitted model.

        For steps=1 and order 1 this is mean - a[1] (y[N] - mean).

        Args:
            model (ArModel): A fitted model.
            series (Series or sequence of float): Observed samples, length
                at least the model order.
            steps (int): Forecast horizon h >= 1.

        Returns:
            float: The forecast y[N + h].

        Raises:
            InvalidArgumentError: If steps < 1 or the series is too short.
    '''
    series = _as_series(series)
    result = forecast_batch(model.coefficients, [model.mean], series.values,
                            steps)
    return float(result[0])
