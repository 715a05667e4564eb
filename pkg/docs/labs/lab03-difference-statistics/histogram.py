# Copyright (c) 2026, arstack developers
# Use of this source code is governed by the BSD-3 license that can be
# found in the LICENSE file.
''' Print the threshold, skewness and excess kurtosis of every difference
    image of a stack.  Values near zero mean the clutter residue is close
    to normal, which the mean + C * std threshold assumes.

    usage: python histogram.py MANIFEST
'''
import sys

from arstack.detect import difference_histogram, difference_moments, \
    make_threshold
from arstack.estimate import difference_stack, estimate_ground
from arstack.stack import load_stack

stack = load_stack(sys.argv[1])
ground = estimate_ground(stack, threads=4)
for label, diff in zip(stack.labels, difference_stack(stack, ground)):
    spec = make_threshold(diff, 4.5)
    skew, kurtosis = difference_moments(diff)
    hist = difference_histogram(diff, spec)
    print('%-10s lambda=%8.3f  skew=%6.3f  kurtosis=%6.3f  mode bin=%.3f'
          % (label, spec.lambda_, skew, kurtosis,
             hist.loc[hist['count'].idxmax(), 'bin_left']))
