#
# Copyright (c) 2026, arstack developers
# All rights reserved.
#
# Use of this source code is governed by the BSD-3 license that can be
# found in the LICENSE file.
#
''' Ground-scene estimation and change detection for co-registered
    raster image stacks using per-pixel autoregressive forecasting.
'''
import logging

__version__ = 'develop'
__author__ = 'arstack developers'

# Library use stays silent until a runner or application adds handlers.
logging.getLogger('arstack').addHandler(logging.NullHandler())
