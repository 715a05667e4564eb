#
# Copyright (c) 2026, arstack developers
# All rights reserved.
#
# Use of this source code is governed by the BSD-3 license that can be
# found in the LICENSE file.
#

''' arstack exception classes
'''


class ArstackError(Exception):
    ''' Base class for every error raised by arstack.
    '''
    def __init__(self, msg):
        Exception.__init__(self)
        self.msg = msg

    def __str__(self):
        return self.msg


class InvalidArgumentError(ArstackError):
    ''' An argument violates the precondition of the operation.
    '''
    def __init__(self, msg):
        ArstackError.__init__(self, msg)


class InvalidDataError(ArstackError):
    ''' Input samples are non-finite or otherwise unusable.
    '''
    def __init__(self, msg):
        ArstackError.__init__(self, msg)


class StackLoadError(ArstackError):
    ''' A manifest, raster, ground-truth or row file could not be loaded.
    '''
    def __init__(self, msg):
        ArstackError.__init__(self, msg)


class DegenerateInputError(ArstackError):
    ''' The difference image is constant so no detection is meaningful.
    '''
    def __init__(self, msg):
        ArstackError.__init__(self, msg)


class ConfigError(ArstackError):
    ''' The run configuration is invalid.
    '''
    def __init__(self, msg):
        ArstackError.__init__(self, msg)
