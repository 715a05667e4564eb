#
# Copyright (c) 2026, arstack developers
# All rights reserved.
#
# Use of this source code is governed by the BSD-3 license that can be
# found in the LICENSE file.
#
''' Command line runner for the arstack pipeline.

The runner wires ground estimation, detection, scoring, ROC sweeps and
synthetic stack generation together and writes every artifact under one
output directory.  Each file is written to a temporary name and renamed into
place.

When the runner is instantiated the logging is configured.  Either syslog,
file logging, both, or none can be enabled.  If neither syslog nor filename
is specified then no logging will be performed.

Settings are resolved in this order, later entries winning: built-in
defaults, the YAML file given with --config, the ARSTACK_THREADS
environment variable, and explicit command line flags.

Example:

    $ arstack synth --out-dir scene
    $ arstack estimate --stack scene/manifest.json --out-dir ground
    $ arstack detect --stack scene/manifest.json --ground-dir ground \\
          --out-dir detections
    $ arstack score --stack scene/manifest.json --truth scene/truth.csv \\
          --out-dir report
    $ arstack sweep --stack scene/manifest.json --truth scene/truth.csv \\
          --out-dir roc

Errors are reported on stderr as a single line

    arstack: error: <ErrorClass>: <message>

with exit status 1.  Usage errors exit with status 2.
'''
import argparse
import logging
import os
import sys
from logging.handlers import SysLogHandler

import numpy as np
import yaml

from arstack import __version__
from arstack.arstack_errors import ArstackError, ConfigError
from arstack.detect import detect_layers, difference_histogram, \
    write_detections_csv, write_thresholds_csv
from arstack.estimate import difference_stack, estimate_ground, \
    load_ground, save_ground
from arstack.metrics import DEFAULT_C_VALUES, DEFAULT_MATCH_RADIUS_PX, \
    DetectionParams, compare_false_alarms, format_score_table, \
    load_ground_truth, load_score_rows, roc_sweep, score, score_stack, \
    write_ground_truth, write_roc_csv, write_score_csv, write_score_json
from arstack.stack import atomic_write, load_stack, safe_label, \
    save_stack, write_pgm, write_raster
from arstack.synth import frozen_scene_spec, generate, load_synth_spec

COMMANDS = ('estimate', 'detect', 'score', 'sweep', 'synth')
THREADS_ENV = 'ARSTACK_THREADS'
LOG_LEVELS = ['NOTSET', 'DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL']


class RunConfig(object):
    ''' Every setting of one CLI invocation.
    '''
    # pylint: disable=too-many-instance-attributes
    DEFAULTS = {
        'command': None,
        'stack_manifest': None,
        'truth_path': None,
        'p': 1,
        'h': 1,
        'c_values': list(DEFAULT_C_VALUES),
        'se_radius': 1,
        'min_cluster_size': 2,
        'match_radius_px': DEFAULT_MATCH_RADIUS_PX,
        'two_sided': False,
        'pooled_stats': False,
        'threads': None,
        'out_dir': '.',
        'config_path': None,
        'ground_dir': None,
        'rows_path': None,
        'synth_spec': None,
        'emit_histogram': False,
        'emit_difference': False,
        'emit_pgm': False,
        'reference_false_alarms': None,
        'log_file': None,
        'syslog': False,
        'log_level': 'INFO',
    }

    def __init__(self, **kwargs):
        ''' Args:
                kwargs: Any of the keys in DEFAULTS.

            Raises:
                ConfigError: On unknown keys or invalid values.
        '''
        unknown = sorted(set(kwargs) - set(self.DEFAULTS))
        if unknown:
            raise ConfigError('unknown configuration keys: %s'
                              % ', '.join(unknown))
        for key, value in self.DEFAULTS.items():
            setattr(self, key, kwargs.get(key, value))
        if self.threads is None:
            self.threads = os.cpu_count() or 1
        self.validate()

    def validate(self):
        ''' Raises:
                ConfigError: If a value is out of range.
        '''
        if self.command not in COMMANDS:
            raise ConfigError('command must be one of %s, got %r'
                              % (', '.join(COMMANDS), self.command))
        checks = [('p', self.p, 1), ('h', self.h, 1),
                  ('se_radius', self.se_radius, 0),
                  ('min_cluster_size', self.min_cluster_size, 1),
                  ('threads', self.threads, 1)]
        for name, value, low in checks:
            if isinstance(value, bool) or not isinstance(value, int) or \
                    value < low:
                raise ConfigError('%s must be an integer >= %d, got %r'
                                  % (name, low, value))
        try:
            self.c_values = [float(c) for c in self.c_values]
            self.match_radius_px = float(self.match_radius_px)
        except (TypeError, ValueError) as error:
            raise ConfigError('invalid numeric setting: %s' % error)
        if not self.c_values:
            raise ConfigError('c_values must not be empty')
        if not self.match_radius_px > 0:
            raise ConfigError('match_radius_px must be positive, got %r'
                              % self.match_radius_px)

    @property
    def detection_params(self):
        return DetectionParams(se_radius=self.se_radius,
                               min_cluster_size=self.min_cluster_size,
                               match_radius_px=self.match_radius_px,
                               two_sided=self.two_sided,
                               pooled_stats=self.pooled_stats)

    def require(self, *names):
        ''' Raises:
                ConfigError: If any named setting is unset.
        '''
        for name in names:
            if getattr(self, name) is None:
                flag = '--' + _FLAG_NAMES.get(name, name).replace('_', '-')
                raise ConfigError('%s requires %s' % (self.command, flag))

    def as_dict(self):
        return dict((key, getattr(self, key)) for key in self.DEFAULTS)


# Settings whose flag differs from the field name.
_FLAG_NAMES = {'stack_manifest': 'stack', 'truth_path': 'truth',
               'rows_path': 'rows', 'config_path': 'config'}


def load_config_file(path):
    ''' Read a YAML mapping of RunConfig fields.

        Raises:
            ConfigError: If the file cannot be read or is not a mapping.
    '''
    try:
        with open(path, 'r') as stream:
            data = yaml.safe_load(stream)
    except (IOError, OSError, yaml.YAMLError) as error:
        raise ConfigError('cannot read config %s: %s' % (path, error))
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError('config %s must hold a mapping, got %s'
                          % (path, type(data).__name__))
    if 'command' in data:
        raise ConfigError('config %s must not set the command' % path)
    return data


def threads_from_env(environ=None):
    ''' Thread count from ARSTACK_THREADS, or None when unset.

        Raises:
            ConfigError: If the variable is not a positive integer.
    '''
    environ = os.environ if environ is None else environ
    value = environ.get(THREADS_ENV)
    if value is None or value == '':
        return None
    try:
        threads = int(value)
    except ValueError:
        raise ConfigError('%s must be an integer, got %r'
                          % (THREADS_ENV, value))
    if threads < 1:
        raise ConfigError('%s must be >= 1, got %d' % (THREADS_ENV, threads))
    return threads


def resolve_config(args, environ=None):
    ''' Merge defaults, config file, environment and flags.

        Args:
            args (argparse.Namespace): Parsed flags; unset flags are None.
            environ (dict): Environment, defaults to os.environ.

        Returns:
            RunConfig
    '''
    settings = {}
    if args.config_path:
        settings.update(load_config_file(args.config_path))
    env_threads = threads_from_env(environ)
    if env_threads is not None:
        settings['threads'] = env_threads
    for key in RunConfig.DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    return RunConfig(**settings)


class ArstackRunner(object):
    ''' Runs pipeline commands and writes their artifacts.
    '''
    def __init__(self, logger='arstack', syslog=False, filename=None,
                 log_level='INFO'):
        ''' Initialize the runner and configure logging.  Either syslog,
            file logging, both, or none can be enabled.  If neither syslog
            nor filename is specified then no logging will be performed.

            Args:
                logger (str): The name assigned to the logger.
                syslog (bool): If True enable logging to syslog. Default is
                    False.
                filename (str): Log to the file specified by filename.
                    Default is None.
                log_level (str): Log level to use for logger. Default is
                    INFO.
        '''
        self.log = logging.getLogger(logger)
        self._handlers = []
        self.set_log_level(log_level)
        if syslog:
            # Enables sending logging messages to the local syslog server.
            self._add_handler(SysLogHandler())
        if filename:
            # Enables sending logging messages to a file.
            handler = logging.FileHandler(filename)
            handler.setFormatter(logging.Formatter(
                '%(asctime)s %(name)s %(levelname)s %(message)s'))
            self._add_handler(handler)
        if not syslog and filename is None:
            # Not logging so use the null handler
            self._add_handler(logging.NullHandler())

    def _add_handler(self, handler):
        self.log.addHandler(handler)
        self._handlers.append(handler)

    def close(self):
        ''' Detach and close the handlers this runner installed.
        '''
        for handler in self._handlers:
            self.log.removeHandler(handler)
            handler.close()
        self._handlers = []

    def set_log_level(self, log_level='INFO'):
        ''' Set log level for logger. Defaults to INFO if no level passed in
            or if an invalid level is passed in.

            Args:
                log_level (str): Log level to use for logger. Default is
                    INFO.
        '''
        log_level = (log_level or 'INFO').upper()
        if log_level not in LOG_LEVELS:
            log_level = 'INFO'
        self.log.setLevel(getattr(logging, log_level))

    def run(self, config):
        ''' Execute config.command.

            Returns:
                list of str: Paths of the written artifacts.

            Raises:
                ArstackError: On any load, validation or pipeline error.
        '''
        if not os.path.isdir(config.out_dir):
            os.makedirs(config.out_dir)
        self.log.info('Running %s with %d threads into %s', config.command,
                      config.threads, config.out_dir)
        written = getattr(self, 'run_%s' % config.command)(config)
        for path in written:
            self.log.info('Wrote %s', path)
        return written

    def _ground(self, config, stack):
        if config.ground_dir:
            ground = load_ground(config.ground_dir)
            if ground.forecast.shape != (stack.height, stack.width):
                raise ConfigError(
                    'ground estimate in %s is %dx%d but the stack is %dx%d'
                    % (config.ground_dir, ground.forecast.width,
                       ground.forecast.height, stack.width, stack.height))
            return ground
        return estimate_ground(stack, config.p, config.h, config.threads)

    def run_estimate(self, config):
        config.require('stack_manifest')
        stack = load_stack(config.stack_manifest)
        ground = estimate_ground(stack, config.p, config.h, config.threads)
        save_ground(ground, config.out_dir)
        written = [os.path.join(config.out_dir, name)
                   for name in ('forecast.raw', 'coef.raw', 'ground.json')]
        if config.emit_pgm:
            forecast_pgm = os.path.join(config.out_dir, 'forecast.pgm')
            coef_pgm = os.path.join(config.out_dir, 'coef.pgm')
            write_pgm(forecast_pgm, ground.forecast)
            write_pgm(coef_pgm, ground.coef_magnitude, 0.0, 1.0)
            written.extend([forecast_pgm, coef_pgm])
        return written

    def run_detect(self, config):
        config.require('stack_manifest')
        stack = load_stack(config.stack_manifest)
        ground = self._ground(config, stack)
        diffs = difference_stack(stack, ground)
        c = config.c_values[0]
        results = detect_layers(diffs, c, config.se_radius,
                                config.min_cluster_size, config.two_sided,
                                config.pooled_stats, config.threads)
        out = config.out_dir
        written = []
        labelled = []
        specs = []
        for label, diff, (spec, mask, detections) in zip(stack.labels, diffs,
                                                         results):
            name = safe_label(label)
            self.log.info('Layer %r: %d detections at C=%g', label,
                          len(detections), c)
            mask_path = os.path.join(out, 'mask_%s.u8' % name)
            atomic_write(mask_path, mask.bits.astype(np.uint8).tobytes())
            det_path = os.path.join(out, 'detections_%s.csv' % name)
            write_detections_csv(det_path, [(label, detections)])
            written.extend([mask_path, det_path])
            labelled.append((label, detections))
            specs.append((label, spec))
            if config.emit_histogram:
                hist_path = os.path.join(out, 'histogram_%s.csv' % name)
                histogram = difference_histogram(diff, spec)
                atomic_write(hist_path, histogram.to_csv(
                    index=False, float_format='%.6f'))
                written.append(hist_path)
            if config.emit_difference:
                diff_path = os.path.join(out, 'diff_%s.raw' % name)
                write_raster(diff_path, diff)
                written.append(diff_path)
                if config.emit_pgm:
                    pgm_path = os.path.join(out, 'diff_%s.pgm' % name)
                    write_pgm(pgm_path, diff)
                    written.append(pgm_path)
        all_path = os.path.join(out, 'detections.csv')
        write_detections_csv(all_path, labelled)
        thresholds_path = os.path.join(out, 'thresholds.csv')
        write_thresholds_csv(thresholds_path, specs)
        written.extend([all_path, thresholds_path])
        return written

    def run_score(self, config):
        if config.rows_path:
            rows, total = score(load_score_rows(config.rows_path))
        else:
            config.require('stack_manifest', 'truth_path')
            stack = load_stack(config.stack_manifest)
            truths = load_ground_truth(config.truth_path)
            ground = self._ground(config, stack)
            rows, total, _ = score_stack(stack, ground, truths,
                                         config.c_values[0],
                                         config.detection_params)
        comparison = None
        if config.reference_false_alarms is not None:
            comparison = compare_false_alarms(total,
                                              config.reference_false_alarms)
        out = config.out_dir
        csv_path = os.path.join(out, 'score.csv')
        json_path = os.path.join(out, 'score.json')
        text_path = os.path.join(out, 'score.txt')
        write_score_csv(csv_path, rows, total)
        write_score_json(json_path, rows, total, comparison)
        atomic_write(text_path, format_score_table(rows, total, comparison))
        return [csv_path, json_path, text_path]

    def run_sweep(self, config):
        config.require('stack_manifest', 'truth_path')
        stack = load_stack(config.stack_manifest)
        truths = load_ground_truth(config.truth_path)
        ground = self._ground(config, stack)
        curve = roc_sweep(stack, ground, truths, config.c_values,
                          config.detection_params, config.threads)
        roc_path = os.path.join(config.out_dir, 'roc.csv')
        write_roc_csv(roc_path, curve)
        return [roc_path]

    def run_synth(self, config):
        if config.synth_spec:
            spec = load_synth_spec(config.synth_spec)
        else:
            self.log.info('No --synth-spec given, using the frozen scene')
            spec = frozen_scene_spec()
        stack, truths = generate(spec, config.threads)
        manifest = save_stack(stack, config.out_dir)
        written = [os.path.join(config.out_dir, '%s.raw' % safe_label(label))
                   for label in stack.labels]
        written.append(manifest)
        truth_path = os.path.join(config.out_dir, 'truth.csv')
        write_ground_truth(truth_path, truths)
        written.append(truth_path)
        return written


def _c_list(text):
    try:
        return [float(item) for item in text.split(',') if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError('expected comma separated numbers,'
                                         ' got %r' % text)


def _add_common(parser):
    group = parser.add_argument_group('inputs and outputs')
    group.add_argument('--stack', dest='stack_manifest',
                       help='stack manifest (JSON)')
    group.add_argument('--truth', dest='truth_path',
                       help='ground truth CSV (layer_label,x,y)')
    group.add_argument('--ground-dir', dest='ground_dir',
                       help='reuse the ground estimate written by estimate')
    group.add_argument('--out-dir', dest='out_dir',
                       help='directory receiving every artifact')
    group.add_argument('--config', dest='config_path',
                       help='YAML file of settings')
    model = parser.add_argument_group('model and detection')
    model.add_argument('--p', type=int, help='AR model order (default 1)')
    model.add_argument('--h', type=int,
                       help='forecast horizon in steps (default 1)')
    model.add_argument('--c-values', dest='c_values', type=_c_list,
                       help='detection constants, comma separated (default'
                       ' 4.5,5,5.5,6,6.5); detect and score use the first')
    model.add_argument('--se-radius', dest='se_radius', type=int,
                       help='opening element radius (default 1)')
    model.add_argument('--min-cluster-size', dest='min_cluster_size',
                       type=int, help='smallest kept cluster (default 2)')
    model.add_argument('--match-radius-px', dest='match_radius_px',
                       type=float, help='target match radius (default 10)')
    model.add_argument('--two-sided', dest='two_sided', action='store_true',
                       default=None, help='flag |diff - mean| >= C sigma')
    model.add_argument('--pooled-stats', dest='pooled_stats',
                       action='store_true', default=None,
                       help='threshold statistics over the whole stack')
    model.add_argument('--threads', type=int,
                       help='worker threads (default: %s or CPU count)'
                       % THREADS_ENV)
    logs = parser.add_argument_group('logging')
    logs.add_argument('--log-file', dest='log_file', help='log to this file')
    logs.add_argument('--syslog', action='store_true', default=None,
                      help='log to the local syslog server')
    logs.add_argument('--log-level', dest='log_level',
                      help='one of %s (default INFO)' % ', '.join(LOG_LEVELS))


def build_parser():
    ''' The argument parser with one subcommand per pipeline stage.
    '''
    parser = argparse.ArgumentParser(
        prog='arstack',
        description='Ground-scene estimation and change detection for'
        ' co-registered image stacks.')
    parser.add_argument('--version', action='version',
                        version='%(prog)s ' + __version__)
    subparsers = parser.add_subparsers(dest='command', metavar='command')
    subparsers.required = True
    helps = {'estimate': 'write the ground estimate and coefficient image',
             'detect': 'write per-layer masks and detections',
             'score': 'write the Pd / FAR report',
             'sweep': 'write the ROC points over the detection constants',
             'synth': 'write a synthetic stack, manifest and ground truth'}
    for command in COMMANDS:
        sub = subparsers.add_parser(command, help=helps[command])
        _add_common(sub)
        if command == 'detect':
            sub.add_argument('--emit-histogram', dest='emit_histogram',
                             action='store_true', default=None,
                             help='256-bin histogram per difference image')
            sub.add_argument('--emit-difference', dest='emit_difference',
                             action='store_true', default=None,
                             help='write each difference image')
        if command in ('estimate', 'detect'):
            sub.add_argument('--emit-pgm', dest='emit_pgm',
                             action='store_true', default=None,
                             help='also write 8-bit PGM views')
        if command == 'score':
            sub.add_argument('--rows', dest='rows_path',
                             help='score pre-tallied rows from this CSV')
            sub.add_argument('--reference-false-alarms',
                             dest='reference_false_alarms', type=int,
                             help='false alarms of a reference method')
        if command == 'synth':
            sub.add_argument('--synth-spec', dest='synth_spec',
                             help='synthetic scene spec (JSON); the frozen'
                             ' scene when omitted')
    return parser


def main(argv=None, environ=None):
    ''' CLI entry point.

        Returns:
            int: Exit status.
    '''
    args = build_parser().parse_args(argv)
    runner = None
    try:
        config = resolve_config(args, environ)
        runner = ArstackRunner(syslog=config.syslog, filename=config.log_file,
                               log_level=config.log_level)
        runner.run(config)
    except ArstackError as error:
        if runner is not None:
            runner.log.error('%s failed: %s', args.command, error)
        sys.stderr.write('arstack: error: %s: %s\n'
                         % (type(error).__name__,
                            ' '.join(str(error).split())))
        return 1
    except (IOError, OSError) as error:
        sys.stderr.write('arstack: error: %s: %s\n'
                         % (type(error).__name__, error))
        return 1
    finally:
        if runner is not None:
            runner.close()
    return 0


if __name__ == '__main__':
    sys.exit(main())
