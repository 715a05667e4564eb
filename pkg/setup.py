#
# Copyright (c) 2026, arstack developers
# All rights reserved.
#
# Use of this source code is governed by the BSD-3 license that can be
# found in the LICENSE file.
#
""" Ground-scene estimation and change detection for co-registered image
    stacks, with a synthetic scene generator and a scoring harness.
"""
import io
from os import path, walk

from setuptools import setup

from arstack import __version__, __author__


def find_modules(pkg):
    ''' Return the package and every subpackage directory below it.
    '''
    modules = [pkg]
    for dirname, dirnames, _ in walk(pkg):
        for subdirname in dirnames:
            if subdirname != '__pycache__':
                modules.append(path.join(dirname, subdirname))
    return modules


def get_long_description():
    ''' The contents of README.md, or an empty string without one.
    '''
    long_description = ''
    here = path.abspath(path.dirname(__file__))
    try:
        with io.open(path.join(here, 'README.md'), encoding='utf-8') as hdl:
            long_description = hdl.read()
    except IOError:
        pass
    return long_description


setup(
    name='arstack',
    # Packaging needs a PEP 440 version; 'develop' marks an untagged tree.
    version='0.0.0.dev0' if __version__ == 'develop' else __version__,
    description='Autoregressive ground-scene estimation and change detection'
                ' for image stacks',
    long_description=get_long_description(),
    long_description_content_type='text/markdown',
    author=__author__,
    license='BSD-3',
    packages=find_modules('arstack'),
    python_requires='>=3.7',

    classifiers=[
        'Development Status :: 3 - Alpha',
        'Intended Audience :: Science/Research',
        'Topic :: Scientific/Engineering :: Image Processing',
        'License :: OSI Approved :: BSD License',
        'Programming Language :: Python :: 3',
    ],

    keywords='change detection autoregressive yule-walker sar image stack',

    # numpy 1.17 is the first release with numpy.random.default_rng.
    install_requires=['numpy>=1.17', 'scipy>=1.2', 'pandas>=0.25',
                      'pyyaml>=5.1'],

    extras_require={
        'dev': ['check-manifest', 'pep8', 'pyflakes', 'pylint', 'coverage',
                'mock'],
    },

    entry_points={
        'console_scripts': ['arstack=arstack.cli:main'],
    },
)
