# Copyright (c) 2026, arstack developers
# Use of this source code is governed by the BSD-3 license that can be
# found in the LICENSE file.
''' Build a scene in code, then score it at every default C.
'''
from arstack.estimate import estimate_ground
from arstack.metrics import DEFAULT_C_VALUES, roc_sweep
from arstack.synth import SynthSpec, grid_targets, generate

spec = SynthSpec(width=200, height=200, n_layers=8, clutter_coef=-0.5,
                 clutter_sigma=1.0, scene_mean=10.0,
                 targets=grid_targets(3, 4, 4, (20, 20), 40, 30.0, 2.0) +
                 grid_targets(6, 4, 4, (30, 30), 40, 30.0, 2.0),
                 seed=7)
stack, truths = generate(spec, threads=4)
ground = estimate_ground(stack, order=1, steps=1, threads=4)
curve = roc_sweep(stack, ground, truths, DEFAULT_C_VALUES, threads=4)
for point in curve.points:
    print('C=%.1f  Pd=%.2f  FAR=%.2f/km2' % (point.c, point.pd,
                                             point.far_per_km2))
