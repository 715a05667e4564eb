# Copyright (c) 2026, arstack developers
# Use of this source code is governed by the BSD-3 license that can be
# found in the LICENSE file.
''' Write manifest.json for m<mission>p<pass>.raw|.pgm files in a directory,
    missions 1-4 major and passes 5-6 minor.

    usage: python make_manifest.py DIR [WIDTH HEIGHT]
'''
import json
import os
import sys

directory = sys.argv[1]
width, height = (int(sys.argv[2]), int(sys.argv[3])) \
    if len(sys.argv) > 3 else (3000, 2000)

layers = []
for mission in range(1, 5):
    for pass_no in (5, 6):
        label = 'm%dp%d' % (mission, pass_no)
        for ext in ('.raw', '.pgm'):
            if os.path.isfile(os.path.join(directory, label + ext)):
                layers.append({'path': label + ext, 'label': label,
                               'width': width, 'height': height})
                break
        else:
            sys.exit('missing image for %s in %s' % (label, directory))

with open(os.path.join(directory, 'manifest.json'), 'w') as stream:
    json.dump({'pixel_area_m2': 1.0, 'layers': layers}, stream, indent=2)
print('wrote %d layers' % len(layers))
