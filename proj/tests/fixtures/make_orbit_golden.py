# Copyright 2026 The fastfield Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Writes orbit_golden.json: orbit states and their serialized camera-to-world
matrices, computed in plain IEEE double arithmetic without fused multiply-adds.
Any client implementation must reproduce the strings byte for byte."""

import json
import math
import pathlib


def cross(a, b):
    return (a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0])


def normalize(v):
    n = math.sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
    return (v[0] / n, v[1] / n, v[2] / n)


def orbit_to_matrix(target, azimuth, elevation, distance):
    ce, se = math.cos(elevation), math.sin(elevation)
    ca, sa = math.cos(azimuth), math.sin(azimuth)
    back = (ce * sa, se, ce * ca)
    eye = tuple(t + b * distance for t, b in zip(target, back))
    right = normalize(cross((0.0, 1.0, 0.0), back))
    up = cross(back, right)
    return [right[0], up[0], back[0], eye[0],
            right[1], up[1], back[1], eye[1],
            right[2], up[2], back[2], eye[2],
            0.0, 0.0, 0.0, 1.0]


def serialize(m):
    return "[" + ",".join("%.17g" % x for x in m) + "]"


CASES = [
    ((0.0, 0.0, 0.0), 0.0, 0.0, 2.0),
    ((0.0, 0.0, 0.0), 0.0, math.pi / 4, 2.0),
    ((0.0, 0.0, 0.0), 0.6, 0.35, 2.2),
    ((0.1, -0.2, 0.05), -2.5, -0.7, 3.75),
    ((0.0, 0.0, 0.0), math.pi, 1.2, 1.0),
    ((1.5, 2.0, -3.0), 10.0, -1.5, 0.25),
    ((0.0, 0.0, 0.0), -math.pi / 2, 0.0, 4.0),
]


def main():
    out = []
    for target, az, el, dist in CASES:
        out.append({
            "target": list(target),
            "azimuth": az,
            "elevation": el,
            "distance": dist,
            "matrix": serialize(orbit_to_matrix(target, az, el, dist)),
        })
    path = pathlib.Path(__file__).with_name("orbit_golden.json")
    path.write_text(json.dumps({"cases": out}, indent=2) + "\n")


if __name__ == "__main__":
    main()
