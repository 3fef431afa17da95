#!/usr/bin/env python3
# Copyright 2026 The PCG Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Writes the reference AdamW trajectory on a quadratic bowl.

f(p) = 0.5 * sum_i a_i * (p_i - c_i)^2, so grad_i = a_i * (p_i - c_i).
Output: one line per step with the parameter vector after that step.
"""

import math
import sys

A = [1.0, 4.0, 0.25]
C = [0.5, -1.0, 2.0]
P0 = [2.0, 1.0, -3.0]
LR = 0.05
BETA1 = 0.9
BETA2 = 0.999
EPS = 1e-8
WEIGHT_DECAY = 0.01
STEPS = 50


def main():
    p = list(P0)
    m = [0.0] * len(p)
    v = [0.0] * len(p)
    lines = []
    for t in range(1, STEPS + 1):
        g = [a * (x - c) for a, x, c in zip(A, p, C)]
        for i in range(len(p)):
            m[i] = BETA1 * m[i] + (1 - BETA1) * g[i]
            v[i] = BETA2 * v[i] + (1 - BETA2) * g[i] * g[i]
            m_hat = m[i] / (1 - BETA1 ** t)
            v_hat = v[i] / (1 - BETA2 ** t)
            p[i] = p[i] - LR * (m_hat / (math.sqrt(v_hat) + EPS) + WEIGHT_DECAY * p[i])
        lines.append(" ".join(repr(x) for x in p))
    out = sys.stdout if len(sys.argv) < 2 else open(sys.argv[1], "w")
    out.write("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
