#!/usr/bin/env python3
# Copyright 2026 The Fuseval Authors
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
"""Freezes two-sided paired t-test p-values from scipy for 20 fixed vectors.

Writes tests/data/ttest_oracle.json. Each entry holds baseline and treatment
vectors plus scipy's statistic and p-value.
"""

import json
import pathlib
import random

from scipy import stats

OUT = pathlib.Path(__file__).resolve().parent.parent / "tests" / "data" / "ttest_oracle.json"


def main():
    rng = random.Random(1301)
    cases = [([0.0] * 4, [0.1, 0.2, 0.3, 0.4]), ([0.5, 0.5], [0.6, 0.4])]
    while len(cases) < 20:
        n = rng.choice([3, 5, 8, 12, 20, 30, 50])
        base = [round(rng.random(), 4) for _ in range(n)]
        shift = rng.uniform(-0.1, 0.15)
        treat = [round(min(1.0, max(0.0, b + shift + rng.gauss(0, 0.1))), 4) for b in base]
        if base == treat:
            continue
        cases.append((base, treat))
    out = []
    for base, treat in cases:
        res = stats.ttest_rel(treat, base)
        out.append({"baseline": base, "treatment": treat,
                    "statistic": float(res.statistic), "p_value": float(res.pvalue)})
    OUT.write_text(json.dumps(out, indent=1) + "\n")


if __name__ == "__main__":
    main()
