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
"""Writes the synthetic sample dataset: four runs and graded qrels."""

import argparse
import os
import random

TOPICS = [str(t) for t in range(301, 321)]
POOL = 300


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "data", "sample"))
    ap.add_argument("--seed", type=int, default=2014)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    os.makedirs(args.out, exist_ok=True)

    grades = {}
    with open(os.path.join(args.out, "qrels.txt"), "w") as q:
        for t in TOPICS:
            docs = [f"doc-{t}-{i:04d}" for i in range(POOL)]
            judged = rng.sample(docs, 120)
            n_rel = rng.randint(3, 25)
            for i, d in enumerate(sorted(judged)):
                g = 0
                if i < n_rel:
                    g = rng.choice([1, 1, 2])
                grades[(t, d)] = g
            for d in sorted(judged):
                q.write(f"{t} 0 {d} {grades[(t, d)]}\n")

    systems = {"alpha": 1.6, "beta": 1.1, "gamma": 0.8, "delta": 0.4}
    for tag, quality in systems.items():
        with open(os.path.join(args.out, f"{tag}.run"), "w") as f:
            for t in TOPICS:
                if tag == "delta" and t == TOPICS[-1]:
                    continue
                docs = [f"doc-{t}-{i:04d}" for i in range(POOL)]
                depth = rng.randint(60, 150)
                scored = []
                for d in docs:
                    s = rng.gauss(0.0, 1.0) + quality * grades.get((t, d), 0)
                    scored.append((round(s * 10 + 50, 4), d))
                scored.sort(key=lambda x: (-x[0], x[1]))
                for rank, (s, d) in enumerate(scored[:depth], 1):
                    f.write(f"{t} Q0 {d} {rank} {s} {tag}\n")


if __name__ == "__main__":
    main()
