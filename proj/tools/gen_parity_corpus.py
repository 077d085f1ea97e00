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
"""Generates the metric parity corpus and its reference values.

Each case directory holds run.txt, qrels.txt and expected.json. Expected
values come from pytrec_eval (the trec_eval library) with two adjustments
that mirror fuseval's conventions:

  * runs are cut to their top 1000 documents in canonical order (trec_eval
    -M 1000), since pytrec_eval evaluates whole lists;
  * averages are taken over qrels topics with at least one relevant
    document, counting topics missing from the run as 0.

Usage: gen_parity_corpus.py [--out DIR] [--cases N] [--seed S]
"""

import argparse
import json
import os
import random

import pytrec_eval

MEASURES = {"map", "P", "recall", "Rprec", "bpref", "ndcg", "iprec_at_recall", "set_recall"}
DEPTH = 1000


def canonical(items):
    """Score descending, ties by doc id descending."""
    by_doc = sorted(items, key=lambda kv: kv[0], reverse=True)
    return sorted(by_doc, key=lambda kv: -kv[1])


def make_case(rng, index):
    kind = index % 10
    n_topics = rng.randint(1, 8)
    topic_ids = sorted({str(rng.randint(1, 60)) if index % 7 else f"T-{rng.randint(1, 40)}"
                        for _ in range(n_topics)})
    qrels, run = {}, {}
    for t in topic_ids:
        pool = [f"d{rng.randint(0, 99999):05d}" for _ in range(rng.randint(1, 80))]
        pool = sorted(set(pool))
        judged = {}
        for d in pool:
            if rng.random() < 0.7:
                judged[d] = rng.choice([0, 0, 0, 1, 1, 2, 3])
        if kind == 3 and judged:  # N = 0: only relevant judgments
            judged = {d: max(1, g) for d, g in judged.items()}
        if kind == 4 and t == topic_ids[0]:  # R = 0 topic
            judged = {d: 0 for d in judged}
        if judged:
            qrels[t] = judged

        if kind == 5 and t == topic_ids[-1] and len(topic_ids) > 1:
            continue  # topic missing from the run
        length = rng.randint(1, 60)
        if kind == 6:
            length = 1  # single-document lists
        if kind == 7 and t == topic_ids[0]:
            length = rng.randint(1001, 1400)  # longer than the evaluation depth
        docs = list(pool) + [f"u{rng.randint(0, 999999):06d}" for _ in range(length)]
        rng.shuffle(docs)
        docs = list(dict.fromkeys(docs))[:length]
        entries = {}
        for d in docs:
            if kind in (1, 8):  # heavy ties
                s = float(rng.randint(0, 3))
            elif kind == 2:
                s = round(rng.uniform(-5, 5), 2)
            else:
                s = rng.uniform(0, 100)
            entries[d] = s
        run[t] = entries
    if kind == 9:  # a run topic without judgments
        run["999"] = {"x1": 1.0, "x2": 0.5}
    if not qrels:
        qrels[topic_ids[0]] = {"d00000": 1}
    return run, qrels


def expected_values(run, qrels):
    cut = {}
    for t, entries in run.items():
        ranked = canonical(entries.items())[:DEPTH]
        cut[t] = dict(ranked)
    evaluator = pytrec_eval.RelevanceEvaluator(qrels, MEASURES)
    per_topic = evaluator.evaluate(cut)
    metric_ids = None
    for values in per_topic.values():
        metric_ids = sorted(values)
        break
    if metric_ids is None:
        metric_ids = sorted(pytrec_eval.RelevanceEvaluator(
            {"q": {"a": 1}}, MEASURES).evaluate({"q": {"a": 1.0}})["q"])
    eligible = sorted(t for t, j in qrels.items() if any(g > 0 for g in j.values()))
    topics = {}
    for t in eligible:
        values = per_topic.get(t)
        topics[t] = {m: (values[m] if values else 0.0) for m in metric_ids}
    aggregate = {m: (sum(topics[t][m] for t in eligible) / len(eligible) if eligible else 0.0)
                 for m in metric_ids}
    return {"topics": topics, "aggregate": aggregate}


def write_case(path, run, qrels):
    os.makedirs(path, exist_ok=True)
    with open(os.path.join(path, "run.txt"), "w") as f:
        for t in sorted(run):
            for rank, (d, s) in enumerate(canonical(run[t].items()), 1):
                f.write(f"{t} Q0 {d} {rank} {s!r} parity\n")
    with open(os.path.join(path, "qrels.txt"), "w") as f:
        for t in sorted(qrels):
            for d in sorted(qrels[t]):
                f.write(f"{t} 0 {d} {qrels[t][d]}\n")
    with open(os.path.join(path, "expected.json"), "w") as f:
        json.dump(expected_values(run, qrels), f, indent=1, sort_keys=True)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="tests/data/parity")
    ap.add_argument("--cases", type=int, default=60)
    ap.add_argument("--seed", type=int, default=20140901)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    for i in range(args.cases):
        run, qrels = make_case(rng, i)
        write_case(os.path.join(args.out, f"case_{i:02d}"), run, qrels)


if __name__ == "__main__":
    main()
