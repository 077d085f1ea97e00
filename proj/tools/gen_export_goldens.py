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
"""Freezes export goldens for the sample experiment.

Runs tests/data/export_fidelity/experiment.json through the fuseval CLI on
the sample dataset, then writes
  tests/data/export_fidelity/expected.json  reference-evaluator aggregates of
                                            every exported fused run, with the
                                            run's sha256
  tests/data/golden/table.json              the stored evaluation table
  tests/data/golden/table.tex               its LaTeX export
The experiment id is replaced by "golden" in both table files.

usage: gen_export_goldens.py [path/to/fuseval]
"""

import collections
import hashlib
import json
import os
import pathlib
import subprocess
import sys
import tempfile

import pytrec_eval

ROOT = pathlib.Path(__file__).resolve().parent.parent
SAMPLE = ROOT / "data" / "sample"
FIDELITY = ROOT / "tests" / "data" / "export_fidelity"
GOLDEN = ROOT / "tests" / "data" / "golden"
MEASURES = {"map", "P", "bpref", "ndcg"}
DEPTH = 1000


def cli(binary, store, *args):
    env = dict(os.environ, FUSEVAL_STORE=store)
    return subprocess.run([binary, *args], env=env, check=True, capture_output=True,
                          text=True).stdout


def parse_run(text):
    run = collections.defaultdict(list)
    for line in text.splitlines():
        topic, _, doc, _, score, _ = line.split()
        run[topic].append((doc, float(score)))
    return run


def truncated(run):
    out = {}
    for topic, docs in run.items():
        docs = sorted(docs, key=lambda d: d[0], reverse=True)
        docs = sorted(docs, key=lambda d: d[1], reverse=True)[:DEPTH]
        # Strictly decreasing pseudo-scores pin the canonical order.
        out[topic] = {doc: float(len(docs) - i) for i, (doc, _) in enumerate(docs)}
    return out


def main():
    binary = sys.argv[1] if len(sys.argv) > 1 else str(ROOT / "build" / "tools" / "fuseval")
    with tempfile.TemporaryDirectory() as store:
        runs = []
        for name in ["alpha", "beta", "gamma", "delta"]:
            runs += ["--run", str(SAMPLE / f"{name}.run")]
        cli(binary, store, "dataset", "ingest", "--name", "sample", "--qrels",
            str(SAMPLE / "qrels.txt"), *runs)
        out = cli(binary, store, "exp", "run", "--file", str(FIDELITY / "experiment.json"))
        exp_id = out.split()[1]
        record = json.loads(cli(binary, store, "exp", "show", "--id", exp_id, "--json"))
        table_digest = record["table"]
        table = json.loads((pathlib.Path(store) / "objects" / table_digest[:2] /
                            table_digest).read_text())
        latex = cli(binary, store, "export", "--id", exp_id, "--format", "latex")

        qrels = collections.defaultdict(dict)
        for line in (SAMPLE / "qrels.txt").read_text().splitlines():
            topic, _, doc, grade = line.split()
            qrels[topic][doc] = max(0, int(grade))
        test_topics = [t for t in record["split"]["folds"][0]["test"]
                       if any(g > 0 for g in qrels[t].values())]
        test_qrels = {t: qrels[t] for t in test_topics}

        expected = {}
        for fusion in record["fusions"]:
            tag = fusion["run_tag"]
            text = cli(binary, store, "export", "--id", exp_id, "--format", "trec",
                       "--spec", tag)
            run = truncated(parse_run(text))
            run = {t: docs for t, docs in run.items() if t in test_qrels}
            per_topic = pytrec_eval.RelevanceEvaluator(test_qrels, MEASURES).evaluate(run)
            agg = {}
            for metric in table["metrics"]:
                key = metric
                agg[metric] = sum(per_topic.get(t, {}).get(key, 0.0)
                                  for t in test_topics) / len(test_topics)
            expected[tag] = {"sha256": hashlib.sha256(text.encode()).hexdigest(),
                             "aggregates": agg}

    (FIDELITY / "expected.json").write_text(
        json.dumps({"test_topics": test_topics, "runs": expected}, indent=1,
                   sort_keys=True) + "\n")
    table["experiment_id"] = "golden"
    (GOLDEN / "table.json").write_text(json.dumps(table, indent=1, sort_keys=True) + "\n")
    (GOLDEN / "table.tex").write_text(latex.replace(exp_id, "golden"))


if __name__ == "__main__":
    main()
