/*
 * Copyright 2026 The Fuseval Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Publication and interchange outputs.
//
// Bundle layout (zip, entries in name order, fixed timestamps):
//
//   table.tex                 LaTeX tabular of the evaluation table
//   plots/bar_<metric>.csv    system,value per table row
//   plots/pr_curve.csv        system,recall,iprec; 11 points per system
//   runs/<run_tag>.run        fused runs as stored (TREC format)

#pragma once

#include <map>
#include <string>
#include <string_view>

#include "fuseval/experiment.h"
#include "fuseval/metrics.h"
#include "fuseval/store.h"

namespace fuseval {

// Tabular environment with a header comment naming the experiment, dataset
// and split. Values have four decimals; the best value of each column over
// the component and fused rows is bold; t-test markers against the baseline
// follow the value. Throws kIncompleteTable while specs are pending.
std::string export_latex(const EvaluationTable& table);

// Stored fused run of the spec named by run tag, algorithm id or index.
// Throws kNotFound when the spec is unknown or has not completed.
std::string export_trec_run(const Store& store, const ExperimentRecord& record,
                            std::string_view spec);

// File name -> CSV content, as laid out in the bundle's plots/ directory.
std::map<std::string, std::string> export_plot_data(
    const EvaluationTable& table, const std::map<std::string, EvalReport>& reports);

std::string export_bundle(const Store& store, const ExperimentRecord& record,
                          const EvaluationTable& table,
                          const std::map<std::string, EvalReport>& reports);

// Escapes LaTeX special characters in plain text.
std::string latex_escape(std::string_view text);

}  // namespace fuseval
