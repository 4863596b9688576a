// voiceval/report.h

// Copyright 2026  Voiceval Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef VOICEVAL_REPORT_H_
#define VOICEVAL_REPORT_H_

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace voiceval {

enum class Direction { kHigherBetter, kLowerBetter };

// Named rows x named metric columns with per-column direction and missing
// cells allowed.
struct MetricTable {
  std::string name;
  std::vector<std::string> row_ids;
  std::vector<std::string> col_ids;
  std::vector<Direction> directions;             // per column
  std::vector<std::optional<double>> cells;      // row-major

  std::optional<double> &cell(std::size_t r, std::size_t c) {
    return cells[r * col_ids.size() + c];
  }
  const std::optional<double> &cell(std::size_t r, std::size_t c) const {
    return cells[r * col_ids.size() + c];
  }
};

// CSV with a header row "system,<metric>[:up|:down],..."; empty cells are
// missing values.
MetricTable load_table_csv(const std::string &path);
void save_table_csv(const MetricTable &table, const std::string &path);

// Arithmetic mean (full precision; display rounding is separate).
double lp_avg(const std::vector<double> &accuracies);
double simple_avg(const std::vector<double> &values);

// Half-away-from-zero rounding to 1 decimal, as used for display.
double round1(double v);

struct ZsAvgResult {
  // Per row: 100 * (1 - mean of min-max normalized present cells); absent
  // when a row has no usable cells.
  std::vector<std::optional<double>> row_scores;
  std::vector<std::string> skipped_columns;  // constant columns
};

// Min-max normalizes each lower-better column over its present cells (the
// normalization pool is exactly the rows of the supplied table), then scores
// each row as 100 * (1 - mean of its present normalized cells). Constant
// columns are skipped with a warning; every column must be lower-better.
ZsAvgResult zs_avg(const MetricTable &table);

// Deterministic machine-readable report plus human-readable markdown with
// direction arrows and the per-column best value in bold.
struct RenderedReport {
  std::string markdown;
  nlohmann::json json;
};

RenderedReport render_report(const std::vector<MetricTable> &tables,
                             const nlohmann::json &run_metadata);

}  // namespace voiceval

#endif  // VOICEVAL_REPORT_H_
