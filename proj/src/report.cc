// src/report.cc

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

#include "voiceval/report.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace voiceval {

using nlohmann::json;

namespace {

std::vector<std::string> split_csv_line(const std::string &line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

std::string format1(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.1f", round1(v));
  return std::string(buf);
}

}  // namespace

MetricTable load_table_csv(const std::string &path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open table: " + path);
  std::string line;
  if (!std::getline(is, line))
    throw std::runtime_error("empty table file: " + path);
  // Tolerate a UTF-8 BOM and trailing CR.
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0)
    line = line.substr(3);

  MetricTable table;
  auto strip_cr = [](std::string &s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
  };
  strip_cr(line);
  std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 2)
    throw std::runtime_error("table header needs 'system' plus columns: " +
                             path);
  for (std::size_t c = 1; c < header.size(); ++c) {
    std::string name = header[c];
    Direction dir = Direction::kHigherBetter;
    auto colon = name.rfind(':');
    if (colon != std::string::npos) {
      std::string suffix = name.substr(colon + 1);
      if (suffix == "up") {
        dir = Direction::kHigherBetter;
        name = name.substr(0, colon);
      } else if (suffix == "down") {
        dir = Direction::kLowerBetter;
        name = name.substr(0, colon);
      }
    }
    table.col_ids.push_back(name);
    table.directions.push_back(dir);
  }

  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw std::runtime_error("table line " + std::to_string(line_no) +
                               ": expected " + std::to_string(header.size()) +
                               " fields");
    table.row_ids.push_back(fields[0]);
    for (std::size_t c = 1; c < fields.size(); ++c) {
      if (fields[c].empty()) {
        table.cells.push_back(std::nullopt);
      } else {
        try {
          table.cells.push_back(std::stod(fields[c]));
        } catch (const std::exception &) {
          throw std::runtime_error("table line " + std::to_string(line_no) +
                                   ": bad number '" + fields[c] + "'");
        }
      }
    }
  }
  return table;
}

void save_table_csv(const MetricTable &table, const std::string &path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << "system";
  for (std::size_t c = 0; c < table.col_ids.size(); ++c)
    os << "," << table.col_ids[c]
       << (table.directions[c] == Direction::kLowerBetter ? ":down" : ":up");
  os << "\n";
  for (std::size_t r = 0; r < table.row_ids.size(); ++r) {
    os << table.row_ids[r];
    for (std::size_t c = 0; c < table.col_ids.size(); ++c) {
      os << ",";
      const auto &cell = table.cell(r, c);
      if (cell) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.10g", *cell);
        os << buf;
      }
    }
    os << "\n";
  }
  if (!os) throw std::runtime_error("write failed: " + path);
}

double lp_avg(const std::vector<double> &accuracies) {
  if (accuracies.empty()) throw std::invalid_argument("lp_avg: empty input");
  double acc = 0.0;
  for (double v : accuracies) {
    if (!std::isfinite(v)) throw std::invalid_argument("lp_avg: non-finite");
    acc += v;
  }
  return acc / static_cast<double>(accuracies.size());
}

double simple_avg(const std::vector<double> &values) {
  if (values.empty()) throw std::invalid_argument("simple_avg: empty input");
  double acc = 0.0;
  for (double v : values) {
    if (!std::isfinite(v))
      throw std::invalid_argument("simple_avg: non-finite");
    acc += v;
  }
  return acc / static_cast<double>(values.size());
}

double round1(double v) { return std::round(v * 10.0) / 10.0; }

ZsAvgResult zs_avg(const MetricTable &table) {
  std::size_t n_rows = table.row_ids.size();
  std::size_t n_cols = table.col_ids.size();
  for (Direction dir : table.directions)
    if (dir != Direction::kLowerBetter)
      throw std::invalid_argument(
          "zs_avg: every column must be lower-better");

  ZsAvgResult result;
  std::vector<bool> usable(n_cols, false);
  std::vector<double> col_min(n_cols, 0.0), col_range(n_cols, 0.0);
  for (std::size_t c = 0; c < n_cols; ++c) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    std::size_t present = 0;
    for (std::size_t r = 0; r < n_rows; ++r) {
      const auto &cell = table.cell(r, c);
      if (!cell) continue;
      ++present;
      lo = std::min(lo, *cell);
      hi = std::max(hi, *cell);
    }
    if (present < 2 || hi == lo) {
      result.skipped_columns.push_back(table.col_ids[c]);
      continue;
    }
    usable[c] = true;
    col_min[c] = lo;
    col_range[c] = hi - lo;
  }

  for (std::size_t r = 0; r < n_rows; ++r) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t c = 0; c < n_cols; ++c) {
      if (!usable[c]) continue;
      const auto &cell = table.cell(r, c);
      if (!cell) continue;
      sum += (*cell - col_min[c]) / col_range[c];
      ++count;
    }
    if (count == 0) {
      result.row_scores.push_back(std::nullopt);
    } else {
      result.row_scores.push_back(
          100.0 * (1.0 - sum / static_cast<double>(count)));
    }
  }
  return result;
}

RenderedReport render_report(const std::vector<MetricTable> &tables,
                             const json &run_metadata) {
  RenderedReport out;
  json root;
  root["metadata"] = run_metadata;
  root["tables"] = json::array();

  std::ostringstream md;
  md << "# Evaluation report\n";
  for (const MetricTable &table : tables) {
    std::size_t n_rows = table.row_ids.size();
    std::size_t n_cols = table.col_ids.size();

    // Per-column best among present cells, respecting direction.
    std::vector<std::optional<double>> best(n_cols);
    for (std::size_t c = 0; c < n_cols; ++c) {
      for (std::size_t r = 0; r < n_rows; ++r) {
        const auto &cell = table.cell(r, c);
        if (!cell) continue;
        if (!best[c]) {
          best[c] = *cell;
        } else if (table.directions[c] == Direction::kLowerBetter
                       ? *cell < *best[c]
                       : *cell > *best[c]) {
          best[c] = *cell;
        }
      }
    }

    md << "\n## " << table.name << "\n\n";
    md << "| system |";
    for (std::size_t c = 0; c < n_cols; ++c)
      md << " " << table.col_ids[c]
         << (table.directions[c] == Direction::kLowerBetter ? " \xE2\x86\x93"
                                                            : " \xE2\x86\x91")
         << " |";
    md << "\n|---|";
    for (std::size_t c = 0; c < n_cols; ++c) md << "---|";
    md << "\n";
    for (std::size_t r = 0; r < n_rows; ++r) {
      md << "| " << table.row_ids[r] << " |";
      for (std::size_t c = 0; c < n_cols; ++c) {
        const auto &cell = table.cell(r, c);
        if (!cell) {
          md << " -- |";
        } else if (best[c] && round1(*cell) == round1(*best[c])) {
          md << " **" << format1(*cell) << "** |";
        } else {
          md << " " << format1(*cell) << " |";
        }
      }
      md << "\n";
    }

    json jt;
    jt["name"] = table.name;
    jt["systems"] = table.row_ids;
    jt["metrics"] = table.col_ids;
    json dirs = json::array();
    for (Direction dir : table.directions)
      dirs.push_back(dir == Direction::kLowerBetter ? "down" : "up");
    jt["directions"] = dirs;
    json cells = json::array();
    for (std::size_t r = 0; r < n_rows; ++r) {
      json row = json::array();
      for (std::size_t c = 0; c < n_cols; ++c) {
        const auto &cell = table.cell(r, c);
        if (cell) {
          row.push_back(*cell);
        } else {
          row.push_back(nullptr);
        }
      }
      cells.push_back(row);
    }
    jt["cells"] = cells;
    root["tables"].push_back(jt);
  }
  out.markdown = md.str();
  out.json = root;
  return out;
}

}  // namespace voiceval
