#pragma once

// Comma-separated tables: the interchange format between commands. Fields
// never contain commas or quotes, so no quoting is done.

#include <cstddef>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "clvo/difficulty.hpp"
#include "clvo/errors.hpp"
#include "clvo/io/trajectory_io.hpp"
#include "clvo/surrogate/trainer.hpp"

namespace clvo::io {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::size_t> column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    return std::nullopt;
  }

  /// Throws MissingColumns naming every absent column.
  void require(const std::vector<std::string>& names) const {
    std::string missing;
    for (const auto& n : names) {
      if (!column(n)) missing += (missing.empty() ? "" : ", ") + n;
    }
    if (!missing.empty()) throw Error(ErrorCode::kMissingColumns, missing);
  }

  /// Numeric column; empty cells become nullopt.
  std::vector<std::optional<double>> numbers(std::string_view name) const {
    const auto c = column(name);
    if (!c) throw Error(ErrorCode::kMissingColumns, std::string(name));
    std::vector<std::optional<double>> out;
    out.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const std::string& cell = rows[r][*c];
      if (cell.empty()) {
        out.emplace_back();
        continue;
      }
      double v = 0.0;
      if (!io_detail::parse_double(cell, &v)) {
        throw Error(ErrorCode::kMalformedLine, "row " + std::to_string(r + 2) + ", column " + std::string(name) +
                                                   ": '" + cell + "'");
      }
      out.emplace_back(v);
    }
    return out;
  }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline CsvTable read_csv(std::istream& in, const std::string& source = "<stream>") {
  CsvTable t;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (t.header.empty()) {
      t.header = std::move(cells);
      continue;
    }
    if (cells.size() != t.header.size()) {
      throw Error(ErrorCode::kMalformedLine, source + ":" + std::to_string(line_no) + ": expected " +
                                                 std::to_string(t.header.size()) + " cells, found " +
                                                 std::to_string(cells.size()));
    }
    t.rows.push_back(std::move(cells));
  }
  return t;
}

inline CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read '" + path + "'");
  return read_csv(in, path);
}

inline void write_csv(std::ostream& out, const CsvTable& t) {
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
}

inline void write_csv_file(const std::string& path, const CsvTable& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path + "'");
  write_csv(out, t);
}

inline const std::vector<std::string>& metrics_columns() {
  static const std::vector<std::string> cols = {"step", "loss_flow", "loss_trans", "loss_rot", "loss_total", "w_f",
                                                "w_p",  "w_r",       "active_levels", "val_ate", "val_auc"};
  return cols;
}

/// One row per training record; validation cells are empty between validations.
inline CsvTable metrics_table(const std::vector<surrogate::TrainingRecord>& records) {
  CsvTable t{metrics_columns(), {}};
  for (const auto& r : records) {
    t.rows.push_back({std::to_string(r.step), format_double(r.loss.flow), format_double(r.loss.translation),
                      format_double(r.loss.rotation), format_double(r.loss.total), format_double(r.weights.flow),
                      format_double(r.weights.pose), format_double(r.weights.rotation), r.active_levels.label(),
                      r.val_ate ? format_double(*r.val_ate) : "", r.val_auc ? format_double(*r.val_auc) : ""});
  }
  return t;
}

inline const std::vector<std::string>& manifest_columns() {
  static const std::vector<std::string> cols = {"sequence_id", "max_tx", "max_ty", "max_tz", "max_rx",
                                                "max_ry",      "max_rz", "score",  "level"};
  return cols;
}

inline CsvTable manifest_table(const DifficultyReport& report) {
  CsvTable t{manifest_columns(), {}};
  for (const auto& s : report.scores) {
    std::vector<std::string> row{s.sequence_id};
    for (double c : s.raw.components()) row.push_back(format_double(c));
    row.push_back(format_double(s.normalized));
    row.push_back(std::to_string(s.level));
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline CsvTable histogram_table(const Histogram& h) {
  CsvTable t{{"bin_lo", "bin_hi", "count"}, {}};
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    t.rows.push_back({format_double(h.edges[i]), format_double(h.edges[i + 1]), std::to_string(h.counts[i])});
  }
  return t;
}

}  // namespace clvo::io
