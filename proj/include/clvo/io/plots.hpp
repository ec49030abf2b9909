#pragma once

#include <algorithm>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "clvo/errors.hpp"
#include "clvo/io/csv.hpp"
#include "clvo/io/svg.hpp"

namespace clvo::io {

enum class PlotKind { kTrainingCurves, kWeightTrace, kDifficultyHist, kAucCurve };

inline PlotKind parse_plot_kind(std::string_view s) {
  if (s == "training_curves") return PlotKind::kTrainingCurves;
  if (s == "weight_trace") return PlotKind::kWeightTrace;
  if (s == "difficulty_hist") return PlotKind::kDifficultyHist;
  if (s == "auc_curve") return PlotKind::kAucCurve;
  throw Error(ErrorCode::kConfig, "unknown plot kind '" + std::string(s) + "'");
}

/// Columns each plot kind reads.
inline std::vector<std::string> plot_columns(PlotKind k) {
  switch (k) {
    case PlotKind::kTrainingCurves: return {"step", "loss_flow", "loss_trans", "loss_rot", "loss_total", "val_ate"};
    case PlotKind::kWeightTrace: return {"step", "w_f", "w_p", "w_r"};
    case PlotKind::kDifficultyHist: return {"score", "level"};
    case PlotKind::kAucCurve: return {"ate"};
  }
  return {};
}

namespace plot_detail {

inline Series column_series(const CsvTable& t, const std::string& x, const std::string& y, const std::string& name,
                            const std::string& color, bool markers = false) {
  Series s{name, {}, {}, color, markers};
  const auto xs = t.numbers(x);
  const auto ys = t.numbers(y);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i] && ys[i]) {
      s.x.push_back(*xs[i]);
      s.y.push_back(*ys[i]);
    }
  }
  return s;
}

/// Midpoints between the highest score of each level and the lowest of the next.
inline std::vector<double> level_boundaries(const std::vector<double>& score, const std::vector<int>& level) {
  int max_level = 0;
  for (int l : level) max_level = std::max(max_level, l);
  std::vector<double> out;
  for (int l = 1; l < max_level; ++l) {
    double hi = -1.0, lo = 2.0;
    for (std::size_t i = 0; i < score.size(); ++i) {
      if (level[i] == l) hi = std::max(hi, score[i]);
      if (level[i] == l + 1) lo = std::min(lo, score[i]);
    }
    if (hi >= 0.0 && lo <= 1.0) out.push_back(0.5 * (hi + lo));
  }
  return out;
}

}  // namespace plot_detail

/// SVG text for `kind`. Throws MissingColumns (every absent column named) or
/// EmptyInput before producing anything. `thresholds` overrides the level
/// boundaries drawn on the difficulty histogram.
inline std::string render_plot(const CsvTable& t, PlotKind kind,
                               const std::optional<std::vector<double>>& thresholds = std::nullopt,
                               double auc_max_error = 1.0) {
  t.require(plot_columns(kind));
  if (t.rows.empty()) throw Error(ErrorCode::kEmptyInput, "table has no rows");
  const auto& c = palette();
  switch (kind) {
    case PlotKind::kTrainingCurves: {
      PlotSpec loss{"Training loss", "step", "loss (weighted total; components unweighted)", {}, {}, {}, {}, {}, true};
      loss.series.push_back(plot_detail::column_series(t, "step", "loss_total", "total", c[0]));
      loss.series.push_back(plot_detail::column_series(t, "step", "loss_flow", "flow [px]", c[1]));
      loss.series.push_back(plot_detail::column_series(t, "step", "loss_trans", "translation [m]", c[2]));
      loss.series.push_back(plot_detail::column_series(t, "step", "loss_rot", "rotation [rad]", c[3]));
      PlotSpec val{"Validation ATE", "step", "ATE [m]", {}, {}, {}, 0.0, {}};
      val.series.push_back(plot_detail::column_series(t, "step", "val_ate", "val ATE", c[0], true));
      if (t.column("val_auc")) {
        PlotSpec auc_panel{"Validation AUC", "step", "AUC [fraction]", {}, {}, {}, 0.0, 1.0};
        auc_panel.series.push_back(plot_detail::column_series(t, "step", "val_auc", "val AUC", c[2], true));
        return render_svg({loss, val, auc_panel});
      }
      return render_svg({loss, val});
    }
    case PlotKind::kWeightTrace: {
      PlotSpec p{"Curriculum weights", "step", "weight [unitless]", {}, {}, {}, 0.0, 1.05};
      p.series.push_back(plot_detail::column_series(t, "step", "w_f", "w_f (flow)", c[0]));
      p.series.push_back(plot_detail::column_series(t, "step", "w_p", "w_p (pose)", c[1]));
      p.series.push_back(plot_detail::column_series(t, "step", "w_r", "w_r (rotation)", c[2]));
      return render_svg({p});
    }
    case PlotKind::kDifficultyHist: {
      std::vector<double> score;
      std::vector<int> level;
      for (const auto& v : t.numbers("score")) score.push_back(v.value_or(0.0));
      for (const auto& v : t.numbers("level")) level.push_back(static_cast<int>(v.value_or(0.0)));
      std::vector<DifficultyScore> ds;
      for (double s : score) ds.push_back({"", {}, s, 0});
      const Histogram h = score_histogram(ds);
      PlotSpec p;
      p.title = "Distribution of difficulty scores";
      p.x_label = "difficulty score [0, 1]";
      p.y_label = "sequences [count]";
      for (std::size_t i = 0; i < h.counts.size(); ++i) {
        p.bars.push_back({h.edges[i], h.edges[i + 1], static_cast<double>(h.counts[i])});
      }
      p.vertical_rules = thresholds ? *thresholds : plot_detail::level_boundaries(score, level);
      p.y_min = 0.0;
      return render_svg({p});
    }
    case PlotKind::kAucCurve: {
      std::vector<double> errs;
      for (const auto& v : t.numbers("ate")) {
        if (v) errs.push_back(*v);
      }
      std::sort(errs.begin(), errs.end());
      Series s{"fraction with ATE <= t", {}, {}, c[0]};
      const int n = 200;
      for (int i = 0; i <= n; ++i) {
        const double th = auc_max_error * i / n;
        const auto below = std::upper_bound(errs.begin(), errs.end(), th) - errs.begin();
        s.x.push_back(th);
        s.y.push_back(static_cast<double>(below) / static_cast<double>(errs.size()));
      }
      PlotSpec p;
      p.title = "Cumulative error curve (AUC = area)";
      p.x_label = "ATE threshold t [m]";
      p.y_label = "fraction of sequences";
      p.series = {s};
      p.y_min = 0.0;
      p.y_max = 1.0;
      return render_svg({p});
    }
  }
  return {};
}

/// Writes the plot only after it rendered successfully.
inline void write_plot_file(const std::string& path, const CsvTable& t, PlotKind kind,
                            const std::optional<std::vector<double>>& thresholds = std::nullopt,
                            double auc_max_error = 1.0) {
  const std::string svg = render_plot(t, kind, thresholds, auc_max_error);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path + "'");
  out << svg;
}

}  // namespace clvo::io
