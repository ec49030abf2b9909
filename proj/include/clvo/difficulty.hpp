#pragma once

// Six-DoF motion-complexity scoring of trajectories and equal-count
// partitioning into difficulty levels.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "clvo/errors.hpp"
#include "clvo/geometry.hpp"
#include "clvo/trajectory.hpp"

namespace clvo {

/// Per-axis maxima of |frame-to-frame translation| (m) and |rotation vector| (rad).
struct MotionProfile {
  std::array<double, 3> max_trans{};
  std::array<double, 3> max_rot{};

  std::array<double, 6> components() const {
    return {max_trans[0], max_trans[1], max_trans[2], max_rot[0], max_rot[1], max_rot[2]};
  }

  static MotionProfile from_components(const std::array<double, 6>& c) {
    return {{c[0], c[1], c[2]}, {c[3], c[4], c[5]}};
  }

  bool is_static() const {
    const auto c = components();
    return std::all_of(c.begin(), c.end(), [](double v) { return v == 0.0; });
  }
};

inline MotionProfile motion_profile(const Trajectory& traj) {
  if (traj.size() < 2) {
    throw Error(ErrorCode::kTooShort, "'" + traj.sequence_id + "' has " + std::to_string(traj.size()) +
                                          " poses, need at least 2");
  }
  MotionProfile out;
  for (std::size_t i = 1; i < traj.size(); ++i) {
    const RigidPosed rel = relative_pose(traj[i - 1], traj[i]);
    const Eigen::Vector3d rot = so3_log(rel.rotation());
    for (int k = 0; k < 3; ++k) {
      out.max_trans[k] = std::max(out.max_trans[k], std::abs(rel.translation()[k]));
      out.max_rot[k] = std::max(out.max_rot[k], std::abs(rot[k]));
    }
  }
  return out;
}

inline constexpr std::array<double, 6> kUniformComponentWeights = {1.0 / 6, 1.0 / 6, 1.0 / 6,
                                                                   1.0 / 6, 1.0 / 6, 1.0 / 6};

/// Min-max statistics of motion profiles over a dataset plus combination weights.
struct DatasetStats {
  std::array<double, 6> min{};
  std::array<double, 6> max{};
  std::array<double, 6> weights = kUniformComponentWeights;

  /// Non-negative weights are rescaled to sum to one; all-zero weights are rejected.
  static std::array<double, 6> normalized_weights(const std::array<double, 6>& w) {
    double sum = 0.0;
    for (double v : w) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw Error(ErrorCode::kInvalidArgument, "difficulty weights must be finite and non-negative");
      }
      sum += v;
    }
    if (!(sum > 0.0)) throw Error(ErrorCode::kInvalidArgument, "difficulty weights sum to zero");
    std::array<double, 6> out{};
    for (int k = 0; k < 6; ++k) out[k] = w[k] / sum;
    return out;
  }

  static DatasetStats from_profiles(std::span<const MotionProfile> profiles,
                                    const std::array<double, 6>& weights = kUniformComponentWeights) {
    if (profiles.empty()) throw Error(ErrorCode::kEmptyInput, "no motion profiles");
    DatasetStats s;
    s.weights = normalized_weights(weights);
    s.min = profiles.front().components();
    s.max = s.min;
    for (const auto& p : profiles) {
      const auto c = p.components();
      for (int k = 0; k < 6; ++k) {
        s.min[k] = std::min(s.min[k], c[k]);
        s.max[k] = std::max(s.max[k], c[k]);
      }
    }
    return s;
  }
};

/// Weighted average of clamped min-max normalized components, in [0, 1].
/// A component with min == max contributes 0.
inline double difficulty_score(const MotionProfile& profile, const DatasetStats& stats) {
  const auto c = profile.components();
  double score = 0.0;
  for (int k = 0; k < 6; ++k) {
    const double range = stats.max[k] - stats.min[k];
    double norm = 0.0;
    if (range > 0.0) norm = std::clamp((c[k] - stats.min[k]) / range, 0.0, 1.0);
    score += stats.weights[k] * norm;
  }
  return std::clamp(score, 0.0, 1.0);
}

struct DifficultyScore {
  std::string sequence_id;
  MotionProfile raw;
  double normalized = 0.0;
  int level = 0;
};

/// Cut points between consecutive levels and the level of each input score.
struct LevelPartition {
  std::vector<double> thresholds;
  std::vector<int> levels;  // parallel to the input, values in 1..n_levels

  std::vector<std::size_t> group_sizes() const {
    std::vector<std::size_t> sizes(thresholds.size() + 1, 0);
    for (int l : levels) ++sizes[static_cast<std::size_t>(l - 1)];
    return sizes;
  }
};

/// Level for a score under fixed cut points: one plus the number of cut points <= score.
inline int level_for_score(double score, std::span<const double> thresholds) {
  int level = 1;
  for (double t : thresholds) {
    if (score >= t) ++level;
  }
  return level;
}

/// Equal-count partition at the empirical quantiles of the scores.
///
/// Scores are ordered by (normalized, sequence_id) so ties split
/// deterministically; group g takes sorted positions [g*n/k, (g+1)*n/k).
/// Each threshold is the midpoint between the last score of one group and the
/// first score of the next.
inline LevelPartition partition_levels(std::span<const DifficultyScore> scores, int n_levels = 3) {
  if (n_levels < 1) throw Error(ErrorCode::kInvalidArgument, "n_levels must be positive");
  const std::size_t n = scores.size();
  const auto k = static_cast<std::size_t>(n_levels);
  if (n < k) {
    throw Error(ErrorCode::kTooFewSequences,
                std::to_string(n) + " sequences for " + std::to_string(n_levels) + " levels");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a].normalized != scores[b].normalized) return scores[a].normalized < scores[b].normalized;
    return scores[a].sequence_id < scores[b].sequence_id;
  });

  LevelPartition out;
  out.levels.assign(n, 0);
  for (std::size_t g = 0; g < k; ++g) {
    const std::size_t begin = g * n / k;
    const std::size_t end = (g + 1) * n / k;
    for (std::size_t pos = begin; pos < end; ++pos) out.levels[order[pos]] = static_cast<int>(g + 1);
    if (g + 1 < k) {
      const double lo = scores[order[end - 1]].normalized;
      const double hi = scores[order[end]].normalized;
      out.thresholds.push_back(0.5 * (lo + hi));
    }
  }
  return out;
}

/// Partition with caller-supplied cut points (e.g. {0.44, 0.64}).
inline LevelPartition partition_fixed(std::span<const DifficultyScore> scores, std::vector<double> thresholds) {
  if (!std::is_sorted(thresholds.begin(), thresholds.end())) {
    throw Error(ErrorCode::kInvalidArgument, "thresholds must be non-decreasing");
  }
  LevelPartition out;
  out.thresholds = std::move(thresholds);
  out.levels.reserve(scores.size());
  for (const auto& s : scores) out.levels.push_back(level_for_score(s.normalized, out.thresholds));
  return out;
}

struct DifficultyReport {
  std::vector<DifficultyScore> scores;  // input order
  DatasetStats stats;
  std::vector<double> thresholds;
};

/// Full pipeline: profiles, dataset normalization, partition. Results depend
/// only on the set of trajectories, not on their order.
inline DifficultyReport score_dataset(std::span<const Trajectory> trajectories,
                                      const std::array<double, 6>& weights = kUniformComponentWeights,
                                      int n_levels = 3,
                                      const std::optional<std::vector<double>>& fixed_thresholds = std::nullopt) {
  DifficultyReport report;
  std::vector<MotionProfile> profiles;
  profiles.reserve(trajectories.size());
  for (const auto& t : trajectories) profiles.push_back(motion_profile(t));
  report.stats = DatasetStats::from_profiles(profiles, weights);

  report.scores.reserve(trajectories.size());
  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    report.scores.push_back({trajectories[i].sequence_id, profiles[i],
                             difficulty_score(profiles[i], report.stats), 0});
  }
  const LevelPartition part = fixed_thresholds ? partition_fixed(report.scores, *fixed_thresholds)
                                               : partition_levels(report.scores, n_levels);
  for (std::size_t i = 0; i < report.scores.size(); ++i) report.scores[i].level = part.levels[i];
  report.thresholds = part.thresholds;
  return report;
}

struct Histogram {
  std::vector<double> edges;  // bins + 1 entries
  std::vector<std::size_t> counts;
};

/// Fixed-width histogram of normalized scores over [0, 1]; a score of exactly 1 lands in the last bin.
inline Histogram score_histogram(std::span<const DifficultyScore> scores, std::size_t bins = 20) {
  if (bins == 0) throw Error(ErrorCode::kInvalidArgument, "histogram needs at least one bin");
  Histogram h;
  h.edges.resize(bins + 1);
  for (std::size_t b = 0; b <= bins; ++b) h.edges[b] = static_cast<double>(b) / static_cast<double>(bins);
  h.counts.assign(bins, 0);
  for (const auto& s : scores) {
    auto b = static_cast<std::size_t>(std::floor(s.normalized * static_cast<double>(bins)));
    ++h.counts[std::min(b, bins - 1)];
  }
  return h;
}

}  // namespace clvo
