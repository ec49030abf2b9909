#pragma once

// Curriculum schedulers: the shared scheduler interface, the fixed baseline,
// trajectory-based staging, self-paced exponential weighting, and the
// dual-metric early-stopping rule.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clvo/curriculum/loss.hpp"
#include "clvo/errors.hpp"

namespace clvo {

struct WeightBounds {
  double initial = 0.1;  // w_0
  double final = 1.0;    // w_F

  void validate() const {
    if (!(initial < final) || !std::isfinite(initial) || !std::isfinite(final)) {
      throw Error(ErrorCode::kConfig, "weight bounds need w0 < wF");
    }
  }
  /// w_0 + (w_F - w_0) * t, the interpolation shared by self-paced and adaptive modes.
  double interpolate(double t) const { return initial + (final - initial) * t; }
};

/// phi(L) = exp(-lambda * L).
inline double self_paced_progress(double loss, double lambda) {
  if (loss < 0.0 || std::isnan(loss)) throw Error(ErrorCode::kNegativeLoss, std::to_string(loss));
  if (lambda < 0.0 || std::isnan(lambda)) throw Error(ErrorCode::kInvalidArgument, "lambda must be >= 0");
  return std::exp(-lambda * loss);
}

inline CurriculumWeights self_paced_weights(double phi, const WeightBounds& bounds) {
  const double w = bounds.interpolate(std::clamp(phi, 0.0, 1.0));
  return CurriculumWeights::uniform(w);
}

/// Cumulative set of active difficulty levels {1, ..., highest}.
class LevelSet {
 public:
  explicit LevelSet(int highest = 1) : highest_(std::max(1, highest)) {}
  static LevelSet all(int n_levels) { return LevelSet(n_levels); }

  int highest() const { return highest_; }
  bool contains(int level) const { return level >= 1 && level <= highest_; }
  std::vector<int> levels() const {
    std::vector<int> out;
    for (int l = 1; l <= highest_; ++l) out.push_back(l);
    return out;
  }
  /// "1", "1+2", "1+2+3".
  std::string label() const {
    std::string out;
    for (int l = 1; l <= highest_; ++l) {
      if (l > 1) out += '+';
      out += std::to_string(l);
    }
    return out;
  }
  bool operator==(const LevelSet&) const = default;

 private:
  int highest_;
};

/// When the staged curriculum moves to the next level. A stage ends when
/// validation ATE improves by less than `min_rel_improvement` for `patience`
/// consecutive validations, or when the stage has run `stage_max_steps[stage]`
/// steps, whichever comes first. Missing budget entries mean no budget.
struct PromotionRule {
  int patience = 3;
  double min_rel_improvement = 0.01;
  std::vector<std::size_t> stage_max_steps;
  int n_levels = 3;
};

struct StagedState {
  int highest_level = 1;
  std::size_t stage_start_step = 0;
  std::optional<double> best_ate;
  int stale_validations = 0;
  int promotions = 0;
};

namespace schedule_detail {

inline StagedState promote(StagedState s, std::size_t step) {
  ++s.highest_level;
  ++s.promotions;
  s.stage_start_step = step;
  s.best_ate.reset();
  s.stale_validations = 0;
  return s;
}

}  // namespace schedule_detail

/// Step-budget check: call once per training step before sampling.
inline StagedState staged_tick(StagedState s, const PromotionRule& rule, std::size_t step) {
  if (s.highest_level >= rule.n_levels) return s;
  const auto stage = static_cast<std::size_t>(s.highest_level - 1);
  if (stage < rule.stage_max_steps.size() && rule.stage_max_steps[stage] > 0 &&
      step - s.stage_start_step >= rule.stage_max_steps[stage]) {
    return schedule_detail::promote(s, step);
  }
  return s;
}

/// Stabilization check: call after each validation pass.
inline StagedState staged_observe_validation(StagedState s, const PromotionRule& rule, std::size_t step,
                                             double ate) {
  if (s.highest_level >= rule.n_levels) return s;
  if (!s.best_ate) {
    s.best_ate = ate;
    return s;
  }
  const double best = *s.best_ate;
  const double rel = best > 0.0 ? (best - ate) / best : 0.0;
  s.stale_validations = rel < rule.min_rel_improvement ? s.stale_validations + 1 : 0;
  s.best_ate = std::min(best, ate);
  if (s.stale_validations >= rule.patience) return schedule_detail::promote(s, step + 1);
  return s;
}

inline LevelSet staged_active_levels(const StagedState& state, const PromotionRule& rule) {
  return LevelSet(std::min(state.highest_level, rule.n_levels));
}

struct LevelEntry {
  std::string sequence_id;
  int level = 0;
};

/// Ids whose level is active, in manifest order.
inline std::vector<std::string> staged_sample_filter(std::span<const LevelEntry> manifest, const LevelSet& active,
                                                     int n_levels = 3) {
  std::vector<std::string> out;
  for (const auto& e : manifest) {
    if (e.level < 1 || e.level > n_levels) {
      throw Error(ErrorCode::kUnknownLevel, "'" + e.sequence_id + "' has level " + std::to_string(e.level));
    }
    if (active.contains(e.level)) out.push_back(e.sequence_id);
  }
  return out;
}

struct ValidationRecord {
  double auc = 0.0;
  double ate = 0.0;
};

/// Dual-metric early stopping. A validation counts as progress when AUC rises
/// above its best so far or ATE drops below its best so far, each metric
/// tracked on its own. Stop after `patience` consecutive validations without
/// progress.
inline bool early_stopping_check(std::span<const ValidationRecord> history, int patience) {
  if (history.empty() || patience < 1) return false;
  double best_auc = history.front().auc;
  double best_ate = history.front().ate;
  int stale = 0;
  for (std::size_t i = 1; i < history.size(); ++i) {
    const bool improved = history[i].auc > best_auc || history[i].ate < best_ate;
    best_auc = std::max(best_auc, history[i].auc);
    best_ate = std::min(best_ate, history[i].ate);
    stale = improved ? 0 : stale + 1;
  }
  return stale >= patience;
}

enum class SchedulerMode { kBaseline, kStaged, kSelfPaced, kDdpg };

inline std::string_view to_string(SchedulerMode m) {
  switch (m) {
    case SchedulerMode::kBaseline: return "baseline";
    case SchedulerMode::kStaged: return "staged";
    case SchedulerMode::kSelfPaced: return "self_paced";
    case SchedulerMode::kDdpg: return "ddpg";
  }
  return "baseline";
}

inline SchedulerMode parse_scheduler_mode(std::string_view s) {
  if (s == "baseline") return SchedulerMode::kBaseline;
  if (s == "staged") return SchedulerMode::kStaged;
  if (s == "self_paced") return SchedulerMode::kSelfPaced;
  if (s == "ddpg") return SchedulerMode::kDdpg;
  throw Error(ErrorCode::kConfig, "unknown scheduler mode '" + std::string(s) + "'");
}

/// Interface the training loop drives once per step.
///
///   w = begin_step(i)            weights for the loss of step i
///   end_step(i, breakdown)       the loss actually computed with w
///   on_validation(i, ate, auc)   after a validation pass
class CurriculumScheduler {
 public:
  virtual ~CurriculumScheduler() = default;

  virtual SchedulerMode mode() const = 0;
  virtual CurriculumWeights begin_step(std::size_t step) = 0;
  virtual void end_step(std::size_t step, const LossBreakdown& loss) = 0;
  virtual void on_validation(std::size_t /*step*/, double /*ate*/, double /*auc*/) {}
  virtual LevelSet active_levels() const { return LevelSet::all(3); }
};

class BaselineScheduler final : public CurriculumScheduler {
 public:
  SchedulerMode mode() const override { return SchedulerMode::kBaseline; }
  CurriculumWeights begin_step(std::size_t) override { return CurriculumWeights{}; }
  void end_step(std::size_t, const LossBreakdown&) override {}
};

/// Unit weights, with the sampled level set widening as stages complete.
class StagedScheduler final : public CurriculumScheduler {
 public:
  explicit StagedScheduler(PromotionRule rule) : rule_(std::move(rule)) {}

  SchedulerMode mode() const override { return SchedulerMode::kStaged; }
  CurriculumWeights begin_step(std::size_t step) override {
    state_ = staged_tick(state_, rule_, step);
    return CurriculumWeights{};
  }
  void end_step(std::size_t, const LossBreakdown&) override {}
  void on_validation(std::size_t step, double ate, double) override {
    state_ = staged_observe_validation(state_, rule_, step, ate);
  }
  LevelSet active_levels() const override { return staged_active_levels(state_, rule_); }
  const StagedState& state() const { return state_; }

 private:
  PromotionRule rule_;
  StagedState state_;
};

/// All three weights follow w_0 + (w_F - w_0) * exp(-lambda * L), where L is
/// the total loss of the previous step. The first step uses w_0.
class SelfPacedScheduler final : public CurriculumScheduler {
 public:
  SelfPacedScheduler(double lambda, WeightBounds bounds) : lambda_(lambda), bounds_(bounds) {
    bounds_.validate();
    if (!(lambda_ >= 0.0)) throw Error(ErrorCode::kConfig, "lambda must be >= 0");
  }

  SchedulerMode mode() const override { return SchedulerMode::kSelfPaced; }
  CurriculumWeights begin_step(std::size_t) override {
    if (!last_total_) return CurriculumWeights::uniform(bounds_.initial);
    return self_paced_weights(self_paced_progress(*last_total_, lambda_), bounds_);
  }
  void end_step(std::size_t, const LossBreakdown& loss) override { last_total_ = loss.total; }

 private:
  double lambda_;
  WeightBounds bounds_;
  std::optional<double> last_total_;
};

}  // namespace clvo
