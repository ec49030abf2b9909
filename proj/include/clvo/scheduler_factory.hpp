#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>

#include "clvo/curriculum/schedulers.hpp"
#include "clvo/ddpg/scheduler.hpp"

namespace clvo {

struct SchedulerConfig {
  SchedulerMode mode = SchedulerMode::kBaseline;
  double lambda = 0.1;
  WeightBounds bounds;
  PromotionRule promotion;
  ddpg::AgentHyperparams agent;
  ddpg::PoseInput pose_input = ddpg::PoseInput::kSubtotal;

  void validate() const {
    if (mode == SchedulerMode::kSelfPaced || mode == SchedulerMode::kDdpg) bounds.validate();
    if (mode == SchedulerMode::kSelfPaced && !(lambda >= 0.0)) throw Error(ErrorCode::kConfig, "lambda must be >= 0");
    if (mode == SchedulerMode::kStaged) {
      if (promotion.patience < 1) throw Error(ErrorCode::kConfig, "promotion patience must be >= 1");
      if (promotion.n_levels < 1) throw Error(ErrorCode::kConfig, "n_levels must be >= 1");
    }
    if (mode == SchedulerMode::kDdpg) agent.validate();
  }
};

/// `budget` is the training step budget N; `seed` seeds the DDPG agents.
inline std::unique_ptr<CurriculumScheduler> make_scheduler(const SchedulerConfig& cfg, std::size_t budget,
                                                           std::uint64_t seed) {
  cfg.validate();
  switch (cfg.mode) {
    case SchedulerMode::kBaseline: return std::make_unique<BaselineScheduler>();
    case SchedulerMode::kStaged: return std::make_unique<StagedScheduler>(cfg.promotion);
    case SchedulerMode::kSelfPaced: return std::make_unique<SelfPacedScheduler>(cfg.lambda, cfg.bounds);
    case SchedulerMode::kDdpg:
      return std::make_unique<ddpg::DdpgScheduler>(cfg.agent, cfg.bounds, budget, seed, cfg.pose_input);
  }
  throw Error(ErrorCode::kConfig, "unknown scheduler mode");
}

}  // namespace clvo
