#pragma once

// Adaptive curriculum: three independent agents emit w_f, w_p and w_r.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "clvo/curriculum/schedulers.hpp"
#include "clvo/ddpg/agent.hpp"

namespace clvo::ddpg {

enum class Component { kFlow = 0, kPose = 1, kRotation = 2 };
inline constexpr std::array<std::string_view, 3> kComponentNames = {"flow", "pose", "rotation"};

/// Which loss the pose agent observes.
enum class PoseInput { kSubtotal, kTranslation };

struct UpdateEvent {
  std::size_t step = 0;
  std::array<std::size_t, 3> iterations_applied{};
};

class DdpgScheduler final : public CurriculumScheduler {
 public:
  DdpgScheduler(const AgentHyperparams& hp, WeightBounds bounds, std::size_t budget, std::uint64_t seed,
                PoseInput pose_input = PoseInput::kSubtotal)
      : hp_(hp),
        bounds_(bounds),
        budget_(budget),
        pose_input_(pose_input),
        agents_{Agent(hp, seed * 3 + 1), Agent(hp, seed * 3 + 2), Agent(hp, seed * 3 + 3)} {
    bounds_.validate();
    if (budget_ == 0) throw Error(ErrorCode::kConfig, "ddpg scheduler needs a positive step budget");
  }

  SchedulerMode mode() const override { return SchedulerMode::kDdpg; }

  /// Closes the previous transition of each agent, runs the periodic update
  /// at multiples of k, and emits this step's noisy actions as weights.
  CurriculumWeights begin_step(std::size_t step) override {
    std::array<double, 3> weights{};
    for (std::size_t c = 0; c < 3; ++c) {
      const double loss = last_loss_ ? component_loss(*last_loss_, static_cast<Component>(c)) : 0.0;
      const AgentState state = build_state(step, budget_, loss);
      if (pending_[c]) {
        agents_[c].remember({pending_[c]->state, pending_[c]->action, reward(loss), state});
      }
      pending_[c] = Pending{state, 0.0};
    }
    if (step > 0 && step % hp_.update_every == 0) run_updates(step);
    for (std::size_t c = 0; c < 3; ++c) {
      pending_[c]->action = agents_[c].explore(pending_[c]->state);
      weights[c] = adaptive_weight(pending_[c]->action, bounds_);
    }
    current_ = {weights[0], weights[1], weights[2]};
    return current_;
  }

  void end_step(std::size_t, const LossBreakdown& loss) override {
    last_loss_ = loss;
    last_weights_ = current_;
  }

  const Agent& agent(Component c) const { return agents_[static_cast<std::size_t>(c)]; }
  Agent& agent(Component c) { return agents_[static_cast<std::size_t>(c)]; }
  const std::vector<UpdateEvent>& update_events() const { return update_events_; }

  /// Raw loss seen by an agent. The pose agent sees translation + w_r * rotation
  /// (with the w_r used for that loss) unless configured for translation only.
  double component_loss(const LossBreakdown& loss, Component c) const {
    switch (c) {
      case Component::kFlow: return loss.flow;
      case Component::kRotation: return loss.rotation;
      case Component::kPose:
        if (pose_input_ == PoseInput::kTranslation) return loss.translation;
        return loss.translation + last_weights_or(current_).rotation * loss.rotation;
    }
    return 0.0;
  }

 private:
  struct Pending {
    AgentState state;
    double action = 0.0;
  };

  CurriculumWeights last_weights_or(const CurriculumWeights& fallback) const {
    return last_weights_ ? *last_weights_ : fallback;
  }

  void run_updates(std::size_t step) {
    UpdateEvent ev{step, {}};
    for (std::size_t c = 0; c < 3; ++c) {
      for (std::size_t it = 0; it < hp_.iterations; ++it) {
        if (agents_[c].train_iteration() == UpdateStatus::kApplied) ++ev.iterations_applied[c];
      }
    }
    update_events_.push_back(ev);
  }

  AgentHyperparams hp_;
  WeightBounds bounds_;
  std::size_t budget_;
  PoseInput pose_input_;
  std::array<Agent, 3> agents_;
  std::array<std::optional<Pending>, 3> pending_;
  std::optional<LossBreakdown> last_loss_;
  std::optional<CurriculumWeights> last_weights_;
  CurriculumWeights current_;
  std::vector<UpdateEvent> update_events_;
};

}  // namespace clvo::ddpg
