#pragma once

// One DDPG agent controlling a single curriculum weight.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "clvo/curriculum/schedulers.hpp"
#include "clvo/ddpg/mlp.hpp"
#include "clvo/ddpg/replay_buffer.hpp"
#include "clvo/errors.hpp"

namespace clvo::ddpg {

struct AgentHyperparams {
  double gamma = 0.95;
  double tau = 0.005;
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  double noise_scale = 0.1;
  std::size_t update_every = 50;  // k
  std::size_t iterations = 10;
  std::size_t batch = 64;
  int hidden = 64;
  std::size_t buffer_capacity = 10000;

  void validate() const {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw Error(ErrorCode::kConfig, "gamma must lie in [0, 1)");
    if (!(tau > 0.0 && tau <= 1.0)) throw Error(ErrorCode::kConfig, "tau must lie in (0, 1]");
    if (!(actor_lr > 0.0) || !(critic_lr > 0.0)) throw Error(ErrorCode::kConfig, "step sizes must be positive");
    if (!(noise_scale >= 0.0)) throw Error(ErrorCode::kConfig, "noise scale must be >= 0");
    if (update_every == 0 || batch == 0) throw Error(ErrorCode::kConfig, "update cadence and batch must be positive");
    if (hidden < 1 || hidden > 64) throw Error(ErrorCode::kConfig, "hidden width must lie in [1, 64]");
    if (buffer_capacity < batch) throw Error(ErrorCode::kConfig, "buffer capacity below batch size");
  }
};

/// p = min(i / N, 1) paired with the component loss.
inline AgentState build_state(std::size_t step, std::size_t budget, double loss) {
  if (budget == 0) throw Error(ErrorCode::kInvalidArgument, "training budget must be positive");
  const double p = std::min(static_cast<double>(step) / static_cast<double>(budget), 1.0);
  return {p, loss};
}

/// r = -|L|.
inline double reward(double loss) { return -std::abs(loss); }

/// w_0 + (w_F - w_0) * a.
inline double adaptive_weight(double action, const WeightBounds& bounds) {
  return bounds.interpolate(std::clamp(action, 0.0, 1.0));
}

/// Zero-mean Gaussian with std scale * 2 * min(a, 1 - a), clipped to [0, 1].
/// The spread vanishes at the action bounds and equals `scale` at a = 0.5.
template <typename Rng>
double exploration_noise(double action, double scale, Rng& rng) {
  const double a = std::clamp(action, 0.0, 1.0);
  const double sd = scale * 2.0 * std::min(a, 1.0 - a);
  if (!(sd > 0.0)) return a;
  std::normal_distribution<double> n(0.0, sd);
  return std::clamp(a + n(rng), 0.0, 1.0);
}

inline Eigen::VectorXd actor_input(const AgentState& s) {
  Eigen::VectorXd x(2);
  x << s.progress, s.loss;
  return x;
}

inline Eigen::VectorXd critic_input(const AgentState& s, double action) {
  Eigen::VectorXd x(3);
  x << s.progress, s.loss, action;
  return x;
}

inline double actor_forward(const Mlp& actor, const AgentState& s) { return actor.forward(actor_input(s)); }

inline double critic_forward(const Mlp& critic, const AgentState& s, double action) {
  return critic.forward(critic_input(s, action));
}

struct LossAndGrad {
  double loss = 0.0;
  MlpParams grad;
};

/// Mean squared Bellman residual against y = r + gamma * Q'(s', mu'(s')) and its
/// gradient with respect to the online critic.
inline LossAndGrad critic_loss_and_grad(const Mlp& critic, const Mlp& actor_target, const Mlp& critic_target,
                                        std::span<const Transition> batch, double gamma) {
  LossAndGrad out{0.0, critic.params().zeros_like()};
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (const auto& t : batch) {
    const double next_action = actor_forward(actor_target, t.next_state);
    const double y = t.reward + gamma * critic_forward(critic_target, t.next_state, next_action);
    MlpCache cache;
    const double q = critic.forward(critic_input(t.state, t.action), &cache);
    const double residual = q - y;
    out.loss += residual * residual * inv_n;
    critic.backward(cache, 2.0 * residual * inv_n, &out.grad);
  }
  return out;
}

/// -mean Q(s, mu(s)) and its gradient with respect to the actor (deterministic policy gradient).
inline LossAndGrad actor_loss_and_grad(const Mlp& actor, const Mlp& critic, std::span<const Transition> batch) {
  LossAndGrad out{0.0, actor.params().zeros_like()};
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (const auto& t : batch) {
    MlpCache actor_cache;
    const double a = actor.forward(actor_input(t.state), &actor_cache);
    MlpCache critic_cache;
    const double q = critic.forward(critic_input(t.state, a), &critic_cache);
    out.loss -= q * inv_n;
    const Eigen::VectorXd dq_dx = critic.backward(critic_cache, 1.0, nullptr);
    actor.backward(actor_cache, -dq_dx[2] * inv_n, &out.grad);
  }
  return out;
}

enum class UpdateStatus { kApplied, kNonFiniteGradient, kUnderfull };

class Agent {
 public:
  Agent(const AgentHyperparams& hp, std::uint64_t seed) : hp_(hp), rng_(seed), buffer_(hp.buffer_capacity) {
    hp_.validate();
    actor_ = Mlp::random(2, hp_.hidden, hp_.hidden, OutputActivation::kLogistic, rng_);
    critic_ = Mlp::random(3, hp_.hidden, hp_.hidden, OutputActivation::kIdentity, rng_);
    actor_target_ = actor_;
    critic_target_ = critic_;
    actor_opt_ = Adam(actor_.params().size(), hp_.actor_lr);
    critic_opt_ = Adam(critic_.params().size(), hp_.critic_lr);
  }

  const AgentHyperparams& hyperparams() const { return hp_; }
  const Mlp& actor() const { return actor_; }
  const Mlp& critic() const { return critic_; }
  const Mlp& actor_target() const { return actor_target_; }
  const Mlp& critic_target() const { return critic_target_; }
  Mlp& actor() { return actor_; }
  Mlp& critic() { return critic_; }
  Mlp& actor_target() { return actor_target_; }
  Mlp& critic_target() { return critic_target_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  std::mt19937_64& rng() { return rng_; }

  std::size_t updates_applied() const { return updates_applied_; }
  std::size_t nonfinite_skips() const { return nonfinite_skips_; }
  std::size_t underfull_skips() const { return underfull_skips_; }

  double act(const AgentState& s) const { return actor_forward(actor_, s); }
  double explore(const AgentState& s) { return exploration_noise(act(s), hp_.noise_scale, rng_); }
  void remember(const Transition& t) { buffer_.push(t); }

  /// One critic step, one actor step, then soft target updates. The whole
  /// update is skipped if any gradient entry is non-finite.
  UpdateStatus update(std::span<const Transition> batch) {
    const auto critic_step = critic_loss_and_grad(critic_, actor_target_, critic_target_, batch, hp_.gamma);
    if (!critic_step.grad.all_finite()) {
      ++nonfinite_skips_;
      return UpdateStatus::kNonFiniteGradient;
    }
    MlpParams critic_params = critic_.params();
    critic_opt_.step(critic_params, critic_step.grad);
    const Mlp updated_critic(critic_params, OutputActivation::kIdentity);
    const auto actor_step = actor_loss_and_grad(actor_, updated_critic, batch);
    if (!actor_step.grad.all_finite()) {
      ++nonfinite_skips_;
      return UpdateStatus::kNonFiniteGradient;
    }
    critic_.params() = std::move(critic_params);
    actor_opt_.step(actor_.params(), actor_step.grad);
    soft_update(actor_target_.params(), actor_.params(), hp_.tau);
    soft_update(critic_target_.params(), critic_.params(), hp_.tau);
    ++updates_applied_;
    return UpdateStatus::kApplied;
  }

  /// Samples a batch from the buffer and updates; Underfull skips the iteration.
  UpdateStatus train_iteration() {
    if (buffer_.size() < hp_.batch) {
      ++underfull_skips_;
      return UpdateStatus::kUnderfull;
    }
    const auto batch = buffer_.sample(hp_.batch, rng_);
    return update(batch);
  }

 private:
  AgentHyperparams hp_;
  std::mt19937_64 rng_;
  ReplayBuffer buffer_;
  Mlp actor_, critic_, actor_target_, critic_target_;
  Adam actor_opt_, critic_opt_;
  std::size_t updates_applied_ = 0;
  std::size_t nonfinite_skips_ = 0;
  std::size_t underfull_skips_ = 0;
};

}  // namespace clvo::ddpg
