#pragma once

// Three-layer perceptron with explicit forward and backward passes.
//
//   h1 = relu(W0 x + b0)
//   h2 = relu(W1 h1 + b1)
//   y  = out(W2 h2 + b2)        out = logistic (actor) or identity (critic)

#include <array>
#include <cmath>
#include <cstddef>
#include <random>

#include <Eigen/Core>

namespace clvo::ddpg {

enum class OutputActivation { kLogistic, kIdentity };

struct MlpParams {
  std::array<Eigen::MatrixXd, 3> weights;
  std::array<Eigen::VectorXd, 3> biases;

  static MlpParams zeros(int input, int hidden1, int hidden2) {
    MlpParams p;
    p.weights[0] = Eigen::MatrixXd::Zero(hidden1, input);
    p.weights[1] = Eigen::MatrixXd::Zero(hidden2, hidden1);
    p.weights[2] = Eigen::MatrixXd::Zero(1, hidden2);
    p.biases[0] = Eigen::VectorXd::Zero(hidden1);
    p.biases[1] = Eigen::VectorXd::Zero(hidden2);
    p.biases[2] = Eigen::VectorXd::Zero(1);
    return p;
  }

  MlpParams zeros_like() const {
    return zeros(static_cast<int>(weights[0].cols()), static_cast<int>(weights[0].rows()),
                 static_cast<int>(weights[1].rows()));
  }

  int input_size() const { return static_cast<int>(weights[0].cols()); }

  std::size_t size() const {
    std::size_t n = 0;
    for (int l = 0; l < 3; ++l) n += static_cast<std::size_t>(weights[l].size() + biases[l].size());
    return n;
  }

  /// Visits every scalar in a fixed order (W0, b0, W1, b1, W2, b2; column-major).
  template <typename F>
  void for_each(F&& f) {
    for (int l = 0; l < 3; ++l) {
      for (Eigen::Index k = 0; k < weights[l].size(); ++k) f(weights[l].data()[k]);
      for (Eigen::Index k = 0; k < biases[l].size(); ++k) f(biases[l].data()[k]);
    }
  }

  Eigen::VectorXd flatten() const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(size()));
    Eigen::Index i = 0;
    const_cast<MlpParams*>(this)->for_each([&](double& v) { out[i++] = v; });
    return out;
  }

  void unflatten(const Eigen::VectorXd& flat) {
    Eigen::Index i = 0;
    for_each([&](double& v) { v = flat[i++]; });
  }

  bool all_finite() const {
    for (int l = 0; l < 3; ++l) {
      if (!weights[l].allFinite() || !biases[l].allFinite()) return false;
    }
    return true;
  }
};

/// Intermediate values of one forward pass, needed by backward().
struct MlpCache {
  Eigen::VectorXd input;
  Eigen::VectorXd pre1, h1, pre2, h2;
  double pre_out = 0.0;
  double output = 0.0;
};

class Mlp {
 public:
  Mlp() = default;
  Mlp(MlpParams params, OutputActivation activation) : params_(std::move(params)), activation_(activation) {}

  /// Hidden layers uniform in +-1/sqrt(fan_in); the output layer in +-final_scale.
  template <typename Rng>
  static Mlp random(int input, int hidden1, int hidden2, OutputActivation activation, Rng& rng,
                    double final_scale = 3e-3) {
    MlpParams p = MlpParams::zeros(input, hidden1, hidden2);
    auto fill = [&](auto& m, double bound) {
      std::uniform_real_distribution<double> u(-bound, bound);
      for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = u(rng);
    };
    fill(p.weights[0], 1.0 / std::sqrt(static_cast<double>(input)));
    fill(p.biases[0], 1.0 / std::sqrt(static_cast<double>(input)));
    fill(p.weights[1], 1.0 / std::sqrt(static_cast<double>(hidden1)));
    fill(p.biases[1], 1.0 / std::sqrt(static_cast<double>(hidden1)));
    fill(p.weights[2], final_scale);
    fill(p.biases[2], final_scale);
    return Mlp(std::move(p), activation);
  }

  const MlpParams& params() const { return params_; }
  MlpParams& params() { return params_; }
  OutputActivation activation() const { return activation_; }

  double forward(const Eigen::VectorXd& x, MlpCache* cache = nullptr) const {
    MlpCache local;
    MlpCache& c = cache ? *cache : local;
    c.input = x;
    c.pre1 = params_.weights[0] * x + params_.biases[0];
    c.h1 = c.pre1.cwiseMax(0.0);
    c.pre2 = params_.weights[1] * c.h1 + params_.biases[1];
    c.h2 = c.pre2.cwiseMax(0.0);
    c.pre_out = (params_.weights[2] * c.h2)(0) + params_.biases[2](0);
    c.output = activation_ == OutputActivation::kLogistic ? 1.0 / (1.0 + std::exp(-c.pre_out)) : c.pre_out;
    return c.output;
  }

  /// Backpropagates d(objective)/d(output). Parameter gradients are added into
  /// `grad` when non-null; the gradient with respect to the input is returned.
  Eigen::VectorXd backward(const MlpCache& c, double d_output, MlpParams* grad) const {
    const double d_pre_out =
        activation_ == OutputActivation::kLogistic ? d_output * c.output * (1.0 - c.output) : d_output;
    const Eigen::VectorXd d_h2 = params_.weights[2].transpose() * d_pre_out;
    const Eigen::VectorXd d_pre2 = d_h2.cwiseProduct(relu_mask(c.pre2));
    const Eigen::VectorXd d_h1 = params_.weights[1].transpose() * d_pre2;
    const Eigen::VectorXd d_pre1 = d_h1.cwiseProduct(relu_mask(c.pre1));
    if (grad) {
      grad->weights[2] += d_pre_out * c.h2.transpose();
      grad->biases[2](0) += d_pre_out;
      grad->weights[1] += d_pre2 * c.h1.transpose();
      grad->biases[1] += d_pre2;
      grad->weights[0] += d_pre1 * c.input.transpose();
      grad->biases[0] += d_pre1;
    }
    return params_.weights[0].transpose() * d_pre1;
  }

 private:
  static Eigen::VectorXd relu_mask(const Eigen::VectorXd& pre) {
    return (pre.array() > 0.0).cast<double>().matrix();
  }

  MlpParams params_;
  OutputActivation activation_ = OutputActivation::kIdentity;
};

/// Adam on a flattened parameter vector.
class Adam {
 public:
  Adam() = default;
  Adam(std::size_t n, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps),
        m_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n))),
        v_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n))) {}

  /// Descends along `grad`.
  void step(MlpParams& params, const MlpParams& grad) {
    const Eigen::VectorXd g = grad.flatten();
    ++t_;
    m_ = beta1_ * m_ + (1.0 - beta1_) * g;
    v_ = beta2_ * v_ + (1.0 - beta2_) * g.cwiseProduct(g);
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    const Eigen::VectorXd m_hat = m_ / c1;
    const Eigen::VectorXd v_hat = v_ / c2;
    Eigen::VectorXd flat = params.flatten();
    flat.array() -= lr_ * m_hat.array() / (v_hat.array().sqrt() + eps_);
    params.unflatten(flat);
  }

  double learning_rate() const { return lr_; }

 private:
  double lr_ = 1e-3, beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
  Eigen::VectorXd m_, v_;
  long long t_ = 0;
};

/// target <- tau * online + (1 - tau) * target, elementwise.
inline void soft_update(MlpParams& target, const MlpParams& online, double tau) {
  for (int l = 0; l < 3; ++l) {
    target.weights[l] = tau * online.weights[l] + (1.0 - tau) * target.weights[l];
    target.biases[l] = tau * online.biases[l] + (1.0 - tau) * target.biases[l];
  }
}

}  // namespace clvo::ddpg
