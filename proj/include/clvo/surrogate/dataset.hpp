#pragma once

// Synthetic trajectory datasets with controllable motion difficulty.
//
// A sequence with difficulty target d has per-step relative motions whose
// per-axis maxima are d times a fixed envelope (times a small per-axis
// jitter), so its score against the envelope statistics lands near d. The
// observation for each step is a saturating random encoding of the motion
// plus Gaussian noise whose sigma grows with the sequence's difficulty.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "clvo/curriculum/loss.hpp"
#include "clvo/difficulty.hpp"
#include "clvo/errors.hpp"
#include "clvo/geometry.hpp"
#include "clvo/trajectory.hpp"

namespace clvo::surrogate {

using Vector6 = Eigen::Matrix<double, 6, 1>;

inline constexpr int kWindow = 10;       // poses per training window
inline constexpr int kSteps = kWindow - 1;
inline constexpr int kFlowGrid = 4;      // flow fields sample a kFlowGrid x kFlowGrid pixel grid
inline constexpr int kFlowDim = 2 * kFlowGrid * kFlowGrid;

struct DatasetSpec {
  std::size_t n_sequences = 300;
  std::size_t sequence_length = 40;
  std::vector<double> difficulty_modes = {0.1, 0.45, 0.7};
  double mode_spread = 0.03;
  double noise_sigma = 0.1;   // sigma_0; per-sequence sigma = sigma_0 * (0.2 + score)
  double encoding_gain = 1.5;
  double val_fraction = 0.2;

  void validate() const {
    if (n_sequences < 3) throw Error(ErrorCode::kConfig, "dataset needs at least 3 sequences");
    if (sequence_length < static_cast<std::size_t>(kWindow)) {
      throw Error(ErrorCode::kConfig, "sequence_length must be at least " + std::to_string(kWindow));
    }
    if (difficulty_modes.empty()) throw Error(ErrorCode::kConfig, "difficulty_modes is empty");
    for (double m : difficulty_modes) {
      if (!(m >= 0.0 && m <= 1.0)) throw Error(ErrorCode::kConfig, "difficulty modes must lie in [0, 1]");
    }
    if (!(mode_spread >= 0.0) || !(noise_sigma >= 0.0)) {
      throw Error(ErrorCode::kConfig, "mode_spread and noise_sigma must be >= 0");
    }
    if (!(val_fraction > 0.0 && val_fraction < 1.0)) throw Error(ErrorCode::kConfig, "val_fraction must lie in (0, 1)");
  }
};

/// Per-axis motion maxima at difficulty 1: rotation vector (rad), then translation (m).
inline const Vector6& motion_envelope() {
  static const Vector6 env = (Vector6() << 0.25, 0.35, 0.25, 0.45, 0.30, 0.60).finished();
  return env;
}

/// Statistics that map the envelope to [0, 1] with uniform weights.
inline DatasetStats nominal_stats() {
  DatasetStats s;
  const Vector6& e = motion_envelope();
  // MotionProfile order is translation first, then rotation.
  s.max = {e[3], e[4], e[5], e[0], e[1], e[2]};
  s.min = {0, 0, 0, 0, 0, 0};
  return s;
}

/// Pinhole camera observing a fronto-parallel plane; the source of ground-truth flow.
struct FlowCamera {
  double focal = 40.0;
  double cx = 32.0;
  double cy = 32.0;
  double depth = 4.0;
  double spacing = 16.0;
  double first = 8.0;

  Eigen::Vector2d pixel(int r, int c) const { return {first + spacing * c, first + spacing * r}; }

  /// Flow of grid point k from frame a to frame b, where `a_in_b` maps frame-a
  /// coordinates into frame b. Returns false when the point lands behind b.
  template <typename Scalar>
  bool point_flow(const RigidPose<Scalar>& a_in_b, int k, Eigen::Matrix<Scalar, 2, 1>* out) const {
    const Eigen::Vector2d p = pixel(k / kFlowGrid, k % kFlowGrid);
    const Vec3<Scalar> x(Scalar(depth * (p.x() - cx) / focal), Scalar(depth * (p.y() - cy) / focal), Scalar(depth));
    const Vec3<Scalar> xb = a_in_b.transform(x);
    if (geometry_detail::value_of(xb.z()) < 0.1) return false;
    (*out)(0) = focal * xb.x() / xb.z() + (cx - p.x());
    (*out)(1) = focal * xb.y() / xb.z() + (cy - p.y());
    return true;
  }

  /// Flow of the grid from frame a to frame b given their world poses.
  FlowField flow(const RigidPosed& pose_a, const RigidPosed& pose_b) const {
    const RigidPosed a_in_b = relative_pose(pose_b, pose_a);
    FlowField f(kFlowGrid, kFlowGrid);
    for (int k = 0; k < kFlowGrid * kFlowGrid; ++k) {
      Eigen::Vector2d v;
      const auto i = static_cast<std::size_t>(k);
      if (point_flow(a_in_b, k, &v)) {
        f.vectors[i] = v;
      } else {
        f.valid[i] = 0;
      }
    }
    return f;
  }
};

struct SyntheticSequence {
  std::string id;
  double target = 0.0;          // requested difficulty
  double nominal_score = 0.0;   // score against nominal_stats()
  Trajectory gt;
  std::vector<Vector6> motions;   // ground-truth step k: (rotation vector, translation) from pose k to k+1
  std::vector<Vector6> features;  // noisy observation of motions[k]
};

struct SyntheticDataset {
  DatasetSpec spec;
  FlowCamera camera;
  Eigen::Matrix<double, 6, 6> encoding;
  std::vector<SyntheticSequence> sequences;
  DifficultyReport manifest;  // computed by the difficulty pipeline over all sequences
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;

  int level_of(std::size_t seq) const { return manifest.scores[seq].level; }
};

/// Noise-free observation of a motion: tanh of a random mixing of the
/// envelope-normalized motion.
inline Vector6 encode_motion(const Eigen::Matrix<double, 6, 6>& encoding, const Vector6& motion) {
  const Vector6 z = motion.cwiseQuotient(motion_envelope());
  return (encoding * z).array().tanh().matrix();
}

namespace dataset_detail {

// Smooth random per-axis signal rescaled so max |value| over the sequence is 1.
inline std::vector<double> axis_signal(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 1.0);
  const double f1 = 0.15 + 0.5 * u(rng), f2 = 0.6 + 1.2 * u(rng);
  const double p1 = 2 * std::numbers::pi * u(rng), p2 = 2 * std::numbers::pi * u(rng);
  const double mix = 0.3 + 0.4 * u(rng);
  std::vector<double> s(n);
  double peak = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k);
    s[k] = std::sin(f1 * t + p1) + mix * std::sin(f2 * t + p2) + 0.3 * g(rng);
    peak = std::max(peak, std::abs(s[k]));
  }
  for (auto& v : s) v = peak > 0.0 ? v / peak : 0.0;
  return s;
}

inline std::string sequence_id(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "syn%04zu", i);
  return buf;
}

}  // namespace dataset_detail

/// Rotation-vector/translation step as a pose.
inline RigidPosed motion_pose(const Vector6& m) {
  return RigidPosed(so3_exp<double>(m.head<3>()), m.tail<3>());
}

/// Stratified validation split: within each level, ids in sorted order, every
/// k-th goes to validation with k = round(1 / val_fraction).
inline void split_train_val(SyntheticDataset& ds) {
  const auto stride = static_cast<std::size_t>(std::max(2.0, std::round(1.0 / ds.spec.val_fraction)));
  ds.train.clear();
  ds.val.clear();
  for (int level = 1; level <= 3; ++level) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < ds.sequences.size(); ++i) {
      if (ds.level_of(i) == level) members.push_back(i);
    }
    std::sort(members.begin(), members.end(),
              [&](std::size_t a, std::size_t b) { return ds.sequences[a].id < ds.sequences[b].id; });
    for (std::size_t k = 0; k < members.size(); ++k) {
      (k % stride == stride - 1 ? ds.val : ds.train).push_back(members[k]);
    }
  }
  std::sort(ds.train.begin(), ds.train.end());
  std::sort(ds.val.begin(), ds.val.end());
}

/// Deterministic under `seed`. Targets cycle through the modes with Gaussian
/// spread; the manifest comes from the difficulty pipeline, not the targets.
inline SyntheticDataset generate_dataset(std::uint64_t seed, const DatasetSpec& spec) {
  spec.validate();
  SyntheticDataset ds;
  ds.spec = spec;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> jitter(0.9, 1.0);

  for (int r = 0; r < 6; ++r) {
    for (int c = 0; c < 6; ++c) ds.encoding(r, c) = g(rng) * spec.encoding_gain / std::sqrt(6.0);
  }
  const DatasetStats nominal = nominal_stats();
  const std::size_t steps = spec.sequence_length - 1;

  for (std::size_t i = 0; i < spec.n_sequences; ++i) {
    SyntheticSequence seq;
    seq.id = dataset_detail::sequence_id(i);
    const double mode = spec.difficulty_modes[i % spec.difficulty_modes.size()];
    seq.target = mode == 0.0 ? 0.0 : std::clamp(mode + spec.mode_spread * g(rng), 0.0, 1.0);

    Vector6 amplitude;
    for (int a = 0; a < 6; ++a) amplitude[a] = motion_envelope()[a] * seq.target * jitter(rng);
    std::array<std::vector<double>, 6> signals;
    for (int a = 0; a < 6; ++a) signals[a] = dataset_detail::axis_signal(rng, steps);

    std::vector<RigidPosed> poses{RigidPosed::identity().with_timestamp(0.0)};
    seq.motions.resize(steps);
    for (std::size_t k = 0; k < steps; ++k) {
      for (int a = 0; a < 6; ++a) seq.motions[k][a] = amplitude[a] * signals[a][k];
      poses.push_back(compose(poses.back(), motion_pose(seq.motions[k]))
                          .with_timestamp(static_cast<double>(k + 1) * 0.1));
    }
    seq.gt = Trajectory(std::move(poses), seq.id);
    seq.nominal_score = difficulty_score(motion_profile(seq.gt), nominal);

    const double sigma = spec.noise_sigma * (0.2 + seq.nominal_score);
    seq.features.resize(steps);
    for (std::size_t k = 0; k < steps; ++k) {
      Vector6 noise;
      for (int a = 0; a < 6; ++a) noise[a] = sigma * g(rng);
      seq.features[k] = encode_motion(ds.encoding, seq.motions[k]) + noise;
    }
    ds.sequences.push_back(std::move(seq));
  }

  std::vector<Trajectory> trajs;
  trajs.reserve(ds.sequences.size());
  for (const auto& s : ds.sequences) trajs.push_back(s.gt);
  ds.manifest = score_dataset(trajs);
  split_train_val(ds);
  return ds;
}

/// Ground-truth flow fields for all (frame, offset) pairs inside a window.
inline FlowSet window_flows(const SyntheticDataset& ds, std::size_t seq, std::size_t start) {
  const auto& poses = ds.sequences[seq].gt.poses;
  FlowSet out;
  for (int f = 0; f < kWindow; ++f) {
    for (int o : {-2, -1, 1, 2}) {
      if (f + o < 0 || f + o >= kWindow) continue;
      out[{f, o}] = ds.camera.flow(poses[start + static_cast<std::size_t>(f)],
                                   poses[start + static_cast<std::size_t>(f + o)]);
    }
  }
  return out;
}

}  // namespace clvo::surrogate
