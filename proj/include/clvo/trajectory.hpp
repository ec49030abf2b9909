#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "clvo/errors.hpp"
#include "clvo/geometry.hpp"

namespace clvo {

/// Ordered sequence of poses with an opaque identifier.
///
/// Timestamps, when present, must strictly increase; the constructor checks.
struct Trajectory {
  std::vector<RigidPosed> poses;
  std::string sequence_id;

  Trajectory() = default;
  explicit Trajectory(std::vector<RigidPosed> p, std::string id = {})
      : poses(std::move(p)), sequence_id(std::move(id)) {
    validate_timestamps();
  }

  std::size_t size() const { return poses.size(); }
  bool empty() const { return poses.empty(); }
  const RigidPosed& operator[](std::size_t i) const { return poses[i]; }

  void validate_timestamps() const {
    for (std::size_t i = 1; i < poses.size(); ++i) {
      const auto prev = poses[i - 1].timestamp();
      const auto cur = poses[i].timestamp();
      if (prev && cur && !(*cur > *prev)) {
        throw Error(ErrorCode::kNonMonotonicTimestamps,
                    "pose " + std::to_string(i) + " of '" + sequence_id + "'");
      }
    }
  }
};

}  // namespace clvo
