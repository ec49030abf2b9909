#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <random>
#include <vector>

#include "clvo/errors.hpp"

namespace clvo::ddpg {

/// s = [progress, component loss].
struct AgentState {
  double progress = 0.0;
  double loss = 0.0;
  bool operator==(const AgentState&) const = default;
};

struct Transition {
  AgentState state;
  double action = 0.0;
  double reward = 0.0;
  AgentState next_state;
  bool operator==(const Transition&) const = default;
};

/// Fixed-capacity FIFO ring: once full, each push evicts the oldest record.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 10000) : capacity_(capacity) {
    if (capacity_ == 0) throw Error(ErrorCode::kConfig, "replay buffer capacity must be positive");
    storage_.reserve(std::min<std::size_t>(capacity_, 1 << 16));
  }

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return storage_.size(); }
  bool empty() const { return storage_.empty(); }
  std::size_t total_inserted() const { return inserted_; }

  void push(const Transition& t) {
    if (storage_.size() < capacity_) {
      storage_.push_back(t);
    } else {
      storage_[head_] = t;
      head_ = (head_ + 1) % capacity_;
    }
    ++inserted_;
  }

  /// i-th record counting from the oldest.
  const Transition& at(std::size_t i) const { return storage_[(head_ + i) % storage_.size()]; }

  /// Uniform sample without replacement (partial Fisher-Yates over slots).
  /// Throws Underfull when fewer than `batch` records are stored.
  template <typename Rng>
  std::vector<Transition> sample(std::size_t batch, Rng& rng) const {
    const auto idx = sample_indices(batch, rng);
    std::vector<Transition> out;
    out.reserve(batch);
    for (std::size_t i : idx) out.push_back(at(i));
    return out;
  }

  /// Oldest-first positions of a sample, the index form of sample().
  template <typename Rng>
  std::vector<std::size_t> sample_indices(std::size_t batch, Rng& rng) const {
    if (storage_.size() < batch) {
      throw Error(ErrorCode::kUnderfull,
                  std::to_string(storage_.size()) + " records, batch of " + std::to_string(batch));
    }
    std::vector<std::size_t> slots(storage_.size());
    std::iota(slots.begin(), slots.end(), std::size_t{0});
    for (std::size_t i = 0; i < batch; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, slots.size() - 1);
      std::swap(slots[i], slots[pick(rng)]);
    }
    slots.resize(batch);
    return slots;
  }

 private:
  std::size_t capacity_;
  std::vector<Transition> storage_;
  std::size_t head_ = 0;  // oldest slot once full
  std::size_t inserted_ = 0;
};

}  // namespace clvo::ddpg
