#pragma once

// Surrogate training loop driven by a curriculum scheduler.
//
// Step i:
//   w = scheduler.begin_step(i)
//   sample `batch` windows from training sequences whose level is active
//   loss, grad = model_loss(model, windows, w);  SGD step at the annealed rate
//   scheduler.end_step(i, loss)
//   every val_every steps (and after the last one): validation pass,
//   scheduler.on_validation, early-stopping check

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "clvo/curriculum/schedulers.hpp"
#include "clvo/errors.hpp"
#include "clvo/metrics.hpp"
#include "clvo/scheduler_factory.hpp"
#include "clvo/surrogate/dataset.hpp"
#include "clvo/surrogate/model.hpp"

namespace clvo::surrogate {

enum class LrSchedule { kConstant, kLinearDecay };

/// Learning rate of step i: constant, or annealed linearly towards zero over the budget.
inline double learning_rate_at(double base, LrSchedule schedule, std::size_t step, std::size_t budget) {
  if (schedule == LrSchedule::kConstant) return base;
  return base * (1.0 - static_cast<double>(step) / static_cast<double>(budget));
}

struct TrainConfig {
  std::uint64_t seed = 0;
  DatasetSpec dataset;
  SchedulerConfig scheduler;
  BaseScales scales;
  std::size_t budget = 2000;
  std::size_t val_every = 500;
  int early_stopping_patience = 0;  // validations without progress; 0 disables
  std::size_t batch = 2;
  int hidden = 16;
  double learning_rate = 0.002;
  double momentum = 0.9;
  LrSchedule lr_schedule = LrSchedule::kLinearDecay;
  double auc_max_error = 1.0;  // metres

  void validate() const {
    dataset.validate();
    scheduler.validate();
    if (budget == 0) throw Error(ErrorCode::kConfig, "budget must be positive");
    if (val_every == 0) throw Error(ErrorCode::kConfig, "val_every must be positive");
    if (early_stopping_patience < 0) throw Error(ErrorCode::kConfig, "early_stopping_patience must be >= 0");
    if (batch == 0) throw Error(ErrorCode::kConfig, "batch must be positive");
    if (hidden < 1) throw Error(ErrorCode::kConfig, "hidden must be positive");
    if (!(learning_rate > 0.0)) throw Error(ErrorCode::kConfig, "learning_rate must be positive");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw Error(ErrorCode::kConfig, "momentum must lie in [0, 1)");
    if (!(auc_max_error > 0.0)) throw Error(ErrorCode::kConfig, "auc_max_error must be positive");
  }
};

/// Independent deterministic streams derived from the run seed (splitmix64).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

enum SeedStream : std::uint64_t { kDatasetStream = 0, kModelStream = 1, kSamplingStream = 2, kSchedulerStream = 3 };

struct TrainingRecord {
  std::size_t step = 0;
  LossBreakdown loss;
  CurriculumWeights weights;
  LevelSet active_levels = LevelSet::all(3);
  std::optional<double> val_ate;
  std::optional<double> val_auc;
};

struct ValidationResult {
  double mean_ate = 0.0;
  double auc = 0.0;
  std::vector<double> sequence_ate;  // in dataset.val order
};

/// Scale-aligned ATE of every validation sequence, their mean, and the AUC of
/// the per-sequence errors.
inline ValidationResult validate_model(const SurrogateModel& model, const SyntheticDataset& ds, double auc_max_error) {
  ValidationResult out;
  for (std::size_t seq : ds.val) {
    out.sequence_ate.push_back(ate(predict_trajectory(model, ds, seq), ds.sequences[seq].gt, true));
  }
  double sum = 0.0;
  for (double e : out.sequence_ate) sum += e;
  out.mean_ate = sum / static_cast<double>(out.sequence_ate.size());
  out.auc = auc(out.sequence_ate, auc_max_error);
  return out;
}

/// Uniform draws of (sequence, window start) from an eligible sequence list.
class WindowSampler {
 public:
  explicit WindowSampler(std::uint64_t seed) : rng_(seed) {}

  std::vector<WindowRef> draw(const SyntheticDataset& ds, const std::vector<std::size_t>& eligible,
                              std::size_t batch) {
    if (eligible.empty()) throw Error(ErrorCode::kEmptyInput, "no eligible training sequences");
    std::vector<WindowRef> out;
    out.reserve(batch);
    for (std::size_t b = 0; b < batch; ++b) {
      std::uniform_int_distribution<std::size_t> pick_seq(0, eligible.size() - 1);
      const std::size_t seq = eligible[pick_seq(rng_)];
      const std::size_t n = ds.sequences[seq].gt.size();
      std::uniform_int_distribution<std::size_t> pick_start(0, n - kWindow);
      out.push_back({seq, pick_start(rng_)});
    }
    return out;
  }

 private:
  std::mt19937_64 rng_;
};

/// Training sequences whose level is in `active`, in dataset order.
inline std::vector<std::size_t> eligible_sequences(const SyntheticDataset& ds, const LevelSet& active) {
  std::vector<LevelEntry> manifest;
  for (std::size_t i : ds.train) manifest.push_back({ds.sequences[i].id, ds.level_of(i)});
  const auto ids = staged_sample_filter(manifest, active);
  std::vector<std::size_t> out;
  std::size_t j = 0;
  for (std::size_t i : ds.train) {
    if (j < ids.size() && ds.sequences[i].id == ids[j]) {
      out.push_back(i);
      ++j;
    }
  }
  return out;
}

struct TrainingResult {
  std::vector<TrainingRecord> records;
  SurrogateModel model;
  std::unique_ptr<CurriculumScheduler> scheduler;
  std::optional<ValidationResult> final_validation;
  bool stopped_early = false;
  std::optional<std::size_t> failed_step;  // set when a non-finite loss aborted training
  std::string failure;
};

inline TrainingResult run_training(const TrainConfig& cfg, const SyntheticDataset& ds) {
  cfg.validate();
  TrainingResult out;
  std::mt19937_64 model_rng(derive_seed(cfg.seed, kModelStream));
  out.model = SurrogateModel::random(cfg.hidden, model_rng);
  out.scheduler = make_scheduler(cfg.scheduler, cfg.budget, derive_seed(cfg.seed, kSchedulerStream));
  CurriculumScheduler& sched = *out.scheduler;
  WindowSampler sampler(derive_seed(cfg.seed, kSamplingStream));
  SgdMomentum opt(out.model.size(), cfg.learning_rate, cfg.momentum);

  std::vector<ValidationRecord> history;
  std::optional<LevelSet> eligible_for;
  std::vector<std::size_t> eligible;

  for (std::size_t step = 0; step < cfg.budget; ++step) {
    TrainingRecord rec;
    rec.step = step;
    rec.weights = sched.begin_step(step);
    rec.active_levels = sched.active_levels();
    if (!eligible_for || !(*eligible_for == rec.active_levels)) {
      eligible = eligible_sequences(ds, rec.active_levels);
      eligible_for = rec.active_levels;
    }
    const auto windows = sampler.draw(ds, eligible, cfg.batch);
    ModelLoss ml;
    try {
      ml = model_loss(out.model, ds, windows, rec.weights, cfg.scales);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNonFiniteLoss) throw;
      out.failed_step = step;
      out.failure = e.what();
      return out;
    }
    opt.set_learning_rate(learning_rate_at(cfg.learning_rate, cfg.lr_schedule, step, cfg.budget));
    opt.step(out.model, ml.grad);
    rec.loss = ml.breakdown;
    sched.end_step(step, ml.breakdown);

    const bool last = step + 1 == cfg.budget;
    if ((step + 1) % cfg.val_every == 0 || last) {
      const ValidationResult v = validate_model(out.model, ds, cfg.auc_max_error);
      rec.val_ate = v.mean_ate;
      rec.val_auc = v.auc;
      out.final_validation = v;
      sched.on_validation(step, v.mean_ate, v.auc);
      history.push_back({v.auc, v.mean_ate});
      out.records.push_back(rec);
      if (!last && cfg.early_stopping_patience > 0 && early_stopping_check(history, cfg.early_stopping_patience)) {
        out.stopped_early = true;
        return out;
      }
      continue;
    }
    out.records.push_back(rec);
  }
  return out;
}

inline TrainingResult run_training(const TrainConfig& cfg) {
  cfg.validate();
  const SyntheticDataset ds = generate_dataset(derive_seed(cfg.seed, kDatasetStream), cfg.dataset);
  return run_training(cfg, ds);
}

/// Final validation ATE, or nothing when training never validated.
inline std::optional<double> final_val_ate(const std::vector<TrainingRecord>& records) {
  for (auto it = records.rbegin(); it != records.rend(); ++it) {
    if (it->val_ate) return it->val_ate;
  }
  return std::nullopt;
}

/// First step whose validation ATE is at or below `target`.
inline std::optional<std::size_t> steps_to_reach(const std::vector<TrainingRecord>& records, double target) {
  for (const auto& r : records) {
    if (r.val_ate && *r.val_ate <= target) return r.step + 1;
  }
  return std::nullopt;
}

}  // namespace clvo::surrogate
