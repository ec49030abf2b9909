// Scores the synthetic dataset, then trains the surrogate briefly under each
// scheduler and prints the validation ATE and the final curriculum weights.

#include <cstdio>
#include <cstdlib>

#include "clvo/surrogate/trainer.hpp"

int main(int argc, char** argv) {
  using namespace clvo;
  using namespace clvo::surrogate;

  const std::size_t budget = argc > 1 ? static_cast<std::size_t>(std::atoi(argv[1])) : 300;
  TrainConfig cfg;
  cfg.seed = 1;
  cfg.budget = budget;
  cfg.val_every = budget / 3;
  cfg.scheduler.promotion.stage_max_steps = {budget / 4, budget / 4};

  const SyntheticDataset ds = generate_dataset(derive_seed(cfg.seed, kDatasetStream), cfg.dataset);
  std::printf("%zu sequences, thresholds %.3f / %.3f\n", ds.sequences.size(), ds.manifest.thresholds[0],
              ds.manifest.thresholds[1]);
  for (int level = 1; level <= 3; ++level) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < ds.sequences.size(); ++i) n += ds.level_of(i) == level;
    std::printf("  level %d: %zu sequences\n", level, n);
  }

  std::printf("\n%-11s %12s %10s   %s\n", "mode", "val ATE [m]", "val AUC", "final weights (w_f, w_p, w_r)");
  for (auto mode : {SchedulerMode::kBaseline, SchedulerMode::kStaged, SchedulerMode::kSelfPaced, SchedulerMode::kDdpg}) {
    cfg.scheduler.mode = mode;
    const TrainingResult r = run_training(cfg, ds);
    if (r.failed_step) {
      std::printf("%-11s failed at step %zu: %s\n", std::string(to_string(mode)).c_str(), *r.failed_step,
                  r.failure.c_str());
      return 3;
    }
    const auto& w = r.records.back().weights;
    std::printf("%-11s %12.4f %10.4f   (%.3f, %.3f, %.3f)\n", std::string(to_string(mode)).c_str(),
                r.final_validation->mean_ate, r.final_validation->auc, w.flow, w.pose, w.rotation);
  }
  return 0;
}
