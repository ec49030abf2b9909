#pragma once

// JSON run configuration. Every key is optional; unknown keys, wrong types
// and out-of-range values are all collected and reported together.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "clvo/difficulty.hpp"
#include "clvo/errors.hpp"
#include "clvo/scheduler_factory.hpp"
#include "clvo/surrogate/trainer.hpp"

namespace clvo::io {

using Json = nlohmann::json;

struct DifficultyConfig {
  std::array<double, 6> weights = kUniformComponentWeights;
  int levels = 3;
  std::optional<std::vector<double>> thresholds;
  std::size_t histogram_bins = 20;
};

struct RunConfig {
  std::uint64_t seed = 0;
  std::string out = "runs";
  surrogate::TrainConfig train;
  DifficultyConfig difficulty;
};

namespace config_detail {

class Reader {
 public:
  std::vector<std::string> errors;

  /// Visits an object, rejecting keys outside `known`.
  bool object(const Json& j, const std::string& path, const std::vector<std::string>& known) {
    if (!j.is_object()) {
      errors.push_back(path + ": expected an object");
      return false;
    }
    for (const auto& [k, v] : j.items()) {
      if (std::find(known.begin(), known.end(), k) == known.end()) errors.push_back(path + "." + k + ": unknown key");
    }
    return true;
  }

  void number(const Json& j, const std::string& path, const char* key, double& out, double lo, double hi,
              bool lo_open = false, bool hi_open = false) {
    if (!j.contains(key)) return;
    const Json& v = j.at(key);
    const std::string p = path + "." + key;
    if (!v.is_number()) {
      errors.push_back(p + ": expected a number");
      return;
    }
    const double x = v.get<double>();
    const bool ok = (lo_open ? x > lo : x >= lo) && (hi_open ? x < hi : x <= hi);
    if (!ok) {
      errors.push_back(p + ": " + std::to_string(x) + " outside " + (lo_open ? "(" : "[") + std::to_string(lo) +
                       ", " + std::to_string(hi) + (hi_open ? ")" : "]"));
      return;
    }
    out = x;
  }

  template <typename Int>
  void integer(const Json& j, const std::string& path, const char* key, Int& out, long long lo, long long hi) {
    if (!j.contains(key)) return;
    const Json& v = j.at(key);
    const std::string p = path + "." + key;
    if (!v.is_number_integer()) {
      errors.push_back(p + ": expected an integer");
      return;
    }
    const long long x = v.get<long long>();
    if (x < lo || x > hi) {
      errors.push_back(p + ": " + std::to_string(x) + " outside [" + std::to_string(lo) + ", " + std::to_string(hi) +
                       "]");
      return;
    }
    out = static_cast<Int>(x);
  }

  void string(const Json& j, const std::string& path, const char* key, const std::function<void(const std::string&)>& set) {
    if (!j.contains(key)) return;
    const Json& v = j.at(key);
    if (!v.is_string()) {
      errors.push_back(path + "." + key + ": expected a string");
      return;
    }
    try {
      set(v.get<std::string>());
    } catch (const Error& e) {
      errors.push_back(path + "." + key + ": " + e.what());
    }
  }

  std::optional<std::vector<double>> numbers(const Json& j, const std::string& path, const char* key) {
    if (!j.contains(key)) return std::nullopt;
    const Json& v = j.at(key);
    const std::string p = path + "." + key;
    if (!v.is_array()) {
      errors.push_back(p + ": expected an array of numbers");
      return std::nullopt;
    }
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) {
        errors.push_back(p + ": expected an array of numbers");
        return std::nullopt;
      }
      out.push_back(x.get<double>());
    }
    return out;
  }
};

}  // namespace config_detail

/// Builds a RunConfig from JSON, throwing one Config error listing every problem.
inline RunConfig parse_run_config(const Json& j) {
  config_detail::Reader r;
  RunConfig c;
  if (!r.object(j, "config", {"seed", "out", "train", "dataset", "scheduler", "difficulty"})) {
    throw Error(ErrorCode::kConfig, r.errors.front());
  }
  r.integer(j, "config", "seed", c.seed, 0, std::numeric_limits<long long>::max());
  r.string(j, "config", "out", [&](const std::string& s) { c.out = s; });

  auto& t = c.train;
  if (j.contains("train") && r.object(j["train"], "train",
                                      {"budget", "val_every", "early_stopping_patience", "batch", "hidden",
                                       "learning_rate", "momentum", "lr_schedule", "auc_max_error", "scales"})) {
    const Json& v = j["train"];
    r.integer(v, "train", "budget", t.budget, 1, 100000000);
    r.integer(v, "train", "val_every", t.val_every, 1, 100000000);
    r.integer(v, "train", "early_stopping_patience", t.early_stopping_patience, 0, 1000000);
    r.integer(v, "train", "batch", t.batch, 1, 4096);
    r.integer(v, "train", "hidden", t.hidden, 1, 4096);
    r.number(v, "train", "learning_rate", t.learning_rate, 0.0, 1e6, true);
    r.number(v, "train", "momentum", t.momentum, 0.0, 1.0, false, true);
    r.number(v, "train", "auc_max_error", t.auc_max_error, 0.0, 1e9, true);
    r.string(v, "train", "lr_schedule", [&](const std::string& s) {
      if (s == "constant") t.lr_schedule = surrogate::LrSchedule::kConstant;
      else if (s == "linear_decay") t.lr_schedule = surrogate::LrSchedule::kLinearDecay;
      else throw Error(ErrorCode::kConfig, "expected constant or linear_decay");
    });
    if (v.contains("scales") && r.object(v["scales"], "train.scales", {"flow", "pose"})) {
      r.number(v["scales"], "train.scales", "flow", t.scales.flow, 0.0, 1e9);
      r.number(v["scales"], "train.scales", "pose", t.scales.pose, 0.0, 1e9);
    }
  }

  auto& d = t.dataset;
  if (j.contains("dataset") && r.object(j["dataset"], "dataset",
                                        {"n_sequences", "sequence_length", "difficulty_modes", "mode_spread",
                                         "noise_sigma", "encoding_gain", "val_fraction"})) {
    const Json& v = j["dataset"];
    r.integer(v, "dataset", "n_sequences", d.n_sequences, 3, 1000000);
    r.integer(v, "dataset", "sequence_length", d.sequence_length, surrogate::kWindow, 1000000);
    if (auto m = r.numbers(v, "dataset", "difficulty_modes")) {
      bool ok = !m->empty();
      for (double x : *m) ok = ok && x >= 0.0 && x <= 1.0;
      if (ok) d.difficulty_modes = *m;
      else r.errors.push_back("dataset.difficulty_modes: needs at least one value, all in [0, 1]");
    }
    r.number(v, "dataset", "mode_spread", d.mode_spread, 0.0, 1.0);
    r.number(v, "dataset", "noise_sigma", d.noise_sigma, 0.0, 1e3);
    r.number(v, "dataset", "encoding_gain", d.encoding_gain, 0.0, 1e3, true);
    r.number(v, "dataset", "val_fraction", d.val_fraction, 0.0, 1.0, true, true);
  }

  auto& s = t.scheduler;
  if (j.contains("scheduler") &&
      r.object(j["scheduler"], "scheduler", {"mode", "lambda", "w0", "wF", "promotion", "agent", "pose_input"})) {
    const Json& v = j["scheduler"];
    r.string(v, "scheduler", "mode", [&](const std::string& m) { s.mode = parse_scheduler_mode(m); });
    r.number(v, "scheduler", "lambda", s.lambda, 0.0, 1e9);
    r.number(v, "scheduler", "w0", s.bounds.initial, 0.0, 1e9);
    r.number(v, "scheduler", "wF", s.bounds.final, 0.0, 1e9);
    if (!(s.bounds.initial < s.bounds.final)) r.errors.push_back("scheduler: w0 must be below wF");
    r.string(v, "scheduler", "pose_input", [&](const std::string& m) {
      if (m == "subtotal") s.pose_input = ddpg::PoseInput::kSubtotal;
      else if (m == "translation") s.pose_input = ddpg::PoseInput::kTranslation;
      else throw Error(ErrorCode::kConfig, "expected subtotal or translation");
    });
    if (v.contains("promotion") &&
        r.object(v["promotion"], "scheduler.promotion", {"patience", "min_rel_improvement", "stage_max_steps"})) {
      const Json& p = v["promotion"];
      r.integer(p, "scheduler.promotion", "patience", s.promotion.patience, 1, 1000000);
      r.number(p, "scheduler.promotion", "min_rel_improvement", s.promotion.min_rel_improvement, 0.0, 1.0);
      if (auto steps = r.numbers(p, "scheduler.promotion", "stage_max_steps")) {
        s.promotion.stage_max_steps.clear();
        for (double x : *steps) {
          if (x < 0.0 || x != std::floor(x)) {
            r.errors.push_back("scheduler.promotion.stage_max_steps: entries must be non-negative integers");
            break;
          }
          s.promotion.stage_max_steps.push_back(static_cast<std::size_t>(x));
        }
      }
    }
    if (v.contains("agent") && r.object(v["agent"], "scheduler.agent",
                                        {"gamma", "tau", "actor_lr", "critic_lr", "noise_scale", "update_every",
                                         "iterations", "batch", "hidden", "buffer_capacity"})) {
      const Json& a = v["agent"];
      const std::string ap = "scheduler.agent";
      r.number(a, ap, "gamma", s.agent.gamma, 0.0, 1.0, false, true);
      r.number(a, ap, "tau", s.agent.tau, 0.0, 1.0, true);
      r.number(a, ap, "actor_lr", s.agent.actor_lr, 0.0, 1e3, true);
      r.number(a, ap, "critic_lr", s.agent.critic_lr, 0.0, 1e3, true);
      r.number(a, ap, "noise_scale", s.agent.noise_scale, 0.0, 1e3);
      r.integer(a, ap, "update_every", s.agent.update_every, 1, 100000000);
      r.integer(a, ap, "iterations", s.agent.iterations, 0, 1000000);
      r.integer(a, ap, "batch", s.agent.batch, 1, 1000000);
      r.integer(a, ap, "hidden", s.agent.hidden, 1, 64);
      r.integer(a, ap, "buffer_capacity", s.agent.buffer_capacity, 1, 100000000);
      if (s.agent.buffer_capacity < s.agent.batch) r.errors.push_back(ap + ": buffer_capacity below batch");
    }
  }

  auto& dc = c.difficulty;
  if (j.contains("difficulty") &&
      r.object(j["difficulty"], "difficulty", {"weights", "levels", "thresholds", "histogram_bins"})) {
    const Json& v = j["difficulty"];
    if (auto w = r.numbers(v, "difficulty", "weights")) {
      bool ok = w->size() == 6;
      double sum = 0.0;
      for (double x : *w) ok = ok && x >= 0.0, sum += x;
      if (ok && sum > 0.0) std::copy(w->begin(), w->end(), dc.weights.begin());
      else r.errors.push_back("difficulty.weights: expected 6 non-negative numbers with a positive sum");
    }
    r.integer(v, "difficulty", "levels", dc.levels, 1, 100);
    r.integer(v, "difficulty", "histogram_bins", dc.histogram_bins, 1, 10000);
    if (v.contains("thresholds") && !v["thresholds"].is_null()) {
      if (auto th = r.numbers(v, "difficulty", "thresholds")) {
        bool ok = true;
        for (std::size_t i = 0; i < th->size(); ++i) {
          ok = ok && (*th)[i] >= 0.0 && (*th)[i] <= 1.0 && (i == 0 || (*th)[i] > (*th)[i - 1]);
        }
        if (ok) dc.thresholds = *th;
        else r.errors.push_back("difficulty.thresholds: expected increasing values in [0, 1]");
      }
    }
  }

  t.seed = c.seed;
  if (r.errors.empty()) {
    try {
      t.validate();
    } catch (const Error& e) {
      r.errors.push_back(e.what());
    }
  }
  if (!r.errors.empty()) {
    std::string msg = std::to_string(r.errors.size()) + " configuration error(s):";
    for (const auto& e : r.errors) msg += "\n  " + e;
    throw Error(ErrorCode::kConfig, msg);
  }
  return c;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfig, "cannot read config '" + path + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::kConfig, path + ": " + e.what());
  }
  return parse_run_config(j);
}

/// Fully resolved configuration; keys sorted, so the text is stable.
inline Json to_json(const RunConfig& c) {
  const auto& t = c.train;
  const auto& s = t.scheduler;
  Json j;
  j["seed"] = c.seed;
  j["out"] = c.out;
  j["train"] = {{"budget", t.budget},
                {"val_every", t.val_every},
                {"early_stopping_patience", t.early_stopping_patience},
                {"batch", t.batch},
                {"hidden", t.hidden},
                {"learning_rate", t.learning_rate},
                {"momentum", t.momentum},
                {"lr_schedule", t.lr_schedule == surrogate::LrSchedule::kConstant ? "constant" : "linear_decay"},
                {"auc_max_error", t.auc_max_error},
                {"scales", {{"flow", t.scales.flow}, {"pose", t.scales.pose}}}};
  j["dataset"] = {{"n_sequences", t.dataset.n_sequences},
                  {"sequence_length", t.dataset.sequence_length},
                  {"difficulty_modes", t.dataset.difficulty_modes},
                  {"mode_spread", t.dataset.mode_spread},
                  {"noise_sigma", t.dataset.noise_sigma},
                  {"encoding_gain", t.dataset.encoding_gain},
                  {"val_fraction", t.dataset.val_fraction}};
  j["scheduler"] = {
      {"mode", std::string(to_string(s.mode))},
      {"lambda", s.lambda},
      {"w0", s.bounds.initial},
      {"wF", s.bounds.final},
      {"pose_input", s.pose_input == ddpg::PoseInput::kSubtotal ? "subtotal" : "translation"},
      {"promotion",
       {{"patience", s.promotion.patience},
        {"min_rel_improvement", s.promotion.min_rel_improvement},
        {"stage_max_steps", s.promotion.stage_max_steps}}},
      {"agent",
       {{"gamma", s.agent.gamma},
        {"tau", s.agent.tau},
        {"actor_lr", s.agent.actor_lr},
        {"critic_lr", s.agent.critic_lr},
        {"noise_scale", s.agent.noise_scale},
        {"update_every", s.agent.update_every},
        {"iterations", s.agent.iterations},
        {"batch", s.agent.batch},
        {"hidden", s.agent.hidden},
        {"buffer_capacity", s.agent.buffer_capacity}}}};
  j["difficulty"] = {{"weights", c.difficulty.weights},
                     {"levels", c.difficulty.levels},
                     {"thresholds", c.difficulty.thresholds ? Json(*c.difficulty.thresholds) : Json(nullptr)},
                     {"histogram_bins", c.difficulty.histogram_bins}};
  return j;
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// "<hash of the resolved config without 'out'>-s<seed>".
inline std::string run_directory_name(const RunConfig& c) {
  Json j = to_json(c);
  j.erase("out");
  char buf[48];
  std::snprintf(buf, sizeof buf, "%016llx-s%llu", static_cast<unsigned long long>(fnv1a(j.dump())),
                static_cast<unsigned long long>(c.seed));
  return buf;
}

}  // namespace clvo::io
