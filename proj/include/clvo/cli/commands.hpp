#pragma once

// Command implementations behind the clvo tool. Each command reads its inputs,
// writes its files and prints a short summary to `log`; failures surface as
// clvo::Error.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "clvo/ddpg/scheduler.hpp"
#include "clvo/difficulty.hpp"
#include "clvo/errors.hpp"
#include "clvo/io/checkpoint.hpp"
#include "clvo/io/config.hpp"
#include "clvo/io/csv.hpp"
#include "clvo/io/plots.hpp"
#include "clvo/io/trajectory_io.hpp"
#include "clvo/metrics.hpp"
#include "clvo/surrogate/trainer.hpp"

namespace clvo::cli {

namespace fs = std::filesystem;

/// 0 success, 1 usage or configuration, 2 data, 3 numerical failure.
inline int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfig:
    case ErrorCode::kInvalidArgument:
      return 1;
    case ErrorCode::kAngleNearPi:
    case ErrorCode::kDegenerateGeometry:
    case ErrorCode::kNegativeLoss:
    case ErrorCode::kNonFiniteGradient:
    case ErrorCode::kNonFiniteLoss:
      return 3;
    default:
      return 2;
  }
}

struct GlobalOptions {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  io::TrajectoryFormat format = io::TrajectoryFormat::kTum;
};

/// Config file (or defaults) with the --seed and --out overrides applied.
inline io::RunConfig resolve_config(const GlobalOptions& g) {
  io::RunConfig c = g.config ? io::load_run_config(*g.config) : io::parse_run_config(io::Json::object());
  if (g.seed) {
    c.seed = *g.seed;
    c.train.seed = *g.seed;
  }
  if (g.out) c.out = *g.out;
  return c;
}

inline void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create directory '" + dir.string() + "': " + ec.message());
}

inline void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  out << text;
}

// ---------------------------------------------------------------- synth

/// Ground-truth trajectories of the synthetic training set, one TUM file per sequence.
inline std::vector<fs::path> cmd_synth(const GlobalOptions& g, std::ostream& log) {
  const io::RunConfig c = resolve_config(g);
  const auto ds = surrogate::generate_dataset(surrogate::derive_seed(c.seed, surrogate::kDatasetStream), c.train.dataset);
  const fs::path dir = fs::path(c.out) / "synthetic";
  ensure_directory(dir);
  std::vector<fs::path> written;
  for (const auto& s : ds.sequences) {
    const fs::path p = dir / (s.id + ".txt");
    io::write_trajectory_file(p.string(), s.gt, g.format);
    written.push_back(p);
  }
  log << "wrote " << written.size() << " trajectories to " << dir.string() << '\n';
  return written;
}

// ----------------------------------------------------------- difficulty

struct DifficultyOptions {
  std::string input;
  std::optional<std::vector<double>> thresholds;
  std::optional<int> levels;
};

struct DifficultyOutputs {
  io::CsvTable manifest;
  io::CsvTable histogram;
  fs::path manifest_path;
  fs::path histogram_path;
};

/// Parses every regular file of `dir` in name order. Files are parsed
/// concurrently; results and error messages keep the sorted order.
inline std::vector<Trajectory> load_trajectory_dir(const std::string& dir, io::TrajectoryFormat format) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw Error(ErrorCode::kIo, "'" + dir + "' is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());

  std::vector<std::future<Trajectory>> jobs;
  jobs.reserve(files.size());
  for (const auto& p : files) {
    jobs.push_back(std::async(std::launch::async, [p, format] { return io::parse_trajectory_file(p.string(), format); }));
  }
  std::vector<Trajectory> out;
  std::vector<std::string> failures;
  for (auto& j : jobs) {
    try {
      out.push_back(j.get());
    } catch (const Error& e) {
      failures.push_back(std::string(e.what()));
    }
  }
  if (!failures.empty()) {
    std::string msg = std::to_string(failures.size()) + " of " + std::to_string(files.size()) +
                      " trajectory files failed to parse:";
    for (const auto& f : failures) msg += "\n  " + f;
    throw Error(ErrorCode::kMalformedLine, msg);
  }
  return out;
}

inline DifficultyOutputs cmd_difficulty(const GlobalOptions& g, const DifficultyOptions& o, std::ostream& log) {
  io::RunConfig c = resolve_config(g);
  if (o.thresholds) c.difficulty.thresholds = o.thresholds;
  if (o.levels) c.difficulty.levels = *o.levels;
  const auto trajectories = load_trajectory_dir(o.input, g.format);
  if (trajectories.size() < 3) {
    throw Error(ErrorCode::kTooFewSequences,
                "difficulty needs at least 3 trajectories, found " + std::to_string(trajectories.size()));
  }
  const DifficultyReport report =
      score_dataset(trajectories, c.difficulty.weights, c.difficulty.levels, c.difficulty.thresholds);

  DifficultyOutputs out;
  out.manifest = io::manifest_table(report);
  out.histogram = io::histogram_table(score_histogram(report.scores, c.difficulty.histogram_bins));
  const fs::path dir(c.out);
  ensure_directory(dir);
  out.manifest_path = dir / "manifest.csv";
  out.histogram_path = dir / "histogram.csv";
  io::write_csv_file(out.manifest_path.string(), out.manifest);
  io::write_csv_file(out.histogram_path.string(), out.histogram);

  log << "scored " << trajectories.size() << " sequences; thresholds";
  for (double t : report.thresholds) log << ' ' << io::format_double(t);
  log << '\n';
  std::vector<std::size_t> sizes(report.thresholds.size() + 1, 0);
  for (const auto& s : report.scores) ++sizes[static_cast<std::size_t>(s.level - 1)];
  for (std::size_t i = 0; i < sizes.size(); ++i) log << "level " << i + 1 << ": " << sizes[i] << '\n';
  return out;
}

// ---------------------------------------------------------------- train

struct TrainOptions {
  bool dump_trajectories = false;
};

struct TrainOutputs {
  fs::path run_dir;
  surrogate::TrainingResult result;
};

inline TrainOutputs cmd_train(const GlobalOptions& g, const TrainOptions& o, std::ostream& log) {
  const io::RunConfig c = resolve_config(g);
  c.train.validate();
  TrainOutputs out;
  out.run_dir = fs::path(c.out) / io::run_directory_name(c);
  ensure_directory(out.run_dir);
  write_text_file(out.run_dir / "config.json", io::to_json(c).dump(2) + "\n");

  const auto ds = surrogate::generate_dataset(surrogate::derive_seed(c.seed, surrogate::kDatasetStream), c.train.dataset);
  out.result = surrogate::run_training(c.train, ds);
  const auto& r = out.result;

  io::write_csv_file((out.run_dir / "metrics.csv").string(), io::metrics_table(r.records));
  io::write_csv_file((out.run_dir / "manifest.csv").string(), io::manifest_table(ds.manifest));

  io::TensorMap tensors;
  io::add_model(tensors, "model.", r.model);
  if (const auto* d = dynamic_cast<const ddpg::DdpgScheduler*>(r.scheduler.get())) io::add_agents(tensors, *d);
  io::write_checkpoint_file((out.run_dir / "checkpoint.txt").string(), tensors);

  if (r.final_validation) {
    io::CsvTable val{{"sequence_id", "level", "ate"}, {}};
    for (std::size_t i = 0; i < ds.val.size(); ++i) {
      const std::size_t seq = ds.val[i];
      val.rows.push_back({ds.sequences[seq].id, std::to_string(ds.level_of(seq)),
                          io::format_double(r.final_validation->sequence_ate[i])});
    }
    io::write_csv_file((out.run_dir / "validation.csv").string(), val);
  }
  if (o.dump_trajectories) {
    const fs::path tdir = out.run_dir / "trajectories";
    ensure_directory(tdir / "est");
    ensure_directory(tdir / "gt");
    for (std::size_t seq : ds.val) {
      const auto& s = ds.sequences[seq];
      io::write_trajectory_file((tdir / "gt" / (s.id + ".txt")).string(), s.gt, g.format);
      io::write_trajectory_file((tdir / "est" / (s.id + ".txt")).string(), surrogate::predict_trajectory(r.model, ds, seq),
                                g.format);
    }
  }

  log << "run " << out.run_dir.string() << ": " << r.records.size() << " steps";
  if (const auto ate = surrogate::final_val_ate(r.records)) log << ", final val ATE " << io::format_double(*ate) << " m";
  if (r.stopped_early) log << ", stopped early";
  log << '\n';
  if (r.failed_step) {
    throw Error(ErrorCode::kNonFiniteLoss,
                "training aborted at step " + std::to_string(*r.failed_step) + ": " + r.failure);
  }
  return out;
}

// ------------------------------------------------------------- evaluate

struct EvaluateOptions {
  std::vector<std::string> estimates;  // one file, or repeated runs of one sequence
  std::string ground_truth;
  bool align = false;
  std::optional<std::string> errors_csv;  // defaults to <out>/errors.csv
};

struct EvaluateResult {
  std::string sequence_id;
  std::size_t runs = 0;
  std::optional<double> ate_aligned;  // median over runs
  double ate_unaligned = 0.0;         // median over runs
  double ate = 0.0;                   // the one selected by --align
};

inline double median(std::vector<double> v) {
  if (v.empty()) throw Error(ErrorCode::kEmptyInput, "median of nothing");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline const std::vector<std::string>& error_list_columns() {
  static const std::vector<std::string> c = {"sequence_id", "runs", "aligned", "ate", "ate_aligned", "ate_unaligned"};
  return c;
}

/// Appends a row to the error list, writing the header when the file is new.
inline void append_error_row(const fs::path& path, const EvaluateResult& r, bool align) {
  const bool fresh = !fs::exists(path) || fs::file_size(path) == 0;
  if (!fresh) io::read_csv_file(path.string()).require(error_list_columns());
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw Error(ErrorCode::kIo, "cannot append to '" + path.string() + "'");
  io::CsvTable row{fresh ? error_list_columns() : std::vector<std::string>{}, {}};
  row.rows.push_back({r.sequence_id, std::to_string(r.runs), align ? "1" : "0", io::format_double(r.ate),
                      r.ate_aligned ? io::format_double(*r.ate_aligned) : "", io::format_double(r.ate_unaligned)});
  std::ostringstream text;
  io::write_csv(text, row);
  std::string s = text.str();
  if (!fresh) s.erase(0, s.find('\n') + 1);
  out << s;
}

inline EvaluateResult cmd_evaluate(const GlobalOptions& g, const EvaluateOptions& o, std::ostream& log) {
  if (o.estimates.empty()) throw Error(ErrorCode::kConfig, "evaluate needs at least one estimate file");
  const Trajectory gt = io::parse_trajectory_file(o.ground_truth, g.format);
  std::vector<double> aligned, unaligned;
  for (const auto& path : o.estimates) {
    const Trajectory est = io::parse_trajectory_file(path, g.format);
    if (est.size() != gt.size()) {
      throw Error(ErrorCode::kLengthMismatch, "estimate '" + path + "' has " + std::to_string(est.size()) +
                                                  " poses, ground truth '" + o.ground_truth + "' has " +
                                                  std::to_string(gt.size()));
    }
    unaligned.push_back(ate(est, gt, false));
    if (o.align) {
      aligned.push_back(ate(est, gt, true));
    } else {
      try {
        aligned.push_back(ate(est, gt, true));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kDegenerateGeometry && e.code() != ErrorCode::kTooShort) throw;
      }
    }
  }
  EvaluateResult r;
  r.sequence_id = gt.sequence_id;
  r.runs = o.estimates.size();
  r.ate_unaligned = median(unaligned);
  if (aligned.size() == o.estimates.size()) r.ate_aligned = median(aligned);
  r.ate = o.align ? *r.ate_aligned : r.ate_unaligned;

  const fs::path errors = o.errors_csv ? fs::path(*o.errors_csv) : fs::path(resolve_config(g).out) / "errors.csv";
  if (errors.has_parent_path()) ensure_directory(errors.parent_path());
  append_error_row(errors, r, o.align);

  log << "sequence " << r.sequence_id << " (" << r.runs << (r.runs == 1 ? " run" : " runs, median") << ")\n";
  log << "ate_aligned " << (r.ate_aligned ? io::format_double(*r.ate_aligned) : std::string("n/a")) << " m\n";
  log << "ate_unaligned " << io::format_double(r.ate_unaligned) << " m\n";
  return r;
}

// --------------------------------------------------------------- report

struct ReportOptions {
  std::string errors_csv;
  double auc_max_error = 1.0;
};

struct ReportResult {
  std::size_t sequences = 0;
  double mean_ate = 0.0;
  double auc = 0.0;
};

inline ReportResult cmd_report(const GlobalOptions& g, const ReportOptions& o, std::ostream& log) {
  const io::CsvTable t = io::read_csv_file(o.errors_csv);
  t.require({"ate"});
  std::vector<double> errs;
  for (const auto& v : t.numbers("ate")) {
    if (!v) throw Error(ErrorCode::kMalformedLine, o.errors_csv + ": empty 'ate' cell");
    errs.push_back(*v);
  }
  if (errs.empty()) throw Error(ErrorCode::kEmptyInput, o.errors_csv + " lists no sequences");
  ReportResult r;
  r.sequences = errs.size();
  for (double e : errs) r.mean_ate += e;
  r.mean_ate /= static_cast<double>(errs.size());
  r.auc = auc(errs, o.auc_max_error);

  const fs::path dir(resolve_config(g).out);
  ensure_directory(dir);
  io::CsvTable out{{"sequences", "mean_ate", "auc", "auc_max_error"},
                   {{std::to_string(r.sequences), io::format_double(r.mean_ate), io::format_double(r.auc),
                     io::format_double(o.auc_max_error)}}};
  io::write_csv_file((dir / "report.csv").string(), out);
  log << "sequences " << r.sequences << "\nmean_ate " << io::format_double(r.mean_ate) << " m\nauc "
      << io::format_double(r.auc) << '\n';
  return r;
}

// ----------------------------------------------------------------- plot

struct PlotOptions {
  std::string input;
  io::PlotKind kind = io::PlotKind::kTrainingCurves;
  std::optional<std::string> output;  // defaults to <out>/<kind>.svg
  std::optional<std::vector<double>> thresholds;
  double auc_max_error = 1.0;
};

inline std::string plot_kind_name(io::PlotKind k) {
  switch (k) {
    case io::PlotKind::kTrainingCurves: return "training_curves";
    case io::PlotKind::kWeightTrace: return "weight_trace";
    case io::PlotKind::kDifficultyHist: return "difficulty_hist";
    case io::PlotKind::kAucCurve: return "auc_curve";
  }
  return "plot";
}

inline fs::path cmd_plot(const GlobalOptions& g, const PlotOptions& o, std::ostream& log) {
  const io::CsvTable t = io::read_csv_file(o.input);
  const fs::path path = o.output ? fs::path(*o.output) : fs::path(resolve_config(g).out) / (plot_kind_name(o.kind) + ".svg");
  const std::string svg = io::render_plot(t, o.kind, o.thresholds, o.auc_max_error);
  if (path.has_parent_path()) ensure_directory(path.parent_path());
  write_text_file(path, svg);
  log << "wrote " << path.string() << '\n';
  return path;
}

// -------------------------------------------------------- agent-inspect

struct AgentInspectOptions {
  std::string run_dir;
};

struct AgentInspectOutputs {
  io::CsvTable weights;  // step, w_f, w_p, w_r, a_flow, a_pose, a_rotation
  io::CsvTable tensors;  // per-tensor summary of every agent network
};

/// Weight traces of an adaptive run with the actions that produced them, and
/// a summary of the stored agent networks.
inline AgentInspectOutputs cmd_agent_inspect(const GlobalOptions& g, const AgentInspectOptions& o, std::ostream& log) {
  const fs::path run(o.run_dir);
  const io::RunConfig c = io::load_run_config((run / "config.json").string());
  if (c.train.scheduler.mode != SchedulerMode::kDdpg) {
    throw Error(ErrorCode::kConfig, "run '" + o.run_dir + "' used scheduler mode '" +
                                        std::string(to_string(c.train.scheduler.mode)) + "', not ddpg");
  }
  const io::CsvTable metrics = io::read_csv_file((run / "metrics.csv").string());
  metrics.require({"step", "w_f", "w_p", "w_r"});
  const io::TensorMap tensors = io::read_checkpoint_file((run / "checkpoint.txt").string());
  const WeightBounds& b = c.train.scheduler.bounds;

  AgentInspectOutputs out;
  out.weights.header = {"step", "w_f", "w_p", "w_r", "a_flow", "a_pose", "a_rotation"};
  const auto step = metrics.numbers("step");
  const std::array<std::vector<std::optional<double>>, 3> w = {metrics.numbers("w_f"), metrics.numbers("w_p"),
                                                               metrics.numbers("w_r")};
  for (std::size_t i = 0; i < step.size(); ++i) {
    std::vector<std::string> row{metrics.rows[i][*metrics.column("step")]};
    for (int k = 0; k < 3; ++k) row.push_back(metrics.rows[i][*metrics.column(k == 0 ? "w_f" : k == 1 ? "w_p" : "w_r")]);
    for (int k = 0; k < 3; ++k) {
      // Inverts w = w0 + (wF - w0) a.
      row.push_back(w[k][i] ? io::format_double((*w[k][i] - b.initial) / (b.final - b.initial)) : "");
    }
    out.weights.rows.push_back(std::move(row));
  }

  out.tensors.header = {"agent", "network", "tensor", "rows", "cols", "mean", "max_abs", "frobenius"};
  std::size_t agent_tensors = 0;
  for (const auto& [name, m] : tensors) {
    if (name.rfind("agent.", 0) != 0) continue;
    ++agent_tensors;
    const auto a = name.find('.', 6);
    const auto n = name.rfind('.');
    out.tensors.rows.push_back({name.substr(6, a - 6), name.substr(a + 1, n - a - 1), name.substr(n + 1),
                                std::to_string(m.rows()), std::to_string(m.cols()),
                                io::format_double(m.size() ? m.mean() : 0.0),
                                io::format_double(m.size() ? m.cwiseAbs().maxCoeff() : 0.0),
                                io::format_double(m.norm())});
  }
  if (agent_tensors == 0) throw Error(ErrorCode::kMissingColumns, "checkpoint of '" + o.run_dir + "' holds no agents");

  const fs::path dir = g.out ? fs::path(*g.out) : run;
  ensure_directory(dir);
  io::write_csv_file((dir / "agent_weights.csv").string(), out.weights);
  io::write_csv_file((dir / "agent_tensors.csv").string(), out.tensors);
  log << "wrote " << out.weights.rows.size() << " weight rows and " << agent_tensors << " tensor summaries to "
      << dir.string() << '\n';
  return out;
}

}  // namespace clvo::cli
