#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "clvo/cli/commands.hpp"

namespace {

using namespace clvo;

std::vector<double> parse_thresholds(const std::string& text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    double v = 0.0;
    if (!io::io_detail::parse_double(std::string_view(text).substr(pos, comma - pos), &v)) {
      throw Error(ErrorCode::kConfig, "--thresholds expects comma-separated numbers, got '" + text + "'");
    }
    out.push_back(v);
    pos = comma + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Curriculum-learning VO toolkit: difficulty scoring, surrogate training, evaluation and plots."};
  app.require_subcommand(1);
  app.fallthrough();

  cli::GlobalOptions g;
  std::string format = "tum";
  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  auto* config_opt = app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "seed override");
  auto* out_opt = app.add_option("--out", out_dir, "output directory override");
  app.add_option("--format", format, "trajectory file format")->check(CLI::IsMember({"tum", "tartanair"}));

  auto* synth = app.add_subcommand("synth", "write the synthetic training set's ground-truth trajectories");

  cli::DifficultyOptions dopt;
  std::string thresholds_text;
  int levels = 3;
  auto* difficulty = app.add_subcommand("difficulty", "score a directory of trajectories and partition into levels");
  difficulty->add_option("--input", dopt.input, "directory of trajectory files")->required();
  auto* dthr = difficulty->add_option("--thresholds", thresholds_text, "fixed cut points, e.g. 0.44,0.64");
  auto* dlev = difficulty->add_option("--levels", levels, "number of quantile levels")->check(CLI::PositiveNumber);

  cli::TrainOptions topt;
  auto* train = app.add_subcommand("train", "train the surrogate under the configured scheduler");
  train->add_flag("--dump-trajectories", topt.dump_trajectories, "write validation estimates and ground truth");

  cli::EvaluateOptions eopt;
  std::string errors_csv;
  auto* evaluate = app.add_subcommand("evaluate", "ATE of an estimate against ground truth");
  auto* est = evaluate->add_option("--est", eopt.estimates, "estimate file");
  auto* runs = evaluate->add_option("--runs", eopt.estimates, "repeated estimate files; the median ATE is reported");
  est->excludes(runs);
  evaluate->add_option("--gt", eopt.ground_truth, "ground-truth file")->required()->check(CLI::ExistingFile);
  evaluate->add_flag("--align", eopt.align, "report the scale-aligned (Umeyama) ATE");
  auto* eerr = evaluate->add_option("--errors", errors_csv, "error list to append to (default <out>/errors.csv)");

  cli::ReportOptions ropt;
  auto* report = app.add_subcommand("report", "AUC over an error list written by evaluate");
  report->add_option("--errors", ropt.errors_csv, "error list CSV")->required()->check(CLI::ExistingFile);
  report->add_option("--t-max", ropt.auc_max_error, "AUC threshold window [m]")->check(CLI::PositiveNumber);

  cli::PlotOptions popt;
  std::string kind, plot_out, plot_thresholds;
  auto* plot = app.add_subcommand("plot", "render a CSV as an SVG figure");
  plot->add_option("--input", popt.input, "CSV produced by another command")->required()->check(CLI::ExistingFile);
  plot->add_option("--kind", kind, "training_curves | weight_trace | difficulty_hist | auc_curve")->required();
  auto* pout = plot->add_option("--output", plot_out, "SVG path (default <out>/<kind>.svg)");
  auto* pthr = plot->add_option("--thresholds", plot_thresholds, "level boundaries for difficulty_hist");
  plot->add_option("--t-max", popt.auc_max_error, "AUC threshold window [m]")->check(CLI::PositiveNumber);

  cli::AgentInspectOptions aopt;
  auto* inspect = app.add_subcommand("agent-inspect", "dump the weight traces and networks of a ddpg run");
  inspect->add_option("--run", aopt.run_dir, "run directory written by train")->required()->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*config_opt) g.config = config_path;
    if (*seed_opt) g.seed = seed;
    if (*out_opt) g.out = out_dir;
    g.format = io::parse_format(format);

    if (synth->parsed()) {
      cli::cmd_synth(g, std::cout);
    } else if (difficulty->parsed()) {
      if (*dthr) dopt.thresholds = parse_thresholds(thresholds_text);
      if (*dlev) dopt.levels = levels;
      cli::cmd_difficulty(g, dopt, std::cout);
    } else if (train->parsed()) {
      cli::cmd_train(g, topt, std::cout);
    } else if (evaluate->parsed()) {
      if (*eerr) eopt.errors_csv = errors_csv;
      cli::cmd_evaluate(g, eopt, std::cout);
    } else if (report->parsed()) {
      cli::cmd_report(g, ropt, std::cout);
    } else if (plot->parsed()) {
      popt.kind = io::parse_plot_kind(kind);
      if (*pout) popt.output = plot_out;
      if (*pthr) popt.thresholds = parse_thresholds(plot_thresholds);
      cli::cmd_plot(g, popt, std::cout);
    } else if (inspect->parsed()) {
      cli::cmd_agent_inspect(g, aopt, std::cout);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
