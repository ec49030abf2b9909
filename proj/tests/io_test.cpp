#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "clvo/io/checkpoint.hpp"
#include "clvo/io/config.hpp"
#include "clvo/io/csv.hpp"
#include "clvo/io/plots.hpp"
#include "clvo/io/trajectory_io.hpp"
#include "test_support.hpp"

namespace clvo::io {
namespace {

namespace fs = std::filesystem;

TrajectoryFormat format_from_name(const std::string& name) {
  return name.rfind("tartanair", 0) == 0 ? TrajectoryFormat::kTartanAir : TrajectoryFormat::kTum;
}

std::vector<fs::path> fixtures(const std::string& kind) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(fs::path(CLVO_FIXTURE_DIR) / "trajectories" / kind)) {
    out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

Trajectory parse_string(const std::string& text, TrajectoryFormat f) {
  std::istringstream in(text);
  return parse_trajectory(in, f);
}

ErrorCode parse_error(const std::string& text, TrajectoryFormat f) {
  try {
    parse_string(text, f);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error for: " << text;
  return ErrorCode::kInvalidArgument;
}

TEST(TrajectoryIo, IdentityLine) {
  const Trajectory t = parse_string("0.0 0 0 0 0 0 0 1\n", TrajectoryFormat::kTum);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(*t[0].timestamp(), 0.0);
  EXPECT_EQ(t[0].translation(), Eigen::Vector3d::Zero());
  EXPECT_EQ(t[0].rotation().w(), 1.0);
}

TEST(TrajectoryIo, AcceptsEveryWellFormedFixture) {
  const auto files = fixtures("good");
  ASSERT_FALSE(files.empty());
  for (const auto& p : files) {
    EXPECT_NO_THROW(parse_trajectory_file(p.string(), format_from_name(p.filename().string()))) << p;
  }
}

TEST(TrajectoryIo, RejectsEveryMalformedFixture) {
  const std::map<std::string, ErrorCode> expected = {
      {"tartanair_eight_fields.txt", ErrorCode::kMalformedLine},
      {"tum_bad_quaternion.txt", ErrorCode::kBadQuaternion},
      {"tum_infinite.txt", ErrorCode::kMalformedLine},
      {"tum_nonmonotonic.txt", ErrorCode::kNonMonotonicTimestamps},
      {"tum_not_a_number.txt", ErrorCode::kMalformedLine},
      {"tum_repeated_timestamp.txt", ErrorCode::kNonMonotonicTimestamps},
      {"tum_seven_fields.txt", ErrorCode::kMalformedLine},
      {"tum_zero_quaternion.txt", ErrorCode::kBadQuaternion},
  };
  const auto files = fixtures("bad");
  ASSERT_EQ(files.size(), expected.size());
  for (const auto& p : files) {
    const std::string name = p.filename().string();
    try {
      parse_trajectory_file(p.string(), format_from_name(name));
      ADD_FAILURE() << name << " was accepted";
    } catch (const Error& e) {
      ASSERT_TRUE(expected.count(name)) << name;
      EXPECT_EQ(e.code(), expected.at(name)) << name << ": " << e.what();
    }
  }
}

TEST(TrajectoryIo, ErrorsCarryLineNumbers) {
  try {
    parse_string("# header\n0.0 0 0 0 0 0 0 1\n0.1 0 0 0 0 0 1\n", TrajectoryFormat::kTum);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMalformedLine);
    EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos) << e.what();
  }
}

TEST(TrajectoryIo, FieldCountDependsOnFormat) {
  EXPECT_EQ(parse_error("0 0 0 0 0 0 1\n", TrajectoryFormat::kTum), ErrorCode::kMalformedLine);
  EXPECT_EQ(parse_error("0 0 0 0 0 0 0 1\n", TrajectoryFormat::kTartanAir), ErrorCode::kMalformedLine);
  const Trajectory t = parse_string("1 2 3 0 0 0 1\n4 5 6 0 0 0 1\n", TrajectoryFormat::kTartanAir);
  EXPECT_EQ(*t[0].timestamp(), 0.0);
  EXPECT_EQ(*t[1].timestamp(), 1.0);
  EXPECT_EQ(t[1].translation(), Eigen::Vector3d(4, 5, 6));
}

TEST(TrajectoryIo, QuaternionNormBounds) {
  EXPECT_NO_THROW(parse_string("0 0 0 0 0 0 0 0.9\n", TrajectoryFormat::kTum));
  EXPECT_NO_THROW(parse_string("0 0 0 0 0 0 0 1.1\n", TrajectoryFormat::kTum));
  EXPECT_EQ(parse_error("0 0 0 0 0 0 0 0.89\n", TrajectoryFormat::kTum), ErrorCode::kBadQuaternion);
  EXPECT_EQ(parse_error("0 0 0 0 0 0 0 1.11\n", TrajectoryFormat::kTum), ErrorCode::kBadQuaternion);
  const Trajectory t = parse_string("0 0 0 0 0 0 0 1.05\n", TrajectoryFormat::kTum);
  EXPECT_NEAR(t[0].rotation().norm(), 1.0, 1e-15);
}

TEST(TrajectoryIo, RoundTrip) {
  std::mt19937_64 rng(12);
  for (auto format : {TrajectoryFormat::kTum, TrajectoryFormat::kTartanAir}) {
    std::vector<RigidPosed> poses;
    for (int i = 0; i < 200; ++i) {
      poses.push_back(testing::random_pose(rng, 50.0).with_timestamp(format == TrajectoryFormat::kTum ? 0.037 * i + 3.1
                                                                                                 : double(i)));
    }
    const Trajectory t(poses, "rt");
    std::stringstream ss;
    write_trajectory(ss, t, format);
    const Trajectory back = parse_trajectory(ss, format);
    ASSERT_EQ(back.size(), t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
      EXPECT_LT(testing::pose_distance(t[i], back[i]), 1e-9);
      EXPECT_NEAR(*t[i].timestamp(), *back[i].timestamp(), 1e-9);
    }
  }
}

TEST(Csv, RoundTripAndColumns) {
  CsvTable t{{"a", "b", "c"}, {{"1", "", "x"}, {"2.5", "3", "y"}}};
  std::stringstream ss;
  write_csv(ss, t);
  EXPECT_EQ(ss.str(), "a,b,c\n1,,x\n2.5,3,y\n");
  const CsvTable back = read_csv(ss);
  EXPECT_EQ(back.header, t.header);
  EXPECT_EQ(back.rows, t.rows);
  const auto b = back.numbers("b");
  EXPECT_FALSE(b[0]);
  EXPECT_EQ(*b[1], 3.0);
  try {
    back.require({"a", "zz", "c", "yy"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingColumns);
    EXPECT_NE(std::string(e.what()).find("zz, yy"), std::string::npos);
  }
}

TEST(Csv, MetricsTableSchema) {
  surrogate::TrainingRecord r;
  r.step = 4;
  r.loss = {0.5, 0.25, 0.125, 3.0};
  r.weights = {0.1, 0.2, 0.3};
  r.active_levels = LevelSet(2);
  surrogate::TrainingRecord v = r;
  v.step = 5;
  v.val_ate = 0.75;
  v.val_auc = 0.25;
  std::stringstream ss;
  write_csv(ss, metrics_table({r, v}));
  EXPECT_EQ(ss.str(),
            "step,loss_flow,loss_trans,loss_rot,loss_total,w_f,w_p,w_r,active_levels,val_ate,val_auc\n"
            "4,0.5,0.25,0.125,3,0.10000000000000001,0.20000000000000001,0.29999999999999999,1+2,,\n"
            "5,0.5,0.25,0.125,3,0.10000000000000001,0.20000000000000001,0.29999999999999999,1+2,0.75,0.25\n");
}

TEST(Checkpoint, RoundTripIsExact) {
  std::mt19937_64 rng(4);
  const auto model = surrogate::SurrogateModel::random(7, rng);
  TensorMap t;
  add_model(t, "model.", model);
  std::stringstream ss;
  write_checkpoint(ss, t);
  const std::string text = ss.str();
  EXPECT_EQ(text.rfind("clvo-checkpoint 1\n", 0), 0u);
  const auto back = get_model(read_checkpoint(ss), "model.");
  EXPECT_EQ(back.flatten(), model.flatten());
}

TEST(Checkpoint, RejectsBadInput) {
  std::istringstream wrong_version("clvo-checkpoint 2\nend\n");
  EXPECT_THROW(read_checkpoint(wrong_version), Error);
  std::istringstream truncated("clvo-checkpoint 1\ntensor a 1 2\n1\n");
  EXPECT_THROW(read_checkpoint(truncated), Error);
}

TEST(Config, DefaultsAndOverrides) {
  const RunConfig c = parse_run_config(Json::parse(R"({
    "seed": 7,
    "train": {"budget": 200, "val_every": 50},
    "scheduler": {"mode": "self_paced", "lambda": 0.1},
    "difficulty": {"thresholds": [0.44, 0.64]}
  })"));
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.train.seed, 7u);
  EXPECT_EQ(c.train.budget, 200u);
  EXPECT_EQ(c.train.scheduler.mode, SchedulerMode::kSelfPaced);
  EXPECT_EQ(*c.difficulty.thresholds, (std::vector<double>{0.44, 0.64}));
  EXPECT_EQ(c.train.dataset.n_sequences, 300u);
}

TEST(Config, ListsEveryErrorAtOnce) {
  try {
    parse_run_config(Json::parse(R"({
      "bogus": 1,
      "train": {"budget": 0, "learning_rate": "fast", "extra": true},
      "scheduler": {"mode": "annealing", "w0": 2.0},
      "dataset": {"n_sequences": 2}
    })"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfig);
    const std::string msg = e.what();
    for (const char* needle : {"config.bogus", "train.budget", "train.learning_rate", "train.extra", "scheduler.mode",
                               "w0 must be below wF", "dataset.n_sequences"}) {
      EXPECT_NE(msg.find(needle), std::string::npos) << needle << " missing from:\n" << msg;
    }
  }
}

TEST(Config, ResolvedDumpReparsesToSameConfig) {
  RunConfig c = parse_run_config(Json::parse(R"({"seed": 3, "scheduler": {"mode": "ddpg"}})"));
  const Json dumped = to_json(c);
  const RunConfig again = parse_run_config(dumped);
  EXPECT_EQ(to_json(again).dump(), dumped.dump());
  EXPECT_EQ(run_directory_name(again), run_directory_name(c));
  RunConfig other = c;
  other.seed = 4;
  other.train.seed = 4;
  EXPECT_NE(run_directory_name(other), run_directory_name(c));
  other = c;
  other.out = "elsewhere";
  EXPECT_EQ(run_directory_name(other), run_directory_name(c));
}

TEST(Plots, MissingColumnsAndEmptyInput) {
  const CsvTable t{{"step", "w_f"}, {{"0", "1"}}};
  try {
    render_plot(t, PlotKind::kWeightTrace);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingColumns);
    EXPECT_NE(std::string(e.what()).find("w_p, w_r"), std::string::npos);
  }
  const CsvTable empty{{"step", "w_f", "w_p", "w_r"}, {}};
  EXPECT_THROW(render_plot(empty, PlotKind::kWeightTrace), Error);

  const fs::path out = fs::temp_directory_path() / "clvo_io_test_plot.svg";
  fs::remove(out);
  EXPECT_THROW(write_plot_file(out.string(), empty, PlotKind::kWeightTrace), Error);
  EXPECT_FALSE(fs::exists(out));
}

TEST(Plots, DeterministicAndLabelled) {
  CsvTable t{metrics_columns(), {}};
  for (int i = 0; i < 20; ++i) {
    t.rows.push_back({std::to_string(i), "1", "0.5", "0.25", "3", "1", "1", "1", "1+2+3", i % 5 == 4 ? "0.3" : "",
                      i % 5 == 4 ? "0.7" : ""});
  }
  const std::string a = render_plot(t, PlotKind::kWeightTrace);
  EXPECT_EQ(a, render_plot(t, PlotKind::kWeightTrace));
  EXPECT_NE(a.find("weight [unitless]"), std::string::npos);
  // Three flat series at 1.0: every polyline point shares one y coordinate.
  std::size_t lines = 0, pos = 0;
  while ((pos = a.find("<polyline", pos)) != std::string::npos) {
    ++lines;
    const auto start = a.find("points=\"", pos) + 8;
    const auto stop = a.find('"', start);
    std::istringstream pts(a.substr(start, stop - start));
    std::string pt;
    std::set<std::string> ys;
    while (pts >> pt) ys.insert(pt.substr(pt.find(',') + 1));
    EXPECT_EQ(ys.size(), 1u);
    pos = stop;
  }
  EXPECT_EQ(lines, 3u);
  EXPECT_NE(render_plot(t, PlotKind::kTrainingCurves).find("ATE [m]"), std::string::npos);
}

TEST(Plots, DifficultyHistogramDrawsThresholds) {
  CsvTable t{manifest_columns(), {}};
  const std::vector<std::pair<double, int>> rows = {{0.1, 1}, {0.12, 1}, {0.5, 2}, {0.52, 2}, {0.8, 3}, {0.9, 3}};
  for (const auto& [s, l] : rows) {
    t.rows.push_back({"x", "0", "0", "0", "0", "0", "0", format_double(s), std::to_string(l)});
  }
  const std::string svg = render_plot(t, PlotKind::kDifficultyHist);
  std::size_t rules = 0, pos = 0;
  while ((pos = svg.find("stroke-dasharray", pos)) != std::string::npos) ++rules, ++pos;
  EXPECT_EQ(rules, 2u);
  EXPECT_NE(svg.find(">0.31<"), std::string::npos);
  EXPECT_NE(svg.find(">0.66<"), std::string::npos);
}

}  // namespace
}  // namespace clvo::io
