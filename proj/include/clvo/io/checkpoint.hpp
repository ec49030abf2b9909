#pragma once

// Text checkpoints: a version line, then named tensors.
//
//   clvo-checkpoint 1
//   tensor <name> <rows> <cols>
//   <rows lines of cols values, %.17g>
//   end

#include <cstddef>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

#include <Eigen/Core>

#include "clvo/ddpg/mlp.hpp"
#include "clvo/ddpg/scheduler.hpp"
#include "clvo/errors.hpp"
#include "clvo/io/trajectory_io.hpp"
#include "clvo/surrogate/model.hpp"

namespace clvo::io {

inline constexpr int kCheckpointVersion = 1;

using TensorMap = std::map<std::string, Eigen::MatrixXd>;

inline void write_checkpoint(std::ostream& out, const TensorMap& tensors) {
  out << "clvo-checkpoint " << kCheckpointVersion << '\n';
  for (const auto& [name, m] : tensors) {
    out << "tensor " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c ? " " : "") << format_double(m(r, c));
      out << '\n';
    }
  }
  out << "end\n";
}

inline TensorMap read_checkpoint(std::istream& in) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "clvo-checkpoint") {
    throw Error(ErrorCode::kMalformedLine, "not a checkpoint file");
  }
  if (version != kCheckpointVersion) {
    throw Error(ErrorCode::kMalformedLine, "unsupported checkpoint version " + std::to_string(version));
  }
  TensorMap out;
  std::string word;
  while (in >> word) {
    if (word == "end") return out;
    if (word != "tensor") throw Error(ErrorCode::kMalformedLine, "unexpected token '" + word + "'");
    std::string name;
    Eigen::Index rows = 0, cols = 0;
    if (!(in >> name >> rows >> cols) || rows < 0 || cols < 0) {
      throw Error(ErrorCode::kMalformedLine, "bad tensor header");
    }
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) {
        std::string tok;
        if (!(in >> tok) || !io_detail::parse_double(tok, &m(r, c))) {
          throw Error(ErrorCode::kMalformedLine, "bad value in tensor '" + name + "'");
        }
      }
    }
    out.emplace(name, std::move(m));
  }
  throw Error(ErrorCode::kMalformedLine, "checkpoint truncated (no 'end')");
}

inline void add_model(TensorMap& t, const std::string& prefix, const surrogate::SurrogateModel& m) {
  t[prefix + "w1"] = m.w1;
  t[prefix + "b1"] = m.b1;
  t[prefix + "wm"] = m.wm;
  t[prefix + "bm"] = m.bm;
}

inline surrogate::SurrogateModel get_model(const TensorMap& t, const std::string& prefix) {
  auto get = [&](const std::string& n) -> const Eigen::MatrixXd& {
    const auto it = t.find(prefix + n);
    if (it == t.end()) throw Error(ErrorCode::kMissingColumns, "checkpoint lacks tensor '" + prefix + n + "'");
    return it->second;
  };
  surrogate::SurrogateModel m;
  m.w1 = get("w1");
  m.b1 = get("b1");
  m.wm = get("wm");
  m.bm = get("bm");
  if (m.w1.cols() != 6 || m.b1.size() != m.w1.rows() || m.wm.rows() != 6 || m.wm.cols() != m.w1.rows() ||
      m.bm.size() != 6) {
    throw Error(ErrorCode::kShapeMismatch, "surrogate tensors have inconsistent shapes");
  }
  return m;
}

inline void add_mlp(TensorMap& t, const std::string& prefix, const ddpg::MlpParams& p) {
  for (int l = 0; l < 3; ++l) {
    t[prefix + "w" + std::to_string(l)] = p.weights[l];
    t[prefix + "b" + std::to_string(l)] = p.biases[l];
  }
}

/// Online and target networks of the three agents of an adaptive scheduler.
inline void add_agents(TensorMap& t, const ddpg::DdpgScheduler& s) {
  for (int c = 0; c < 3; ++c) {
    const auto& a = s.agent(static_cast<ddpg::Component>(c));
    const std::string base = "agent." + std::string(ddpg::kComponentNames[static_cast<std::size_t>(c)]) + ".";
    add_mlp(t, base + "actor.", a.actor().params());
    add_mlp(t, base + "critic.", a.critic().params());
    add_mlp(t, base + "actor_target.", a.actor_target().params());
    add_mlp(t, base + "critic_target.", a.critic_target().params());
  }
}

inline void write_checkpoint_file(const std::string& path, const TensorMap& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path + "'");
  write_checkpoint(out, t);
}

inline TensorMap read_checkpoint_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read '" + path + "'");
  return read_checkpoint(in);
}

}  // namespace clvo::io
