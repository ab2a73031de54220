#pragma once

// Parsed command-line parameters. Serialized to JSON so every run can log
// the exact configuration that produced its output.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "rkp/matrix.hpp"

namespace rkp::cli {

struct RunConfig {
  std::string command;
  std::uint64_t seed = 1;
  std::string mode = "dense";
  std::string format = "csv";
  std::string in, out, rhs, constraints, constraint_rhs, null_basis, left_null;
  std::vector<index_t> n_list;
  std::vector<index_t> k_list;
  index_t n = 0, k = -1, kmax = -1, max_n = 1280;
  double tol = 0.0;  // 0 keeps the operation's default
  bool refine = false;
  bool timing = false;
  bool no_cond = false;
  bool explicit_rows = false;
  unsigned threads = 1;
  std::string curve = "ellipse";
  double a = 2.0, b = 1.0;
  index_t nodes = 256;
  int m = 2;
};

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(RunConfig, command, seed, mode, format, in, out, rhs, constraints, constraint_rhs,
                                   null_basis, left_null, n_list, k_list, n, k, kmax, max_n, tol, refine, timing,
                                   no_cond, explicit_rows, threads, curve, a, b, nodes, m)

inline std::string to_json_string(const RunConfig& cfg) { return nlohmann::json(cfg).dump(); }

inline RunConfig from_json_string(const std::string& s) { return nlohmann::json::parse(s).get<RunConfig>(); }

}  // namespace rkp::cli
