#pragma once

// Runners for the two nullspace / consistent-solve experiment tables on the
// 1/i-spectrum test matrices. Rows are independent: each derives its own seed
// from (global seed, n, k, table id), so the output does not depend on how
// rows are scheduled across threads.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "rkp/solvers.hpp"
#include "rkp/testgen.hpp"

namespace rkp {

enum class TableId { Nullspace = 1, ConsistentSolve = 2 };

struct ExperimentRow {
  index_t n = 0;
  index_t k = 0;
  double cond_A = 0.0;
  std::optional<double> cond_perturbed;
  double E2 = 0.0;
  double E2_second = 0.0;  // E2(refined) for the nullspace table, E2(stab) for the solve table
  std::optional<double> cond_stabilized;
  std::uint64_t seed = 0;
  long long wall_time_ms = 0;
  std::string status = "ok";
};

struct TableConfig {
  std::vector<std::pair<index_t, index_t>> rows;
  std::uint64_t seed = 1;
  SolveMode mode = SolveMode::Dense;
  bool with_cond = true;  // SVD oracle for the perturbed condition numbers
  unsigned threads = 1;
};

inline ExperimentRow blank_row(index_t n, index_t k, std::uint64_t seed) {
  ExperimentRow row;
  row.n = n;
  row.k = k;
  row.seed = seed;
  return row;
}

inline std::uint64_t row_seed(std::uint64_t global_seed, index_t n, index_t k, TableId table) {
  return hash_combine(global_seed, {static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(k),
                                    static_cast<std::uint64_t>(table)});
}

/// The published row layout: k in {1, 3, 6} for every n, then k in {n/2 - 5, n/2}.
inline std::vector<std::pair<index_t, index_t>> published_rows(index_t max_n = 1280) {
  std::vector<std::pair<index_t, index_t>> rows;
  const index_t sizes[] = {160, 320, 640, 1280};
  for (index_t n : sizes)
    if (n <= max_n)
      for (index_t k : {1, 3, 6}) rows.emplace_back(n, k);
  for (index_t n : sizes)
    if (n <= max_n)
      for (index_t k : {n / 2 - 5, n / 2}) rows.emplace_back(n, k);
  return rows;
}

/// cond(A), cond(A + PQ*), ||AN||/||N|| before and after refinement.
inline ExperimentRow run_nullspace_row(index_t n, index_t k, std::uint64_t seed, SolveMode mode, bool with_cond) {
  ExperimentRow row = blank_row(n, k, seed);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const TestMatrix<double> tm = build_test_matrix<double>(n, k, seed);
    row.cond_A = tm.cond_statistic();
    const double norm_a = spectral_norm_estimate(tm.A, RngStream{seed, 10});
    auto pair = build_perturbation<double>(n, k, norm_a, RngStream{seed, 11});
    PerturbedSystem<double> sys(tm.A, std::move(pair.P), std::move(pair.Q), mode);
    const Matrix<double> x = gaussian_matrix<double>(n, k, RngStream{seed, 12});
    auto z = null_vector_candidates(sys, x, 1e-13);
    if (!z) throw Error(ErrorKind::Stagnation, "perturbed solve failed");
    auto [refined, passes] = refine_nullspace(sys, *z);
    // Statistics recomputed from the stored bases, independent of solver bookkeeping.
    row.E2 = aggregate_null_residual(tm.A, *z);
    row.E2_second = aggregate_null_residual(tm.A, refined);
    if (with_cond) row.cond_perturbed = condition_number(sys.dense());
  } catch (const Error& e) {
    row.status = to_string(e.kind());
  }
  row.wall_time_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

/// cond(A), cond(A + PQ*), ||Ax-b||/||b|| for a random perturbation, then
/// cond(A + UV*) and ||Ax-b||/||b|| with the stabilized perturbation.
inline ExperimentRow run_solve_row(index_t n, index_t k, std::uint64_t seed, SolveMode mode, bool with_cond) {
  ExperimentRow row = blank_row(n, k, seed);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const TestMatrix<double> tm = build_test_matrix<double>(n, k, seed);
    row.cond_A = tm.cond_statistic();
    const Vector<double> b = matvec(tm.A, gaussian_vector<double>(n, RngStream{seed, 20}));
    const double bn = norm2(b);
    const double norm_a = spectral_norm_estimate(tm.A, RngStream{seed, 10});

    auto pair = build_perturbation<double>(n, k, norm_a, RngStream{seed, 21});
    PerturbedSystem<double> sys(tm.A, std::move(pair.P), std::move(pair.Q), mode);
    const auto s = sys.solve(b, 1e-13);
    row.E2 = norm2(matvec(tm.A, s.y) - b) / bn;
    if (with_cond) row.cond_perturbed = condition_number(sys.dense());

    NullspaceOptions nopts;
    nopts.mode = mode;
    nopts.stream = RngStream{seed, 22};
    nopts.compute_cond = with_cond;
    const auto stab = stabilized_nullspace(tm.A, k, nopts);
    SolveOptions sopts;
    sopts.mode = mode;
    sopts.tol = 1e-13;
    const auto rep = solve_stabilized(tm.A, stab, b, sopts);
    row.E2_second = norm2(matvec(tm.A, rep.x) - b) / bn;
    row.cond_stabilized = stab.cond_perturbed;
  } catch (const Error& e) {
    row.status = to_string(e.kind());
  }
  row.wall_time_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

/// Runs every configured row, in parallel when cfg.threads > 1, and returns
/// them in configuration order.
inline std::vector<ExperimentRow> run_table(TableId table, const TableConfig& cfg) {
  std::vector<ExperimentRow> out(cfg.rows.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cfg.rows.size(); i = next++) {
      const auto [n, k] = cfg.rows[i];
      const std::uint64_t seed = row_seed(cfg.seed, n, k, table);
      if (k < 1 || k >= n) {
        out[i] = blank_row(n, k, seed);
        out[i].status = "InvalidArgument";
        continue;
      }
      out[i] = table == TableId::Nullspace ? run_nullspace_row(n, k, seed, cfg.mode, cfg.with_cond)
                                           : run_solve_row(n, k, seed, cfg.mode, cfg.with_cond);
    }
  };
  const unsigned nthreads = std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(cfg.rows.size())));
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return out;
}

namespace detail {

inline std::string sci(double v, int digits) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*E", digits, v);
  return buf;
}

inline std::string sci(const std::optional<double>& v, int digits) { return v ? sci(*v, digits) : ""; }

}  // namespace detail

/// CSV with a header naming the row fields. wall_time_ms is appended only on
/// request, since it is the one field that differs between identical runs.
inline std::string format_csv(TableId table, const std::vector<ExperimentRow>& rows, bool timing = false) {
  std::string s = table == TableId::Nullspace ? "n,k,cond_A,cond_perturbed,E2,E2_refined,seed,status"
                                              : "n,k,cond_A,cond_perturbed,E2,cond_stabilized,E2_stab,seed,status";
  if (timing) s += ",wall_time_ms";
  s += '\n';
  for (const auto& r : rows) {
    s += std::to_string(r.n) + ',' + std::to_string(r.k) + ',' + detail::sci(r.cond_A, 9) + ',' +
         detail::sci(r.cond_perturbed, 9) + ',' + detail::sci(r.E2, 9) + ',';
    if (table == TableId::ConsistentSolve) s += detail::sci(r.cond_stabilized, 9) + ',';
    s += detail::sci(r.E2_second, 9) + ',' + std::to_string(r.seed) + ',' + r.status;
    if (timing) s += ',' + std::to_string(r.wall_time_ms);
    s += '\n';
  }
  return s;
}

/// Markdown laid out like the published tables, three digits after the point.
inline std::string format_markdown(TableId table, const std::vector<ExperimentRow>& rows, bool timing = false) {
  std::string s = table == TableId::Nullspace ? "| n | k | cond(A) | cond(A+PQ*) | E_2 | E_2(refined) |"
                                              : "| n | k | cond(A) | cond(A+PQ*) | E_2 | cond(A+UV*) | E_2(stab) |";
  std::string rule = table == TableId::Nullspace ? "|---|---|---|---|---|---|" : "|---|---|---|---|---|---|---|";
  if (timing) {
    s += " ms |";
    rule += "---|";
  }
  s += '\n' + rule + '\n';
  for (const auto& r : rows) {
    auto cell = [&](const std::optional<double>& v) { return r.status == "ok" ? detail::sci(v, 3) : r.status; };
    s += "| " + std::to_string(r.n) + " | " + std::to_string(r.k) + " | " + detail::sci(r.cond_A, 3) + " | " +
         cell(r.cond_perturbed) + " | " + cell(r.E2) + " | ";
    if (table == TableId::ConsistentSolve) s += cell(r.cond_stabilized) + " | ";
    s += cell(r.E2_second) + " |";
    if (timing) s += ' ' + std::to_string(r.wall_time_ms) + " |";
    s += '\n';
  }
  return s;
}

}  // namespace rkp
