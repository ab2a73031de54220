// rkp: command-line front end for the randomized rank-k perturbation library.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include "rkp/rkp.hpp"
#include "run_config.hpp"

namespace {

using namespace rkp;
using rkp::cli::RunConfig;

std::vector<index_t> parse_list(const std::string& text) {
  std::vector<index_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw Error(ErrorKind::InvalidArgument, "bad list entry '" + item + "'");
    out.push_back(static_cast<index_t>(v));
  }
  return out;
}

SolveMode parse_mode(const std::string& s) {
  if (s == "dense") return SolveMode::Dense;
  if (s == "gmres" || s == "implicit") return SolveMode::Implicit;
  throw Error(ErrorKind::InvalidArgument, "unknown mode '" + s + "'");
}

std::string sci(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.9E", v);
  return buf;
}

// Writes to --out when given, stdout otherwise.
void emit(const RunConfig& cfg, const std::string& text) {
  if (cfg.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(cfg.out);
  if (!f) throw Error(ErrorKind::Io, "cannot write '" + cfg.out + "'");
  f << text;
}

std::string sidecar(const std::string& path, const std::string& tag) {
  std::filesystem::path p(path);
  const std::string stem = p.extension() == ".mtx" ? p.stem().string() : p.filename().string();
  return (p.parent_path() / (stem + "." + tag + ".mtx")).string();
}

template <Scalar T>
Vector<T> read_vector(const std::string& path, index_t n) {
  const Matrix<T> m = read_matrix_market<T>(path);
  if (m.cols() != 1 || m.rows() != n)
    throw Error(ErrorKind::InvalidArgument, "'" + path + "' must be an n x 1 vector");
  return m.column(0);
}

template <Scalar T>
std::string vector_csv(const Vector<T>& x) {
  std::string s = is_complex_v<T> ? "i,re,im\n" : "i,x\n";
  for (std::size_t i = 0; i < x.size(); ++i) {
    s += std::to_string(i) + ',';
    if constexpr (is_complex_v<T>) s += sci(x[i].real()) + ',' + sci(x[i].imag());
    else s += sci(x[i]);
    s += '\n';
  }
  return s;
}

void kv(std::string& s, const std::string& key, const std::string& value) { s += key + ',' + value + '\n'; }
void kv(std::string& s, const std::string& key, double value) { kv(s, key, sci(value)); }
void kv(std::string& s, const std::string& key, const std::optional<double>& value) {
  if (value) kv(s, key, *value);
}

template <Scalar T>
std::string report_csv(const SolveReport<T>& r, const char* method) {
  std::string s = "key,value\n";
  kv(s, "method", method);
  kv(s, "relative_residual", r.relative_residual);
  kv(s, "constraint_residual", r.constraint_residual);
  kv(s, "orthogonality_defect", r.orthogonality_defect);
  kv(s, "cond_perturbed", r.cond_perturbed);
  kv(s, "solver_iterations", std::to_string(r.solver_iterations));
  kv(s, "retries", std::to_string(r.retries));
  return s;
}

int cmd_gen(const RunConfig& cfg) {
  if (cfg.out.empty()) throw Error(ErrorKind::InvalidArgument, "gen needs --out");
  const auto tm = build_test_matrix<double>(cfg.n, cfg.k, cfg.seed);
  const auto nb = ground_truth_null_bases(tm);
  write_matrix_market(cfg.out, tm.A);
  write_matrix_market(sidecar(cfg.out, "null"), nb.N);
  write_matrix_market(sidecar(cfg.out, "leftnull"), nb.V);
  return 0;
}

template <Scalar T>
int cmd_solve(const RunConfig& cfg) {
  const Matrix<T> a = read_matrix_market<T>(cfg.in);
  const index_t n = a.rows();
  const Vector<T> b = cfg.rhs.empty() ? matvec(a, gaussian_vector<T>(n, RngStream{cfg.seed, 20}))
                                      : read_vector<T>(cfg.rhs, n);
  SolveOptions base;
  base.mode = parse_mode(cfg.mode);
  base.stream = RngStream{cfg.seed, 0};
  if (cfg.tol > 0.0) base.tol = cfg.tol;
  base.compute_cond = !cfg.no_cond;

  SolveReport<T> rep;
  const char* method;
  if (!cfg.constraints.empty()) {
    ConstrainedOptions<T> opts;
    static_cast<SolveOptions&>(opts) = base;
    const Matrix<T> c = read_matrix_market<T>(cfg.constraints);
    const Vector<T> f = cfg.constraint_rhs.empty() ? Vector<T>(static_cast<std::size_t>(c.cols()), T{})
                                                   : read_vector<T>(cfg.constraint_rhs, c.cols());
    if (!cfg.left_null.empty()) opts.V = read_matrix_market<T>(cfg.left_null);
    rep = solve_constrained(a, c, b, f, opts);
    method = "constrained";
  } else if (!cfg.null_basis.empty() && !cfg.left_null.empty()) {
    rep = solve_known_nullspace(a, read_matrix_market<T>(cfg.left_null), read_matrix_market<T>(cfg.null_basis), b,
                                base);
    method = "known-nullspace";
  } else {
    if (cfg.k < 0) throw Error(ErrorKind::InvalidArgument, "solve needs --k, or --null and --leftnull");
    rep = solve_consistent(a, b, cfg.k, base);
    method = "random-perturbation";
  }
  std::cout << report_csv(rep, method);
  if (!cfg.out.empty()) emit(cfg, vector_csv(rep.x));
  return 0;
}

template <Scalar T>
int cmd_nullspace(const RunConfig& cfg) {
  const Matrix<T> a = read_matrix_market<T>(cfg.in);
  if (cfg.k < 1) throw Error(ErrorKind::InvalidArgument, "nullspace needs --k >= 1");
  NullspaceOptions opts;
  opts.mode = parse_mode(cfg.mode);
  opts.stream = RngStream{cfg.seed, 0};
  opts.refine = cfg.refine;
  opts.compute_cond = !cfg.no_cond;
  if (cfg.tol > 0.0) opts.tol = cfg.tol;
  const auto r = compute_nullspace(a, cfg.k, opts);

  std::string s = "key,value\n";
  kv(s, "k", std::to_string(r.Z.cols()));
  kv(s, "residual", aggregate_null_residual(a, r.Z));
  kv(s, "residual_unrefined", r.aggregate_unrefined);
  kv(s, "max_column_residual", *std::max_element(r.column_residuals.begin(), r.column_residuals.end()));
  kv(s, "refinement_passes", std::to_string(r.refinement_passes));
  kv(s, "independent", r.independent ? "true" : "false");
  kv(s, "cond_perturbed", r.cond_perturbed);
  kv(s, "retries", std::to_string(r.retries));
  std::cout << s;
  if (!cfg.out.empty()) write_matrix_market(cfg.out, r.Z);
  return 0;
}

template <Scalar T>
int cmd_rank(const RunConfig& cfg) {
  const Matrix<T> a = read_matrix_market<T>(cfg.in);
  RankOptions opts;
  opts.mode = parse_mode(cfg.mode);
  opts.stream = RngStream{cfg.seed, 0};
  if (cfg.tol > 0.0) opts.tol_null = cfg.tol;
  const index_t kmax = cfg.kmax >= 0 ? cfg.kmax : std::min<index_t>(a.rows() - 1, 16);
  const auto r = detect_rank_deficiency(a, kmax, opts);
  for (const auto& t : r.log)
    std::cerr << "trial k=" << t.k << ' ' << to_string(t.outcome) << " growth=" << sci(t.growth)
              << " residual=" << sci(t.max_residual) << '\n';
  std::cout << r.k_A << '\n';
  return 0;
}

int cmd_table(const RunConfig& cfg, TableId table) {
  TableConfig tc;
  tc.seed = cfg.seed;
  tc.mode = parse_mode(cfg.mode);
  tc.with_cond = !cfg.no_cond;
  tc.threads = cfg.threads;
  if (!cfg.explicit_rows) {
    tc.rows = published_rows(cfg.max_n);
  } else {
    for (index_t n : cfg.n_list)
      for (index_t k : cfg.k_list) tc.rows.emplace_back(n, k);
  }
  for (const auto& [n, k] : tc.rows)
    if (n > 1280) throw Error(ErrorKind::InvalidArgument, "table sizes are limited to n <= 1280");
  const auto rows = run_table(table, tc);
  emit(cfg, cfg.format == "md" ? format_markdown(table, rows, cfg.timing) : format_csv(table, rows, cfg.timing));
  return 0;
}

int cmd_neumann(const RunConfig& cfg) {
  neumann::CurveKind kind;
  if (cfg.curve == "ellipse") kind = neumann::Ellipse{cfg.a, cfg.b};
  else if (cfg.curve == "star") kind = neumann::Star{cfg.a, cfg.b, 5};
  else throw Error(ErrorKind::InvalidArgument, "unknown curve '" + cfg.curve + "'");

  const auto c = neumann::discretize_curve(kind, cfg.nodes);
  const auto sys = neumann::build_neumann_system(c, true);
  const auto h = neumann::harmonic_test_case(c, cfg.m);
  const auto sol = neumann::solve_neumann(sys, h.f);
  const auto pts = neumann::interior_probe_points(kind);
  const auto u = neumann::evaluate_single_layer(c, sol.sigma, pts);

  std::vector<double> err;
  double mean = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    err.push_back(u[i] - h.u(pts[i]));
    mean += err.back();
  }
  mean /= static_cast<double>(err.size());
  double var = 0.0;
  for (double e : err) var += (e - mean) * (e - mean);
  const double stddev = std::sqrt(var / static_cast<double>(err.size()));

  std::string s = "key,value\n";
  kv(s, "curve", cfg.curve);
  kv(s, "nodes", std::to_string(c.N));
  kv(s, "length", c.length());
  kv(s, "compat_defect", sol.compat_defect);
  kv(s, "density_integral", sol.density_integral);
  kv(s, "potential_error_stddev", stddev);
  std::cout << s;

  if (!cfg.out.empty()) {
    std::string dens = "j,x,y,sigma\n";
    for (index_t j = 0; j < c.N; ++j)
      dens += std::to_string(j) + ',' + sci(c.nodes[j][0]) + ',' + sci(c.nodes[j][1]) + ',' + sci(sol.sigma[j]) + '\n';
    std::string pot = "x,y,u,u_exact\n";
    for (std::size_t i = 0; i < pts.size(); ++i)
      pot += sci(pts[i][0]) + ',' + sci(pts[i][1]) + ',' + sci(u[i]) + ',' + sci(h.u(pts[i])) + '\n';
    std::ofstream(cfg.out + ".density.csv") << dens;
    std::ofstream(cfg.out + ".potential.csv") << pot;
  }
  return 0;
}

// Commands that read a matrix run in real or complex arithmetic to match the file.
template <template <typename> class Cmd>
int dispatch(const RunConfig& cfg) {
  if (cfg.in.empty()) throw Error(ErrorKind::InvalidArgument, cfg.command + " needs --in");
  if (peek_matrix_market_field(cfg.in) == MmField::Complex) return Cmd<complex_t>::run(cfg);
  return Cmd<double>::run(cfg);
}

template <typename T>
struct Solve { static int run(const RunConfig& c) { return cmd_solve<T>(c); } };
template <typename T>
struct Nullspace { static int run(const RunConfig& c) { return cmd_nullspace<T>(c); } };
template <typename T>
struct Rank { static int run(const RunConfig& c) { return cmd_rank<T>(c); } };

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Randomized rank-k perturbation solvers for rank-deficient systems"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::string n_text, k_text;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--seed", cfg.seed, "Global seed")->capture_default_str();
    sub->add_option("--mode", cfg.mode, "dense | gmres")->check(CLI::IsMember({"dense", "gmres", "implicit"}));
    sub->add_option("--tol", cfg.tol, "Tolerance override");
    sub->add_option("--out", cfg.out, "Output path");
    sub->add_flag("--no-cond", cfg.no_cond, "Skip the SVD condition-number oracle");
  };

  auto* gen = app.add_subcommand("gen", "Write a test matrix and its null bases");
  common(gen);
  gen->add_option("--n", cfg.n)->required();
  gen->add_option("--k", cfg.k)->required();

  auto* solve = app.add_subcommand("solve", "Solve a consistent rank-deficient system");
  common(solve);
  solve->add_option("--in", cfg.in)->required();
  solve->add_option("--rhs", cfg.rhs, "Right-hand side (n x 1 Matrix Market); A*gaussian when absent");
  solve->add_option("--k", cfg.k, "Rank deficiency");
  solve->add_option("--constraints", cfg.constraints, "Constraint matrix C (n x k)");
  solve->add_option("--constraint-rhs", cfg.constraint_rhs, "Constraint values f (k x 1)");
  solve->add_option("--null", cfg.null_basis, "Basis of N(A)");
  solve->add_option("--leftnull", cfg.left_null, "Basis of N(A*)");

  auto* nullspace = app.add_subcommand("nullspace", "Compute a nullspace basis");
  common(nullspace);
  nullspace->add_option("--in", cfg.in)->required();
  nullspace->add_option("--k", cfg.k)->required();
  nullspace->add_flag("--refine", cfg.refine, "Iteratively refine the basis");

  auto* rank = app.add_subcommand("rank", "Detect the rank deficiency");
  common(rank);
  rank->add_option("--in", cfg.in)->required();
  rank->add_option("--kmax", cfg.kmax, "Largest deficiency to consider (default min(n-1, 16))");

  auto table_opts = [&](CLI::App* sub) {
    common(sub);
    sub->add_option("--n", n_text, "Sizes (comma separated)");
    sub->add_option("--k", k_text, "Deficiencies (comma separated, may be empty)");
    sub->add_option("--max-n", cfg.max_n, "Largest size of the default row set")->capture_default_str();
    sub->add_option("--format", cfg.format, "csv | md")->check(CLI::IsMember({"csv", "md"}));
    sub->add_option("--threads", cfg.threads, "Rows run concurrently")->check(CLI::Range(1u, 256u));
    sub->add_flag("--timing", cfg.timing, "Append wall_time_ms (not reproducible)");
  };
  auto* table1 = app.add_subcommand("table1", "Nullspace residuals before and after refinement");
  table_opts(table1);
  auto* table2 = app.add_subcommand("table2", "Random versus stabilized perturbation solves");
  table_opts(table2);

  auto* neumann = app.add_subcommand("neumann", "Interior Neumann problem by a single layer potential");
  common(neumann);
  neumann->add_option("--curve", cfg.curve, "ellipse | star")->check(CLI::IsMember({"ellipse", "star"}));
  neumann->add_option("--a", cfg.a, "Ellipse semi-axis a, or star radius");
  neumann->add_option("--b", cfg.b, "Ellipse semi-axis b, or star amplitude");
  neumann->add_option("--nodes", cfg.nodes)->capture_default_str();
  neumann->add_option("--m", cfg.m, "Harmonic degree of the manufactured solution")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }
  cfg.command = app.get_subcommands().front()->get_name();
  // Any explicit --n or --k replaces the default row set; an empty list yields a header-only table.
  for (auto* t : {table1, table2})
    if (t->parsed() && (t->count("--n") + t->count("--k")) > 0) cfg.explicit_rows = true;
  if (cfg.explicit_rows) {
    const bool k_given = table1->count("--k") + table2->count("--k") > 0;
    try {
      cfg.n_list = parse_list(n_text);
      cfg.k_list = parse_list(k_text);
    } catch (const Error& e) {
      std::cerr << "rkp " << cfg.command << ": " << e.what() << '\n';
      return 1;
    }
    if (table1->count("--n") + table2->count("--n") == 0) cfg.n_list = {160, 320, 640};
    if (!k_given) cfg.k_list = {1, 3, 6};
  }
  std::cerr << "config " << rkp::cli::to_json_string(cfg) << '\n';

  try {
    if (cfg.command == "gen") return cmd_gen(cfg);
    if (cfg.command == "solve") return dispatch<Solve>(cfg);
    if (cfg.command == "nullspace") return dispatch<Nullspace>(cfg);
    if (cfg.command == "rank") return dispatch<Rank>(cfg);
    if (cfg.command == "table1") return cmd_table(cfg, TableId::Nullspace);
    if (cfg.command == "table2") return cmd_table(cfg, TableId::ConsistentSolve);
    return cmd_neumann(cfg);
  } catch (const Error& e) {
    std::cerr << "rkp " << cfg.command << ": " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "rkp " << cfg.command << ": " << e.what() << '\n';
    return 2;
  }
}
