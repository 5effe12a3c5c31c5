// Command-line front-end: validate inputs, run the estimator, persist and
// query state stores, cross-check against the dense oracle, run coverage
// simulations. Exit codes: 0 ok, 1 validation, 2 numerical, 3 I/O.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>
#include <system_error>
#include <vector>

#include <CLI11.hpp>

#include "treegls/covariance.hpp"
#include "treegls/errors.hpp"
#include "treegls/measurements_io.hpp"
#include "treegls/oracle.hpp"
#include "treegls/query.hpp"
#include "treegls/sim.hpp"
#include "treegls/spine.hpp"
#include "treegls/store_io.hpp"
#include "treegls/twopass.hpp"

namespace {

using namespace treegls;

// 9 significant digits everywhere numbers leave the process as text.
std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", x);
  return buf;
}

int cmd_validate(const std::string& input) {
  const MeasurementsFile file = load_measurements(input);
  int failures = 0;
  for (int v = 0; v < file.tree.vertex_count(); ++v) {
    try {
      (void)local_gls(file.meas[v]);
    } catch (const Error& e) {
      std::printf("FAIL vertex '%s': %s\n", file.names[v].c_str(), e.what());
      ++failures;
    }
  }
  if (failures > 0) {
    std::printf("%d of %d vertices failed checks\n", failures, file.tree.vertex_count());
    return 1;
  }
  std::printf("OK: %d vertices, L=%d, n=%d\n", file.tree.vertex_count(), file.tree.depth, file.n);
  return 0;
}

int cmd_estimate(const std::string& input, const std::string& store_path, int threads) {
  const MeasurementsFile file = load_measurements(input);
  const StateStore store = run_two_pass(file.tree, file.meas, threads);
  save_store(store, file.names, store_path);
  std::printf("estimated %d vertices (L=%d, n=%d), wrote %s\n", store.tree.vertex_count(),
              store.tree.depth, store.n, store_path.c_str());
  return 0;
}

int cmd_query(const std::string& store_path, const std::string& queries_path,
              const std::string& out_path, double default_alpha, bool default_clamp) {
  const LoadedStore loaded = load_store(store_path);
  std::unordered_map<std::string, int> ids;
  for (size_t v = 0; v < loaded.names.size(); ++v) ids[loaded.names[v]] = static_cast<int>(v);

  const std::vector<NamedQuery> queries =
      load_queries(queries_path, ids, loaded.store.n, default_alpha, default_clamp);

  std::string csv = "query_id,estimate,variance,lower,upper\n";
  for (const NamedQuery& q : queries) {
    const CIResult r = estimate_query(loaded.store, q.rq);
    csv += q.id + "," + num(r.estimate) + "," + num(r.variance) + "," + num(r.lower) + "," +
           num(r.upper) + "\n";
  }
  write_file_atomic(out_path, csv);
  std::printf("answered %zu queries, wrote %s\n", queries.size(), out_path.c_str());
  return 0;
}

int cmd_cov(const std::string& store_path, const std::string& u_name, const std::string& v_name) {
  const LoadedStore loaded = load_store(store_path);
  int u = -1;
  int v = -1;
  for (size_t i = 0; i < loaded.names.size(); ++i) {
    if (loaded.names[i] == u_name) u = static_cast<int>(i);
    if (loaded.names[i] == v_name) v = static_cast<int>(i);
  }
  if (u < 0) throw UnknownVertex("vertex '" + u_name + "' is not in the store");
  if (v < 0) throw UnknownVertex("vertex '" + v_name + "' is not in the store");
  const Matrix c = compute_covariance(loaded.store, u, v);
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    std::string line;
    for (Eigen::Index j = 0; j < c.cols(); ++j) {
      line += (j ? " " : "") + num(c(i, j));
    }
    std::printf("%s\n", line.c_str());
  }
  return 0;
}

int cmd_oracle_check(const std::string& input, double tolerance) {
  const MeasurementsFile file = load_measurements(input);
  const StateStore store = run_two_pass(file.tree, file.meas, 0);
  const StackedSystem sys = build_stacked_system(file.tree, file.meas);
  const auto [beta, var] = dense_gls(sys);
  const int n = file.n;

  std::unordered_map<int, int> col;
  for (size_t j = 0; j < sys.leaf_order.size(); ++j) col[sys.leaf_order[j]] = static_cast<int>(j);
  const auto leaf_block = [&](int u) {
    std::vector<int> blocks;
    for (int leaf : descendant_leaves(file.tree, u)) blocks.push_back(col.at(leaf));
    return blocks;
  };

  double max_dev = 0.0;
  std::string worst;
  const auto note = [&](double dev, const std::string& what) {
    if (dev > max_dev) {
      max_dev = dev;
      worst = what;
    }
  };
  for (int g = 0; g < file.tree.vertex_count(); ++g) {
    Vector mb = Vector::Zero(n);
    Matrix mv = Matrix::Zero(n, n);
    for (int bi : leaf_block(g)) {
      mb += beta.segment(n * bi, n);
      for (int bj : leaf_block(g)) mv += var.block(n * bi, n * bj, n, n);
    }
    note((store.states[g].beta_final - mb).norm() / std::max(1.0, mb.norm()),
         "beta at '" + file.names[g] + "'");
    note((store.states[g].var_final - mv).norm() / std::max(1.0, mv.norm()),
         "var at '" + file.names[g] + "'");
  }
  const auto& leaves = file.tree.leaves();
  for (size_t i = 0; i < leaves.size(); ++i) {
    for (size_t j = i; j < leaves.size(); ++j) {
      const Matrix ours = compute_covariance(store, leaves[i], leaves[j]);
      const Matrix ref = var.block(n * col.at(leaves[i]), n * col.at(leaves[j]), n, n);
      note((ours - ref).norm() / std::max(1.0, ref.norm()),
           "cov('" + file.names[leaves[i]] + "','" + file.names[leaves[j]] + "')");
    }
  }

  const bool pass = max_dev <= tolerance;
  std::printf("max relative deviation %s at %s (tolerance %s): %s\n", num(max_dev).c_str(),
              worst.c_str(), num(tolerance).c_str(), pass ? "PASS" : "FAIL");
  return pass ? 0 : 2;
}

int cmd_simulate(const std::string& input, const std::string& out_dir, int threads,
                 bool seed_given, std::uint64_t seed) {
  SimFile file = load_sim_config(input);
  if (seed_given) file.cfg.rng_seed = seed;

  std::vector<RegionQuery> queries;
  for (const NamedQuery& q : file.queries) queries.push_back(q.rq);
  const CoverageReport report = coverage_experiment(file.cfg, queries, threads);

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir + ": " + ec.message());

  std::string coverage_csv = "query_id,alpha,clamped,coverage,mean_width,replicates\n";
  for (const CoverageRow& row : report.rows) {
    coverage_csv += file.queries[row.query_index].id + "," + num(row.alpha) + "," +
                    (row.clamped ? "1" : "0") + "," + num(row.coverage) + "," +
                    num(row.mean_width) + "," + std::to_string(row.replicates) + "\n";
  }
  write_file_atomic(out_dir + "/coverage.csv", coverage_csv);

  std::string qq_csv = "theoretical,empirical\n";
  for (const auto& [theory, empirical] : qq_export(report.pooled_z)) {
    qq_csv += num(theory) + "," + num(empirical) + "\n";
  }
  write_file_atomic(out_dir + "/qq.csv", qq_csv);

  std::printf("simulated %d replicates over %zu queries, wrote %s/coverage.csv and %s/qq.csv\n",
              file.cfg.replicates, file.queries.size(), out_dir.c_str(), out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical GLS estimation on rooted trees"};
  app.require_subcommand(1);

  std::string input;
  std::string store_path;
  std::string queries_path;
  std::string out_path;
  double alpha = 0.05;
  bool clamp = false;
  int threads = 0;
  double tolerance = 1e-8;
  std::uint64_t seed = 0;
  std::string u_name;
  std::string v_name;

  CLI::App* validate = app.add_subcommand("validate", "check a measurements file");
  validate->add_option("--input", input, "measurements JSON")->required();

  CLI::App* estimate = app.add_subcommand("estimate", "run the estimator, write a state store");
  estimate->add_option("--input", input, "measurements JSON")->required();
  estimate->add_option("--store", store_path, "output store path")->required();
  estimate->add_option("--threads", threads, "worker threads (0 = all cores)");

  CLI::App* query = app.add_subcommand("query", "answer region queries from a store");
  query->add_option("--store", store_path, "state store")->required();
  query->add_option("--queries", queries_path, "query batch JSON")->required();
  query->add_option("--out", out_path, "output CSV")->required();
  query->add_option("--alpha", alpha, "default alpha for queries without one");
  query->add_flag("--clamp", clamp, "default nonnegative clamp for queries without one");

  CLI::App* cov = app.add_subcommand("cov", "print the covariance block of two vertices");
  cov->add_option("--store", store_path, "state store")->required();
  cov->add_option("u", u_name, "first vertex name")->required();
  cov->add_option("v", v_name, "second vertex name")->required();

  CLI::App* oracle = app.add_subcommand("oracle-check", "compare against the dense solver");
  oracle->add_option("--input", input, "measurements JSON")->required();
  oracle->add_option("--tolerance", tolerance, "max relative deviation");

  CLI::App* simulate = app.add_subcommand("simulate", "coverage simulation from a config");
  simulate->add_option("--input", input, "simulation config JSON")->required();
  simulate->add_option("--out", out_path, "output directory")->required();
  simulate->add_option("--threads", threads, "worker threads (0 = all cores)");
  CLI::Option* seed_opt = simulate->add_option("--seed", seed, "override the config seed");

  try {
    app.parse(argc, argv);
    if (validate->parsed()) return cmd_validate(input);
    if (estimate->parsed()) return cmd_estimate(input, store_path, threads);
    if (query->parsed()) return cmd_query(store_path, queries_path, out_path, alpha, clamp);
    if (cov->parsed()) return cmd_cov(store_path, u_name, v_name);
    if (oracle->parsed()) return cmd_oracle_check(input, tolerance);
    if (simulate->parsed()) {
      return cmd_simulate(input, out_path, threads, seed_opt->count() > 0, seed);
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const treegls::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
