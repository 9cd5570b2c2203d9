// musel: multi-task variable selection and joint DAG estimation.
//
// Subcommands: fit, dag, simulate vs|dag, bench vs|dag. Progress goes to
// stderr; data goes to the files named by --out. Every output JSON embeds the
// effective configuration, the seed, the version and the wall-clock duration,
// so a run is reproducible from its own output.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "musel/bench.hpp"
#include "musel/dag.hpp"
#include "musel/ibss.hpp"
#include "musel/io.hpp"
#include "musel/parallel.hpp"
#include "musel/simgen.hpp"
#include "musel/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace musel;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

json config_json(const fs::path& file) {
  std::ifstream in(file);
  if (!in.good()) throw UsageError("cannot open config file " + file.string());
  return json::parse(in);
}

// Config-file fallback for options not given on the command line
// (precedence: CLI flags > config file > defaults).
template <typename T>
void fallback(const CLI::App& app, const std::string& flag, const json& cfg,
              const std::string& key, T& value) {
  if (app.count(flag) == 0 && cfg.contains(key)) value = cfg.at(key).get<T>();
}

// An omega entry is either a plain number or {"exponent": e, "divisor": d}
// meaning p^(-omega) = p^(-e)/d.
std::vector<double> parse_omegas(const json& arr, Index p) {
  std::vector<double> out;
  for (const auto& item : arr) {
    if (item.is_number()) {
      out.push_back(item.get<double>());
    } else {
      out.push_back(omega_from_scaled_power(item.at("exponent").get<double>(),
                                            item.value("divisor", 1.0), p));
    }
  }
  return out;
}

void write_json(const fs::path& file, const json& j) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream out(file);
  if (!out.good()) throw UsageError("cannot write " + file.string());
  out << j.dump(2) << '\n';
}

json base_output(const std::string& command, const json& config, std::uint64_t seed,
                 const Timer& timer) {
  json j;
  j["version"] = kVersion;
  j["command"] = command;
  j["config"] = config;
  j["seed"] = seed;
  j["wall_time_sec"] = timer.seconds();
  return j;
}

std::vector<std::vector<int>> one_based(const std::vector<std::vector<int>>& sets) {
  std::vector<std::vector<int>> out = sets;
  for (auto& s : out)
    for (auto& v : s) ++v;
  return out;
}

// ---------------------------------------------------------------------------
// fit

int cmd_fit(const std::string& data_dir, int L, std::vector<double> omegas, double tol,
            int max_sweeps, double threshold, std::uint64_t seed, const std::string& out_file) {
  Timer timer;
  const MultiTaskDataset data = load_dataset(data_dir);
  if (!data.has_responses())
    throw UsageError("fit: dataset in " + data_dir + " has no response files y_k.csv");
  if (static_cast<int>(omegas.size()) != data.K())
    throw UsageError("fit: --omega needs exactly K=" + std::to_string(data.K()) + " values, got " +
                     std::to_string(omegas.size()));

  const PriorWeights pw = derive_pi_from_omegas(omegas, data.p(), L);
  IbssOptions opts;
  opts.tol = tol;
  opts.max_sweeps = max_sweeps;

  std::cerr << "musel fit: K=" << data.K() << " p=" << data.p() << " L=" << L << "\n";
  const MuSusieFit fit = fit_ibss(data, L, pw, opts);
  const auto selected = select_at_threshold(fit.pip, threshold);

  json config{{"data", data_dir}, {"L", L}, {"omega", omegas}, {"tol", tol},
              {"max_sweeps", max_sweeps}, {"threshold", threshold}};
  json j = base_output("fit", config, seed, timer);
  j["converged"] = fit.converged;
  j["sweeps"] = fit.sweeps;
  j["sigma_sq_hat"] = fit.sigma_sq_hat;
  j["sigma0l_sq"] = fit.sigma0l_sq;
  j["elbo_trace"] = fit.elbo_trace;
  for (int k = 0; k < data.K(); ++k) {
    j["pip"].push_back(std::vector<double>(fit.pip.row(k).begin(), fit.pip.row(k).end()));
    const auto& b = fit.beta_hat[static_cast<std::size_t>(k)];
    j["beta_hat"].push_back(std::vector<double>(b.begin(), b.end()));
  }
  j["selected"] = one_based(selected);
  write_json(out_file, j);
  std::cerr << "musel fit: " << (fit.converged ? "converged" : "NOT converged") << " after "
            << fit.sweeps << " sweeps; wrote " << out_file << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// dag

int cmd_dag(const std::string& data_dir, std::vector<double> omegas, long iters, long burn_in,
            long thin, int L_per_node, double edge_threshold, std::uint64_t seed,
            const std::vector<int>& init_order_1based, int threads, const std::string& out_file) {
  Timer timer;
  const MultiTaskDataset data = load_dataset(data_dir);
  if (static_cast<int>(omegas.size()) != data.K())
    throw UsageError("dag: --omega needs exactly K=" + std::to_string(data.K()) + " values, got " +
                     std::to_string(omegas.size()));

  DagOptions dopts;
  dopts.L_per_node = L_per_node;
  dopts.threads = threads;
  const PriorWeights pw = derive_pi_from_omegas(omegas, data.p(), std::max(L_per_node, 1));
  DagModel model(data, pw, dopts);

  Rng rng(seed);
  Order init;
  if (!init_order_1based.empty()) {
    for (int v : init_order_1based) init.perm.push_back(v - 1);
    if (!is_valid_order(init) || init.p() != data.p())
      throw UsageError("dag: --init-order must be a permutation of 1.." +
                       std::to_string(data.p()));
  } else {
    init = random_order(data.p(), rng);
  }

  ChainOptions copts{iters, burn_in, thin};
  std::cerr << "musel dag: K=" << data.K() << " p=" << data.p() << " iters=" << iters << "\n";
  const DagPosterior post = model.run_chain(copts, init, rng);

  const fs::path out_path(out_file);
  const fs::path dir = out_path.has_parent_path() ? out_path.parent_path() : fs::path(".");
  fs::create_directories(dir);
  std::vector<std::string> r_files;
  for (int k = 0; k < data.K(); ++k) {
    const std::string name = "R_hat_" + std::to_string(k + 1) + ".csv";
    write_csv_matrix(dir / name, post.R_hat[static_cast<std::size_t>(k)]);
    r_files.push_back(name);
  }

  json config{{"data", data_dir},       {"omega", omegas},
              {"iters", iters},         {"burnin", burn_in},
              {"thin", thin},           {"L", L_per_node},
              {"edge_threshold", edge_threshold}, {"threads", threads}};
  json j = base_output("dag", config, seed, timer);
  j["acceptance_rate"] = post.acceptance_rate;
  j["log_posterior_trace"] = post.log_post_trace;
  j["best_log_posterior"] = post.best_log_post;
  for (int v : post.best_order.perm) j["best_order"].push_back(v + 1);
  j["r_hat_files"] = r_files;
  json edges = json::array();
  for (int k = 0; k < data.K(); ++k) {
    json ek = json::array();
    const auto& R = post.R_hat[static_cast<std::size_t>(k)];
    for (Index i = 0; i < R.rows(); ++i) {
      for (Index col = 0; col < R.cols(); ++col) {
        if (R(i, col) >= edge_threshold)
          ek.push_back(json{{"from", i + 1}, {"to", col + 1}, {"prob", R(i, col)}});
      }
    }
    edges.push_back(ek);
  }
  j["edges"] = edges;
  write_json(out_path, j);
  std::cerr << "musel dag: acceptance " << post.acceptance_rate << "; wrote " << out_file << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// simulate

int cmd_simulate_vs(const VsSimConfig& cfg, const std::string& out_dir) {
  Timer timer;
  const VsInstance inst = gen_vs_instance(cfg);
  save_dataset(out_dir, inst.data);

  json config{{"p", cfg.p}, {"n", cfg.n}, {"K", cfg.K},       {"s1_star", cfg.s1_star},
              {"s2_star", cfg.s2_star},   {"sigma", cfg.sigma}, {"effect_sd", cfg.effect_sd}};
  json j = base_output("simulate vs", config, cfg.seed, timer);
  j["type"] = "vs";
  json shared = json::array();
  for (int v : inst.shared_support) shared.push_back(v + 1);
  j["shared_support"] = shared;
  j["private_support"] = one_based(inst.private_support);
  j["support"] = one_based(inst.support);
  for (int k = 0; k < cfg.K; ++k)
    j["beta"].push_back(std::vector<double>(inst.beta.row(k).begin(), inst.beta.row(k).end()));
  write_json(fs::path(out_dir) / "truth.json", j);
  std::cerr << "musel simulate vs: wrote " << out_dir << "\n";
  return 0;
}

int cmd_simulate_dag(const DagSimConfig& cfg, const std::string& out_dir) {
  Timer timer;
  const DagInstance inst = gen_dag_instance(cfg);
  save_dataset(out_dir, inst.data);

  json config{{"p", cfg.p},           {"K", cfg.K},           {"n", cfg.n_per_dataset},
              {"n_com", cfg.N_com},   {"n_pri", cfg.N_pri},   {"weight_lo", cfg.weight_lo},
              {"weight_hi", cfg.weight_hi}, {"var_lo", cfg.var_lo}, {"var_hi", cfg.var_hi}};
  json j = base_output("simulate dag", config, cfg.seed, timer);
  j["type"] = "dag";
  const auto edge_list = [](const std::vector<std::pair<int, int>>& es) {
    json a = json::array();
    for (const auto& [i, jj] : es) a.push_back(json::array({i + 1, jj + 1}));
    return a;
  };
  j["edges_common"] = edge_list(inst.common_edges);
  for (int k = 0; k < cfg.K; ++k) {
    j["edges_private"].push_back(edge_list(inst.private_edges[static_cast<std::size_t>(k)]));
    json wk = json::array();
    const auto& B = inst.B[static_cast<std::size_t>(k)];
    for (Index i = 0; i < B.rows(); ++i)
      for (Index c = 0; c < B.cols(); ++c)
        if (B(i, c) != 0.0) wk.push_back(json::array({i + 1, c + 1, B(i, c)}));
    j["weights"].push_back(wk);
    const auto& nv = inst.noise_var[static_cast<std::size_t>(k)];
    j["noise_var"].push_back(std::vector<double>(nv.begin(), nv.end()));
  }
  write_json(fs::path(out_dir) / "truth.json", j);
  std::cerr << "musel simulate dag: wrote " << out_dir << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// bench

int cmd_bench_vs(const json& cfg, int replicates, std::uint64_t seed, int threads,
                 const std::string& out_file) {
  Timer timer;
  VsBenchConfig bc;
  bc.sim.p = cfg.at("p").get<Index>();
  bc.sim.n = cfg.at("n").get<Index>();
  bc.sim.K = cfg.at("K").get<int>();
  bc.sim.s1_star = cfg.at("s1_star").get<int>();
  bc.sim.s2_star = cfg.at("s2_star").get<int>();
  bc.sim.sigma = cfg.value("sigma", 1.0);
  bc.sim.effect_sd = cfg.value("effect_sd", 0.6);
  bc.omegas = parse_omegas(cfg.at("omegas"), bc.sim.p);
  bc.L = cfg.value("L", 0);
  bc.threshold = cfg.value("threshold", 0.5);
  bc.single_task = cfg.value("single_task", true);
  bc.single_L = cfg.value("single_L", 0);
  bc.single_omega = cfg.value("single_omega", 1.0);
  bc.ibss.tol = cfg.value("tol", 1e-4);
  bc.ibss.max_sweeps = cfg.value("max_sweeps", 200);

  std::cerr << "musel bench vs: " << replicates << " replicates\n";
  const VsBenchResult result = run_vs_bench(bc, replicates, seed, threads);
  if (fs::path(out_file).has_parent_path()) fs::create_directories(fs::path(out_file).parent_path());
  std::ofstream out(out_file);
  if (!out.good()) throw UsageError("cannot write " + out_file);
  out << vs_bench_csv(result);
  std::cerr << "musel bench vs: mean sens_mu=" << result.mean.sens_mu
            << " prec_mu=" << result.mean.prec_mu << " (" << timer.seconds() << "s); wrote "
            << out_file << "\n";
  return 0;
}

int cmd_bench_dag(const json& cfg, int replicates, std::uint64_t seed, int threads,
                  const std::string& out_file) {
  Timer timer;
  DagBenchConfig bc;
  bc.sim.p = cfg.at("p").get<Index>();
  bc.sim.K = cfg.at("K").get<int>();
  bc.sim.n_per_dataset = cfg.at("n").get<Index>();
  bc.sim.N_com = cfg.at("n_com").get<int>();
  bc.sim.N_pri = cfg.at("n_pri").get<int>();
  bc.sim.weight_lo = cfg.value("weight_lo", 0.1);
  bc.sim.weight_hi = cfg.value("weight_hi", 1.0);
  bc.sim.var_lo = cfg.value("var_lo", 1.0);
  bc.sim.var_hi = cfg.value("var_hi", 2.25);
  bc.omegas = parse_omegas(cfg.at("omegas"), bc.sim.p);
  bc.chain.iters = cfg.value("iters", 5000L);
  bc.chain.burn_in = cfg.value("burnin", 1000L);
  bc.chain.thin = cfg.value("thin", 1L);
  bc.dag.L_per_node = cfg.value("L", 0);
  bc.dag.ibss.tol = cfg.value("tol", 1e-4);
  bc.dag.ibss.max_sweeps = cfg.value("max_sweeps", 200);
  bc.edge_threshold = cfg.value("edge_threshold", 0.5);

  std::cerr << "musel bench dag: " << replicates << " replicates\n";
  const DagBenchResult result = run_dag_bench(bc, replicates, seed, threads);
  if (fs::path(out_file).has_parent_path()) fs::create_directories(fs::path(out_file).parent_path());
  std::ofstream out(out_file);
  if (!out.good()) throw UsageError("cannot write " + out_file);
  out << dag_bench_csv(result);
  std::cerr << "musel bench dag: mean N_wrong=" << result.mean.n_wrong << " TP=" << result.mean.tp
            << " FP=" << result.mean.fp << " (" << timer.seconds() << "s); wrote " << out_file
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-task variable selection and joint DAG estimation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("musel ") + kVersion);

  // fit ----------------------------------------------------------------
  auto* fit = app.add_subcommand("fit", "fit the multi-task selection model on a dataset dir");
  std::string fit_data, fit_out = "fit.json", fit_config;
  int fit_L = 10, fit_max_sweeps = 200;
  std::vector<double> fit_omega;
  double fit_tol = 1e-4, fit_threshold = 0.5;
  std::uint64_t fit_seed = 0;
  int fit_threads = 0;
  fit->add_option("--data", fit_data, "dataset directory")->required();
  fit->add_option("--L", fit_L, "number of single effects");
  fit->add_option("--omega", fit_omega, "omega_1..omega_K (comma separated)")->delimiter(',');
  fit->add_option("--tol", fit_tol, "ELBO stopping tolerance");
  fit->add_option("--max-sweeps", fit_max_sweeps, "sweep limit");
  fit->add_option("--threshold", fit_threshold, "selection threshold on PIPs");
  fit->add_option("--seed", fit_seed, "seed recorded in the output");
  fit->add_option("--threads", fit_threads, "thread budget (default: cores)");
  fit->add_option("--config", fit_config, "JSON config file (flags take precedence)");
  fit->add_option("--out", fit_out, "output JSON path");

  // dag ----------------------------------------------------------------
  auto* dag = app.add_subcommand("dag", "joint DAG estimation by order MCMC");
  std::string dag_data, dag_out = "dag.json", dag_config;
  std::vector<double> dag_omega;
  long dag_iters = 5000, dag_burnin = 1000, dag_thin = 1;
  int dag_L = 0, dag_threads = 0;
  double dag_edge_threshold = 0.5;
  std::uint64_t dag_seed = 0;
  std::vector<int> dag_init_order;
  dag->add_option("--data", dag_data, "dataset directory (X_k.csv only)")->required();
  dag->add_option("--omega", dag_omega, "omega_1..omega_K")->delimiter(',');
  dag->add_option("--iters", dag_iters, "MH iterations");
  dag->add_option("--burnin", dag_burnin, "burn-in iterations");
  dag->add_option("--thin", dag_thin, "thinning interval");
  dag->add_option("--L", dag_L, "effects per node regression (0: min(10, p-1))");
  dag->add_option("--edge-threshold", dag_edge_threshold, "edge list threshold");
  dag->add_option("--seed", dag_seed, "chain seed")->required();
  dag->add_option("--init-order", dag_init_order, "fixed initial order (1-based)")->delimiter(',');
  dag->add_option("--threads", dag_threads, "thread budget");
  dag->add_option("--config", dag_config, "JSON config file");
  dag->add_option("--out", dag_out, "output JSON path");

  // simulate -----------------------------------------------------------
  auto* sim = app.add_subcommand("simulate", "generate synthetic instances");
  sim->require_subcommand(1);
  auto* sim_vs = sim->add_subcommand("vs", "variable-selection instance");
  VsSimConfig vs_cfg;
  std::string sim_vs_out;
  sim_vs->add_option("--p", vs_cfg.p)->required();
  sim_vs->add_option("--n", vs_cfg.n)->required();
  sim_vs->add_option("--K", vs_cfg.K)->required();
  sim_vs->add_option("--s1", vs_cfg.s1_star, "shared support size")->required();
  sim_vs->add_option("--s2", vs_cfg.s2_star, "private support size per data set")->required();
  sim_vs->add_option("--sigma", vs_cfg.sigma, "noise SD");
  sim_vs->add_option("--effect-sd", vs_cfg.effect_sd, "coefficient SD");
  sim_vs->add_option("--seed", vs_cfg.seed)->required();
  sim_vs->add_option("--out", sim_vs_out, "output directory")->required();

  auto* sim_dag = sim->add_subcommand("dag", "multi-DAG SEM instance");
  DagSimConfig dag_cfg;
  std::string sim_dag_out;
  sim_dag->add_option("--p", dag_cfg.p)->required();
  sim_dag->add_option("--K", dag_cfg.K)->required();
  sim_dag->add_option("--n", dag_cfg.n_per_dataset)->required();
  sim_dag->add_option("--ncom", dag_cfg.N_com, "shared edges")->required();
  sim_dag->add_option("--npri", dag_cfg.N_pri, "private edges per data set")->required();
  sim_dag->add_option("--wlo", dag_cfg.weight_lo);
  sim_dag->add_option("--whi", dag_cfg.weight_hi);
  sim_dag->add_option("--vlo", dag_cfg.var_lo);
  sim_dag->add_option("--vhi", dag_cfg.var_hi);
  sim_dag->add_option("--seed", dag_cfg.seed)->required();
  sim_dag->add_option("--out", sim_dag_out, "output directory")->required();

  // bench ---------------------------------------------------------------
  auto* bench = app.add_subcommand("bench", "replicated simulate/fit/score pipelines");
  bench->require_subcommand(1);
  std::string bench_vs_cfg_file, bench_vs_out = "results.csv";
  int bench_vs_reps = 10, bench_vs_threads = 0;
  std::uint64_t bench_vs_seed = 0;
  auto* bench_vs = bench->add_subcommand("vs", "variable-selection benchmark");
  bench_vs->add_option("--config", bench_vs_cfg_file, "scenario JSON")->required();
  bench_vs->add_option("--replicates", bench_vs_reps)->required();
  bench_vs->add_option("--seed", bench_vs_seed)->required();
  bench_vs->add_option("--threads", bench_vs_threads);
  bench_vs->add_option("--out", bench_vs_out);

  std::string bench_dag_cfg_file, bench_dag_out = "results.csv";
  int bench_dag_reps = 10, bench_dag_threads = 0;
  std::uint64_t bench_dag_seed = 0;
  auto* bench_dag = bench->add_subcommand("dag", "DAG recovery benchmark");
  bench_dag->add_option("--config", bench_dag_cfg_file, "scenario JSON")->required();
  bench_dag->add_option("--replicates", bench_dag_reps)->required();
  bench_dag->add_option("--seed", bench_dag_seed)->required();
  bench_dag->add_option("--threads", bench_dag_threads);
  bench_dag->add_option("--out", bench_dag_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp" ||
        e.get_name() == "CallForVersion")
      return app.exit(e);
    app.exit(e);
    return 2;
  }

  try {
    if (*fit) {
      if (!fit_config.empty()) {
        const json cfg = config_json(fit_config);
        fallback(*fit, "--L", cfg, "L", fit_L);
        fallback(*fit, "--tol", cfg, "tol", fit_tol);
        fallback(*fit, "--max-sweeps", cfg, "max_sweeps", fit_max_sweeps);
        fallback(*fit, "--threshold", cfg, "threshold", fit_threshold);
        fallback(*fit, "--seed", cfg, "seed", fit_seed);
        fallback(*fit, "--out", cfg, "out", fit_out);
        if (fit->count("--omega") == 0 && cfg.contains("omegas")) {
          const MultiTaskDataset probe = load_dataset(fit_data);
          fit_omega = parse_omegas(cfg.at("omegas"), probe.p());
        }
      }
      if (fit_omega.empty()) throw UsageError("fit: --omega is required");
      return cmd_fit(fit_data, fit_L, fit_omega, fit_tol, fit_max_sweeps, fit_threshold, fit_seed,
                     fit_out);
    }
    if (*dag) {
      if (!dag_config.empty()) {
        const json cfg = config_json(dag_config);
        fallback(*dag, "--iters", cfg, "iters", dag_iters);
        fallback(*dag, "--burnin", cfg, "burnin", dag_burnin);
        fallback(*dag, "--thin", cfg, "thin", dag_thin);
        fallback(*dag, "--L", cfg, "L", dag_L);
        fallback(*dag, "--edge-threshold", cfg, "edge_threshold", dag_edge_threshold);
        fallback(*dag, "--out", cfg, "out", dag_out);
        if (dag->count("--omega") == 0 && cfg.contains("omegas")) {
          const MultiTaskDataset probe = load_dataset(dag_data);
          dag_omega = parse_omegas(cfg.at("omegas"), probe.p());
        }
      }
      if (dag_omega.empty()) throw UsageError("dag: --omega is required");
      const int threads = dag_threads > 0 ? dag_threads : default_threads();
      return cmd_dag(dag_data, dag_omega, dag_iters, dag_burnin, dag_thin, dag_L,
                     dag_edge_threshold, dag_seed, dag_init_order, threads, dag_out);
    }
    if (*sim_vs) return cmd_simulate_vs(vs_cfg, sim_vs_out);
    if (*sim_dag) return cmd_simulate_dag(dag_cfg, sim_dag_out);
    if (*bench_vs) {
      const int threads = bench_vs_threads > 0 ? bench_vs_threads : default_threads();
      return cmd_bench_vs(config_json(bench_vs_cfg_file), bench_vs_reps, bench_vs_seed, threads,
                          bench_vs_out);
    }
    if (*bench_dag) {
      const int threads = bench_dag_threads > 0 ? bench_dag_threads : default_threads();
      return cmd_bench_dag(config_json(bench_dag_cfg_file), bench_dag_reps, bench_dag_seed,
                           threads, bench_dag_out);
    }
  } catch (const UsageError& e) {
    json err{{"error", {{"type", "usage"}, {"message", e.what()}}}};
    std::cout << err.dump() << "\n";
    std::cerr << "musel: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    json err{{"error", {{"type", "runtime"}, {"message", e.what()}}}};
    std::cout << err.dump() << "\n";
    std::cerr << "musel: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
