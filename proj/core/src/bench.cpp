#include "musel/bench.hpp"

#include <sstream>

#include "musel/io.hpp"
#include "musel/parallel.hpp"

namespace musel {

namespace {

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace

VsBenchResult run_vs_bench(const VsBenchConfig& cfg, int replicates, std::uint64_t seed,
                           int threads) {
  check(replicates >= 1, "bench vs: replicates must be >= 1");
  check(static_cast<int>(cfg.omegas.size()) == cfg.sim.K, "bench vs: omega list length != K");
  const int s_star = cfg.sim.s1_star + cfg.sim.K * cfg.sim.s2_star;
  const int L = cfg.L > 0 ? cfg.L : s_star + cfg.sim.K;
  const int L_si = cfg.single_L > 0 ? cfg.single_L : cfg.sim.s1_star + cfg.sim.s2_star + 1;

  const PriorWeights pw = derive_pi_from_omegas(cfg.omegas, cfg.sim.p, L);
  const PriorWeights pw_si = derive_pi_from_omegas({cfg.single_omega}, cfg.sim.p, L_si);

  const Rng master(seed);
  VsBenchResult result;
  result.rows.resize(static_cast<std::size_t>(replicates));

  parallel_for(
      0, replicates,
      [&](long rep) {
        VsSimConfig sim = cfg.sim;
        sim.seed = master.spawn(static_cast<std::uint64_t>(rep)).seed();
        const VsInstance inst = gen_vs_instance(sim);

        VsBenchRow row;
        row.rep = static_cast<int>(rep);
        row.seed = sim.seed;

        const MuSusieFit fit = fit_ibss(inst.data, L, pw, cfg.ibss);
        const auto selected = select_at_threshold(fit.pip, cfg.threshold);
        double sens = 0.0, prec = 0.0;
        for (int k = 0; k < cfg.sim.K; ++k) {
          const auto m = vs_metrics(selected[static_cast<std::size_t>(k)],
                                    inst.support[static_cast<std::size_t>(k)]);
          sens += m.sens;
          prec += m.prec;
        }
        row.sens_mu = sens / cfg.sim.K;
        row.prec_mu = prec / cfg.sim.K;

        if (cfg.single_task) {
          double s = 0.0, pr = 0.0;
          for (int k = 0; k < cfg.sim.K; ++k) {
            const auto ku = static_cast<std::size_t>(k);
            MultiTaskDataset single;
            single.X.push_back(inst.data.X[ku]);
            single.y.push_back(inst.data.y[ku]);
            const MuSusieFit sfit = fit_ibss(single, L_si, pw_si, cfg.ibss);
            const auto ssel = select_at_threshold(sfit.pip, cfg.threshold);
            const auto m = vs_metrics(ssel[0], inst.support[ku]);
            s += m.sens;
            pr += m.prec;
          }
          row.sens_si = s / cfg.sim.K;
          row.prec_si = pr / cfg.sim.K;
        }
        result.rows[static_cast<std::size_t>(rep)] = row;
      },
      threads);

  std::vector<double> sm, pm, ss, ps;
  for (const auto& r : result.rows) {
    sm.push_back(r.sens_mu);
    pm.push_back(r.prec_mu);
    ss.push_back(r.sens_si);
    ps.push_back(r.prec_si);
  }
  result.mean.rep = -1;
  result.mean.sens_mu = mean_of(sm);
  result.mean.prec_mu = mean_of(pm);
  result.mean.sens_si = mean_of(ss);
  result.mean.prec_si = mean_of(ps);
  return result;
}

DagBenchResult run_dag_bench(const DagBenchConfig& cfg, int replicates, std::uint64_t seed,
                             int threads) {
  check(replicates >= 1, "bench dag: replicates must be >= 1");
  check(static_cast<int>(cfg.omegas.size()) == cfg.sim.K, "bench dag: omega list length != K");
  const PriorWeights pw = derive_pi_from_omegas(cfg.omegas, cfg.sim.p, std::max(cfg.dag.L_per_node, 1));

  const Rng master(seed);
  DagBenchResult result;
  result.rows.resize(static_cast<std::size_t>(replicates));

  parallel_for(
      0, replicates,
      [&](long rep) {
        const Rng rep_rng = master.spawn(static_cast<std::uint64_t>(rep));
        DagSimConfig sim = cfg.sim;
        sim.seed = rep_rng.spawn(0).seed();
        const DagInstance inst = gen_dag_instance(sim);

        DagModel model(inst.data, pw, cfg.dag);
        Rng chain_rng = rep_rng.spawn(1);
        const Order init = random_order(sim.p, chain_rng);
        const DagPosterior post = model.run_chain(cfg.chain, init, chain_rng);

        DagBenchRow row;
        row.rep = static_cast<int>(rep);
        row.seed = sim.seed;
        for (int k = 0; k < cfg.sim.K; ++k) {
          const auto ku = static_cast<std::size_t>(k);
          const DagMetrics m =
              dag_metrics(post.R_hat[ku], inst.adjacency[ku], cfg.edge_threshold);
          row.n_wrong += m.n_wrong;
          row.tp += m.tp_rate;
          row.fp += m.fp_rate;
          row.f_norm += m.f_norm;
        }
        row.n_wrong /= cfg.sim.K;
        row.tp /= cfg.sim.K;
        row.fp /= cfg.sim.K;
        row.f_norm /= cfg.sim.K;
        result.rows[static_cast<std::size_t>(rep)] = row;
      },
      threads);

  std::vector<double> nw, tp, fp, fn;
  for (const auto& r : result.rows) {
    nw.push_back(r.n_wrong);
    tp.push_back(r.tp);
    fp.push_back(r.fp);
    fn.push_back(r.f_norm);
  }
  result.mean.rep = -1;
  result.mean.n_wrong = mean_of(nw);
  result.mean.tp = mean_of(tp);
  result.mean.fp = mean_of(fp);
  result.mean.f_norm = mean_of(fn);
  return result;
}

std::string vs_bench_csv(const VsBenchResult& result) {
  std::ostringstream os;
  os << "rep,seed,sens_mu,prec_mu,sens_si,prec_si\n";
  for (const auto& r : result.rows) {
    os << r.rep << ',' << r.seed << ',' << format_double(r.sens_mu) << ','
       << format_double(r.prec_mu) << ',' << format_double(r.sens_si) << ','
       << format_double(r.prec_si) << '\n';
  }
  const auto& m = result.mean;
  os << "mean,," << format_double(m.sens_mu) << ',' << format_double(m.prec_mu) << ','
     << format_double(m.sens_si) << ',' << format_double(m.prec_si) << '\n';
  return os.str();
}

std::string dag_bench_csv(const DagBenchResult& result) {
  std::ostringstream os;
  os << "rep,seed,N_wrong,TP,FP,F-norm\n";
  for (const auto& r : result.rows) {
    os << r.rep << ',' << r.seed << ',' << format_double(r.n_wrong) << ',' << format_double(r.tp)
       << ',' << format_double(r.fp) << ',' << format_double(r.f_norm) << '\n';
  }
  const auto& m = result.mean;
  os << "mean,," << format_double(m.n_wrong) << ',' << format_double(m.tp) << ','
     << format_double(m.fp) << ',' << format_double(m.f_norm) << '\n';
  return os.str();
}

}  // namespace musel
