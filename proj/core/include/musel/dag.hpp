#pragma once

#include <memory>
#include <unordered_map>
#include <vector>

#include "musel/ibss.hpp"
#include "musel/rng.hpp"

namespace musel {

// Node order: perm[t] is the node (0-based) at position t. Candidate parents
// of perm[t] are perm[0..t-1].
struct Order {
  std::vector<int> perm;

  Index p() const { return static_cast<Index>(perm.size()); }
  bool operator==(const Order&) const = default;
};

Order identity_order(Index p);
Order random_order(Index p, Rng& rng);
bool is_valid_order(const Order& order);

// Proposal: swap a uniformly chosen adjacent pair of positions.
Order propose_adjacent_transposition(const Order& order, Rng& rng);

// Digest of one node-wise multi-task regression under a fixed parent pool.
struct NodeFit {
  double log_lik = 0.0;  // sum_k sum_i log N(x_ij - fitted; sigma_hat_j)
  double log_pen = 0.0;  // -sum_m omega_m log(p) sum_{|I|=m} sum_i alpha_agg[I,i]
  Mat edge_prob;         // K x p; (k,i) = P(edge i -> node | order) via the fit's PIP
  std::vector<Vec> beta_hat;  // K vectors over the full p (zero outside parents)
  double sigma_sq = 0.0;
  bool converged = true;
};

// Chain state: the order plus shared per-node fits and cached totals.
struct OrderState {
  Order order;
  std::vector<std::shared_ptr<const NodeFit>> fits;  // indexed by node
  double log_likelihood = 0.0;
  double log_penalty = 0.0;
};

// log Gibbs posterior over orders (unnormalized): penalty + likelihood.
inline double log_gibbs_posterior(const OrderState& s) {
  return s.log_likelihood + s.log_penalty;
}

// Materialized per-order summary.
struct OrderScore {
  double log_likelihood = 0.0;
  double log_penalty = 0.0;
  std::vector<Mat> R;  // K matrices p x p; R[k](i,j) = P(edge i -> j | order)
  std::vector<double> node_sigma_sq;
};

struct DagOptions {
  int L_per_node = 0;  // 0 -> min(10, p-1)
  IbssOptions ibss;
  std::size_t cache_limit = 200000;  // node-fit memoization entries
  int threads = 1;                     // parallelism for the initial full fit
};

struct ChainOptions {
  long iters = 5000;
  long burn_in = 1000;
  long thin = 1;
};

struct DagPosterior {
  std::vector<std::pair<Order, double>> samples;  // retained (order, log posterior)
  std::vector<Mat> R_hat;                         // K matrices p x p, time averages
  std::vector<double> log_post_trace;             // every iteration
  double acceptance_rate = 0.0;
  long burn_in = 0;
  long thin = 1;
  Order best_order;
  double best_log_post = neg_inf;
};

// Joint DAG estimation: each node j in an order is regressed on its
// predecessors across all K data sets at once; an adjacent transposition
// changes the parent pools of only the two swapped nodes, so each MH step
// refits exactly two regressions (the rest come from the cache).
class DagModel {
 public:
  // Uses the columns of data.X as SEM variables; responses are ignored.
  DagModel(const MultiTaskDataset& data, const PriorWeights& pw, DagOptions opts = {});

  Index p() const { return data_.p(); }
  int K() const { return data_.K(); }

  OrderState fit_order(const Order& order) const;
  OrderScore score(const OrderState& state) const;

  // One Metropolis-Hastings step. The proposal is symmetric, so acceptance is
  // min{1, exp(delta log posterior)}. On acceptance the returned state reuses
  // every fit except the two swapped nodes'.
  OrderState mh_step(const OrderState& current, Rng& rng, bool* accepted = nullptr) const;

  DagPosterior run_chain(const ChainOptions& copts, const Order& init, Rng& rng) const;

  // Per-node regression digest for an explicit parent pool (memoized).
  std::shared_ptr<const NodeFit> node_fit(int node, const std::vector<int>& parents) const;

 private:
  struct CacheKey {
    int node;
    std::vector<std::uint64_t> parent_bits;
    bool operator==(const CacheKey&) const = default;
  };
  struct CacheKeyHash {
    std::size_t operator()(const CacheKey& k) const;
  };

  std::shared_ptr<const NodeFit> fit_node(int node, const std::vector<int>& parents) const;

  MultiTaskDataset data_;
  PriorWeights pw_;
  DagOptions opts_;
  std::vector<Vec> col_var_;  // K vectors: per-column mean square, for rootless nodes

  mutable std::unordered_map<CacheKey, std::shared_ptr<const NodeFit>, CacheKeyHash> cache_;
  mutable std::vector<CacheKey> cache_fifo_;
  mutable std::mutex cache_mu_;
};

}  // namespace musel
