#pragma once
// Exact transportation oracles: min-cost-flow EMD on a finite metric, the
// extended EMD with per-unit surplus penalties, the one-pass closed form on
// dominating trees, and the generic importance-sampling estimator.

#include <functional>
#include <utility>
#include <vector>

#include "emdx/common.hpp"
#include "emdx/metric.hpp"
#include "emdx/partition.hpp"

namespace emdx {

// Successive shortest paths with Dijkstra + potentials. All arc costs must be
// non-negative; caps, costs and totals are exact int64.
class MinCostFlow {
 public:
  explicit MinCostFlow(u32 node_count) : graph_(node_count) {}

  u32 add_edge(u32 from, u32 to, i64 cap, i64 cost);
  // Augments until the sink is unreachable; returns (flow, cost).
  std::pair<i64, i64> run(u32 source, u32 sink);
  i64 flow_on(u32 edge_id) const { return arcs_[2 * edge_id + 1].cap; }

 private:
  struct Arc {
    u32 to;
    i64 cap;
    i64 cost;
  };
  std::vector<Arc> arcs_;
  std::vector<std::vector<u32>> graph_;
};

// A cost in distance x mass units; value() interprets it at the shared
// denominator of the pair of distributions.
struct ExactCost {
  i64 units = 0;
  u64 denominator = 1;
  double value() const { return double(units) / double(denominator); }
};

struct TransportPlan {
  u32 n = 0;
  u64 denominator = 1;
  std::vector<i64> flow;  // n*n row-major, mass units
  i64 at(u32 p, u32 q) const { return flow[size_t(p) * n + q]; }
};

// Exact EMD. Common mass is matched in place first (optimal for metric costs
// by a triangle-inequality exchange), then SSP moves only the residual.
ExactCost emd_exact(const FiniteMetric& m, const Distribution& mu,
                    const Distribution& nu, TransportPlan* plan = nullptr);

// Extended EMD over an index space 0..k-1 with pairwise costs dist(i,j) and a
// flat penalty `delta` per unmatched unit on either side. Modeled as balanced
// transportation with one virtual supply and one virtual demand node.
template <class DistFn>
i64 eemd_units(u32 k, DistFn&& dist, i64 delta, const std::vector<u64>& mu,
               const std::vector<u64>& nu) {
  if (mu.size() != k || nu.size() != k)
    throw ValidationError("sub-distribution size does not match child count");
  std::vector<u64> a = mu, b = nu;
  for (u32 i = 0; i < k; ++i) {
    u64 matched = std::min(a[i], b[i]);
    a[i] -= matched;
    b[i] -= matched;
  }
  std::vector<u32> src, snk;
  i64 total_a = 0, total_b = 0;
  for (u32 i = 0; i < k; ++i) {
    if (a[i]) src.push_back(i), total_a += i64(a[i]);
    if (b[i]) snk.push_back(i), total_b += i64(b[i]);
  }
  if (total_a == 0 && total_b == 0) return 0;

  // Nodes: S, sources, virtual supply, sinks, virtual demand, T.
  const u32 ns = u32(src.size()), nt = u32(snk.size());
  const u32 S = 0, VS = 1 + ns, VD = 2 + ns + nt, T = VD + 1;
  MinCostFlow mcf(T + 1);
  for (u32 i = 0; i < ns; ++i) {
    mcf.add_edge(S, 1 + i, i64(a[src[i]]), 0);
    mcf.add_edge(1 + i, VD, i64(a[src[i]]), delta);
    for (u32 j = 0; j < nt; ++j)
      mcf.add_edge(1 + i, 2 + ns + j, i64(a[src[i]]), dist(src[i], snk[j]));
  }
  mcf.add_edge(S, VS, total_b, 0);
  for (u32 j = 0; j < nt; ++j) {
    mcf.add_edge(VS, 2 + ns + j, i64(b[snk[j]]), delta);
    mcf.add_edge(2 + ns + j, T, i64(b[snk[j]]), 0);
  }
  mcf.add_edge(VS, VD, total_b, 0);
  mcf.add_edge(VD, T, total_a, 0);
  auto [flow, cost] = mcf.run(S, T);
  if (flow != total_a + total_b)
    throw std::logic_error("eemd flow did not saturate");
  return cost;
}

// Closed-form EMD with surplus on a dominating tree:
//   sum_e w_e * |mu(subtree_e) - nu(subtree_e)| + delta * |mu_tot - nu_tot|.
// Linear in the signed mass difference; one bottom-up pass.
i64 tree_emd(const DominatingTree& t, const std::vector<u64>& mu,
             const std::vector<u64>& nu, i64 delta);

// Mean of `samples` draws of term(i)/p[i] with i ~ p. Unbiased for sum(term).
double importance_estimate(const std::vector<double>& p,
                           const std::function<double(u32)>& term, u32 samples,
                           Rng& rng);

}  // namespace emdx
