#include "emdx/transport.hpp"

#include <algorithm>
#include <limits>
#include <queue>

namespace emdx {

namespace {
constexpr i64 kInf = std::numeric_limits<i64>::max() / 4;
}

u32 MinCostFlow::add_edge(u32 from, u32 to, i64 cap, i64 cost) {
  u32 id = u32(arcs_.size() / 2);
  graph_[from].push_back(u32(arcs_.size()));
  arcs_.push_back({to, cap, cost});
  graph_[to].push_back(u32(arcs_.size()));
  arcs_.push_back({from, 0, -cost});
  return id;
}

std::pair<i64, i64> MinCostFlow::run(u32 source, u32 sink) {
  const u32 n = u32(graph_.size());
  std::vector<i64> potential(n, 0), dist(n);
  std::vector<u32> prev_arc(n);
  i64 flow = 0, cost = 0;
  using Item = std::pair<i64, u32>;
  for (;;) {
    std::fill(dist.begin(), dist.end(), kInf);
    dist[source] = 0;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    pq.push({0, source});
    while (!pq.empty()) {
      auto [d, u] = pq.top();
      pq.pop();
      if (d > dist[u]) continue;
      for (u32 id : graph_[u]) {
        const Arc& arc = arcs_[id];
        if (arc.cap <= 0) continue;
        i64 nd = d + arc.cost + potential[u] - potential[arc.to];
        if (nd < dist[arc.to]) {
          dist[arc.to] = nd;
          prev_arc[arc.to] = id;
          pq.push({nd, arc.to});
        }
      }
    }
    if (dist[sink] >= kInf) break;
    for (u32 v = 0; v < n; ++v)
      if (dist[v] < kInf) potential[v] += dist[v];
    i64 push = kInf;
    for (u32 v = sink; v != source; v = arcs_[prev_arc[v] ^ 1].to)
      push = std::min(push, arcs_[prev_arc[v]].cap);
    for (u32 v = sink; v != source; v = arcs_[prev_arc[v] ^ 1].to) {
      arcs_[prev_arc[v]].cap -= push;
      arcs_[prev_arc[v] ^ 1].cap += push;
      cost += push * arcs_[prev_arc[v]].cost;
    }
    flow += push;
  }
  return {flow, cost};
}

ExactCost emd_exact(const FiniteMetric& m, const Distribution& mu,
                    const Distribution& nu, TransportPlan* plan) {
  if (mu.denominator != nu.denominator)
    throw ValidationError("distributions have different denominators");
  if (mu.mass.size() != m.n || nu.mass.size() != m.n)
    throw ValidationError("distribution size does not match metric");
  check_cost_budget(mu.denominator, m.diameter());

  std::vector<u64> a = mu.mass, b = nu.mass;
  if (plan) {
    plan->n = m.n;
    plan->denominator = mu.denominator;
    plan->flow.assign(size_t(m.n) * m.n, 0);
  }
  for (u32 i = 0; i < m.n; ++i) {
    u64 matched = std::min(a[i], b[i]);
    a[i] -= matched;
    b[i] -= matched;
    if (plan) plan->flow[size_t(i) * m.n + i] = i64(matched);
  }
  std::vector<u32> src, snk;
  for (u32 i = 0; i < m.n; ++i) {
    if (a[i]) src.push_back(i);
    if (b[i]) snk.push_back(i);
  }
  if (src.empty()) return {0, mu.denominator};

  const u32 ns = u32(src.size()), nt = u32(snk.size());
  const u32 S = 0, T = 1 + ns + nt;
  MinCostFlow mcf(T + 1);
  std::vector<u32> pair_edge(size_t(ns) * nt);
  for (u32 i = 0; i < ns; ++i) mcf.add_edge(S, 1 + i, i64(a[src[i]]), 0);
  for (u32 j = 0; j < nt; ++j) mcf.add_edge(1 + ns + j, T, i64(b[snk[j]]), 0);
  for (u32 i = 0; i < ns; ++i)
    for (u32 j = 0; j < nt; ++j)
      pair_edge[size_t(i) * nt + j] =
          mcf.add_edge(1 + i, 1 + ns + j, i64(a[src[i]]), m(src[i], snk[j]));
  auto [flow, cost] = mcf.run(S, T);
  i64 want = 0;
  for (u32 i : src) want += i64(a[i]);
  if (flow != want) throw std::logic_error("transport flow did not saturate");
  if (plan)
    for (u32 i = 0; i < ns; ++i)
      for (u32 j = 0; j < nt; ++j)
        plan->flow[size_t(src[i]) * m.n + snk[j]] +=
            mcf.flow_on(pair_edge[size_t(i) * nt + j]);
  return {cost, mu.denominator};
}

i64 tree_emd(const DominatingTree& t, const std::vector<u64>& mu,
             const std::vector<u64>& nu, i64 delta) {
  if (mu.size() != t.leaf_count() || nu.size() != t.leaf_count())
    throw ValidationError("sub-distribution size does not match leaf count");
  std::vector<i64> diff(t.node_count(), 0);
  for (u32 pos = 0; pos < t.leaf_count(); ++pos)
    diff[t.leaf_node[pos]] += i64(mu[pos]) - i64(nu[pos]);
  u128 total = 0;
  for (u32 v = t.node_count(); v-- > 1;) {
    total += u128(t.weight[v]) * u128(std::abs(diff[v]));
    diff[t.parent[v]] += diff[v];
  }
  total += u128(delta) * u128(std::abs(diff[0]));
  if (total >= (u128(1) << 62))
    throw ValidationError(
        "mass times distance exceeds the exact arithmetic budget (2^62)");
  return i64(total);
}

double importance_estimate(const std::vector<double>& p,
                           const std::function<double(u32)>& term, u32 samples,
                           Rng& rng) {
  if (p.empty() || samples == 0)
    throw ValidationError("importance_estimate needs terms and samples");
  std::vector<double> cum(p.size());
  double total = 0;
  for (size_t i = 0; i < p.size(); ++i) {
    if (p[i] < 0) throw ValidationError("negative sampling probability");
    total += p[i];
    cum[i] = total;
  }
  if (total <= 0) throw ValidationError("importance weights sum to zero");
  if (std::abs(total - 1.0) > 1e-6)
    throw ValidationError("sampling probabilities do not sum to 1");
  double sum = 0;
  for (u32 s = 0; s < samples; ++s) {
    double u = rng.next_double() * total;
    u32 i = u32(std::lower_bound(cum.begin(), cum.end(), u) - cum.begin());
    if (i >= p.size()) i = u32(p.size()) - 1;
    while (p[i] == 0 && i + 1 < p.size()) ++i;  // never land on a zero slot
    sum += term(i) / p[i];
  }
  return sum / samples;
}

}  // namespace emdx
