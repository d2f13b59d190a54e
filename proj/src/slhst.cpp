#include "emdx/slhst.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace emdx {

namespace {

struct LevelCluster {
  std::vector<u32> pts;
  u32 center = 0;
  u32 parent = 0;  // index into the previous level
};

}  // namespace

Slhst build_slhst(const FiniteMetric& m, double eps, u64 seed,
                  PartitionRandomness mode, double alpha_override) {
  if (!(eps > 0.0) || eps > 1.0 / 3.0 + 1e-12)
    throw ValidationError("eps must lie in (0, 1/3]");
  if (m.n == 0) throw ValidationError("empty metric");

  Slhst t;
  t.n = m.n;
  t.eps = eps;
  t.seed = seed;
  t.alpha = alpha_override > 0 ? alpha_override
                               : std::max(1.0, estimate_doubling_dimension(m));

  std::vector<u32> all(m.n);
  for (u32 i = 0; i < m.n; ++i) all[i] = i;

  if (m.n == 1) {
    t.h = 0;
    t.a = 1;
    t.b = 0;
    t.levels = {0};
    t.verts.push_back({kNoVertex, 0, 0, 0, 1, {}, {}});
    t.leaf_of_point = {0};
    return t;
  }

  const i64 radius = m.radius();
  t.h = std::max<u32>(1, ceil_log2(u64(radius)));
  double log2n = std::log2(double(m.n));
  t.a = std::max<u32>(1, u32(std::ceil(eps * log2n / t.alpha)));

  Rng rng(seed);
  t.b = u32(rng.next_below(t.a));
  for (u32 i = 0; i <= t.h; ++i)
    if (i % t.a == t.b % t.a || i == 0 || i == t.h) t.levels.push_back(i);

  std::vector<u32> priority(m.n, 0);
  auto draw_priorities = [&](const std::vector<u32>& pts) {
    std::vector<u32> shuffled = pts;
    rng.shuffle(shuffled);
    for (u32 i = 0; i < shuffled.size(); ++i) priority[shuffled[i]] = i;
  };
  u64 beta_fp = 0;
  if (mode == PartitionRandomness::kGlobal) {
    draw_priorities(all);
    beta_fp = rng.next_beta_fp();
  }

  // Full hierarchy: level i clusters carve the level i-1 clusters at radius
  // 2^(h-i); level h is all singletons (distinct points sit at distance >= 1).
  std::vector<std::vector<LevelCluster>> level(t.h + 1);
  level[0].push_back({all, m.radius_center(), 0});
  for (u32 i = 1; i <= t.h; ++i) {
    for (u32 c = 0; c < level[i - 1].size(); ++c) {
      if (mode == PartitionRandomness::kPerCall) {
        draw_priorities(level[i - 1][c].pts);
        beta_fp = rng.next_beta_fp();
      }
      PartitionParams params{&priority, beta_fp, true, level[i - 1][c].center};
      Partition part = make_partition(m, level[i - 1][c].pts,
                                      i64{1} << (t.h - i), params);
      for (u32 k = 0; k < part.clusters.size(); ++k)
        level[i].push_back({std::move(part.clusters[k]), part.centers[k], c});
    }
  }

  // Vertices for retained levels only; parents are the ancestors at the
  // previous retained level, found by walking the full-hierarchy parents.
  std::vector<std::vector<u32>> vertex_of(t.h + 1);
  for (size_t li = 0; li < t.levels.size(); ++li) {
    u32 lvl = t.levels[li];
    vertex_of[lvl].resize(level[lvl].size());
    for (u32 c = 0; c < level[lvl].size(); ++c) {
      SlhstVertex v;
      v.rank = lvl;
      v.center = level[lvl][c].center;
      v.delta = i64{1} << (t.h - lvl);
      if (li > 0) {
        u32 anc = level[lvl][c].parent;
        for (u32 up = lvl - 1; up > t.levels[li - 1]; --up)
          anc = level[up][anc].parent;
        v.parent = vertex_of[t.levels[li - 1]][anc];
      }
      if (lvl == t.h) v.leaf_point = level[lvl][c].pts[0];
      vertex_of[lvl][c] = u32(t.verts.size());
      t.verts.push_back(std::move(v));
    }
  }

  t.leaf_of_point.assign(m.n, kNoVertex);
  for (u32 id = 0; id < t.verts.size(); ++id) {
    SlhstVertex& v = t.verts[id];
    if (v.parent != kNoVertex) t.verts[v.parent].children.push_back(id);
    if (v.leaf_point != kNoVertex) t.leaf_of_point[v.leaf_point] = id;
  }

  for (u32 id = 0; id < t.verts.size(); ++id) {
    SlhstVertex& v = t.verts[id];
    if (v.children.empty()) continue;
    std::sort(v.children.begin(), v.children.end(), [&](u32 x, u32 y) {
      return t.verts[x].center < t.verts[y].center;
    });
    u32 deg = u32(v.children.size());
    u32 child_rank = t.verts[v.children[0]].rank;
    i64 extra = i64{1} << (t.h - child_rank + 1);
    v.sibling.assign(size_t(deg) * deg, 0);
    for (u32 x = 0; x < deg; ++x)
      for (u32 y = x + 1; y < deg; ++y) {
        i64 d = m(t.verts[v.children[x]].center, t.verts[v.children[y]].center) +
                extra;
        v.sibling[size_t(x) * deg + y] = d;
        v.sibling[size_t(y) * deg + x] = d;
      }
  }

  std::deque<u32> queue{0};
  while (!queue.empty()) {
    u32 id = queue.front();
    queue.pop_front();
    if (t.verts[id].children.empty()) continue;
    t.inner.push_back(id);
    for (u32 c : t.verts[id].children) queue.push_back(c);
  }
  return t;
}

i64 slhst_distance(const Slhst& t, u32 p, u32 q) {
  if (p >= t.n || q >= t.n) throw ValidationError("point is not a leaf");
  if (p == q) return 0;
  u32 u = t.leaf_of_point[p], w = t.leaf_of_point[q];
  i64 up_p = 0, up_q = 0;
  while (t.verts[u].parent != t.verts[w].parent) {
    up_p += t.verts[t.verts[u].parent].delta;
    up_q += t.verts[t.verts[w].parent].delta;
    u = t.verts[u].parent;
    w = t.verts[w].parent;
  }
  u32 v = t.verts[u].parent;
  const auto& kids = t.verts[v].children;
  u32 ui = u32(std::find(kids.begin(), kids.end(), u) - kids.begin());
  u32 wi = u32(std::find(kids.begin(), kids.end(), w) - kids.begin());
  i64 link = std::min(t.sibling_dist(v, ui, wi), 2 * t.verts[v].delta);
  return up_p + up_q + link;
}

DegreeReport degree_and_size_report(const Slhst& t) {
  DegreeReport r;
  r.vertex_count = u32(t.verts.size());
  for (const auto& v : t.verts) {
    u32 deg = u32(v.children.size());
    r.max_degree = std::max(r.max_degree, deg);
    r.sum_children += deg;
    r.sum_children_sq += u64(deg) * deg;
    if (deg) ++r.inner_count;
  }
  for (u32 id = 0; id < t.verts.size(); ++id)
    if (t.verts[id].children.empty()) {
      u32 d = 0;
      for (u32 x = id; t.verts[x].parent != kNoVertex; x = t.verts[x].parent)
        ++d;
      r.depth = std::max(r.depth, d);
    }
  return r;
}

std::vector<u64> subtree_mass(const Slhst& t, const Distribution& mu) {
  if (mu.mass.size() != t.n)
    throw ValidationError("distribution size does not match tree");
  std::vector<u64> acc(t.verts.size(), 0);
  for (u32 pt = 0; pt < t.n; ++pt) acc[t.leaf_of_point[pt]] = mu.mass[pt];
  for (u32 id = u32(t.verts.size()); id-- > 1;)
    acc[t.verts[id].parent] += acc[id];
  return acc;
}

std::vector<u64> hat_masses(const Slhst& t, const std::vector<u64>& subtree,
                            u32 v) {
  std::vector<u64> hat(t.verts[v].children.size());
  for (size_t i = 0; i < hat.size(); ++i)
    hat[i] = subtree[t.verts[v].children[i]];
  return hat;
}

i64 eemd_exact(const Slhst& t, u32 v, const std::vector<u64>& mu_hat,
               const std::vector<u64>& nu_hat) {
  u32 deg = u32(t.verts[v].children.size());
  u64 total_mass = 0;
  for (u64 m : mu_hat) total_mass += m;
  for (u64 m : nu_hat) total_mass += m;
  check_cost_budget(total_mass, t.verts[v].delta, 2);  // unit cost <= 4 delta
  return eemd_units(
      deg, [&](u32 x, u32 y) { return t.sibling_dist(v, x, y); },
      t.verts[v].delta, mu_hat, nu_hat);
}

ExactCost emd_slhst(const Slhst& t, const Distribution& mu,
                    const Distribution& nu) {
  if (mu.denominator != nu.denominator)
    throw ValidationError("distributions have different denominators");
  check_cost_budget(mu.denominator, i64(1) << std::min<u32>(t.h, 62), 2);
  std::vector<u64> sub_mu = subtree_mass(t, mu), sub_nu = subtree_mass(t, nu);
  i64 total = 0;
  for (u32 v : t.inner)
    total += eemd_exact(t, v, hat_masses(t, sub_mu, v),
                        hat_masses(t, sub_nu, v));
  return {total, mu.denominator};
}

}  // namespace emdx
