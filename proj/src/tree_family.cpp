#include "emdx/tree_family.hpp"

#include <algorithm>
#include <cmath>

namespace emdx {

namespace {

DominatingTreeFamily build_family(const Slhst& t, u32 v, u64 master_seed,
                                  FamilyMode mode, u32 s) {
  const u32 deg = u32(t.verts[v].children.size());
  if (deg == 0) throw ValidationError("tree family needs an inner vertex");
  std::vector<u32> subset(deg);
  for (u32 i = 0; i < deg; ++i) subset[i] = i;
  SiblingDist dist{&t, v, deg};

  DominatingTreeFamily fam;
  fam.vertex = v;
  fam.mode = mode;
  fam.delta = t.verts[v].delta;
  fam.trees.reserve(s);
  for (u32 i = 0; i < s; ++i) {
    u64 seed = derive_seed(master_seed, {u64(mode), u64(v), u64(i)});
    fam.trees.push_back(frt_tree(dist, subset, seed));
  }
  return fam;
}

}  // namespace

i64 l1_units(const HVector& x, const HVector& y) {
  if (x.divisor != y.divisor || x.coords.size() != y.coords.size())
    throw ValidationError("h vectors come from different families");
  u128 total = 0;
  for (size_t i = 0; i < x.coords.size(); ++i)
    total += u128(std::abs(x.coords[i] - y.coords[i]));
  if (total >= (u128(1) << 62))
    throw ValidationError(
        "mass times distance exceeds the exact arithmetic budget (2^62)");
  return i64(total);
}

DominatingTreeFamily build_family_min(const Slhst& t, u32 v, u64 master_seed,
                                      double c1) {
  u32 s = std::max<u32>(
      1, u32(std::ceil(c1 * std::log2(double(std::max<u32>(2, t.n))))));
  return build_family(t, v, master_seed, FamilyMode::kMin, s);
}

DominatingTreeFamily build_family_avg(const Slhst& t, u32 v, u64 master_seed,
                                      double c2) {
  const u32 deg = u32(t.verts[v].children.size());
  u32 s = std::max<u32>(
      1, u32(std::ceil(c2 * deg * std::log2(double(std::max<u32>(2, deg))))));
  return build_family(t, v, master_seed, FamilyMode::kAvg, s);
}

i64 family_min_weight(const DominatingTreeFamily& fam,
                      const std::vector<u64>& mu_hat,
                      const std::vector<u64>& nu_hat) {
  i64 best = -1;
  for (const auto& t : fam.trees) {
    i64 w = tree_emd(t, mu_hat, nu_hat, fam.delta);
    if (best < 0 || w < best) best = w;
  }
  return best;
}

i64 family_sum_emd(const DominatingTreeFamily& fam,
                   const std::vector<u64>& mu_hat,
                   const std::vector<u64>& nu_hat) {
  i64 total = 0;
  for (const auto& t : fam.trees)
    total += tree_emd(t, mu_hat, nu_hat, fam.delta);
  return total;
}

HVector apply_h(const DominatingTreeFamily& fam,
                const std::vector<u64>& mu_hat) {
  if (fam.mode != FamilyMode::kAvg)
    throw ValidationError("h map requires an averaged family");
  u64 total_mass = 0;
  for (u64 v : mu_hat) total_mass += v;
  check_cost_budget(total_mass, fam.delta, 4);  // node weights <= 12 delta
  HVector h;
  h.divisor = fam.size();
  h.coords.reserve(fam.dim());
  for (const auto& t : fam.trees) {
    if (mu_hat.size() != t.leaf_count())
      throw ValidationError("sub-distribution size does not match leaf count");
    std::vector<i64> mass(t.node_count(), 0);
    for (u32 pos = 0; pos < t.leaf_count(); ++pos)
      mass[t.leaf_node[pos]] += i64(mu_hat[pos]);
    for (u32 node = t.node_count(); node-- > 1;)
      mass[t.parent[node]] += mass[node];
    for (u32 node = 1; node < t.node_count(); ++node)
      h.coords.push_back(t.weight[node] * mass[node]);
    h.coords.push_back(fam.delta * mass[0]);
  }
  return h;
}

}  // namespace emdx
