#pragma once
// Per-inner-vertex families of dominating trees over (children, d_v): the
// min-of-trees weights for the linear-time estimator, and the averaged linear
// map h_v into L1 for the sketch encoding. h_v is kept in exact integer form
// (coordinates scaled by the family size) so identities hold bit-for-bit.

#include <vector>

#include "emdx/common.hpp"
#include "emdx/partition.hpp"
#include "emdx/slhst.hpp"
#include "emdx/transport.hpp"

namespace emdx {

enum class FamilyMode : u8 { kMin = 0, kAvg = 1 };

// Exact rational L1 vector: value_j = coords[j] / divisor.
struct HVector {
  std::vector<i64> coords;
  u32 divisor = 1;
};

i64 l1_units(const HVector& x, const HVector& y);

struct DominatingTreeFamily {
  u32 vertex = 0;  // owning inner vertex id
  FamilyMode mode = FamilyMode::kMin;
  i64 delta = 0;   // surplus cost of the owner
  std::vector<DominatingTree> trees;

  u32 size() const { return u32(trees.size()); }
  // One coordinate per non-root node plus one surplus slot per tree.
  u32 dim() const {
    u32 d = 0;
    for (const auto& t : trees) d += t.node_count();
    return d;
  }
};

// Distance functor exposing one vertex's child metric to frt_tree.
struct SiblingDist {
  const Slhst* t;
  u32 v;
  u32 n;
  i64 operator()(u32 a, u32 b) const { return t->sibling_dist(v, a, b); }
};

// s = max(1, ceil(c1 * log2(n))) independent tree draws; queried through
// min-of-trees weights.
DominatingTreeFamily build_family_min(const Slhst& t, u32 v, u64 master_seed,
                                      double c1 = 4.0);

// s = max(1, ceil(c2 * deg * log2(deg))) draws; queried through h_v.
DominatingTreeFamily build_family_avg(const Slhst& t, u32 v, u64 master_seed,
                                      double c2 = 2.0);

// min_i tree_emd(tau_i, mu_hat, nu_hat, delta) in cost units.
i64 family_min_weight(const DominatingTreeFamily& fam,
                      const std::vector<u64>& mu_hat,
                      const std::vector<u64>& nu_hat);

// sum_i tree_emd in cost units; the family average is sum / size.
i64 family_sum_emd(const DominatingTreeFamily& fam,
                   const std::vector<u64>& mu_hat,
                   const std::vector<u64>& nu_hat);

// The averaged linear map: per tree, (w_e * subtree mass) for every non-root
// node in creation order, then (delta * total mass); divisor = family size.
HVector apply_h(const DominatingTreeFamily& fam, const std::vector<u64>& mu_hat);

}  // namespace emdx
