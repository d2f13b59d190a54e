#pragma once
// Sibling-linked hierarchical well-separated tree over a finite doubling
// metric: h rounds of ball-carving build a full 2-HST, a random arithmetic
// progression of levels is retained (grandchildren reattached), and every
// inner vertex carries a metric on its children (base distance between the
// children's centers plus an additive term from the children's level).

#include <vector>

#include "emdx/common.hpp"
#include "emdx/metric.hpp"
#include "emdx/partition.hpp"
#include "emdx/transport.hpp"

namespace emdx {

constexpr u32 kNoVertex = ~u32{0};

struct SlhstVertex {
  u32 parent = kNoVertex;
  u32 rank = 0;        // retained level; root 0, leaves h
  u32 center = 0;      // global point id of the claiming net point
  u32 leaf_point = kNoVertex;
  i64 delta = 0;       // 2^(h - rank)
  std::vector<u32> children;  // vertex ids, sorted by center id
  std::vector<i64> sibling;   // |children|^2 row-major child metric
};

struct Slhst {
  u32 n = 0;
  double eps = 0;
  double alpha = 0;
  u64 seed = 0;
  u32 h = 0, a = 1, b = 0;
  std::vector<u32> levels;          // retained levels, ascending
  std::vector<SlhstVertex> verts;   // parents precede children; 0 = root
  std::vector<u32> leaf_of_point;   // point id -> leaf vertex id
  std::vector<u32> inner;           // inner vertex ids, breadth-first order

  i64 sibling_dist(u32 v, u32 ci, u32 cj) const {
    return verts[v].sibling[size_t(ci) * verts[v].children.size() + cj];
  }
};

Slhst build_slhst(const FiniteMetric& m, double eps, u64 seed,
                  PartitionRandomness mode = PartitionRandomness::kGlobal,
                  double alpha_override = 0);

// Shortest path between two leaves in the sibling-linked graph. The minimum
// of (up, sibling link, down) and (up through the common ancestor, down) is
// the true graph distance: sibling links obey the triangle inequality within
// one parent, never beat the direct link at a lower vertex, and any path
// between the two subtrees must cross at the lowest common ancestor.
i64 slhst_distance(const Slhst& t, u32 p, u32 q);

struct DegreeReport {
  u32 max_degree = 0;
  u64 sum_children = 0;
  u64 sum_children_sq = 0;
  u32 depth = 0;       // edges on the longest root-to-leaf path
  u32 vertex_count = 0;
  u32 inner_count = 0;
};
DegreeReport degree_and_size_report(const Slhst& t);

// Mass of the leaves under each vertex, one entry per vertex id.
std::vector<u64> subtree_mass(const Slhst& t, const Distribution& mu);

// The sub-distribution at v: subtree masses of its children, child order.
std::vector<u64> hat_masses(const Slhst& t, const std::vector<u64>& subtree,
                            u32 v);

// Extended EMD at one inner vertex: pairwise costs d_v, penalty delta_v per
// unmatched unit on either side.
i64 eemd_exact(const Slhst& t, u32 v, const std::vector<u64>& mu_hat,
               const std::vector<u64>& nu_hat);

// Sum of the per-vertex extended EMDs; equals exact EMD under the
// sibling-linked tree distance (supplies and demands match locally, and each
// crossing pays its vertex's link or double edge exactly once).
ExactCost emd_slhst(const Slhst& t, const Distribution& mu,
                    const Distribution& nu);

}  // namespace emdx
