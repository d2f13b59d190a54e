#pragma once
// Randomized low-diameter partitions and the FRT-style dominating tree built
// from them. Both are templates over the distance source so they run on the
// base metric and on per-vertex sibling metrics alike.

#include <algorithm>
#include <bit>
#include <vector>

#include "emdx/common.hpp"

namespace emdx {

inline u32 ceil_log2(u64 x) {
  return x <= 1 ? 0 : u32(std::bit_width(x - 1));
}

inline constexpr u32 kNoCenter = ~u32{0};

// Scan order + claiming radius for one partition. `priority` holds one rank
// per global point id (lower rank scans first); the induced order on the net
// is the permutation pi. beta = beta_fp / 2^62 in [1,2). `center` is the
// point the subset's radius is measured from (a cluster's claiming center may
// lie outside the cluster); kNoCenter means "use the subset's own 1-center".
struct PartitionParams {
  const std::vector<u32>* priority = nullptr;
  u64 beta_fp = u64{1} << 62;
  bool check_precondition = true;
  u32 center = kNoCenter;
};

struct Partition {
  std::vector<std::vector<u32>> clusters;  // global point ids, claim order
  std::vector<u32> centers;                // the net point that claimed each
};

enum class PartitionRandomness { kGlobal, kPerCall };

template <class Dist>
i64 subset_radius(const Dist& d, const std::vector<u32>& subset) {
  if (subset.size() <= 1) return 0;
  i64 best = -1;
  for (u32 p : subset) {
    i64 far = 0;
    for (u32 q : subset) far = std::max(far, d(p, q));
    if (best < 0 || far < best) best = far;
  }
  return best;
}

// The point realizing subset_radius (the subset's 1-center).
template <class Dist>
u32 subset_center(const Dist& d, const std::vector<u32>& subset) {
  i64 best = -1;
  u32 who = subset.at(0);
  for (u32 p : subset) {
    i64 far = 0;
    for (u32 q : subset) far = std::max(far, d(p, q));
    if (best < 0 || far < best) best = far, who = p;
  }
  return who;
}

// Radius of the subset as seen from a fixed center point.
template <class Dist>
i64 center_radius(const Dist& d, u32 center, const std::vector<u32>& subset) {
  i64 far = 0;
  for (u32 q : subset) far = std::max(far, d(center, q));
  return far;
}

// One round of ball-carving: select an r/2-net of `subset` in priority order,
// then let net points (same order) claim their beta*r/2 balls minus earlier
// claims. Empty claims are dropped. Requires r >= radius(subset)/2.
template <class Dist>
Partition make_partition(const Dist& d, const std::vector<u32>& subset, i64 r,
                         const PartitionParams& p) {
  if (p.check_precondition) {
    i64 rad = p.center == kNoCenter ? subset_radius(d, subset)
                                    : center_radius(d, p.center, subset);
    if (2 * r < rad)
      throw std::logic_error("partition called with r < radius/2");
  }

  std::vector<u32> order = subset;
  std::sort(order.begin(), order.end(),
            [&](u32 a, u32 b) { return (*p.priority)[a] < (*p.priority)[b]; });

  // r/2-net: separation > r/2, compared as 2*d > r to keep odd r exact.
  std::vector<u32> net;
  for (u32 q : order) {
    bool covered = false;
    for (u32 c : net)
      if (2 * d(q, c) <= r) {
        covered = true;
        break;
      }
    if (!covered) net.push_back(q);
  }

  Partition part;
  std::vector<char> claimed(order.size(), 0);
  for (u32 c : net) {
    std::vector<u32> cluster;
    for (size_t i = 0; i < order.size(); ++i) {
      if (claimed[i]) continue;
      if (within_beta_half(d(c, order[i]), p.beta_fp, r)) {
        claimed[i] = 1;
        cluster.push_back(order[i]);
      }
    }
    if (!cluster.empty()) {
      part.clusters.push_back(std::move(cluster));
      part.centers.push_back(c);
    }
  }
  return part;
}

// Exhaustive invariant check, used by tests and debug builds.
template <class Dist>
void verify_partition(const Dist& d, const std::vector<u32>& subset, i64 r,
                      u64 beta_fp, const Partition& part) {
  std::vector<u32> seen;
  for (size_t c = 0; c < part.clusters.size(); ++c) {
    if (part.clusters[c].empty()) throw std::logic_error("empty cluster kept");
    for (u32 q : part.clusters[c]) {
      seen.push_back(q);
      if (!within_beta_half(d(part.centers[c], q), beta_fp, r))
        throw std::logic_error("cluster point outside its beta ball");
      if (d(part.centers[c], q) >= r)
        throw std::logic_error("cluster radius not < r");
    }
  }
  std::vector<u32> want = subset;
  std::sort(want.begin(), want.end());
  std::sort(seen.begin(), seen.end());
  if (want != seen) throw std::logic_error("clusters do not partition subset");
}

// Rooted tree with integer edge weights whose leaf metric dominates the
// source metric. Single-child chains are spliced into one edge (distances and
// subtree masses are unchanged by that).
struct DominatingTree {
  std::vector<u32> parent;    // node -> parent node; parent[0] unused
  std::vector<i64> weight;    // node -> weight of the edge to its parent
  std::vector<u32> depth;     // edges to the root
  std::vector<u32> leaf_node; // position in the source subset -> node id

  u32 node_count() const { return u32(parent.size()); }
  u32 leaf_count() const { return u32(leaf_node.size()); }

  i64 leaf_distance(u32 a, u32 b) const {
    u32 x = leaf_node[a], y = leaf_node[b];
    i64 total = 0;
    while (x != y) {
      if (depth[x] >= depth[y]) {
        total += weight[x];
        x = parent[x];
      } else {
        total += weight[y];
        y = parent[y];
      }
    }
    return total;
  }
};

// 2-HST over `subset` by recursive halving partitions; h = ceil(log2 R) (>= 1
// for multi-point inputs), an edge leaving a depth-i node weighs 2^(h-i).
// Global mode draws one (pi, beta) for the whole build; per-call redraws both
// for every partition invocation.
template <class Dist>
DominatingTree frt_tree(const Dist& d, const std::vector<u32>& subset, u64 seed,
                        PartitionRandomness mode = PartitionRandomness::kGlobal) {
  DominatingTree t;
  const size_t m = subset.size();
  if (m == 0) throw ValidationError("frt_tree on empty subset");
  std::vector<u32> pos_of_point(d.n, 0);
  for (size_t i = 0; i < m; ++i) pos_of_point[subset[i]] = u32(i);

  if (m == 1) {
    t.parent = {0};
    t.weight = {0};
    t.depth = {0};
    t.leaf_node = {0};
    return t;
  }

  const i64 radius = subset_radius(d, subset);
  const u32 h = std::max<u32>(1, ceil_log2(u64(radius)));

  Rng rng(seed);
  std::vector<u32> priority(d.n, 0);
  auto draw_priorities = [&](const std::vector<u32>& pts) {
    std::vector<u32> shuffled = pts;
    rng.shuffle(shuffled);
    for (u32 i = 0; i < shuffled.size(); ++i) priority[shuffled[i]] = i;
  };
  u64 beta_fp = 0;
  if (mode == PartitionRandomness::kGlobal) {
    draw_priorities(subset);
    beta_fp = rng.next_beta_fp();
  }

  struct Item {
    std::vector<u32> pts;
    u32 center;  // the point this cluster's radius is measured from
    u32 parent;  // node id, or kNoParent for root
    i64 edge;
    u32 depth;   // uncompressed level of this cluster
  };
  constexpr u32 kNoParent = ~u32{0};

  auto add_node = [&](u32 parent, i64 edge) {
    u32 id = u32(t.parent.size());
    t.parent.push_back(parent == kNoParent ? 0 : parent);
    t.weight.push_back(parent == kNoParent ? 0 : edge);
    t.depth.push_back(parent == kNoParent ? 0 : t.depth[parent] + 1);
    return id;
  };

  t.leaf_node.assign(m, 0);
  std::vector<Item> stack;
  stack.push_back({subset, subset_center(d, subset), kNoParent, 0, 0});
  while (!stack.empty()) {
    Item it = std::move(stack.back());
    stack.pop_back();
    if (it.pts.size() == 1) {
      // Splice the singleton chain down to level h into one edge.
      i64 chain = (i64{1} << (h - it.depth + 1)) - 2;
      u32 node = add_node(it.parent, it.edge + chain);
      t.leaf_node[pos_of_point[it.pts[0]]] = node;
      continue;
    }
    // Advance through unsplit levels, accumulating the spliced edge weight.
    u32 depth = it.depth;
    i64 edge = it.edge;
    u32 center = it.center;
    Partition part;
    for (;;) {
      if (mode == PartitionRandomness::kPerCall) {
        draw_priorities(it.pts);
        beta_fp = rng.next_beta_fp();
      }
      PartitionParams params{&priority, beta_fp, true, center};
      part = make_partition(d, it.pts, i64{1} << (h - depth - 1), params);
      if (part.clusters.size() > 1) break;
      edge += i64{1} << (h - depth);
      depth += 1;
      center = part.centers[0];
    }
    u32 node = add_node(it.parent, edge);
    for (size_t ci = 0; ci < part.clusters.size(); ++ci)
      stack.push_back({std::move(part.clusters[ci]), part.centers[ci], node,
                       i64{1} << (h - depth), depth + 1});
  }
  return t;
}

}  // namespace emdx
