#pragma once
// Linear encodings of distributions against a fixed SLHST + tree families,
// the binary importance sampler over them, and the two EMD estimators: the
// sublinear sketch path and the linear-time min-of-trees path.

#include <vector>

#include "emdx/common.hpp"
#include "emdx/metric.hpp"
#include "emdx/sketch.hpp"
#include "emdx/slhst.hpp"
#include "emdx/tree_family.hpp"

namespace emdx {

// Balanced interval tree over N items; children split ceil/floor, no padding.
// Nodes in breadth-first order, node 0 the root, children after parents.
struct BinarySamplingTree {
  struct Node {
    u32 lo = 0, hi = 0;              // item interval [lo, hi)
    u32 left = kNoVertex, right = kNoVertex;
  };
  u32 leaves = 0;
  u32 levels = 0;                    // max edges root -> leaf
  std::vector<Node> nodes;
  std::vector<u32> leaf_node;        // item index -> node id

  static BinarySamplingTree build(u32 n);
};

// F(mu): per sampling-tree node, the sketch of the concatenated h_v images of
// the items below it (shared coefficients via global column indexing, so a
// node block is the sum of its children's blocks), plus the raw per-vertex
// sub-distributions the estimator reads after sampling.
struct Encoding {
  u64 context_id = 0;  // hash of (tree structure, families, k, sketch seed)
  u32 n = 0;           // points of the base metric
  u32 N = 0;           // inner vertices = sampling-tree leaves
  u32 k = 0;
  u64 sketch_seed = 0;
  u64 denominator = 1;
  std::vector<SketchValue> blocks;      // one per sampling-tree node
  std::vector<std::vector<u64>> raw;    // canonical vertex -> mu_hat
};

u64 encoding_context_id(const Slhst& t,
                        const std::vector<DominatingTreeFamily>& fams, u32 k,
                        u64 sketch_seed);

// fams: averaged-mode families aligned with t.inner (canonical order).
Encoding encode(const Slhst& t, const std::vector<DominatingTreeFamily>& fams,
                const Distribution& mu, u32 k, u64 sketch_seed,
                u64 context_id);

// Aggregates per-item leaf sketches into the full block array (encode's
// bottom-up step; exposed for sampler tests on synthetic data).
std::vector<SketchValue> build_blocks(const BinarySamplingTree& st,
                                      const std::vector<SketchValue>& leaf);

struct SampleOutcome {
  bool zero = false;   // both root children estimate to 0: data agree
  u32 index = 0;       // selected item
  double prob = 1.0;   // exact selection probability of `index`
};

struct WalkStats {
  u64 blocks_read = 0;       // diff blocks materialized during the walk
  u64 raw_entries_read = 0;  // raw tail entries read afterwards
};

// Root-to-leaf walk on the blockwise difference a - b: at each node descend
// to child i with probability W_i / (W_1 + W_2), W_i the median estimate of
// the child's difference block; 0/0 below the root descends uniformly.
SampleOutcome b_import_sample(const BinarySamplingTree& st,
                              const std::vector<SketchValue>& a,
                              const std::vector<SketchValue>& b, Rng& rng,
                              WalkStats* stats = nullptr);

struct ApproxResult {
  double estimate = 0;
  u32 rounds = 0;
  u32 zero_rounds = 0;
  u64 max_blocks_per_round = 0;
  u64 max_raw_per_round = 0;
  // One-sided transfer accounting (the peer's blocks/raws the walk touched).
  u64 peer_block_bytes = 0;
  u64 peer_raw_bytes = 0;
};

u32 default_rounds(u32 n);  // ceil(log2(n)^2), at least 1

// The sublinear estimator: `rounds` independent sampler walks, each followed
// by one exact EEMD on the sampled vertex's raw sub-distributions, divided by
// its selection probability; returns the mean. Per-round reads are O(k log N)
// block entries plus two raw tails — the full difference is never formed.
ApproxResult approx_emd(const Slhst& t, const Encoding& enc_mu,
                        const Encoding& enc_nu, u32 rounds, u64 query_seed);

struct LinearEstimate {
  double estimate = 0;
  double weight_total = 0;  // sum of min-of-trees weights, in value units
};

// The linear-time estimator: weight_v = min-of-trees tree EMD per vertex,
// then importance sampling of exact EEMDs with p_v proportional to weight_v.
// fams: min-mode families aligned with t.inner. All-zero weights return 0.
LinearEstimate estimate_emd_linear(const Slhst& t,
                                   const std::vector<DominatingTreeFamily>& fams,
                                   const Distribution& mu,
                                   const Distribution& nu, u32 samples,
                                   u64 seed);

u32 default_linear_samples(u32 n);

}  // namespace emdx
