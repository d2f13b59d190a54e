#include "emdx/encoding.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace emdx {

BinarySamplingTree BinarySamplingTree::build(u32 n) {
  BinarySamplingTree st;
  st.leaves = n;
  if (n == 0) return st;
  st.leaf_node.assign(n, 0);
  struct Item {
    u32 lo, hi, depth;
  };
  std::deque<Item> queue{{0, n, 0}};
  std::deque<u32> parent_slot;  // node ids awaiting child links, BFS order
  u32 processed = 0;
  while (!queue.empty()) {
    auto [lo, hi, depth] = queue.front();
    queue.pop_front();
    u32 id = u32(st.nodes.size());
    st.nodes.push_back({lo, hi, kNoVertex, kNoVertex});
    st.levels = std::max(st.levels, depth);
    if (processed > 0) {
      // Attach to the oldest node still missing a child (BFS emission order).
      u32 p = parent_slot.front();
      if (st.nodes[p].left == kNoVertex) {
        st.nodes[p].left = id;
      } else {
        st.nodes[p].right = id;
        parent_slot.pop_front();
      }
    }
    ++processed;
    if (hi - lo == 1) {
      st.leaf_node[lo] = id;
    } else {
      u32 mid = lo + (hi - lo + 1) / 2;
      parent_slot.push_back(id);
      queue.push_back({lo, mid, depth + 1});
      queue.push_back({mid, hi, depth + 1});
    }
  }
  return st;
}

namespace {

void write_tree(ByteWriter& w, const DominatingTree& t) {
  w.put_u32(t.node_count());
  for (u32 i = 0; i < t.node_count(); ++i) {
    w.put_u32(t.parent[i]);
    w.put_i64(t.weight[i]);
  }
  w.put_u32(t.leaf_count());
  for (u32 leaf : t.leaf_node) w.put_u32(leaf);
}

}  // namespace

u64 encoding_context_id(const Slhst& t,
                        const std::vector<DominatingTreeFamily>& fams, u32 k,
                        u64 sketch_seed) {
  ByteWriter w;
  w.put_u32(t.n);
  w.put_u32(t.h);
  w.put_u32(t.a);
  w.put_u32(t.b);
  w.put_u64(t.seed);
  for (u32 lvl : t.levels) w.put_u32(lvl);
  for (const auto& v : t.verts) {
    w.put_u32(v.parent);
    w.put_u32(v.rank);
    w.put_u32(v.center);
    w.put_u32(v.leaf_point);
    w.put_u32(u32(v.children.size()));
    for (u32 c : v.children) w.put_u32(c);
    for (i64 d : v.sibling) w.put_i64(d);
  }
  w.put_u32(u32(fams.size()));
  for (const auto& f : fams) {
    w.put_u32(f.vertex);
    w.put_u8(u8(f.mode));
    w.put_i64(f.delta);
    w.put_u32(f.size());
    for (const auto& tree : f.trees) write_tree(w, tree);
  }
  w.put_u32(k);
  w.put_u64(sketch_seed);
  return fnv1a64(w.bytes().data(), w.bytes().size());
}

std::vector<SketchValue> build_blocks(const BinarySamplingTree& st,
                                      const std::vector<SketchValue>& leaf) {
  if (leaf.size() != st.leaves)
    throw ValidationError("leaf sketch count does not match sampling tree");
  std::vector<SketchValue> blocks(st.nodes.size());
  for (u32 i = 0; i < st.leaves; ++i) blocks[st.leaf_node[i]] = leaf[i];
  for (u32 id = u32(st.nodes.size()); id-- > 0;) {
    const auto& node = st.nodes[id];
    if (node.left == kNoVertex) continue;
    const auto& l = blocks[node.left].g;
    const auto& r = blocks[node.right].g;
    auto& g = blocks[id].g;
    g.resize(l.size());
    for (size_t j = 0; j < g.size(); ++j) g[j] = l[j] + r[j];
  }
  return blocks;
}

Encoding encode(const Slhst& t, const std::vector<DominatingTreeFamily>& fams,
                const Distribution& mu, u32 k, u64 sketch_seed,
                u64 context_id) {
  if (fams.size() != t.inner.size())
    throw ValidationError("family list does not cover the inner vertices");
  if (k == 0) throw ValidationError("sketch rows must be positive");
  Encoding enc;
  enc.context_id = context_id;
  enc.n = t.n;
  enc.N = u32(t.inner.size());
  enc.k = k;
  enc.sketch_seed = sketch_seed;
  enc.denominator = mu.denominator;
  if (enc.N == 0) return enc;  // single-point metric: nothing to transport

  std::vector<u64> offset(enc.N + 1, 0);
  for (u32 i = 0; i < enc.N; ++i) {
    if (fams[i].vertex != t.inner[i] || fams[i].mode != FamilyMode::kAvg)
      throw ValidationError("families are not the averaged set for this tree");
    offset[i + 1] = offset[i] + fams[i].dim();
  }
  const SketchSpec spec{offset[enc.N], k, sketch_seed};

  std::vector<u64> subtree = subtree_mass(t, mu);
  enc.raw.resize(enc.N);
  std::vector<SketchValue> leaf(enc.N);
  parallel_for(enc.N, [&](u32 i) {
    enc.raw[i] = hat_masses(t, subtree, t.inner[i]);
    HVector h = apply_h(fams[i], enc.raw[i]);
    SketchAccumulator acc(spec);
    for (size_t j = 0; j < h.coords.size(); ++j)
      if (h.coords[j] != 0)
        acc.add(offset[i] + j, double(h.coords[j]) / double(h.divisor));
    leaf[i] = acc.take();
  });

  enc.blocks = build_blocks(BinarySamplingTree::build(enc.N), leaf);
  return enc;
}

namespace {

double diff_median(const SketchValue& a, const SketchValue& b) {
  SketchValue d;
  d.g.resize(a.g.size());
  for (size_t i = 0; i < d.g.size(); ++i) d.g[i] = a.g[i] - b.g[i];
  return median_estimate(d);
}

void check_compatible(const Encoding& a, const Encoding& b) {
  if (a.context_id != b.context_id || a.k != b.k ||
      a.sketch_seed != b.sketch_seed || a.N != b.N || a.n != b.n)
    throw FormatError("encodings come from different preprocessing contexts");
  if (a.denominator != b.denominator)
    throw ValidationError("distributions have different denominators");
}

}  // namespace

SampleOutcome b_import_sample(const BinarySamplingTree& st,
                              const std::vector<SketchValue>& a,
                              const std::vector<SketchValue>& b, Rng& rng,
                              WalkStats* stats) {
  if (st.leaves == 0) throw ValidationError("sampling from an empty tree");
  u32 node = 0;
  double prob = 1.0;
  while (st.nodes[node].left != kNoVertex) {
    u32 left = st.nodes[node].left, right = st.nodes[node].right;
    double w1 = diff_median(a[left], b[left]);
    double w2 = diff_median(a[right], b[right]);
    if (stats) stats->blocks_read += 2;
    if (w1 + w2 == 0.0) {
      if (node == 0) return {true, 0, 1.0};
      // Sketch noise cancelled both children; fall back to a fair coin.
      bool go_left = rng.next_double() < 0.5;
      node = go_left ? left : right;
      prob *= 0.5;
      continue;
    }
    double p1 = w1 / (w1 + w2);
    if (rng.next_double() < p1) {
      node = left;
      prob *= p1;
    } else {
      node = right;
      prob *= 1.0 - p1;
    }
  }
  return {false, st.nodes[node].lo, prob};
}

u32 default_rounds(u32 n) {
  double l = std::log2(double(std::max<u32>(2, n)));
  return std::max<u32>(1, u32(std::ceil(l * l)));
}

ApproxResult approx_emd(const Slhst& t, const Encoding& enc_mu,
                        const Encoding& enc_nu, u32 rounds, u64 query_seed) {
  check_compatible(enc_mu, enc_nu);
  if (enc_mu.n != t.n || enc_mu.N != t.inner.size())
    throw FormatError("encodings do not match this tree");
  ApproxResult res;
  res.rounds = rounds;
  if (enc_mu.N == 0 || rounds == 0) return res;

  const BinarySamplingTree st = BinarySamplingTree::build(enc_mu.N);
  const u64 block_bytes = u64(enc_mu.k) * 8;
  double sum = 0;
  for (u32 round = 0; round < rounds; ++round) {
    Rng rng(derive_seed(query_seed, {0x726f756e64ULL, round}));
    WalkStats ws;
    SampleOutcome out =
        b_import_sample(st, enc_mu.blocks, enc_nu.blocks, rng, &ws);
    res.peer_block_bytes += ws.blocks_read * block_bytes;
    if (out.zero) {
      ++res.zero_rounds;
    } else {
      u32 v = t.inner[out.index];
      const auto& mh = enc_mu.raw[out.index];
      const auto& nh = enc_nu.raw[out.index];
      ws.raw_entries_read = mh.size() + nh.size();
      res.peer_raw_bytes += u64(nh.size()) * 8;
      sum += double(eemd_exact(t, v, mh, nh)) / out.prob;
    }
    res.max_blocks_per_round = std::max(res.max_blocks_per_round, ws.blocks_read);
    res.max_raw_per_round = std::max(res.max_raw_per_round, ws.raw_entries_read);
  }
  res.estimate = sum / (double(rounds) * double(enc_mu.denominator));
  return res;
}

u32 default_linear_samples(u32 n) {
  double l = std::log2(double(std::max<u32>(2, n)));
  return std::max<u32>(1, u32(std::ceil(24.0 * l)));
}

LinearEstimate estimate_emd_linear(const Slhst& t,
                                   const std::vector<DominatingTreeFamily>& fams,
                                   const Distribution& mu,
                                   const Distribution& nu, u32 samples,
                                   u64 seed) {
  if (mu.denominator != nu.denominator)
    throw ValidationError("distributions have different denominators");
  if (fams.size() != t.inner.size())
    throw ValidationError("family list does not cover the inner vertices");
  const u32 N = u32(t.inner.size());
  LinearEstimate res;
  if (N == 0) return res;

  std::vector<u64> sub_mu = subtree_mass(t, mu), sub_nu = subtree_mass(t, nu);
  std::vector<std::vector<u64>> mh(N), nh(N);
  std::vector<i64> weight(N);
  for (u32 i = 0; i < N; ++i) {
    u32 v = t.inner[i];
    if (fams[i].vertex != v || fams[i].mode != FamilyMode::kMin)
      throw ValidationError("families are not the min-mode set for this tree");
    mh[i] = hat_masses(t, sub_mu, v);
    nh[i] = hat_masses(t, sub_nu, v);
    weight[i] = family_min_weight(fams[i], mh[i], nh[i]);
  }
  double total = 0;
  for (i64 w : weight) total += double(w);
  res.weight_total = total / double(mu.denominator);
  if (total == 0) return res;  // identical sub-distributions everywhere

  std::vector<double> p(N);
  for (u32 i = 0; i < N; ++i) p[i] = double(weight[i]) / total;
  Rng rng(seed);
  res.estimate = importance_estimate(
                     p,
                     [&](u32 i) {
                       return double(eemd_exact(t, t.inner[i], mh[i], nh[i]));
                     },
                     samples, rng) /
                 double(mu.denominator);
  return res;
}

}  // namespace emdx
