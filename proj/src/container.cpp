#include "emdx/container.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace emdx {

namespace {

constexpr char kContainerMagic[] = "EMDP";
constexpr char kEncodingMagic[] = "EMDE";
constexpr char kOracleMagic[] = "EMDO";
constexpr u16 kVersion = 1;

u64 deterministic_timestamp() {
  if (const char* env = std::getenv("SOURCE_DATE_EPOCH")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end && *end == '\0') return u64(v);
  }
  return 0;
}

void write_slhst(ByteWriter& w, const Slhst& t) {
  w.put_u32(t.n);
  w.put_f64(t.eps);
  w.put_f64(t.alpha);
  w.put_u64(t.seed);
  w.put_u32(t.h);
  w.put_u32(t.a);
  w.put_u32(t.b);
  w.put_u32(u32(t.levels.size()));
  for (u32 lvl : t.levels) w.put_u32(lvl);
  w.put_u32(u32(t.verts.size()));
  for (const auto& v : t.verts) {
    w.put_u32(v.parent);
    w.put_u32(v.rank);
    w.put_u32(v.center);
    w.put_u32(v.leaf_point);
    w.put_i64(v.delta);
    w.put_u32(u32(v.children.size()));
    for (u32 c : v.children) w.put_u32(c);
    for (i64 d : v.sibling) w.put_i64(d);
  }
}

Slhst read_slhst(ByteReader& r) {
  Slhst t;
  t.n = r.get_u32();
  t.eps = r.get_f64();
  t.alpha = r.get_f64();
  t.seed = r.get_u64();
  t.h = r.get_u32();
  t.a = r.get_u32();
  t.b = r.get_u32();
  t.levels.resize(r.get_u32());
  for (auto& lvl : t.levels) lvl = r.get_u32();
  t.verts.resize(r.get_u32());
  for (auto& v : t.verts) {
    v.parent = r.get_u32();
    v.rank = r.get_u32();
    v.center = r.get_u32();
    v.leaf_point = r.get_u32();
    v.delta = r.get_i64();
    v.children.resize(r.get_u32());
    for (auto& c : v.children) c = r.get_u32();
    v.sibling.resize(v.children.empty() ? 0
                                        : v.children.size() * v.children.size());
    for (auto& d : v.sibling) d = r.get_i64();
  }
  t.leaf_of_point.assign(t.n, kNoVertex);
  for (u32 id = 0; id < t.verts.size(); ++id)
    if (t.verts[id].leaf_point != kNoVertex)
      t.leaf_of_point[t.verts[id].leaf_point] = id;
  std::vector<u32> queue{0};
  for (size_t qi = 0; qi < queue.size(); ++qi) {
    u32 id = queue[qi];
    if (t.verts[id].children.empty()) continue;
    t.inner.push_back(id);
    for (u32 c : t.verts[id].children) queue.push_back(c);
  }
  return t;
}

void write_family(ByteWriter& w, const DominatingTreeFamily& f) {
  w.put_u32(f.vertex);
  w.put_u8(u8(f.mode));
  w.put_i64(f.delta);
  w.put_u32(f.size());
  for (const auto& t : f.trees) {
    w.put_u32(t.node_count());
    for (u32 i = 0; i < t.node_count(); ++i) {
      w.put_u32(t.parent[i]);
      w.put_i64(t.weight[i]);
      w.put_u32(t.depth[i]);
    }
    w.put_u32(t.leaf_count());
    for (u32 leaf : t.leaf_node) w.put_u32(leaf);
  }
}

DominatingTreeFamily read_family(ByteReader& r) {
  DominatingTreeFamily f;
  f.vertex = r.get_u32();
  f.mode = FamilyMode(r.get_u8());
  f.delta = r.get_i64();
  f.trees.resize(r.get_u32());
  for (auto& t : f.trees) {
    u32 nodes = r.get_u32();
    t.parent.resize(nodes);
    t.weight.resize(nodes);
    t.depth.resize(nodes);
    for (u32 i = 0; i < nodes; ++i) {
      t.parent[i] = r.get_u32();
      t.weight[i] = r.get_i64();
      t.depth[i] = r.get_u32();
    }
    t.leaf_node.resize(r.get_u32());
    for (auto& leaf : t.leaf_node) leaf = r.get_u32();
  }
  return f;
}

std::vector<DominatingTreeFamily> build_families(const Slhst& t, u64 seed,
                                                 FamilyMode mode, double c) {
  std::vector<DominatingTreeFamily> fams(t.inner.size());
  parallel_for(u32(t.inner.size()), [&](u32 i) {
    fams[i] = mode == FamilyMode::kMin
                  ? build_family_min(t, t.inner[i], seed, c)
                  : build_family_avg(t, t.inner[i], seed, c);
  });
  return fams;
}

}  // namespace

u64 metric_hash(const FiniteMetric& m) {
  ByteWriter w;
  w.put_u32(m.n);
  for (i64 d : m.dist) w.put_i64(d);
  return fnv1a64(w.bytes().data(), w.bytes().size());
}

PreprocessContainer preprocess(const FiniteMetric& m,
                               const PreprocessOptions& opt) {
  if (opt.k == 0) throw ValidationError("sketch rows must be positive");
  PreprocessContainer c;
  c.manifest.timestamp = deterministic_timestamp();
  c.manifest.metric_hash = metric_hash(m);
  c.manifest.eps = opt.eps;
  c.manifest.master_seed = opt.seed;
  c.manifest.mode = opt.mode;
  c.manifest.k = opt.k;
  c.manifest.c_min = opt.c_min;
  c.manifest.c_avg = opt.c_avg;
  c.tree = build_slhst(m, opt.eps, derive_seed(opt.seed, {0x74726565ULL}),
                       PartitionRandomness::kGlobal, opt.alpha_override);
  c.manifest.alpha = c.tree.alpha;
  if (opt.mode != FamilySet::kAvg)
    c.fams_min = build_families(c.tree, opt.seed, FamilyMode::kMin, opt.c_min);
  if (opt.mode != FamilySet::kMin)
    c.fams_avg = build_families(c.tree, opt.seed, FamilyMode::kAvg, opt.c_avg);
  return c;
}

std::string container_to_bytes(const PreprocessContainer& c) {
  ByteWriter w;
  w.put_magic(kContainerMagic);
  w.put_u16(kVersion);
  w.put_u32(c.manifest.version);
  w.put_u64(c.manifest.timestamp);
  w.put_u64(c.manifest.metric_hash);
  w.put_f64(c.manifest.eps);
  w.put_f64(c.manifest.alpha);
  w.put_u64(c.manifest.master_seed);
  w.put_u8(u8(c.manifest.mode));
  w.put_u32(c.manifest.k);
  w.put_f64(c.manifest.c_min);
  w.put_f64(c.manifest.c_avg);
  write_slhst(w, c.tree);
  w.put_u32(u32(c.fams_min.size()));
  for (const auto& f : c.fams_min) write_family(w, f);
  w.put_u32(u32(c.fams_avg.size()));
  for (const auto& f : c.fams_avg) write_family(w, f);
  return w.take();
}

PreprocessContainer container_from_bytes(const std::string& bytes) {
  ByteReader r(bytes);
  r.expect_magic(kContainerMagic, "container");
  if (r.get_u16() != kVersion)
    throw FormatError("unsupported container version");
  PreprocessContainer c;
  c.manifest.version = r.get_u32();
  c.manifest.timestamp = r.get_u64();
  c.manifest.metric_hash = r.get_u64();
  c.manifest.eps = r.get_f64();
  c.manifest.alpha = r.get_f64();
  c.manifest.master_seed = r.get_u64();
  c.manifest.mode = FamilySet(r.get_u8());
  c.manifest.k = r.get_u32();
  c.manifest.c_min = r.get_f64();
  c.manifest.c_avg = r.get_f64();
  c.tree = read_slhst(r);
  c.fams_min.resize(r.get_u32());
  for (auto& f : c.fams_min) f = read_family(r);
  c.fams_avg.resize(r.get_u32());
  for (auto& f : c.fams_avg) f = read_family(r);
  r.expect_done("container");
  return c;
}

std::string encoding_to_bytes(const Encoding& e) {
  ByteWriter w;
  w.put_magic(kEncodingMagic);
  w.put_u16(kVersion);
  w.put_u64(e.context_id);
  w.put_u32(e.n);
  w.put_u32(e.N);
  w.put_u32(e.k);
  w.put_u64(e.sketch_seed);
  w.put_u64(e.denominator);
  for (const auto& block : e.blocks)
    for (double g : block.g) w.put_f64(g);
  for (const auto& hat : e.raw) {
    w.put_u32(u32(hat.size()));
    for (u64 mass : hat) w.put_u64(mass);
  }
  return w.take();
}

Encoding encoding_from_bytes(const std::string& bytes) {
  ByteReader r(bytes);
  r.expect_magic(kEncodingMagic, "encoding");
  if (r.get_u16() != kVersion) throw FormatError("unsupported encoding version");
  Encoding e;
  e.context_id = r.get_u64();
  e.n = r.get_u32();
  e.N = r.get_u32();
  e.k = r.get_u32();
  e.sketch_seed = r.get_u64();
  e.denominator = r.get_u64();
  if (e.N > 0) {
    e.blocks.resize(2 * size_t(e.N) - 1);
    for (auto& block : e.blocks) {
      block.g.resize(e.k);
      for (auto& g : block.g) g = r.get_f64();
    }
    e.raw.resize(e.N);
    for (auto& hat : e.raw) {
      hat.resize(r.get_u32());
      for (auto& mass : hat) mass = r.get_u64();
    }
  }
  r.expect_done("encoding");
  return e;
}

Encoding encode_with(const PreprocessContainer& c, const Distribution& mu) {
  if (c.fams_avg.empty() && !c.tree.inner.empty())
    throw ValidationError("container was built without averaged families");
  return encode(c.tree, c.fams_avg, mu, c.manifest.k, c.sketch_seed(),
                c.context_id());
}

OracleStore oracle_build(const FiniteMetric& m,
                         const std::vector<Distribution>& dists,
                         const PreprocessOptions& opt, double c_reps) {
  if (dists.empty()) throw ValidationError("oracle store needs distributions");
  OracleStore store;
  store.count = u32(dists.size());
  store.master_seed = opt.seed;
  store.reps = std::max<u32>(
      3, u32(std::ceil(c_reps *
                       std::log2(double(std::max<u32>(2, store.count))))));
  store.containers.reserve(store.reps);
  store.encodings.resize(store.reps);
  for (u32 rep = 0; rep < store.reps; ++rep) {
    PreprocessOptions o = opt;
    o.seed = derive_seed(opt.seed, {0x6f726570ULL, rep});
    o.mode = FamilySet::kAvg;
    store.containers.push_back(preprocess(m, o));
    store.encodings[rep].reserve(dists.size());
    for (const auto& d : dists)
      store.encodings[rep].push_back(encode_with(store.containers[rep], d));
  }
  return store;
}

double oracle_query(const OracleStore& store, u32 i, u32 j, u32 rounds,
                    u64 query_seed) {
  if (i >= store.count || j >= store.count)
    throw ValidationError("distribution index out of range");
  std::vector<double> est;
  est.reserve(store.reps);
  for (u32 rep = 0; rep < store.reps; ++rep)
    est.push_back(approx_emd(store.containers[rep].tree,
                             store.encodings[rep][i], store.encodings[rep][j],
                             rounds, derive_seed(query_seed, {rep}))
                      .estimate);
  size_t mid = (est.size() - 1) / 2;
  std::nth_element(est.begin(), est.begin() + mid, est.end());
  return est[mid];
}

std::string oracle_to_bytes(const OracleStore& store) {
  ByteWriter w;
  w.put_magic(kOracleMagic);
  w.put_u16(kVersion);
  w.put_u32(store.count);
  w.put_u32(store.reps);
  w.put_u64(store.master_seed);
  for (const auto& c : store.containers) {
    auto bytes = container_to_bytes(c);
    w.put_u64(bytes.size());
    w.put_bytes(bytes.data(), bytes.size());
  }
  for (const auto& per_rep : store.encodings)
    for (const auto& e : per_rep) {
      auto bytes = encoding_to_bytes(e);
      w.put_u64(bytes.size());
      w.put_bytes(bytes.data(), bytes.size());
    }
  return w.take();
}

OracleStore oracle_from_bytes(const std::string& bytes) {
  ByteReader r(bytes);
  r.expect_magic(kOracleMagic, "oracle store");
  if (r.get_u16() != kVersion) throw FormatError("unsupported store version");
  OracleStore store;
  store.count = r.get_u32();
  store.reps = r.get_u32();
  store.master_seed = r.get_u64();
  store.containers.reserve(store.reps);
  for (u32 rep = 0; rep < store.reps; ++rep)
    store.containers.push_back(container_from_bytes(r.get_blob(size_t(r.get_u64()))));
  store.encodings.resize(store.reps);
  for (u32 rep = 0; rep < store.reps; ++rep) {
    store.encodings[rep].reserve(store.count);
    for (u32 i = 0; i < store.count; ++i)
      store.encodings[rep].push_back(encoding_from_bytes(r.get_blob(size_t(r.get_u64()))));
  }
  r.expect_done("oracle store");
  return store;
}

}  // namespace emdx
