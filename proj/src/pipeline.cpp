#include "emdx/pipeline.hpp"

#include <chrono>
#include <cmath>

#include "emdx/synthetic.hpp"

namespace emdx {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

PreprocessContainer load_container(const std::string& path) {
  return container_from_bytes(read_file(path));
}

// Encodings must match the container they are estimated against — the
// context id ties them to one (tree, families, k, seed) build.
void check_context(const PreprocessContainer& c, const Encoding& e) {
  if (e.context_id != c.context_id())
    throw FormatError("encoding does not match this container (id hash)");
}

u32 protocol_levels(u32 n) { return ceil_log2(std::max<u32>(1, n)); }

}  // namespace

PreprocessReport cli_preprocess(const std::string& metric_path,
                                const PreprocessOptions& opt,
                                const std::string& out_path) {
  FiniteMetric m = load_metric_file(metric_path);
  PreprocessContainer c = preprocess(m, opt);
  std::string bytes = container_to_bytes(c);
  write_file(out_path, bytes);

  PreprocessReport rep;
  rep.bytes = bytes.size();
  rep.n = c.tree.n;
  rep.eps = c.manifest.eps;
  rep.alpha = c.manifest.alpha;
  rep.h = c.tree.h;
  rep.a = c.tree.a;
  rep.b = c.tree.b;
  DegreeReport deg = degree_and_size_report(c.tree);
  rep.vertex_count = deg.vertex_count;
  rep.inner_count = deg.inner_count;
  rep.max_degree = deg.max_degree;
  rep.depth = deg.depth;
  rep.sum_children = deg.sum_children;
  double l = std::log2(double(std::max<u32>(2, c.tree.n)));
  rep.size_reference = std::pow(double(c.tree.n), 1.0 + c.manifest.eps) * l * l;
  return rep;
}

QueryReport cli_query(const std::string& container_path,
                      const std::string& mu_path, const std::string& nu_path,
                      u32 samples, u64 seed) {
  PreprocessContainer c = load_container(container_path);
  if (c.fams_min.empty() && !c.tree.inner.empty())
    throw ValidationError("container was built without min-mode families");
  Distribution mu = load_distribution_file(mu_path);
  Distribution nu = load_distribution_file(nu_path);
  validate_distribution(mu, c.tree.n);
  validate_distribution(nu, c.tree.n);
  QueryReport rep;
  rep.samples = samples ? samples : default_linear_samples(c.tree.n);
  LinearEstimate est =
      estimate_emd_linear(c.tree, c.fams_min, mu, nu, rep.samples, seed);
  rep.estimate = est.estimate;
  rep.weight_total = est.weight_total;
  return rep;
}

EncodeReport cli_encode(const std::string& container_path,
                        const std::string& mu_path,
                        const std::string& out_path) {
  PreprocessContainer c = load_container(container_path);
  Distribution mu = load_distribution_file(mu_path);
  validate_distribution(mu, c.tree.n);
  Encoding e = encode_with(c, mu);
  std::string bytes = encoding_to_bytes(e);
  write_file(out_path, bytes);

  EncodeReport rep;
  rep.bytes = bytes.size();
  rep.n = e.n;
  rep.N = e.N;
  rep.k = e.k;
  rep.block_bytes = u64(e.blocks.size()) * e.k * 8;
  for (const auto& hat : e.raw) rep.raw_entries += hat.size();
  return rep;
}

EstimateReport cli_estimate(const std::string& container_path,
                            const std::string& enc_a_path,
                            const std::string& enc_b_path, u32 rounds,
                            u64 seed) {
  PreprocessContainer c = load_container(container_path);
  Encoding a = encoding_from_bytes(read_file(enc_a_path));
  Encoding b = encoding_from_bytes(read_file(enc_b_path));
  check_context(c, a);
  check_context(c, b);
  u32 m = rounds ? rounds : default_rounds(c.tree.n);
  ApproxResult res = approx_emd(c.tree, a, b, m, seed);
  return {res.estimate, res.rounds, res.zero_rounds, res.max_blocks_per_round,
          res.max_raw_per_round};
}

ProtocolReport cli_protocol(const std::string& container_path,
                            const std::string& mu_path,
                            const std::string& nu_path, u32 rounds, u64 seed) {
  PreprocessContainer c = load_container(container_path);
  Distribution mu = load_distribution_file(mu_path);
  Distribution nu = load_distribution_file(nu_path);
  validate_distribution(mu, c.tree.n);
  validate_distribution(nu, c.tree.n);

  // Party A encodes mu, party B encodes nu; both share the container. A runs
  // the estimator, fetching B's blocks along the walk and B's raw tail at the
  // sampled vertex; those transfers are what the byte counter records.
  Encoding enc_a = encode_with(c, mu);
  Encoding enc_b = encode_with(c, nu);
  ProtocolReport rep;
  rep.rounds = rounds ? rounds : default_rounds(c.tree.n);
  ApproxResult res = approx_emd(c.tree, enc_a, enc_b, rep.rounds, seed);
  rep.estimate = res.estimate;
  rep.bytes_exchanged = res.peer_block_bytes + res.peer_raw_bytes;

  DegreeReport deg = degree_and_size_report(c.tree);
  rep.byte_budget =
      u64(rep.rounds) * (2ull * protocol_levels(enc_a.N) * c.manifest.k * 8 +
                         2ull * deg.max_degree * 8);
  if (rep.bytes_exchanged > rep.byte_budget)
    throw std::logic_error("protocol exceeded its byte budget");
  return rep;
}

OracleBuildReport cli_oracle_build(const std::string& metric_path,
                                   const std::vector<std::string>& dist_paths,
                                   const PreprocessOptions& opt,
                                   const std::string& out_path) {
  FiniteMetric m = load_metric_file(metric_path);
  std::vector<Distribution> dists;
  dists.reserve(dist_paths.size());
  for (const auto& p : dist_paths) {
    dists.push_back(load_distribution_file(p));
    validate_distribution(dists.back(), m.n);
  }
  OracleStore store = oracle_build(m, dists, opt);
  std::string bytes = oracle_to_bytes(store);
  write_file(out_path, bytes);
  return {bytes.size(), store.reps, store.count};
}

OracleQueryReport cli_oracle_query(const std::string& store_path, u32 i, u32 j,
                                   u32 rounds, u64 seed) {
  OracleStore store = oracle_from_bytes(read_file(store_path));
  u32 n = store.containers.empty() ? 2 : store.containers[0].tree.n;
  u32 m = rounds ? rounds : default_rounds(n);
  return {oracle_query(store, i, j, m, seed), store.reps, m};
}

DumpReport cli_dump_exact(const std::string& metric_path,
                          const std::string& mu_path,
                          const std::string& nu_path, bool with_plan) {
  FiniteMetric m = load_metric_file(metric_path);
  Distribution mu = load_distribution_file(mu_path);
  Distribution nu = load_distribution_file(nu_path);
  validate_distribution(mu, m.n);
  validate_distribution(nu, m.n);
  DumpReport rep;
  ExactCost cost = emd_exact(m, mu, nu, with_plan ? &rep.plan : nullptr);
  rep.units = cost.units;
  rep.denominator = cost.denominator;
  rep.value = cost.value();
  return rep;
}

std::vector<BenchRow> cli_bench(const BenchConfig& cfg) {
  std::vector<BenchRow> rows;
  for (const auto& family : cfg.families) {
    for (u32 n : cfg.sizes) {
      FiniteMetric m;
      if (family == "grid") {
        u32 side = u32(std::ceil(std::sqrt(double(n))));
        m = grid_metric(side, (n + side - 1) / side);
      } else if (family == "cloud") {
        m = random_cloud_metric(n, 3, 4 * n, derive_seed(cfg.seed, {n}));
      } else if (family == "uniform") {
        m = uniform_metric(n, 7);
      } else if (family == "line") {
        m = line_metric(n, 3);
      } else if (family == "generic") {
        m = random_generic_metric(n, 64, derive_seed(cfg.seed, {n, 7}));
      } else {
        throw ValidationError("unknown bench family: " + family);
      }

      BenchRow row;
      row.family = family;
      row.n = m.n;
      row.eps = cfg.eps;
      row.k = cfg.k;

      Rng rng(derive_seed(cfg.seed, {0x62656e6368ULL, m.n}));
      Distribution mu = random_distribution(m.n, u64(m.n) * m.n, rng);
      Distribution nu = random_distribution(m.n, u64(m.n) * m.n, rng);

      PreprocessOptions opt;
      opt.eps = cfg.eps;
      opt.seed = derive_seed(cfg.seed, {m.n});
      opt.k = cfg.k;
      auto start = std::chrono::steady_clock::now();
      PreprocessContainer c = preprocess(m, opt);
      row.preprocess_s = seconds_since(start);
      row.container_bytes = container_to_bytes(c).size();

      start = std::chrono::steady_clock::now();
      Encoding ea = encode_with(c, mu);
      Encoding eb = encode_with(c, nu);
      row.encode_s = seconds_since(start);
      row.encoding_bytes = encoding_to_bytes(ea).size();

      u32 lin_samples =
          cfg.samples ? cfg.samples : default_linear_samples(m.n);
      start = std::chrono::steady_clock::now();
      row.linear_d = estimate_emd_linear(c.tree, c.fams_min, mu, nu,
                                         lin_samples, cfg.seed)
                         .estimate;
      row.linear_s = seconds_since(start);

      u32 rounds = cfg.samples ? cfg.samples : default_rounds(m.n);
      start = std::chrono::steady_clock::now();
      row.approx_d = approx_emd(c.tree, ea, eb, rounds, cfg.seed).estimate;
      row.approx_s = seconds_since(start);

      if (m.n <= cfg.exact_limit) {
        start = std::chrono::steady_clock::now();
        row.exact = emd_exact(m, mu, nu).value();
        row.exact_s = seconds_since(start);
        if (row.exact > 0) {
          row.ratio_linear = row.linear_d / row.exact;
          row.ratio_approx = row.approx_d / row.exact;
        }
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace emdx
