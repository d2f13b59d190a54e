// Acceptance gate: ten end-to-end checks over the full pipeline, one
// [PASS]/[FAIL] line each, exit code = number of failed checks. Tolerances
// and frozen constants are written next to each check.
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "emdx/container.hpp"
#include "emdx/encoding.hpp"
#include "emdx/pipeline.hpp"
#include "emdx/synthetic.hpp"
#include "oracles.hpp"

using namespace emdx;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int idx, bool ok, const std::string& text) {
  std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", idx,
              text.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

FiniteMetric metric_family(const std::string& family, u32 n, u64 seed) {
  if (family == "grid") {
    u32 side = u32(std::lround(std::sqrt(double(n))));
    return grid_metric(side, side);
  }
  if (family == "line") return line_metric(n, 3);
  if (family == "uniform") return uniform_metric(n, 7);
  if (family == "cloud") return random_cloud_metric(n, 2, i64(4) * n, seed);
  return random_generic_metric(n, 64, seed);
}

// ---------------------------------------------------------------- check 1

bool check_exact_oracle() {
  u64 fixtures = 0;
  for (u32 n = 1; n <= 4; ++n) {
    for (u64 den = 1; den <= 12; ++den) {
      for (u64 s = 0; s < 6; ++s) {
        FiniteMetric m = random_generic_metric(n, 9, derive_seed(s, {n, den}));
        Rng rng(derive_seed(s, {den, n, 17}));
        Distribution mu = random_distribution(n, den, rng);
        Distribution nu = random_distribution(n, den, rng);
        i64 want = emdx::test::polytope_emd_units(m, mu, nu);
        i64 got = emd_exact(m, mu, nu).units;
        ++fixtures;
        if (got != want) return false;
      }
    }
  }
  // The structured families at the same scales.
  for (const char* fam : {"grid", "line", "uniform", "cloud"}) {
    FiniteMetric m = metric_family(fam, 4, 5);
    for (u64 den : {1, 7, 12}) {
      Rng rng(derive_seed(31, {den}));
      Distribution mu = random_distribution(m.n, den, rng);
      Distribution nu = random_distribution(m.n, den, rng);
      ++fixtures;
      if (emd_exact(m, mu, nu).units !=
          emdx::test::polytope_emd_units(m, mu, nu))
        return false;
    }
  }
  std::printf("    %llu fixtures, n <= 4, denominator <= 12, exact\n",
              (unsigned long long)fixtures);
  return true;
}

// ---------------------------------------------------------------- check 2

bool check_domination(std::string& note) {
  const std::vector<std::string> fams = {"grid", "line", "uniform", "cloud",
                                         "generic"};
  u64 pairs = 0, violations = 0;
  for (const auto& fam : fams) {
    u32 n = fam == "generic" ? 128 : 256;
    for (u64 seed = 1; seed <= 50; ++seed) {
      FiniteMetric m = metric_family(fam, n, derive_seed(seed, {91}));
      Slhst t = build_slhst(m, 1.0 / 3.0, derive_seed(seed, {92}));
      for (u32 p = 0; p < m.n; ++p)
        for (u32 q = p + 1; q < m.n; ++q) {
          ++pairs;
          if (slhst_distance(t, p, q) < m(p, q)) ++violations;
        }
    }
  }
  note = fmt("%llu pairs over 50 seeds x 5 families, %llu violations",
             (unsigned long long)pairs, (unsigned long long)violations);
  return violations == 0;
}

// ---------------------------------------------------------------- check 3

// Frozen at calibration against this implementation; must stay <= 30.
// Measured worst per-pair mean ratio 24.8 on the 12x12 grid needs C >= 2.4.
constexpr double kDistortionC = 4.0;

bool check_distortion(std::string& note) {
  const u32 side = 12;
  FiniteMetric m = grid_metric(side, side);
  const double eps = 1.0 / 3.0;
  double alpha = estimate_doubling_dimension(m);
  const u32 seeds = 200;

  std::vector<double> ratio_sum(size_t(m.n) * m.n, 0.0);
  std::map<int, u64> histo;  // floor(log2(ratio)) -> count of samples
  for (u64 seed = 1; seed <= seeds; ++seed) {
    Slhst t = build_slhst(m, eps, derive_seed(seed, {93}));
    for (u32 p = 0; p < m.n; ++p)
      for (u32 q = p + 1; q < m.n; ++q) {
        double r = double(slhst_distance(t, p, q)) / double(m(p, q));
        ratio_sum[size_t(p) * m.n + q] += r;
        histo[int(std::floor(std::log2(r)))]++;
      }
  }
  double worst_mean = 0;
  for (u32 p = 0; p < m.n; ++p)
    for (u32 q = p + 1; q < m.n; ++q)
      worst_mean =
          std::max(worst_mean, ratio_sum[size_t(p) * m.n + q] / seeds);

  std::printf("    ratio histogram over all (pair, seed) samples:\n");
  for (const auto& [bucket, count] : histo)
    std::printf("      [%7.2f, %7.2f): %llu\n", std::exp2(double(bucket)),
                std::exp2(double(bucket + 1)), (unsigned long long)count);

  const double bound = kDistortionC * alpha / eps;
  note = fmt(
      "grid %ux%u, worst per-pair mean ratio %.3f <= C*alpha/eps = "
      "%.1f*%.2f/%.3f = %.2f (C frozen, <= 30)",
      side, side, worst_mean, kDistortionC, alpha, eps, bound);
  return worst_mean <= bound && kDistortionC <= 30.0;
}

// ---------------------------------------------------------------- check 4

bool check_decomposition(std::string& note) {
  u32 ok = 0;
  const u32 fixtures = 100;
  for (u32 f = 0; f < fixtures; ++f) {
    Rng rng(derive_seed(f, {94}));
    u32 n = 2 + rng.next_below(63);  // 2..64
    FiniteMetric m = (f % 3 == 0) ? random_generic_metric(n, 32, f)
                                  : random_cloud_metric(n, 2, 3 * i64(n), f);
    n = m.n;  // cloud metrics deduplicate
    Slhst t = build_slhst(m, 1.0 / 3.0, derive_seed(f, {95}));
    Distribution mu = random_distribution(n, u64(n) * n, rng, 0.7);
    Distribution nu = random_distribution(n, u64(n) * n, rng, 0.7);

    std::vector<u64> sub_mu = subtree_mass(t, mu), sub_nu = subtree_mass(t, nu);
    i64 sum = 0;
    for (u32 v : t.inner)
      sum += eemd_exact(t, v, hat_masses(t, sub_mu, v), hat_masses(t, sub_nu, v));

    FiniteMetric dt = emdx::test::dt_metric(t);
    i64 whole = emd_exact(dt, mu, nu).units;
    if (sum == whole) ++ok;
  }
  note = fmt("%u/%u fixtures with sum-of-local-EEMDs == EMD over the explicit "
             "tree-distance table (exact integers)",
             ok, fixtures);
  return ok == fixtures;
}

// ---------------------------------------------------------------- check 5

bool check_sketch_concentration(std::string& note) {
  const double rho = 0.1;
  const u32 vectors = 400;
  const u32 dim = 64;
  const double want[3] = {0.70, 0.90, 0.985};
  const u32 cs[3] = {2, 4, 8};
  double freq[3], lnfail[3];
  for (int ci = 0; ci < 3; ++ci) {
    u32 k = u32(double(cs[ci]) / (rho * rho));
    u32 good = 0;
    for (u32 t = 0; t < vectors; ++t) {
      Rng rng(derive_seed(96, {cs[ci], t}));
      std::vector<double> x(dim);
      double s = 0;
      for (auto& v : x) {
        v = rng.next_double() * 2 - 1;
        s += std::abs(v);
      }
      SketchSpec spec{dim, k, derive_seed(97, {cs[ci], t})};
      double est = median_estimate(sketch_apply(spec, x));
      if (est >= (1 - rho) * s && est <= (1 + rho) * s) ++good;
    }
    freq[ci] = double(good) / vectors;
    lnfail[ci] = std::log(std::max(1.0 - freq[ci], 1.0 / vectors));
  }
  // Least-squares slope of ln(failure rate) against c.
  double cx = (2 + 4 + 8) / 3.0, cy = (lnfail[0] + lnfail[1] + lnfail[2]) / 3;
  double num = 0, den = 0;
  for (int i = 0; i < 3; ++i) {
    num += (cs[i] - cx) * (lnfail[i] - cy);
    den += (cs[i] - cx) * (cs[i] - cx);
  }
  double slope = num / den;

  bool thresholds = freq[0] >= want[0] && freq[1] >= want[1] &&
                    freq[2] >= want[2];
  note = fmt(
      "rho-good frequency at k=c/rho^2: c=2 -> %.3f (need >= 0.70), c=4 -> "
      "%.3f (need >= 0.90), c=8 -> %.3f (need >= 0.985); log-failure slope "
      "%.3f (need < 0)",
      freq[0], freq[1], freq[2], slope);
  if (!thresholds)
    note += "; thresholds exceed the lower-median estimator's attainable "
            "curve at these k (see README notes)";
  return thresholds && slope < 0;
}

// ---------------------------------------------------------------- check 6

bool check_sampler_fidelity(std::string& note) {
  const u32 N = 128;
  const u32 runs = 10000;
  double lg = std::log2(double(N));
  const u32 k = u32(4 * lg * lg * lg);  // 4 * log2(N)^3 = 1372
  const u32 dim_per = 4;

  std::vector<double> w(N);
  std::vector<SketchValue> leaf(N), zero_leaf(N);
  double wsum = 0;
  Rng wr(981);
  for (u32 i = 0; i < N; ++i) {
    std::vector<double> x(size_t(N) * dim_per, 0.0);
    double s = 0;
    for (u32 j = 0; j < dim_per; ++j) {
      x[size_t(i) * dim_per + j] = wr.next_double() * 2 - 1;
      s += std::abs(x[size_t(i) * dim_per + j]);
    }
    w[i] = s;
    wsum += s;
    SketchSpec spec{size_t(N) * dim_per, k, 982};
    leaf[i] = sketch_apply(spec, x);
    zero_leaf[i].g.assign(k, 0.0);
  }
  BinarySamplingTree st = BinarySamplingTree::build(N);
  auto blocks = build_blocks(st, leaf);
  auto zeros = build_blocks(st, zero_leaf);

  std::vector<u32> hits(N, 0);
  Rng rng(983);
  for (u32 r = 0; r < runs; ++r) {
    SampleOutcome out = b_import_sample(st, blocks, zeros, rng);
    if (!out.zero) hits[out.index]++;
  }
  u32 bad = 0;
  double worst_margin = 1e9;
  for (u32 i = 0; i < N; ++i) {
    double target = 0.5 * w[i] / wsum;
    double sigma = std::sqrt(target * (1 - target) / runs);
    double freq = double(hits[i]) / runs;
    worst_margin = std::min(worst_margin, freq - (target - 3 * sigma));
    if (freq < target - 3 * sigma) ++bad;
  }
  note = fmt("N=%u, k=%u, %u runs: every index >= half its weight share minus "
             "3 sigma (%u below, worst margin %+.5f)",
             N, k, runs, bad, worst_margin);
  return bad == 0;
}

// ------------------------------------------------------- checks 7 and 8

struct PairResults {
  u32 pairs = 0;
  u32 linear_in_band = 0;
  u32 linear_below_half_exact = 0;
  u32 approx_in_band = 0;
  u32 approx_below_half_exact = 0;
  u64 worst_reads = 0;
  u64 read_bound = 0;
};

PairResults run_theorem_paths() {
  PairResults res;
  FiniteMetric m = random_cloud_metric(256, 2, 1024, 7001);
  PreprocessOptions opt;
  opt.seed = 7002;
  opt.k = 256;
  PreprocessContainer c = preprocess(m, opt);

  const u32 dists = 15;
  Rng rng(7003);
  std::vector<Distribution> ds;
  std::vector<Encoding> encs;
  for (u32 i = 0; i < dists; ++i) {
    ds.push_back(random_distribution(m.n, u64(m.n) * m.n, rng, 0.6));
    encs.push_back(encode_with(c, ds.back()));
  }
  DegreeReport deg = degree_and_size_report(c.tree);
  u32 log_n = 0;
  while ((u32(1) << log_n) < c.tree.inner.size()) ++log_n;
  res.read_bound = 4 * (u64(opt.k) * log_n + deg.max_degree);

  const u32 samples = default_linear_samples(m.n);   // 192
  const u32 rounds = 4 * default_rounds(m.n);        // 256 walks

  for (u32 i = 0; i < dists && res.pairs < 100; ++i)
    for (u32 j = i + 1; j < dists && res.pairs < 100; ++j) {
      ++res.pairs;
      double exact = emd_exact(m, ds[i], ds[j]).value();
      double tree = emd_slhst(c.tree, ds[i], ds[j]).value();

      LinearEstimate lin = estimate_emd_linear(
          c.tree, c.fams_min, ds[i], ds[j], samples, derive_seed(7004, {i, j}));
      if (lin.estimate >= 0.5 * tree && lin.estimate <= 1.5 * tree)
        ++res.linear_in_band;
      if (lin.estimate < 0.5 * exact) ++res.linear_below_half_exact;

      ApproxResult ap =
          approx_emd(c.tree, encs[i], encs[j], rounds, derive_seed(7005, {i, j}));
      if (ap.estimate >= 0.5 * tree && ap.estimate <= 1.5 * tree)
        ++res.approx_in_band;
      if (ap.estimate < 0.5 * exact) ++res.approx_below_half_exact;
      u64 reads = ap.max_blocks_per_round * opt.k + ap.max_raw_per_round;
      res.worst_reads = std::max(res.worst_reads, reads);
    }
  return res;
}

// ---------------------------------------------------------------- check 9

bool check_protocol(std::string& note) {
  fs::path dir = fs::temp_directory_path() /
                 ("emdx_acc_" + std::to_string(u64(::getpid())));
  fs::create_directories(dir);
  auto at = [&](const std::string& f) { return (dir / f).string(); };

  u32 runs = 0, equal = 0, within_budget = 0;
  for (u64 seed = 1; seed <= 10; ++seed) {
    FiniteMetric m = random_cloud_metric(64, 2, 256, derive_seed(seed, {98}));
    write_file(at("m.emdx"), metric_to_bytes(m));
    Rng rng(derive_seed(seed, {99}));
    Distribution mu = random_distribution(m.n, u64(m.n) * m.n, rng, 0.5);
    Distribution nu = random_distribution(m.n, u64(m.n) * m.n, rng, 0.5);
    write_file(at("mu.emdd"), distribution_to_bytes(mu));
    write_file(at("nu.emdd"), distribution_to_bytes(nu));

    PreprocessOptions opt;
    opt.seed = derive_seed(seed, {100});
    opt.k = 64;
    cli_preprocess(at("m.emdx"), opt, at("c.emdp"));
    cli_encode(at("c.emdp"), at("mu.emdd"), at("a.emde"));
    cli_encode(at("c.emdp"), at("nu.emdd"), at("b.emde"));

    const u32 rounds = 32;
    const u64 qseed = derive_seed(seed, {101});
    ProtocolReport pro =
        cli_protocol(at("c.emdp"), at("mu.emdd"), at("nu.emdd"), rounds, qseed);
    EstimateReport est =
        cli_estimate(at("c.emdp"), at("a.emde"), at("b.emde"), rounds, qseed);
    ++runs;
    if (pro.estimate == est.estimate) ++equal;  // bit-for-bit
    if (pro.bytes_exchanged <= pro.byte_budget) ++within_budget;
  }
  fs::remove_all(dir);
  note = fmt("%u/%u runs bit-equal to the file estimator, %u/%u within the "
             "byte budget",
             equal, runs, within_budget, runs);
  return equal == runs && within_budget == runs;
}

// --------------------------------------------------------------- check 10

bool check_determinism(std::string& note) {
  fs::path dir = fs::temp_directory_path() /
                 ("emdx_det_" + std::to_string(u64(::getpid())));
  fs::create_directories(dir);
  auto at = [&](const std::string& f) { return (dir / f).string(); };

  FiniteMetric m = random_cloud_metric(48, 2, 128, 551);
  write_file(at("m.emdx"), metric_to_bytes(m));
  Rng rng(552);
  Distribution mu = random_distribution(m.n, u64(m.n) * m.n, rng);
  Distribution nu = random_distribution(m.n, u64(m.n) * m.n, rng);
  write_file(at("mu.emdd"), distribution_to_bytes(mu));
  write_file(at("nu.emdd"), distribution_to_bytes(nu));

  PreprocessOptions opt;
  opt.seed = 553;
  opt.k = 64;
  bool ok = true;
  for (int pass = 0; pass < 2; ++pass) {
    std::string tag = pass ? "2" : "1";
    cli_preprocess(at("m.emdx"), opt, at("c" + tag + ".emdp"));
    cli_encode(at("c" + tag + ".emdp"), at("mu.emdd"), at("a" + tag + ".emde"));
    cli_encode(at("c" + tag + ".emdp"), at("nu.emdd"), at("b" + tag + ".emde"));
    cli_oracle_build(at("m.emdx"), {at("mu.emdd"), at("nu.emdd")}, opt,
                     at("o" + tag + ".emdo"));
  }
  for (const char* f : {"c", "a", "b", "o"}) {
    std::string ext = f[0] == 'c' ? ".emdp" : f[0] == 'o' ? ".emdo" : ".emde";
    if (read_file(at(std::string(f) + "1" + ext)) !=
        read_file(at(std::string(f) + "2" + ext)))
      ok = false;
  }
  EstimateReport e1 = cli_estimate(at("c1.emdp"), at("a1.emde"), at("b1.emde"),
                                   64, 554);
  EstimateReport e2 = cli_estimate(at("c2.emdp"), at("a2.emde"), at("b2.emde"),
                                   64, 554);
  QueryReport q1 = cli_query(at("c1.emdp"), at("mu.emdd"), at("nu.emdd"), 64, 555);
  QueryReport q2 = cli_query(at("c2.emdp"), at("mu.emdd"), at("nu.emdd"), 64, 555);
  OracleQueryReport o1 = cli_oracle_query(at("o1.emdo"), 0, 1, 32, 556);
  OracleQueryReport o2 = cli_oracle_query(at("o2.emdo"), 0, 1, 32, 556);
  bool outputs = e1.estimate == e2.estimate && e1.zero_rounds == e2.zero_rounds &&
                 q1.estimate == q2.estimate && q1.weight_total == q2.weight_total &&
                 o1.estimate == o2.estimate;
  fs::remove_all(dir);
  note = fmt("artifacts byte-identical: %s; estimator outputs bit-identical: %s",
             ok ? "yes" : "NO", outputs ? "yes" : "NO");
  return ok && outputs;
}

}  // namespace

int main() {
  using clock = std::chrono::steady_clock;
  auto t0 = clock::now();
  std::string note;

  bool c1 = check_exact_oracle();
  report(1, c1, "exact solver equals transportation-polytope enumeration");

  bool c2 = check_domination(note);
  report(2, c2, "tree distances dominate the base metric — " + note);

  bool c3 = check_distortion(note);
  report(3, c3, "expected distortion within the frozen bound — " + note);

  bool c4 = check_decomposition(note);
  report(4, c4, "per-vertex decomposition sums to the tree EMD — " + note);

  bool c5 = check_sketch_concentration(note);
  report(5, c5, "sketch concentration — " + note);

  bool c6 = check_sampler_fidelity(note);
  report(6, c6, "sampler selection frequencies — " + note);

  PairResults pr = run_theorem_paths();
  bool c7 = pr.linear_in_band >= 85 && pr.linear_below_half_exact == 0;
  report(7, c7,
         fmt("linear estimator: %u/%u pairs in [0.5, 1.5] x tree EMD (need >= "
             "85), %u below half the true EMD (need 0)",
             pr.linear_in_band, pr.pairs, pr.linear_below_half_exact));

  bool c8 = pr.approx_in_band >= 85 && pr.approx_below_half_exact == 0 &&
            pr.worst_reads <= pr.read_bound;
  report(8, c8,
         fmt("sublinear estimator: %u/%u pairs in band (need >= 85), %u below "
             "half the true EMD (need 0), worst per-round reads %llu <= %llu",
             pr.approx_in_band, pr.pairs, pr.approx_below_half_exact,
             (unsigned long long)pr.worst_reads,
             (unsigned long long)pr.read_bound));

  bool c9 = check_protocol(note);
  report(9, c9, "protocol equivalence and byte accounting — " + note);

  bool c10 = check_determinism(note);
  report(10, c10, "determinism — " + note);

  double secs = std::chrono::duration<double>(clock::now() - t0).count();
  std::printf("criteria passed: %d/10 in %.1f s\n", 10 - g_failures, secs);
  return g_failures;
}
