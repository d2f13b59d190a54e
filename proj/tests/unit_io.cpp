#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <string>
#include <vector>

#include "emdx/container.hpp"
#include "emdx/pipeline.hpp"
#include "emdx/synthetic.hpp"

using namespace emdx;
namespace fs = std::filesystem;

namespace {

// Scratch directory for pipeline tests; wiped per fixture.
struct TmpDir {
  fs::path dir;
  TmpDir() {
    dir = fs::temp_directory_path() /
          ("emdx_io_" + std::to_string(u64(::getpid())));
    fs::create_directories(dir);
  }
  ~TmpDir() { fs::remove_all(dir); }
  std::string operator/(const std::string& name) const {
    return (dir / name).string();
  }
};

PreprocessContainer small_container(FamilySet mode = FamilySet::kBoth) {
  FiniteMetric m = grid_metric(4, 4);
  PreprocessOptions opt;
  opt.seed = 42;
  opt.mode = mode;
  opt.k = 32;
  return preprocess(m, opt);
}

}  // namespace

TEST_CASE("container serialization round-trips byte-identically") {
  PreprocessContainer c = small_container();
  std::string bytes = container_to_bytes(c);
  PreprocessContainer back = container_from_bytes(bytes);
  CHECK(container_to_bytes(back) == bytes);

  CHECK(back.manifest.master_seed == c.manifest.master_seed);
  CHECK(back.manifest.metric_hash == c.manifest.metric_hash);
  CHECK(back.manifest.k == c.manifest.k);
  CHECK(back.manifest.eps == c.manifest.eps);
  CHECK(back.tree.n == c.tree.n);
  CHECK(back.tree.h == c.tree.h);
  CHECK(back.tree.inner == c.tree.inner);
  CHECK(back.tree.verts.size() == c.tree.verts.size());
  CHECK(back.fams_min.size() == c.fams_min.size());
  CHECK(back.fams_avg.size() == c.fams_avg.size());
  CHECK(back.context_id() == c.context_id());
}

TEST_CASE("preprocess is deterministic for equal inputs") {
  PreprocessContainer a = small_container();
  PreprocessContainer b = small_container();
  CHECK(container_to_bytes(a) == container_to_bytes(b));

  PreprocessOptions opt;
  opt.seed = 43;  // a different seed must perturb the artifact
  opt.k = 32;
  PreprocessContainer c = preprocess(grid_metric(4, 4), opt);
  CHECK(container_to_bytes(a) != container_to_bytes(c));
}

TEST_CASE("encoding serialization round-trips byte-identically") {
  PreprocessContainer c = small_container();
  Rng rng(7);
  Distribution mu = random_distribution(c.tree.n, 256, rng);
  Encoding e = encode_with(c, mu);
  std::string bytes = encoding_to_bytes(e);
  Encoding back = encoding_from_bytes(bytes);
  CHECK(encoding_to_bytes(back) == bytes);
  CHECK(back.context_id == e.context_id);
  CHECK(back.n == e.n);
  CHECK(back.N == e.N);
  CHECK(back.k == e.k);
  CHECK(back.denominator == e.denominator);
  REQUIRE(back.blocks.size() == e.blocks.size());
  for (size_t i = 0; i < e.blocks.size(); ++i)
    CHECK(back.blocks[i].g == e.blocks[i].g);  // bit-exact doubles
  CHECK(back.raw == e.raw);
}

TEST_CASE("encode_with matches the low-level encode call") {
  PreprocessContainer c = small_container();
  Rng rng(8);
  Distribution mu = random_distribution(c.tree.n, 256, rng);
  Encoding hi = encode_with(c, mu);
  Encoding lo = encode(c.tree, c.fams_avg, mu, c.manifest.k, c.sketch_seed(),
                       c.context_id());
  CHECK(encoding_to_bytes(hi) == encoding_to_bytes(lo));
}

TEST_CASE("encode_with requires averaged families") {
  PreprocessContainer c = small_container(FamilySet::kMin);
  Rng rng(9);
  Distribution mu = random_distribution(c.tree.n, 256, rng);
  CHECK_THROWS_AS(encode_with(c, mu), ValidationError);
}

TEST_CASE("metric_hash is stable and input-sensitive") {
  FiniteMetric m = grid_metric(3, 3);
  u64 h1 = metric_hash(m);
  CHECK(h1 == metric_hash(m));
  FiniteMetric m2 = m;
  m2.at(1, 2) += 1;
  m2.at(2, 1) += 1;
  CHECK(metric_hash(m2) != h1);
  CHECK(metric_hash(grid_metric(3, 4)) != h1);
}

TEST_CASE("oracle store round-trips and answers deterministically") {
  FiniteMetric m = random_cloud_metric(20, 2, 32, 111);
  Rng rng(112);
  std::vector<Distribution> dists;
  for (int i = 0; i < 3; ++i)
    dists.push_back(random_distribution(m.n, u64(m.n) * m.n, rng));
  PreprocessOptions opt;
  opt.seed = 113;
  opt.k = 32;
  OracleStore store = oracle_build(m, dists, opt);
  CHECK(store.count == 3);
  CHECK(store.reps >= 1);
  REQUIRE(store.containers.size() == store.reps);
  REQUIRE(store.encodings.size() == store.reps);
  for (const auto& per_rep : store.encodings) CHECK(per_rep.size() == 3);
  // Repetitions must be independent preprocessings.
  if (store.reps > 1)
    CHECK(container_to_bytes(store.containers[0]) !=
          container_to_bytes(store.containers[1]));

  std::string bytes = oracle_to_bytes(store);
  OracleStore back = oracle_from_bytes(bytes);
  CHECK(oracle_to_bytes(back) == bytes);

  double q1 = oracle_query(store, 0, 1, 32, 999);
  CHECK(q1 == oracle_query(back, 0, 1, 32, 999));
  CHECK(oracle_query(store, 0, 0, 32, 999) == 0.0);
  CHECK_THROWS_AS(oracle_query(store, 0, 3, 32, 999), ValidationError);
}

TEST_CASE("cli pipeline: preprocess, encode, estimate, query, protocol") {
  TmpDir tmp;
  FiniteMetric m = grid_metric(5, 5);
  write_file(tmp / "m.emdx", metric_to_bytes(m));
  Rng rng(21);
  Distribution mu = random_distribution(m.n, u64(m.n) * m.n, rng, 0.5);
  Distribution nu = random_distribution(m.n, u64(m.n) * m.n, rng, 0.5);
  write_file(tmp / "mu.emdd", distribution_to_bytes(mu));
  write_file(tmp / "nu.emdd", distribution_to_bytes(nu));

  PreprocessOptions opt;
  opt.seed = 22;
  opt.k = 64;
  PreprocessReport pre = cli_preprocess(tmp / "m.emdx", opt, tmp / "c.emdp");
  CHECK(pre.n == 25);
  CHECK(pre.bytes == fs::file_size(tmp / "c.emdp"));
  CHECK(pre.inner_count > 0);
  CHECK(pre.vertex_count >= pre.inner_count + 25);
  CHECK(pre.max_degree >= 2);

  EncodeReport ea = cli_encode(tmp / "c.emdp", tmp / "mu.emdd", tmp / "a.emde");
  EncodeReport eb = cli_encode(tmp / "c.emdp", tmp / "nu.emdd", tmp / "b.emde");
  CHECK(ea.n == 25);
  CHECK(ea.N == pre.inner_count);
  CHECK(ea.k == 64);
  CHECK(ea.bytes == fs::file_size(tmp / "a.emde"));
  CHECK(ea.block_bytes == u64(2 * ea.N - 1) * ea.k * 8);

  EstimateReport est =
      cli_estimate(tmp / "c.emdp", tmp / "a.emde", tmp / "b.emde", 64, 23);
  CHECK(est.rounds == 64);
  CHECK(est.estimate > 0);
  // Re-running the estimate is bit-identical.
  EstimateReport est2 =
      cli_estimate(tmp / "c.emdp", tmp / "a.emde", tmp / "b.emde", 64, 23);
  CHECK(est.estimate == est2.estimate);
  CHECK(est.zero_rounds == est2.zero_rounds);

  QueryReport q = cli_query(tmp / "c.emdp", tmp / "mu.emdd", tmp / "nu.emdd",
                            128, 24);
  CHECK(q.samples == 128);
  CHECK(q.estimate > 0);
  CHECK(q.weight_total > 0);
  QueryReport q2 = cli_query(tmp / "c.emdp", tmp / "mu.emdd", tmp / "nu.emdd",
                             128, 24);
  CHECK(q.estimate == q2.estimate);

  ProtocolReport pro =
      cli_protocol(tmp / "c.emdp", tmp / "mu.emdd", tmp / "nu.emdd", 64, 25);
  CHECK(pro.rounds == 64);
  CHECK(pro.bytes_exchanged > 0);
  CHECK(pro.bytes_exchanged <= pro.byte_budget);
  // The protocol reproduces the file-based estimator bit for bit.
  EstimateReport est3 =
      cli_estimate(tmp / "c.emdp", tmp / "a.emde", tmp / "b.emde", 64, 25);
  CHECK(pro.estimate == est3.estimate);
}

TEST_CASE("cli estimate rejects foreign encodings") {
  TmpDir tmp;
  FiniteMetric m = grid_metric(4, 4);
  write_file(tmp / "m.emdx", metric_to_bytes(m));
  Rng rng(31);
  Distribution mu = random_distribution(m.n, 256, rng);
  write_file(tmp / "mu.emdd", distribution_to_bytes(mu));

  PreprocessOptions opt;
  opt.seed = 32;
  opt.k = 32;
  cli_preprocess(tmp / "m.emdx", opt, tmp / "c1.emdp");
  opt.seed = 33;
  cli_preprocess(tmp / "m.emdx", opt, tmp / "c2.emdp");

  cli_encode(tmp / "c1.emdp", tmp / "mu.emdd", tmp / "a1.emde");
  cli_encode(tmp / "c2.emdp", tmp / "mu.emdd", tmp / "a2.emde");
  CHECK_THROWS_AS(
      cli_estimate(tmp / "c1.emdp", tmp / "a1.emde", tmp / "a2.emde", 8, 1),
      FormatError);
  // Both encodings from the wrong container: rejected against it too.
  CHECK_THROWS_AS(
      cli_estimate(tmp / "c2.emdp", tmp / "a1.emde", tmp / "a1.emde", 8, 1),
      FormatError);
}

TEST_CASE("cli query requires min families and consistent denominators") {
  TmpDir tmp;
  FiniteMetric m = grid_metric(4, 4);
  write_file(tmp / "m.emdx", metric_to_bytes(m));
  Rng rng(41);
  Distribution mu = random_distribution(m.n, 256, rng);
  Distribution nu = random_distribution(m.n, 512, rng);
  write_file(tmp / "mu.emdd", distribution_to_bytes(mu));
  write_file(tmp / "nu.emdd", distribution_to_bytes(nu));

  PreprocessOptions opt;
  opt.seed = 42;
  opt.k = 32;
  opt.mode = FamilySet::kAvg;
  cli_preprocess(tmp / "m.emdx", opt, tmp / "avg.emdp");
  CHECK_THROWS_AS(
      cli_query(tmp / "avg.emdp", tmp / "mu.emdd", tmp / "mu.emdd", 8, 1),
      ValidationError);

  opt.mode = FamilySet::kBoth;
  cli_preprocess(tmp / "m.emdx", opt, tmp / "both.emdp");
  CHECK_THROWS_AS(
      cli_query(tmp / "both.emdp", tmp / "mu.emdd", tmp / "nu.emdd", 8, 1),
      ValidationError);
}

TEST_CASE("cli dump-exact returns the transport optimum and plan") {
  TmpDir tmp;
  FiniteMetric m = line_metric(4, 2);
  write_file(tmp / "m.emdx", metric_to_bytes(m));
  Distribution mu{{3, 0, 0, 1}, 4};
  Distribution nu{{0, 2, 2, 0}, 4};
  write_file(tmp / "mu.emdd", distribution_to_bytes(mu));
  write_file(tmp / "nu.emdd", distribution_to_bytes(nu));
  DumpReport rep =
      cli_dump_exact(tmp / "m.emdx", tmp / "mu.emdd", tmp / "nu.emdd", true);
  // By hand: masses (3,0,0,1) -> (0,2,2,0) on the line 0,2,4,6. Two units
  // move 0->1 (distance 2 each), one 0->2 (4), one 3->2 (2): 10 units / 4.
  CHECK(rep.units == 10);
  CHECK(rep.denominator == 4);
  CHECK(rep.value == doctest::Approx(2.5));
  REQUIRE(rep.plan.n == 4);
  i64 plan_cost = 0;
  for (u32 p = 0; p < 4; ++p) {
    i64 row = 0, col = 0;
    for (u32 q = 0; q < 4; ++q) {
      CHECK(rep.plan.at(p, q) >= 0);
      row += rep.plan.at(p, q);
      col += rep.plan.at(q, p);
      plan_cost += rep.plan.at(p, q) * m(p, q);
    }
    CHECK(row == i64(mu.mass[p]));  // plan marginals match the inputs
    CHECK(col == i64(nu.mass[p]));
  }
  CHECK(plan_cost == rep.units);
}

TEST_CASE("cli oracle build and query over files") {
  TmpDir tmp;
  FiniteMetric m = grid_metric(4, 4);
  write_file(tmp / "m.emdx", metric_to_bytes(m));
  Rng rng(51);
  std::vector<std::string> dist_paths;
  for (int i = 0; i < 3; ++i) {
    Distribution d = random_distribution(m.n, 256, rng);
    std::string p = tmp / ("d" + std::to_string(i) + ".emdd");
    write_file(p, distribution_to_bytes(d));
    dist_paths.push_back(p);
  }
  PreprocessOptions opt;
  opt.seed = 52;
  opt.k = 32;
  OracleBuildReport rep =
      cli_oracle_build(tmp / "m.emdx", dist_paths, opt, tmp / "o.emdo");
  CHECK(rep.count == 3);
  CHECK(rep.bytes == fs::file_size(tmp / "o.emdo"));
  OracleQueryReport q1 = cli_oracle_query(tmp / "o.emdo", 0, 2, 32, 53);
  OracleQueryReport q2 = cli_oracle_query(tmp / "o.emdo", 0, 2, 32, 53);
  CHECK(q1.estimate == q2.estimate);
  CHECK(q1.reps == rep.reps);
  OracleQueryReport same = cli_oracle_query(tmp / "o.emdo", 1, 1, 32, 53);
  CHECK(same.estimate == 0.0);
}

TEST_CASE("missing and corrupt files raise the documented errors") {
  TmpDir tmp;
  CHECK_THROWS_AS(cli_dump_exact(tmp / "absent.emdx", tmp / "a", tmp / "b",
                                 false),
                  ValidationError);
  write_file(tmp / "junk.emdp", "XXXXnot a container");
  CHECK_THROWS_AS(cli_encode(tmp / "junk.emdp", tmp / "mu.emdd", tmp / "out"),
                  FormatError);
  PreprocessContainer c = small_container();
  std::string good = container_to_bytes(c);
  write_file(tmp / "trunc.emdp", good.substr(0, good.size() / 2));
  CHECK_THROWS_AS(container_from_bytes(read_file(tmp / "trunc.emdp")),
                  FormatError);
}

TEST_CASE("bench sweep produces complete rows") {
  BenchConfig cfg;
  cfg.sizes = {16};
  cfg.families = {"grid", "uniform"};
  cfg.k = 16;
  cfg.seed = 61;
  cfg.samples = 16;
  std::vector<BenchRow> rows = cli_bench(cfg);
  REQUIRE(rows.size() == 2);
  for (const auto& r : rows) {
    CHECK(r.n == 16);
    CHECK(r.k == 16);
    CHECK(r.container_bytes > 0);
    CHECK(r.encoding_bytes > 0);
    CHECK(r.preprocess_s >= 0);
    CHECK(r.exact >= 0);        // n=16 is under the exact limit
    CHECK(r.ratio_linear > 0);  // dominating estimates of a positive exact
    CHECK(r.ratio_approx > 0);
  }
  BenchConfig bad = cfg;
  bad.families = {"klein-bottle"};
  CHECK_THROWS_AS(cli_bench(bad), ValidationError);
}
