// emdx: approximate Earth Mover Distance over finite doubling metrics.
//
// Verbs:
//   preprocess    build the sibling-linked tree + dominating-tree families
//   query         linear-time importance-sampled estimate from distributions
//   encode        sketch one distribution against a container
//   estimate      sublinear estimate from two encodings
//   protocol      two-party simulation with byte accounting
//   oracle-build  precompute encodings for a set of distributions
//   oracle-query  median-of-replica estimate between two stored distributions
//   bench         timing/accuracy sweep over synthetic inputs
//   dump-exact    exact min-cost transportation (for small inputs)

#include <cinttypes>
#include <cstdio>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "emdx/pipeline.hpp"

namespace {

using namespace emdx;

enum class OutFormat { kText, kJson, kCsv };

OutFormat parse_format(const std::string& s) {
  if (s == "text") return OutFormat::kText;
  if (s == "json") return OutFormat::kJson;
  if (s == "csv") return OutFormat::kCsv;
  throw ValidationError("unknown output format: " + s);
}

FamilySet parse_mode(const std::string& s) {
  if (s == "min") return FamilySet::kMin;
  if (s == "avg") return FamilySet::kAvg;
  if (s == "both") return FamilySet::kBoth;
  throw ValidationError("unknown family mode: " + s);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Flat key/value report; keeps text, json and csv output trivially in sync.
struct Report {
  std::vector<std::pair<std::string, std::string>> fields;
  void add(const std::string& key, const std::string& v) {
    fields.emplace_back(key, v);
  }
  void add(const std::string& key, double v) { add(key, fmt(v)); }
  void add(const std::string& key, u64 v) { add(key, std::to_string(v)); }
  void add(const std::string& key, u32 v) { add(key, std::to_string(v)); }
  void add(const std::string& key, i64 v) { add(key, std::to_string(v)); }

  void print(OutFormat f, bool quoted_strings = false) const {
    switch (f) {
      case OutFormat::kText:
        for (const auto& [k, v] : fields) std::cout << k << ": " << v << "\n";
        break;
      case OutFormat::kJson: {
        std::cout << "{";
        bool first = true;
        for (const auto& [k, v] : fields) {
          if (!first) std::cout << ",";
          first = false;
          bool numeric = !v.empty() && (std::isdigit(u8(v[0])) ||
                                        v[0] == '-' || v[0] == '.');
          if (quoted_strings && !numeric)
            std::cout << "\"" << k << "\":\"" << v << "\"";
          else
            std::cout << "\"" << k << "\":" << v;
        }
        std::cout << "}\n";
        break;
      }
      case OutFormat::kCsv: {
        for (size_t i = 0; i < fields.size(); ++i)
          std::cout << fields[i].first << (i + 1 < fields.size() ? "," : "\n");
        for (size_t i = 0; i < fields.size(); ++i)
          std::cout << fields[i].second << (i + 1 < fields.size() ? "," : "\n");
        break;
      }
    }
  }
};

void print_rows(const std::vector<Report>& rows, OutFormat f) {
  if (rows.empty()) return;
  switch (f) {
    case OutFormat::kText:
      for (const auto& r : rows) {
        r.print(f);
        std::cout << "\n";
      }
      break;
    case OutFormat::kJson: {
      std::cout << "[";
      for (size_t i = 0; i < rows.size(); ++i) {
        if (i) std::cout << ",";
        rows[i].print(f, /*quoted_strings=*/true);
      }
      std::cout << "]\n";
      break;
    }
    case OutFormat::kCsv: {
      const auto& head = rows[0].fields;
      for (size_t i = 0; i < head.size(); ++i)
        std::cout << head[i].first << (i + 1 < head.size() ? "," : "\n");
      for (const auto& r : rows)
        for (size_t i = 0; i < r.fields.size(); ++i)
          std::cout << r.fields[i].second
                    << (i + 1 < r.fields.size() ? "," : "\n");
      break;
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"approximate Earth Mover Distance toolkit"};
  app.require_subcommand(1);

  std::string format = "text";
  app.add_option("--format", format, "output format: text, json or csv")
      ->capture_default_str();

  // preprocess
  auto* pre = app.add_subcommand("preprocess", "build a container from a metric");
  std::string metric_path, out_path = "container.emdp";
  PreprocessOptions popt;
  std::string mode_str = "both";
  pre->add_option("metric", metric_path, "metric file")->required();
  pre->add_option("-o,--out", out_path, "output container path")
      ->capture_default_str();
  pre->add_option("--eps", popt.eps, "tree sparsity parameter in (0, 1/3]")
      ->capture_default_str();
  pre->add_option("--seed", popt.seed, "master seed")->capture_default_str();
  pre->add_option("--k", popt.k, "sketch width")->capture_default_str();
  pre->add_option("--mode", mode_str, "family modes to build: min, avg, both")
      ->capture_default_str();
  pre->add_option("--alpha", popt.alpha_override,
                  "doubling dimension override (0 = estimate)")
      ->capture_default_str();

  // query
  auto* qry = app.add_subcommand("query", "linear-time estimate");
  std::string container_path, mu_path, nu_path;
  u32 samples = 0;
  u64 query_seed = 1;
  qry->add_option("container", container_path, "container file")->required();
  qry->add_option("mu", mu_path, "first distribution")->required();
  qry->add_option("nu", nu_path, "second distribution")->required();
  qry->add_option("--samples", samples, "importance samples (0 = default)")
      ->capture_default_str();
  qry->add_option("--seed", query_seed, "query seed")->capture_default_str();

  // encode
  auto* enc = app.add_subcommand("encode", "sketch a distribution");
  std::string enc_out = "dist.emde";
  enc->add_option("container", container_path, "container file")->required();
  enc->add_option("mu", mu_path, "distribution to encode")->required();
  enc->add_option("-o,--out", enc_out, "output encoding path")
      ->capture_default_str();

  // estimate
  auto* est = app.add_subcommand("estimate", "estimate from two encodings");
  std::string enc_a_path, enc_b_path;
  u32 rounds = 0;
  est->add_option("container", container_path, "container file")->required();
  est->add_option("enc_a", enc_a_path, "first encoding")->required();
  est->add_option("enc_b", enc_b_path, "second encoding")->required();
  est->add_option("--samples", rounds, "sampling rounds (0 = default)")
      ->capture_default_str();
  est->add_option("--seed", query_seed, "query seed")->capture_default_str();

  // protocol
  auto* pro = app.add_subcommand("protocol", "two-party estimate with byte accounting");
  pro->add_option("container", container_path, "container file")->required();
  pro->add_option("mu", mu_path, "party A distribution")->required();
  pro->add_option("nu", nu_path, "party B distribution")->required();
  pro->add_option("--samples", rounds, "sampling rounds (0 = default)")
      ->capture_default_str();
  pro->add_option("--seed", query_seed, "query seed")->capture_default_str();

  // oracle-build
  auto* ob = app.add_subcommand("oracle-build", "precompute an estimate store");
  std::vector<std::string> dist_paths;
  std::string store_out = "store.emdo";
  ob->add_option("metric", metric_path, "metric file")->required();
  ob->add_option("dists", dist_paths, "distribution files")->required();
  ob->add_option("-o,--out", store_out, "output store path")
      ->capture_default_str();
  ob->add_option("--eps", popt.eps, "tree sparsity parameter")
      ->capture_default_str();
  ob->add_option("--seed", popt.seed, "master seed")->capture_default_str();
  ob->add_option("--k", popt.k, "sketch width")->capture_default_str();

  // oracle-query
  auto* oq = app.add_subcommand("oracle-query", "query a prebuilt store");
  u32 idx_i = 0, idx_j = 0;
  oq->add_option("store", store_out, "store file")->required();
  oq->add_option("i", idx_i, "first distribution index")->required();
  oq->add_option("j", idx_j, "second distribution index")->required();
  oq->add_option("--samples", rounds, "sampling rounds per replica (0 = default)")
      ->capture_default_str();
  oq->add_option("--seed", query_seed, "query seed")->capture_default_str();

  // bench
  auto* ben = app.add_subcommand("bench", "synthetic timing/accuracy sweep");
  BenchConfig bcfg;
  ben->add_option("--sizes", bcfg.sizes, "point counts")->capture_default_str();
  ben->add_option("--families", bcfg.families,
                  "metric families: grid, cloud, uniform, line, generic")
      ->capture_default_str();
  ben->add_option("--eps", bcfg.eps, "tree sparsity parameter")
      ->capture_default_str();
  ben->add_option("--k", bcfg.k, "sketch width")->capture_default_str();
  ben->add_option("--seed", bcfg.seed, "seed")->capture_default_str();
  ben->add_option("--samples", bcfg.samples, "rounds/samples (0 = defaults)")
      ->capture_default_str();
  ben->add_option("--exact-limit", bcfg.exact_limit,
                  "largest n to solve exactly")
      ->capture_default_str();

  // dump-exact
  auto* dmp = app.add_subcommand("dump-exact", "exact transportation cost");
  bool with_plan = false;
  dmp->add_option("metric", metric_path, "metric file")->required();
  dmp->add_option("mu", mu_path, "first distribution")->required();
  dmp->add_option("nu", nu_path, "second distribution")->required();
  dmp->add_flag("--plan", with_plan, "also print the optimal flow");

  for (auto* sc : {pre, qry, enc, est, pro, ob, oq, ben, dmp})
    sc->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    OutFormat f = parse_format(format);
    if (*pre) {
      popt.mode = parse_mode(mode_str);
      PreprocessReport r = cli_preprocess(metric_path, popt, out_path);
      Report rep;
      rep.add("bytes", r.bytes);
      rep.add("n", r.n);
      rep.add("eps", r.eps);
      rep.add("alpha", r.alpha);
      rep.add("h", r.h);
      rep.add("a", r.a);
      rep.add("b", r.b);
      rep.add("vertices", r.vertex_count);
      rep.add("inner", r.inner_count);
      rep.add("max_degree", r.max_degree);
      rep.add("depth", r.depth);
      rep.add("sum_children", r.sum_children);
      rep.add("size_reference", r.size_reference);
      rep.print(f);
    } else if (*qry) {
      QueryReport r = cli_query(container_path, mu_path, nu_path, samples,
                                query_seed);
      Report rep;
      rep.add("estimate", r.estimate);
      rep.add("weight_total", r.weight_total);
      rep.add("samples", r.samples);
      rep.print(f);
    } else if (*enc) {
      EncodeReport r = cli_encode(container_path, mu_path, enc_out);
      Report rep;
      rep.add("bytes", r.bytes);
      rep.add("n", r.n);
      rep.add("N", r.N);
      rep.add("k", r.k);
      rep.add("block_bytes", r.block_bytes);
      rep.add("raw_entries", r.raw_entries);
      rep.print(f);
    } else if (*est) {
      EstimateReport r = cli_estimate(container_path, enc_a_path, enc_b_path,
                                      rounds, query_seed);
      Report rep;
      rep.add("estimate", r.estimate);
      rep.add("rounds", r.rounds);
      rep.add("zero_rounds", r.zero_rounds);
      rep.add("max_blocks_per_round", r.max_blocks_per_round);
      rep.add("max_raw_per_round", r.max_raw_per_round);
      rep.print(f);
    } else if (*pro) {
      ProtocolReport r =
          cli_protocol(container_path, mu_path, nu_path, rounds, query_seed);
      Report rep;
      rep.add("estimate", r.estimate);
      rep.add("rounds", r.rounds);
      rep.add("bytes_exchanged", r.bytes_exchanged);
      rep.add("byte_budget", r.byte_budget);
      rep.print(f);
    } else if (*ob) {
      OracleBuildReport r = cli_oracle_build(metric_path, dist_paths, popt,
                                             store_out);
      Report rep;
      rep.add("bytes", r.bytes);
      rep.add("reps", r.reps);
      rep.add("count", r.count);
      rep.print(f);
    } else if (*oq) {
      OracleQueryReport r =
          cli_oracle_query(store_out, idx_i, idx_j, rounds, query_seed);
      Report rep;
      rep.add("estimate", r.estimate);
      rep.add("reps", r.reps);
      rep.add("rounds", r.rounds);
      rep.print(f);
    } else if (*ben) {
      std::vector<Report> rows;
      for (const BenchRow& r : cli_bench(bcfg)) {
        Report rep;
        rep.add("family", r.family);
        rep.add("n", r.n);
        rep.add("eps", r.eps);
        rep.add("k", r.k);
        rep.add("preprocess_s", r.preprocess_s);
        rep.add("encode_s", r.encode_s);
        rep.add("linear_s", r.linear_s);
        rep.add("approx_s", r.approx_s);
        rep.add("exact_s", r.exact_s);
        rep.add("exact", r.exact);
        rep.add("linear", r.linear_d);
        rep.add("approx", r.approx_d);
        rep.add("ratio_linear", r.ratio_linear);
        rep.add("ratio_approx", r.ratio_approx);
        rep.add("container_bytes", r.container_bytes);
        rep.add("encoding_bytes", r.encoding_bytes);
        rows.push_back(std::move(rep));
      }
      print_rows(rows, f);
    } else if (*dmp) {
      DumpReport r = cli_dump_exact(metric_path, mu_path, nu_path, with_plan);
      Report rep;
      rep.add("units", r.units);
      rep.add("denominator", r.denominator);
      rep.add("value", r.value);
      rep.print(f);
      if (with_plan) {
        for (u32 p = 0; p < r.plan.n; ++p)
          for (u32 q = 0; q < r.plan.n; ++q)
            if (r.plan.at(p, q) != 0)
              std::cout << "flow " << p << " -> " << q << ": "
                        << r.plan.at(p, q) << "\n";
      }
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
