#pragma once
// End-to-end pipelines behind the CLI verbs: preprocess/persist, the two
// estimators over files, the two-party protocol simulation with byte
// accounting, the oracle store, ground-truth dumps, and the benchmark sweep.

#include <string>
#include <vector>

#include "emdx/container.hpp"
#include "emdx/transport.hpp"

namespace emdx {

struct PreprocessReport {
  u64 bytes = 0;
  u32 n = 0;
  double eps = 0, alpha = 0;
  u32 h = 0, a = 0, b = 0;
  u32 vertex_count = 0, inner_count = 0, max_degree = 0, depth = 0;
  u64 sum_children = 0;
  double size_reference = 0;  // n^(1+eps) * log2(n)^2, the budget yardstick
};

PreprocessReport cli_preprocess(const std::string& metric_path,
                                const PreprocessOptions& opt,
                                const std::string& out_path);

struct QueryReport {
  double estimate = 0;
  double weight_total = 0;
  u32 samples = 0;
};

QueryReport cli_query(const std::string& container_path,
                      const std::string& mu_path, const std::string& nu_path,
                      u32 samples, u64 seed);

struct EncodeReport {
  u64 bytes = 0;
  u32 n = 0, N = 0, k = 0;
  u64 block_bytes = 0;   // sketch section
  u64 raw_entries = 0;   // raw tail entries
};

EncodeReport cli_encode(const std::string& container_path,
                        const std::string& mu_path,
                        const std::string& out_path);

struct EstimateReport {
  double estimate = 0;
  u32 rounds = 0, zero_rounds = 0;
  u64 max_blocks_per_round = 0, max_raw_per_round = 0;
};

EstimateReport cli_estimate(const std::string& container_path,
                            const std::string& enc_a_path,
                            const std::string& enc_b_path, u32 rounds,
                            u64 seed);

struct ProtocolReport {
  double estimate = 0;
  u32 rounds = 0;
  u64 bytes_exchanged = 0;
  u64 byte_budget = 0;
};

ProtocolReport cli_protocol(const std::string& container_path,
                            const std::string& mu_path,
                            const std::string& nu_path, u32 rounds, u64 seed);

struct OracleBuildReport {
  u64 bytes = 0;
  u32 reps = 0, count = 0;
};

OracleBuildReport cli_oracle_build(const std::string& metric_path,
                                   const std::vector<std::string>& dist_paths,
                                   const PreprocessOptions& opt,
                                   const std::string& out_path);

struct OracleQueryReport {
  double estimate = 0;
  u32 reps = 0, rounds = 0;
};

OracleQueryReport cli_oracle_query(const std::string& store_path, u32 i, u32 j,
                                   u32 rounds, u64 seed);

struct DumpReport {
  i64 units = 0;
  u64 denominator = 1;
  double value = 0;
  TransportPlan plan;  // filled when with_plan
};

DumpReport cli_dump_exact(const std::string& metric_path,
                          const std::string& mu_path,
                          const std::string& nu_path, bool with_plan);

struct BenchConfig {
  std::vector<u32> sizes{64, 128, 256};
  std::vector<std::string> families{"grid", "cloud", "uniform"};
  double eps = 1.0 / 3.0;
  u32 k = 64;
  u64 seed = 1;
  u32 samples = 0;       // 0: per-estimator defaults
  u32 exact_limit = 512; // skip emd_exact above this n
};

struct BenchRow {
  std::string family;
  u32 n = 0;
  double eps = 0;
  u32 k = 0;
  double preprocess_s = 0, encode_s = 0, linear_s = 0, approx_s = 0,
         exact_s = 0;
  double exact = -1;  // -1 when skipped
  double linear_d = 0, approx_d = 0;
  double ratio_linear = -1, ratio_approx = -1;
  u64 container_bytes = 0, encoding_bytes = 0;
};

std::vector<BenchRow> cli_bench(const BenchConfig& cfg);

}  // namespace emdx
