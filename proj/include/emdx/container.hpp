#pragma once
// Preprocessing container: the SLHST plus its per-vertex tree families and
// sketch parameters, persisted in a deterministic binary layout so re-runs
// with equal seeds produce byte-identical files. Also the oracle store:
// several independent containers with per-distribution encodings.

#include <string>
#include <vector>

#include "emdx/common.hpp"
#include "emdx/encoding.hpp"
#include "emdx/metric.hpp"
#include "emdx/slhst.hpp"
#include "emdx/tree_family.hpp"

namespace emdx {

enum class FamilySet : u8 { kMin = 0, kAvg = 1, kBoth = 2 };

struct BuildManifest {
  u32 version = 1;
  u64 timestamp = 0;    // SOURCE_DATE_EPOCH if set, else 0 (reproducibility)
  u64 metric_hash = 0;
  double eps = 0;
  double alpha = 0;
  u64 master_seed = 0;
  FamilySet mode = FamilySet::kBoth;
  u32 k = 256;          // sketch rows used by encode
  double c_min = 4.0;   // family-size constants, frozen at build
  double c_avg = 2.0;
};

struct PreprocessContainer {
  BuildManifest manifest;
  Slhst tree;
  std::vector<DominatingTreeFamily> fams_min;  // aligned with tree.inner
  std::vector<DominatingTreeFamily> fams_avg;  // aligned with tree.inner

  u64 sketch_seed() const {
    return derive_seed(manifest.master_seed, {0x736b65746368ULL});
  }
  u64 context_id() const {
    return encoding_context_id(tree, fams_avg, manifest.k, sketch_seed());
  }
};

struct PreprocessOptions {
  double eps = 1.0 / 3.0;
  u64 seed = 1;
  FamilySet mode = FamilySet::kBoth;
  u32 k = 256;
  double alpha_override = 0;  // 0: estimate from the metric
  double c_min = 4.0;
  double c_avg = 2.0;
};

PreprocessContainer preprocess(const FiniteMetric& m,
                               const PreprocessOptions& opt);

std::string container_to_bytes(const PreprocessContainer& c);
PreprocessContainer container_from_bytes(const std::string& bytes);

std::string encoding_to_bytes(const Encoding& e);
Encoding encoding_from_bytes(const std::string& bytes);

Encoding encode_with(const PreprocessContainer& c, const Distribution& mu);

struct OracleStore {
  u32 count = 0;        // stored distributions
  u32 reps = 0;         // independent containers
  u64 master_seed = 0;
  std::vector<PreprocessContainer> containers;    // reps entries
  std::vector<std::vector<Encoding>> encodings;   // [rep][distribution]
};

OracleStore oracle_build(const FiniteMetric& m,
                         const std::vector<Distribution>& dists,
                         const PreprocessOptions& opt, double c_reps = 2.0);

// Median over the repetitions of the sublinear estimate for pair (i, j).
double oracle_query(const OracleStore& store, u32 i, u32 j, u32 rounds,
                    u64 query_seed);

std::string oracle_to_bytes(const OracleStore& store);
OracleStore oracle_from_bytes(const std::string& bytes);

u64 metric_hash(const FiniteMetric& m);

}  // namespace emdx
