#pragma once
// Finite metric spaces, fixed-point distributions, and greedy nets.

#include <optional>
#include <string>
#include <vector>

#include "emdx/common.hpp"

namespace emdx {

// Dense symmetric integer distance table over points 0..n-1. Distances are
// pre-scaled so the minimum nonzero distance is >= 1; validation enforces the
// metric axioms exactly (see validate_metric).
struct FiniteMetric {
  u32 n = 0;
  std::vector<i64> dist;  // row-major n*n
  double alpha = 0.0;     // estimated doubling dimension, 0 = not estimated

  i64 operator()(u32 i, u32 j) const { return dist[size_t(i) * n + j]; }
  i64& at(u32 i, u32 j) { return dist[size_t(i) * n + j]; }

  // R_X = min over p of max over q of d(p,q); 0 for n <= 1.
  i64 radius() const;
  // The point achieving the radius (lowest index on ties); 0 for n <= 1.
  u32 radius_center() const;
  i64 diameter() const;
};

// Fixed-point distribution: `mass` sums to `denominator` exactly. The
// denominator is arbitrary (generators default to n^2).
struct Distribution {
  std::vector<u64> mass;
  u64 denominator = 0;

  u64 total() const;
};

// Greedy net: pairwise center separation > scale, every ground-set point
// within `scale` of some center.
struct Net {
  std::vector<u32> centers;
  i64 scale = 0;
};

struct MetricLoadOptions {
  double scale = 1.0;   // multiply raw distances, round half-up
  bool validate = true;
};

// Throws ValidationError naming the offending entry/pair/triple on: negative
// entries, nonzero diagonal, asymmetry, zero distance between distinct points,
// triangle violations, or unsafe magnitude (see README limits).
void validate_metric(const FiniteMetric& m);

void validate_distribution(const Distribution& d, u32 n);

// Parses CSV (n rows of n comma- or whitespace-separated numbers) or the
// binary container, sniffed by magic. Validates unless opts.validate = false.
FiniteMetric load_metric(const std::string& bytes, const MetricLoadOptions& opts = {});
FiniteMetric load_metric_file(const std::string& path, const MetricLoadOptions& opts = {});

// Binary container: "EMDX" | u16 version=1 | u32 n | n*n u64 LE distances.
std::string metric_to_bytes(const FiniteMetric& m);

// Distribution files: JSON {"denominator": D, "mass": [...]} (or a bare JSON
// array, denominator = sum), or binary "EMDD" | u16 version=1 | u32 n |
// u64 denominator | n u64 LE masses.
Distribution load_distribution(const std::string& bytes);
Distribution load_distribution_file(const std::string& path);
std::string distribution_to_bytes(const Distribution& d);
std::string distribution_to_json(const Distribution& d);

// Heuristic doubling-dimension estimate: log2 of the largest greedy
// half-radius cover over sampled (center, dyadic radius) balls. Upper-bound
// flavored; exactness is not claimed. Deterministic.
struct DoublingParams {
  u32 max_centers = 64;          // ball centers sampled per radius
  u64 seed = 0x5eed5eed5eedULL;  // fixed: estimates are reproducible
};
double estimate_doubling_dimension(const FiniteMetric& m, const DoublingParams& p = {});

// Greedy net over `subset` scanned in tie_order (indices into subset): a point
// becomes a center iff it is > r from every chosen center.
template <class Dist>
Net build_net(const Dist& d, const std::vector<u32>& subset, i64 r,
              const std::vector<u32>& tie_order) {
  Net net;
  net.scale = r;
  for (u32 pos : tie_order) {
    u32 p = subset[pos];
    bool covered = false;
    for (u32 c : net.centers) {
      if (d(p, c) <= r) {
        covered = true;
        break;
      }
    }
    if (!covered) net.centers.push_back(p);
  }
  return net;
}

}  // namespace emdx
