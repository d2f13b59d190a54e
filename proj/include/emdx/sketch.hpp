#pragma once
// Cauchy 1-stable linear sketch of L1 vectors with a median-of-absolute-values
// estimator. The sketch matrix is never materialized: every coefficient is
// regenerated from (seed, row, column), so encoder and estimator stay
// consistent while sharing only the seed.

#include <vector>

#include "emdx/common.hpp"

namespace emdx {

struct SketchSpec {
  u64 dim = 0;  // input dimension (column count)
  u32 k = 1;    // rows; c / rho^2 for target accuracy rho at confidence c
  u64 seed = 0;
};

struct SketchValue {
  std::vector<double> g;
};

// Standard Cauchy variate, deterministic in (seed, row, col).
double cauchy_sample(u64 seed, u64 row, u64 col);

// Streamed accumulation of sum_j alpha_(row,j) * x_j per row, with Neumaier
// compensation (node blocks are later subtracted, so cancellation matters).
class SketchAccumulator {
 public:
  explicit SketchAccumulator(const SketchSpec& spec)
      : spec_(spec), sum_(spec.k, 0.0), comp_(spec.k, 0.0) {}
  void add(u64 col, double value);
  SketchValue take() const;

 private:
  SketchSpec spec_;
  std::vector<double> sum_, comp_;
};

SketchValue sketch_apply(const SketchSpec& spec, const std::vector<double>& x);

// Lower median of the absolute entries.
double median_estimate(const SketchValue& v);

}  // namespace emdx
