#include "emdx/sketch.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace emdx {

double cauchy_sample(u64 seed, u64 row, u64 col) {
  u64 h = hash_combine(hash_combine(seed, row), col);
  // u in (0,1) strictly, so tan stays finite; u = 1/2 maps to exactly 0.
  double u = double(h >> 11) * 0x1.0p-53 + 0x1.0p-54;
  return std::tan(std::numbers::pi * (u - 0.5));
}

void SketchAccumulator::add(u64 col, double value) {
  for (u32 row = 0; row < spec_.k; ++row) {
    double term = cauchy_sample(spec_.seed, row, col) * value;
    double t = sum_[row] + term;
    if (std::abs(sum_[row]) >= std::abs(term))
      comp_[row] += (sum_[row] - t) + term;
    else
      comp_[row] += (term - t) + sum_[row];
    sum_[row] = t;
  }
}

SketchValue SketchAccumulator::take() const {
  SketchValue v;
  v.g.resize(spec_.k);
  for (u32 row = 0; row < spec_.k; ++row) v.g[row] = sum_[row] + comp_[row];
  return v;
}

SketchValue sketch_apply(const SketchSpec& spec, const std::vector<double>& x) {
  if (x.size() != spec.dim)
    throw ValidationError("sketch input dimension mismatch");
  SketchAccumulator acc(spec);
  for (u64 j = 0; j < x.size(); ++j)
    if (x[j] != 0.0) acc.add(j, x[j]);
  return acc.take();
}

double median_estimate(const SketchValue& v) {
  if (v.g.empty()) throw ValidationError("median of an empty sketch");
  std::vector<double> a(v.g.size());
  for (size_t i = 0; i < a.size(); ++i) a[i] = std::abs(v.g[i]);
  size_t mid = (a.size() - 1) / 2;
  std::nth_element(a.begin(), a.begin() + mid, a.end());
  return a[mid];
}

}  // namespace emdx
