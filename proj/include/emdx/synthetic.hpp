#pragma once
// Synthetic metric families and random distributions for tests and benchmarks.

#include "emdx/metric.hpp"

namespace emdx {

// w*h points on an integer grid with L1 (Manhattan) distances.
FiniteMetric grid_metric(u32 w, u32 h);

// n collinear points at the given spacing.
FiniteMetric line_metric(u32 n, i64 spacing = 1);

// All pairwise distances equal to delta.
FiniteMetric uniform_metric(u32 n, i64 delta);

// n random points in [0, side]^dim with L1 distances, deduplicated.
FiniteMetric random_cloud_metric(u32 n, u32 dim, i64 side, u64 seed);

// Random valid metric: random integer edge lengths in [1, max_d] closed under
// shortest paths (Floyd-Warshall), so the triangle inequality holds exactly.
FiniteMetric random_generic_metric(u32 n, i64 max_d, u64 seed);

// Random distribution with the given denominator; mass lands on a subset of
// roughly support_fraction * n points (at least 1), multinomially.
Distribution random_distribution(u32 n, u64 denominator, Rng& rng,
                                 double support_fraction = 1.0);

}  // namespace emdx
