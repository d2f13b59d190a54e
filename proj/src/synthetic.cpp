#include "emdx/synthetic.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>

namespace emdx {

FiniteMetric grid_metric(u32 w, u32 h) {
  FiniteMetric m;
  m.n = w * h;
  m.dist.resize(size_t(m.n) * m.n);
  for (u32 a = 0; a < m.n; ++a)
    for (u32 b = 0; b < m.n; ++b) {
      i64 ax = a % w, ay = a / w, bx = b % w, by = b / w;
      m.at(a, b) = std::abs(ax - bx) + std::abs(ay - by);
    }
  return m;
}

FiniteMetric line_metric(u32 n, i64 spacing) {
  FiniteMetric m;
  m.n = n;
  m.dist.resize(size_t(n) * n);
  for (u32 a = 0; a < n; ++a)
    for (u32 b = 0; b < n; ++b)
      m.at(a, b) = spacing * std::abs(i64(a) - i64(b));
  return m;
}

FiniteMetric uniform_metric(u32 n, i64 delta) {
  FiniteMetric m;
  m.n = n;
  m.dist.assign(size_t(n) * n, delta);
  for (u32 a = 0; a < n; ++a) m.at(a, a) = 0;
  return m;
}

FiniteMetric random_cloud_metric(u32 n, u32 dim, i64 side, u64 seed) {
  Rng rng(seed);
  std::set<std::vector<i64>> seen;
  std::vector<std::vector<i64>> pts;
  while (pts.size() < n) {
    std::vector<i64> p(dim);
    for (auto& c : p) c = i64(rng.next_below(u64(side) + 1));
    if (seen.insert(p).second) pts.push_back(std::move(p));
  }
  FiniteMetric m;
  m.n = n;
  m.dist.resize(size_t(n) * n);
  for (u32 a = 0; a < n; ++a)
    for (u32 b = 0; b < n; ++b) {
      i64 d = 0;
      for (u32 k = 0; k < dim; ++k) d += std::abs(pts[a][k] - pts[b][k]);
      m.at(a, b) = d;
    }
  return m;
}

FiniteMetric random_generic_metric(u32 n, i64 max_d, u64 seed) {
  Rng rng(seed);
  FiniteMetric m;
  m.n = n;
  m.dist.resize(size_t(n) * n);
  for (u32 a = 0; a < n; ++a)
    for (u32 b = a + 1; b < n; ++b) {
      i64 d = 1 + i64(rng.next_below(u64(max_d)));
      m.at(a, b) = d;
      m.at(b, a) = d;
    }
  // Metric closure: replace every entry by the shortest path through the
  // complete graph, which enforces the triangle inequality exactly.
  for (u32 k = 0; k < n; ++k)
    for (u32 a = 0; a < n; ++a)
      for (u32 b = 0; b < n; ++b)
        m.at(a, b) = std::min(m(a, b), m(a, k) + m(k, b));
  return m;
}

Distribution random_distribution(u32 n, u64 denominator, Rng& rng,
                                 double support_fraction) {
  Distribution d;
  d.denominator = denominator;
  d.mass.assign(n, 0);
  u32 support = std::max<u32>(1, u32(double(n) * support_fraction));
  support = std::min(support, n);
  std::vector<u32> idx(n);
  for (u32 i = 0; i < n; ++i) idx[i] = i;
  rng.shuffle(idx);
  idx.resize(support);
  for (u64 unit = 0; unit < denominator; ++unit)
    d.mass[idx[rng.next_below(support)]] += 1;
  return d;
}

}  // namespace emdx
