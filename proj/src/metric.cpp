#include "emdx/metric.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

namespace emdx {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write file: " + path);
  out.write(bytes.data(), std::streamsize(bytes.size()));
  if (!out) throw ValidationError("short write: " + path);
}

unsigned resolve_threads() {
  if (const char* env = std::getenv("EMDX_THREADS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return unsigned(v);
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc ? hc : 1;
}

i64 FiniteMetric::radius() const {
  if (n <= 1) return 0;
  i64 best = std::numeric_limits<i64>::max();
  for (u32 p = 0; p < n; ++p) {
    i64 far = 0;
    for (u32 q = 0; q < n; ++q) far = std::max(far, (*this)(p, q));
    best = std::min(best, far);
  }
  return best;
}

u32 FiniteMetric::radius_center() const {
  if (n <= 1) return 0;
  i64 best = std::numeric_limits<i64>::max();
  u32 who = 0;
  for (u32 p = 0; p < n; ++p) {
    i64 far = 0;
    for (u32 q = 0; q < n; ++q) far = std::max(far, (*this)(p, q));
    if (far < best) {
      best = far;
      who = p;
    }
  }
  return who;
}

i64 FiniteMetric::diameter() const {
  i64 d = 0;
  for (i64 v : dist) d = std::max(d, v);
  return d;
}

u64 Distribution::total() const {
  u64 s = 0;
  for (u64 m : mass) s += m;
  return s;
}

namespace {

std::string ij(u32 i, u32 j) {
  return "(" + std::to_string(i) + "," + std::to_string(j) + ")";
}

}  // namespace

void validate_metric(const FiniteMetric& m) {
  if (m.dist.size() != size_t(m.n) * m.n)
    throw ValidationError("distance table is not n x n");
  for (u32 i = 0; i < m.n; ++i) {
    if (m(i, i) != 0)
      throw ValidationError("nonzero diagonal at " + ij(i, i) + ": " +
                            std::to_string(m(i, i)));
    for (u32 j = 0; j < m.n; ++j) {
      i64 d = m(i, j);
      if (d < 0)
        throw ValidationError("negative entry at " + ij(i, j) + ": " +
                              std::to_string(d));
      if (j > i) {
        if (d != m(j, i))
          throw ValidationError("asymmetry at " + ij(i, j) + ": " +
                                std::to_string(d) + " vs " +
                                std::to_string(m(j, i)));
        if (d == 0)
          throw ValidationError("zero distance between distinct points " +
                                ij(i, j) + " (duplicate points unsupported)");
      }
    }
  }
  // Safe-magnitude guard so downstream cost arithmetic stays in int64.
  if (m.diameter() > (i64{1} << 40))
    throw ValidationError("distances exceed 2^40 after scaling; rescale input");
  for (u32 i = 0; i < m.n; ++i)
    for (u32 j = i + 1; j < m.n; ++j) {
      i64 dij = m(i, j);
      for (u32 k = 0; k < m.n; ++k) {
        if (dij > m(i, k) + m(k, j))
          throw ValidationError(
              "triangle violation at (" + std::to_string(i) + "," +
              std::to_string(j) + "," + std::to_string(k) + "): " +
              std::to_string(dij) + " > " + std::to_string(m(i, k)) + " + " +
              std::to_string(m(k, j)));
      }
    }
}

void validate_distribution(const Distribution& d, u32 n) {
  if (d.mass.size() != n)
    throw ValidationError("distribution has " + std::to_string(d.mass.size()) +
                          " masses, metric has " + std::to_string(n) +
                          " points");
  if (d.denominator == 0) throw ValidationError("zero denominator");
  u64 sum = 0;
  for (u64 m : d.mass) {
    if (m > d.denominator)
      throw ValidationError("mass entry exceeds denominator");
    sum += m;
    if (sum > d.denominator)
      throw ValidationError("masses sum past the denominator");
  }
  if (sum != d.denominator)
    throw ValidationError("masses sum to " + std::to_string(sum) +
                          ", expected denominator " +
                          std::to_string(d.denominator));
}

namespace {

FiniteMetric metric_from_binary(const std::string& bytes) {
  ByteReader r(bytes);
  r.expect_magic("EMDX", "metric container");
  u16 version = r.get_u16();
  if (version != 1)
    throw FormatError("unsupported metric container version " +
                      std::to_string(version));
  FiniteMetric m;
  m.n = r.get_u32();
  if (r.remaining() != size_t(m.n) * m.n * 8)
    throw FormatError("metric container payload size mismatch");
  m.dist.resize(size_t(m.n) * m.n);
  for (auto& d : m.dist) {
    u64 v = r.get_u64();
    if (v > u64(std::numeric_limits<i64>::max()))
      throw FormatError("distance entry overflows int64");
    d = i64(v);
  }
  return m;
}

FiniteMetric metric_from_csv(const std::string& text, double scale) {
  std::vector<std::vector<double>> rows;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    // Tolerate comments and blank lines.
    size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::vector<double> row;
    std::string cell;
    std::istringstream cells(line);
    while (std::getline(cells, cell, ',')) {
      std::istringstream vs(cell);
      double v;
      if (!(vs >> v)) throw ValidationError("unparsable CSV cell: '" + cell + "'");
      row.push_back(v);
      // Allow whitespace-separated values inside a comma cell too.
      while (vs >> v) row.push_back(v);
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ValidationError("empty metric CSV");
  FiniteMetric m;
  m.n = u32(rows.size());
  m.dist.resize(size_t(m.n) * m.n);
  for (u32 i = 0; i < m.n; ++i) {
    if (rows[i].size() != m.n)
      throw ValidationError("CSV row " + std::to_string(i) + " has " +
                            std::to_string(rows[i].size()) + " cells, expected " +
                            std::to_string(m.n));
    for (u32 j = 0; j < m.n; ++j) {
      double scaled = rows[i][j] * scale;
      if (scaled < 0)
        throw ValidationError("negative entry at " + ij(i, j));
      m.at(i, j) = i64(std::floor(scaled + 0.5));  // round half-up
    }
  }
  return m;
}

}  // namespace

FiniteMetric load_metric(const std::string& bytes, const MetricLoadOptions& opts) {
  FiniteMetric m = (bytes.size() >= 4 && bytes.compare(0, 4, "EMDX") == 0)
                       ? metric_from_binary(bytes)
                       : metric_from_csv(bytes, opts.scale);
  if (opts.validate) validate_metric(m);
  return m;
}

FiniteMetric load_metric_file(const std::string& path, const MetricLoadOptions& opts) {
  return load_metric(read_file(path), opts);
}

std::string metric_to_bytes(const FiniteMetric& m) {
  ByteWriter w;
  w.put_magic("EMDX");
  w.put_u16(1);
  w.put_u32(m.n);
  for (i64 d : m.dist) w.put_u64(u64(d));
  return w.take();
}

Distribution load_distribution(const std::string& bytes) {
  Distribution d;
  if (bytes.size() >= 4 && bytes.compare(0, 4, "EMDD") == 0) {
    ByteReader r(bytes);
    r.expect_magic("EMDD", "distribution container");
    u16 version = r.get_u16();
    if (version != 1)
      throw FormatError("unsupported distribution container version " +
                        std::to_string(version));
    u32 n = r.get_u32();
    d.denominator = r.get_u64();
    if (r.remaining() != size_t(n) * 8)
      throw FormatError("distribution container payload size mismatch");
    d.mass.resize(n);
    for (auto& m : d.mass) m = r.get_u64();
    return d;
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("distribution JSON parse error: ") + e.what());
  }
  const nlohmann::json* arr = nullptr;
  if (j.is_array()) {
    arr = &j;
  } else if (j.is_object() && j.contains("mass")) {
    arr = &j["mass"];
    if (j.contains("denominator")) d.denominator = j["denominator"].get<u64>();
  } else {
    throw ValidationError(
        "distribution JSON must be an array or {\"denominator\", \"mass\"}");
  }
  if (!arr->is_array()) throw ValidationError("distribution mass is not an array");
  for (const auto& v : *arr) {
    if (!v.is_number_unsigned())
      throw ValidationError("distribution masses must be non-negative integers");
    d.mass.push_back(v.get<u64>());
  }
  if (d.denominator == 0) d.denominator = d.total();
  return d;
}

Distribution load_distribution_file(const std::string& path) {
  return load_distribution(read_file(path));
}

std::string distribution_to_bytes(const Distribution& d) {
  ByteWriter w;
  w.put_magic("EMDD");
  w.put_u16(1);
  w.put_u32(u32(d.mass.size()));
  w.put_u64(d.denominator);
  for (u64 m : d.mass) w.put_u64(m);
  return w.take();
}

std::string distribution_to_json(const Distribution& d) {
  nlohmann::json j;
  j["denominator"] = d.denominator;
  j["mass"] = d.mass;
  return j.dump();
}

double estimate_doubling_dimension(const FiniteMetric& m, const DoublingParams& p) {
  if (m.n <= 1) return 0.0;
  std::vector<u32> centers(m.n);
  for (u32 i = 0; i < m.n; ++i) centers[i] = i;
  if (m.n > p.max_centers) {
    Rng rng(p.seed);
    rng.shuffle(centers);
    centers.resize(p.max_centers);
    std::sort(centers.begin(), centers.end());
  }
  i64 diam = m.diameter();
  size_t worst = 1;
  std::vector<u32> ball;
  std::vector<char> covered;
  for (i64 r = 1;; r *= 2) {
    for (u32 c : centers) {
      ball.clear();
      for (u32 q = 0; q < m.n; ++q)
        if (m(c, q) <= r) ball.push_back(q);
      covered.assign(ball.size(), 0);
      size_t count = 0;
      for (size_t i = 0; i < ball.size(); ++i) {
        if (covered[i]) continue;
        ++count;  // ball[i] becomes a half-radius cover center
        for (size_t j = i; j < ball.size(); ++j)
          if (!covered[j] && 2 * m(ball[i], ball[j]) <= r) covered[j] = 1;
      }
      worst = std::max(worst, count);
    }
    if (r >= diam) break;
  }
  return std::log2(double(worst));
}

}  // namespace emdx
