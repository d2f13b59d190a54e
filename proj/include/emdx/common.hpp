#pragma once
// Shared plumbing: error taxonomy, deterministic RNG streams, little-endian
// serialization buffers, hashing, and a small deterministic parallel-for.

#include <bit>
#include <cstdint>
#include <cstring>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace emdx {

using u8 = std::uint8_t;
using u16 = std::uint16_t;
using u32 = std::uint32_t;
using u64 = std::uint64_t;
using i64 = std::int64_t;

// Semantic validation failures (bad metric, mismatched denominators, bad CLI
// input...). The CLI maps this to exit code 2.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Byte-level format problems: wrong magic, unsupported version, truncated
// payload, id-hash mismatch between artifacts. CLI exit code 3.
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using u128 = unsigned __int128;

// All costs are exact int64 sums of mass * distance products. Every solver
// entry point rejects inputs whose worst-case product leaves headroom-safe
// range instead of wrapping: mass_total * scale * 2^slack_bits must stay
// below 2^62. Callers pass the per-unit cost ceiling as `scale` (diameter,
// delta_v, ...) and any constant path factor as slack bits.
inline void check_cost_budget(u64 mass_total, i64 scale, u32 slack_bits = 0) {
  if (scale <= 0) return;
  if (u128(mass_total) * u128(scale) >= (u128(1) << (62 - slack_bits)))
    throw ValidationError(
        "mass times distance exceeds the exact arithmetic budget (2^62)");
}

// ---------------------------------------------------------------------------
// Deterministic randomness.
//
// Everything random in the library flows from SplitMix64 streams or from the
// counter-based mix below, so identical seeds give bit-identical results on
// any platform with IEEE doubles. std::uniform_*_distribution is deliberately
// avoided (its mapping is implementation-defined).

constexpr u64 mix64(u64 z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

// Order-sensitive combination of seed words; used to derive per-vertex,
// per-tree, per-round substreams from one master seed.
constexpr u64 hash_combine(u64 h, u64 w) {
  return mix64((h ^ w) + 0x9e3779b97f4a7c15ULL);
}

inline u64 derive_seed(u64 seed, std::initializer_list<u64> words) {
  u64 h = mix64(seed + 0x9e3779b97f4a7c15ULL);
  for (u64 w : words) h = hash_combine(h, w);
  return h;
}

class Rng {
 public:
  explicit Rng(u64 seed) : state_(seed) {}

  u64 next() {
    u64 z = (state_ += 0x9e3779b97f4a7c15ULL);
    return mix64(z);
  }

  // Unbiased draw from [0, n) by rejection.
  u64 next_below(u64 n) {
    u64 lim = ~u64{0} - (~u64{0} % n + 1) % n;  // last accepted value
    u64 x = next();
    while (x > lim) x = next();
    return x % n;
  }

  // Uniform double in [0, 1), 53 random bits.
  double next_double() { return double(next() >> 11) * 0x1.0p-53; }

  // Fixed-point beta in [1,2) with 62 fractional bits: value = fp / 2^62.
  u64 next_beta_fp() { return (u64{1} << 62) | (next() >> 2); }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[next_below(i)]);
  }

 private:
  u64 state_;
};

// Exact integer test of d <= beta * r / 2 with beta = beta_fp / 2^62.
inline bool within_beta_half(i64 d, u64 beta_fp, i64 r) {
  if (d < 0) return true;
  return (unsigned __int128)(u64)d << 63 <=
         (unsigned __int128)beta_fp * (unsigned __int128)(u64)r;
}

// ---------------------------------------------------------------------------
// Little-endian byte buffers. All on-disk formats go through these, so the
// layouts in docs/FORMATS.md hold on any host.

class ByteWriter {
 public:
  void put_u8(u8 v) { buf_.push_back(char(v)); }
  void put_u16(u16 v) { put_le(v); }
  void put_u32(u32 v) { put_le(v); }
  void put_u64(u64 v) { put_le(v); }
  void put_i64(i64 v) { put_le(static_cast<u64>(v)); }
  void put_f64(double v) { put_le(std::bit_cast<u64>(v)); }
  void put_bytes(const void* p, size_t n) {
    buf_.append(static_cast<const char*>(p), n);
  }
  void put_magic(const char m[4]) { buf_.append(m, 4); }

  const std::string& bytes() const { return buf_; }
  std::string take() { return std::move(buf_); }

 private:
  template <class T>
  void put_le(T v) {
    char b[sizeof(T)];
    for (size_t i = 0; i < sizeof(T); ++i) b[i] = char((v >> (8 * i)) & 0xff);
    buf_.append(b, sizeof(T));
  }
  std::string buf_;
};

class ByteReader {
 public:
  ByteReader(const void* data, size_t size)
      : p_(static_cast<const unsigned char*>(data)), end_(p_ + size) {}
  explicit ByteReader(const std::string& s) : ByteReader(s.data(), s.size()) {}

  u8 get_u8() { return static_cast<u8>(*need(1)); }
  u16 get_u16() { return get_le<u16>(); }
  u32 get_u32() { return get_le<u32>(); }
  u64 get_u64() { return get_le<u64>(); }
  i64 get_i64() { return static_cast<i64>(get_le<u64>()); }
  double get_f64() { return std::bit_cast<double>(get_le<u64>()); }
  void expect_magic(const char m[4], const char* what) {
    const unsigned char* p = need(4);
    if (std::memcmp(p, m, 4) != 0)
      throw FormatError(std::string("bad magic for ") + what);
  }
  std::string get_blob(size_t n) {
    const unsigned char* p = need(n);
    return std::string(reinterpret_cast<const char*>(p), n);
  }
  size_t remaining() const { return size_t(end_ - p_); }
  bool done() const { return p_ == end_; }
  void expect_done(const char* what) {
    if (!done()) throw FormatError(std::string("trailing bytes in ") + what);
  }

 private:
  const unsigned char* need(size_t n) {
    if (size_t(end_ - p_) < n) throw FormatError("truncated input");
    const unsigned char* q = p_;
    p_ += n;
    return q;
  }
  template <class T>
  T get_le() {
    const unsigned char* p = need(sizeof(T));
    T v = 0;
    for (size_t i = 0; i < sizeof(T); ++i) v |= T(p[i]) << (8 * i);
    return v;
  }
  const unsigned char* p_;
  const unsigned char* end_;
};

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& bytes);

inline u64 fnv1a64(const void* data, size_t n) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  u64 h = 0xcbf29ce484222325ULL;
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}
inline u64 fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

// ---------------------------------------------------------------------------
// Deterministic parallelism: results must not depend on the schedule, so
// workers only ever write to disjoint, preassigned slots. EMDX_THREADS caps
// the worker count (0 or unset = hardware concurrency).

unsigned resolve_threads();

template <class Fn>
void parallel_for(size_t n, Fn&& fn, unsigned threads = 0) {
  if (threads == 0) threads = resolve_threads();
  if (threads <= 1 || n < 2) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  threads = unsigned(std::min<size_t>(threads, n));
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (size_t i = t; i < n; i += threads) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace emdx
