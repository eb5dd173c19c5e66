#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace fmatch {

// Warning sink. Messages go to stderr; total count is queryable so tests can
// assert that a code path warned without scraping the stream.
void warn(const std::string& msg);
std::uint64_t warning_count();

// FNV-1a over raw bytes. Used for cache keys and manifest input hashes,
// not for anything adversarial.
std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t seed = 0xcbf29ce484222325ull);
std::uint64_t fnv1a(const std::string& s);
std::string hash_hex(std::uint64_t h);

// Hash of a file's contents. Throws InputError if unreadable.
std::uint64_t hash_file(const std::string& path);

// Write `data` to `path` via a temp file in the same directory plus rename.
void atomic_write_file(const std::string& path, const std::string& data);

std::string read_file(const std::string& path);

// printf-style formatting into a std::string.
std::string strf(const char* fmt, ...);

// Shortest decimal form that round-trips a double (%.17g). All ASCII
// emitters use this so that re-runs are byte identical.
std::string fmt_double(double v);

// Deterministic RNG. Draws bypass std::uniform_* distributions, whose output
// is implementation defined; engine output itself is pinned by the standard.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t raw() { return eng_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(eng_() >> 11) * (1.0 / 9007199254740992.0); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller (one value per call, no caching).
  double normal();

  // Uniform index in [0, n). Modulo bias is irrelevant at our n.
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(eng_() % n); }

private:
  std::mt19937_64 eng_;
};

// Run fn(i) for i in [0, n). jobs <= 1 runs inline; otherwise a simple
// block-partitioned thread pool. Results must be written to disjoint slots.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, unsigned jobs = 1);

} // namespace fmatch
