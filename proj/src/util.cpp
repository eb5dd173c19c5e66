#include "fmatch/util.hpp"

#include "fmatch/errors.hpp"

#include <atomic>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace fmatch {

namespace {
std::atomic<std::uint64_t> g_warning_count{0};
}

void warn(const std::string& msg) {
  ++g_warning_count;
  std::cerr << "[fmatch] warning: " << msg << "\n";
}

std::uint64_t warning_count() { return g_warning_count.load(); }

std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t seed) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t fnv1a(const std::string& s) { return fnv1a(s.data(), s.size()); }

std::string hash_hex(std::uint64_t h) { return strf("%016llx", static_cast<unsigned long long>(h)); }

std::uint64_t hash_file(const std::string& path) {
  std::string data = read_file(path);
  return fnv1a(data);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void atomic_write_file(const std::string& path, const std::string& data) {
  namespace fs = std::filesystem;
  fs::path target(path);
  fs::path dir = target.parent_path();
  if (!dir.empty()) fs::create_directories(dir);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write file: " + tmp.string());
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw InputError("short write: " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::string strf(const char* fmt, ...) {
  va_list args;
  va_start(args, fmt);
  va_list args2;
  va_copy(args2, args);
  int n = std::vsnprintf(nullptr, 0, fmt, args);
  va_end(args);
  std::string out(static_cast<std::size_t>(n), '\0');
  std::vsnprintf(out.data(), out.size() + 1, fmt, args2);
  va_end(args2);
  return out;
}

std::string fmt_double(double v) { return strf("%.17g", v); }

double Rng::normal() {
  // Box-Muller; rejects u1 == 0 to keep log finite.
  double u1 = 0.0;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, unsigned jobs) {
  if (n == 0) return;
  if (jobs <= 1 || n == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  unsigned workers = std::min<std::size_t>(jobs, n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::atomic<std::size_t> next{0};
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= n) break;
        fn(i);
      }
    });
  }
  for (auto& t : pool) t.join();
}

} // namespace fmatch
