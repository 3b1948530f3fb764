#include "bifi/util.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <mutex>

namespace bifi {

namespace {

LogLevel parse_level(const char* s) {
  if (!s) return LogLevel::Warn;
  std::string v(s);
  std::transform(v.begin(), v.end(), v.begin(), ::tolower);
  if (v == "debug") return LogLevel::Debug;
  if (v == "info") return LogLevel::Info;
  if (v == "warn" || v == "warning") return LogLevel::Warn;
  if (v == "error") return LogLevel::Error;
  if (v == "off" || v == "none") return LogLevel::Off;
  return LogLevel::Warn;
}

const char* level_name(LogLevel l) {
  switch (l) {
    case LogLevel::Debug: return "debug";
    case LogLevel::Info: return "info";
    case LogLevel::Warn: return "warn";
    case LogLevel::Error: return "error";
    default: return "?";
  }
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::mutex log_mutex;

}  // namespace

LogLevel log_level() {
  static LogLevel level = parse_level(std::getenv("BIFI_LOG"));
  return level;
}

void log_message(LogLevel level, const std::string& msg) {
  if (level < log_level()) return;
  std::lock_guard<std::mutex> lock(log_mutex);
  std::fprintf(stderr, "[bifi %s] %s\n", level_name(level), msg.c_str());
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view stream,
                          std::initializer_list<std::uint64_t> ids) {
  std::uint64_t state = master ^ fnv1a64(stream);
  std::uint64_t out = splitmix64(state);
  for (std::uint64_t id : ids) {
    state ^= id;
    out = splitmix64(state);
  }
  return out;
}

std::uint64_t Rng::next_u64() { return splitmix64(state_); }

double Rng::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double a, double b) { return a + (b - a) * uniform01(); }

std::uint64_t Rng::below(std::uint64_t bound) {
  // Rejection sampling keeps the draw unbiased for any bound.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t v = next_u64();
  while (v >= limit) v = next_u64();
  return v % bound;
}

std::vector<int> Rng::sample_without_replacement(int n_total, int k) {
  if (k < 0 || k > n_total) {
    throw ConfigError("sample_without_replacement: k out of range");
  }
  std::vector<int> pool(n_total);
  for (int i = 0; i < n_total; ++i) pool[i] = i;
  for (int i = 0; i < k; ++i) {
    const int j = i + static_cast<int>(below(static_cast<std::uint64_t>(n_total - i)));
    std::swap(pool[i], pool[j]);
  }
  std::vector<int> out(pool.begin(), pool.begin() + k);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> interp_linear(const std::vector<double>& x_src,
                                  const std::vector<double>& y_src,
                                  const std::vector<double>& x_dst) {
  if (x_src.size() != y_src.size() || x_src.empty()) {
    throw DataError("interp_linear: source size mismatch or empty");
  }
  for (std::size_t i = 1; i < x_src.size(); ++i) {
    if (!(x_src[i] > x_src[i - 1])) {
      throw DataError("interp_linear: source abscissae not strictly increasing");
    }
  }
  std::vector<double> out(x_dst.size());
  for (std::size_t i = 0; i < x_dst.size(); ++i) {
    const double x = x_dst[i];
    if (x <= x_src.front()) {
      out[i] = y_src.front();
    } else if (x >= x_src.back()) {
      out[i] = y_src.back();
    } else {
      const auto it = std::upper_bound(x_src.begin(), x_src.end(), x);
      const std::size_t hi = static_cast<std::size_t>(it - x_src.begin());
      const std::size_t lo = hi - 1;
      const double w = (x - x_src[lo]) / (x_src[hi] - x_src[lo]);
      out[i] = (1.0 - w) * y_src[lo] + w * y_src[hi];
    }
  }
  return out;
}

}  // namespace bifi
