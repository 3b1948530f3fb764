#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bifi {

// Error taxonomy; the CLI maps these to its exit-code contract
// (config 2, data 3, numerical 4).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Thrown when no point on the lambda grid meets the kappa residual budget.
struct InfeasibleError : NumericalError {
  InfeasibleError(const std::string& msg, double residual)
      : NumericalError(msg), best_residual(residual) {}
  double best_residual;
};

enum class LogLevel { Debug = 0, Info = 1, Warn = 2, Error = 3, Off = 4 };

// Level comes from the BIFI_LOG environment variable (debug|info|warn|error|off),
// default warn. Messages go to stderr.
LogLevel log_level();
void log_message(LogLevel level, const std::string& msg);
inline void log_debug(const std::string& m) { log_message(LogLevel::Debug, m); }
inline void log_info(const std::string& m) { log_message(LogLevel::Info, m); }
inline void log_warn(const std::string& m) { log_message(LogLevel::Warn, m); }

std::uint64_t fnv1a64(std::string_view bytes);

// Derives the seed of a named sub-stream from a master seed. Every source of
// randomness in the toolkit is a sub-stream of the single run seed, so results
// are reproducible regardless of evaluation order or thread count.
std::uint64_t derive_seed(std::uint64_t master, std::string_view stream,
                          std::initializer_list<std::uint64_t> ids = {});

// Small deterministic generator (splitmix64 state advance). Avoids
// distribution objects from <random> so that the byte-level output of seeded
// experiments does not depend on the standard library implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();
  double uniform01();                     // [0, 1)
  double uniform(double a, double b);     // [a, b)
  std::uint64_t below(std::uint64_t bound);  // [0, bound), bound > 0

  // k distinct values from {0, ..., n_total-1}, ascending order.
  std::vector<int> sample_without_replacement(int n_total, int k);

 private:
  std::uint64_t state_;
};

// Piecewise-linear interpolation of (x_src, y_src) onto x_dst. x_src must be
// strictly increasing; x_dst values outside the source range are clamped to
// the boundary values.
std::vector<double> interp_linear(const std::vector<double>& x_src,
                                  const std::vector<double>& y_src,
                                  const std::vector<double>& x_dst);

}  // namespace bifi
