#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace flatlab {

using Vec = std::vector<double>;

// Invalid parameters, malformed specs, bad files. CLI maps this to exit code 2.
class ConfigError : public std::invalid_argument {
  public:
    explicit ConfigError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Runtime numerical failure (divergence, NaN gradient, dead sampler).
// CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
  public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

bool all_finite(const Vec& v);

double dot(const Vec& a, const Vec& b);
double norm2(const Vec& v);
double linf_norm(const Vec& v);

// Runs fn(i) for i in [0, count). With threads > 1 the index range is split into
// contiguous blocks; fn must only touch per-index state so the result is
// independent of the thread count. First exception wins and is rethrown.
void parallel_for(std::int64_t count, int threads, const std::function<void(std::int64_t)>& fn);

// FNV-1a over raw bytes; used for artifact digests in manifests.
std::uint64_t fnv1a64(const void* data, std::size_t len);
std::uint64_t fnv1a64(const std::string& s);

std::string format_double(double v, const char* fmt = "%.12g");
// Shortest round-trip decimal form, for bit-exact save/load.
std::string format_exact(double v);

} // namespace flatlab
