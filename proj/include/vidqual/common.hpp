#ifndef VIDQUAL_COMMON_HPP
#define VIDQUAL_COMMON_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace vq {

// Thrown on any contract violation (bad input, malformed file, out-of-order
// plan). CLI maps these to a non-zero exit with a machine-readable line.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

[[noreturn]] inline void fail(const std::string& msg) { throw Error(msg); }

inline void require(bool cond, const std::string& msg) {
  if (!cond) fail(msg);
}

// splitmix64; used to derive independent sub-seeds from one user seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Keyed sub-seed: every component that needs randomness hashes its own tag
// so reordering components never perturbs another one's stream.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) {
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return splitmix64(seed ^ h);
}

// Compact deterministic decimal formatting for numbers embedded in prompts.
std::string format_number(double v);

}  // namespace vq

#endif  // VIDQUAL_COMMON_HPP
