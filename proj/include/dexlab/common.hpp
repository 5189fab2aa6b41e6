#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace dexlab {

// Bad inputs: malformed files, violated preconditions, infeasible scenario
// parameters. CLI maps these to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Failures of the numerics themselves: non-convergence, singular systems,
// collapsed ODE trajectories. CLI maps these to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Counter-based deterministic randomness. Every draw is a pure function of
// (seed, counters), so generated objects are reproducible bit-for-bit and
// draws indexed by (agent, date) stay identical when other dimensions (e.g.
// the horizon) change.
namespace hashrand {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix(std::uint64_t seed, std::uint64_t s0, std::uint64_t s1 = 0,
                         std::uint64_t s2 = 0) {
  std::uint64_t h = splitmix64(seed ^ 0x243f6a8885a308d3ULL);
  h = splitmix64(h ^ splitmix64(s0));
  h = splitmix64(h ^ splitmix64(s1 + 0x9e3779b97f4a7c15ULL));
  h = splitmix64(h ^ splitmix64(s2 + 0x452821e638d01377ULL));
  return h;
}

// Uniform in [0, 1) with 53-bit resolution.
inline double uniform01(std::uint64_t seed, std::uint64_t s0, std::uint64_t s1 = 0,
                        std::uint64_t s2 = 0) {
  return static_cast<double>(mix(seed, s0, s1, s2) >> 11) * 0x1.0p-53;
}

inline int rademacher(std::uint64_t seed, std::uint64_t s0, std::uint64_t s1 = 0,
                      std::uint64_t s2 = 0) {
  return (mix(seed, s0, s1, s2) & 1ULL) ? 1 : -1;
}

// Standard normal via Box-Muller on two hashed uniforms.
inline double normal(std::uint64_t seed, std::uint64_t s0, std::uint64_t s1 = 0,
                     std::uint64_t s2 = 0) {
  const double u1 = uniform01(seed ^ 0x5bf0a8b1457eb5c1ULL, s0, s1, s2);
  const double u2 = uniform01(seed ^ 0x93c467e37db0c7a4ULL, s0, s1, s2);
  const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
  return r * std::cos(2.0 * 3.14159265358979323846 * u2);
}

}  // namespace hashrand

}  // namespace dexlab
