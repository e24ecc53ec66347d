#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace oxbnn {

// Error taxonomy shared by all modules:
//   ValidationError - malformed arguments or data
//   UsageError      - an API called against its state contract
//   SolverError     - no feasible solution inside the documented search range
//   ParseError      - text input rejected, carries a 1-based line number
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, int line)
      : std::runtime_error(msg + " (line " + std::to_string(line) + ")"),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// 2019 SI exact values.
inline constexpr double kElectronCharge = 1.602176634e-19;  // C
inline constexpr double kBoltzmann = 1.380649e-23;          // J/K

inline double dbm_to_watts(double dbm) {
  return 1e-3 * std::pow(10.0, dbm / 10.0);
}

inline double watts_to_dbm(double watts) {
  if (watts <= 0.0) throw ValidationError("power must be positive for dBm conversion");
  return 10.0 * std::log10(watts / 1e-3);
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

// SplitMix64. Used wherever reproducible bits are needed; kept free of
// <random> distributions so streams are identical across standard libraries.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, bound) by rejection; bound must be positive.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = bound * (UINT64_MAX / bound);
    std::uint64_t v;
    do {
      v = next();
    } while (v >= limit);
    return v % bound;
  }

  int bit() { return static_cast<int>(next() >> 63); }

 private:
  std::uint64_t state_;
};

}  // namespace oxbnn
