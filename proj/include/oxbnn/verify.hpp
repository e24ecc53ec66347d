#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "oxbnn/common.hpp"

// Randomized oracle-equivalence sweep: every instance draws a small binarized
// convolution, lowers it through both scheduling policies, and checks the
// final results bit-exactly against the unsliced XNOR dot product and the
// sliding-window convolution oracle.
namespace oxbnn::verify {

struct SweepOptions {
  long instances = 1000;
  int max_s = 128;
  int max_m = 8;
  long max_h = 8;
  std::uint64_t seed = 12345;
  bool inject_fault = false;  // test hook: corrupts one instance's result
};

struct Counterexample {
  long instance = 0;
  long h = 0;
  int s = 0;
  int m = 0;
  int n = 0;
  std::uint64_t seed = 0;
  std::string detail;
};

struct SweepReport {
  long instances_run = 0;
  long failures = 0;
  std::optional<Counterexample> first_failure;
  bool passed() const { return failures == 0; }
};

SweepReport run_equivalence_sweep(const SweepOptions& options);

}  // namespace oxbnn::verify
