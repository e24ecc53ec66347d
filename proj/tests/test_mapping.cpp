#include <fstream>
#include <sstream>

#include "doctest.h"
#include "oxbnn/mapping.hpp"

using namespace oxbnn;
using namespace oxbnn::mapping;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

BinaryMatrix random_matrix(long h, int s, SplitMix64& rng) {
  BinaryMatrix m;
  for (long i = 0; i < h; ++i) m.push_back(bnn::BinaryVector::random(s, rng));
  return m;
}

long ceil_div(long a, long b) { return (a + b - 1) / b; }

}  // namespace

TEST_CASE("flatten derives H and S from the workload") {
  ConvWorkload w{5, 5, 1, 3, 3, 1, 2, 0};
  auto dims = flatten(w);
  CHECK(dims.h == 4);  // four windows
  CHECK(dims.s == 9);

  w = ConvWorkload{3, 3, 1, 3, 3, 1, 1, 0};
  dims = flatten(w);
  CHECK(dims.h == 1);
  CHECK(dims.s == 9);

  w = ConvWorkload{224, 224, 3, 3, 3, 1, 1, 1};
  dims = flatten(w);
  CHECK(dims.s == 27);
  CHECK(dims.h == 224L * 224L);

  // cross-check the window-count formula by explicit enumeration at 10x10
  w = ConvWorkload{10, 10, 1, 3, 3, 1, 1, 1};
  long count = 0;
  for (int y = -1; y + 3 <= 11; ++y)
    for (int x = -1; x + 3 <= 11; ++x) ++count;
  CHECK(flatten(w).h == count);

  CHECK_THROWS_AS(flatten(ConvWorkload{3, 3, 1, 5, 5, 1, 1, 0}), ValidationError);
}

TEST_CASE("slice_vector partitions into ceil(s/n) slices") {
  CHECK(slice_vector(9, 5) == std::vector<int>{5, 4});
  CHECK(slice_vector(15, 9) == std::vector<int>{9, 6});
  CHECK(slice_vector(9, 9) == std::vector<int>{9});

  SplitMix64 rng(17);
  for (int rep = 0; rep < 100; ++rep) {
    const int s = 1 + static_cast<int>(rng.below(300));
    const int n = 1 + static_cast<int>(rng.below(64));
    const auto lens = slice_vector(s, n);
    CHECK(static_cast<long>(lens.size()) == ceil_div(s, n));
    long sum = 0;
    for (std::size_t i = 0; i < lens.size(); ++i) {
      sum += lens[i];
      if (i + 1 < lens.size()) CHECK(lens[i] == n);
    }
    CHECK(sum == s);
  }
}

TEST_CASE("oxbnn schedule keeps a vector's slices on one XPE") {
  const auto sched = schedule_oxbnn(2, 15, 2, 9, 447);
  CHECK(sched.total_passes == 2);
  CHECK(sched.reduction_ops.empty());
  REQUIRE(sched.passes.size() == 4);
  // pass 1: slice 0 of vector 0 on XPE 0, slice 0 of vector 1 on XPE 1
  CHECK(sched.passes[0].pass_index == 0);
  CHECK(sched.passes[0].xpe_id == 0);
  CHECK(sched.passes[0].vector_id == 0);
  CHECK(sched.passes[0].slice_index == 0);
  CHECK(sched.passes[1].xpe_id == 1);
  CHECK(sched.passes[1].vector_id == 1);
  // pass 2: the second slices, same XPEs
  CHECK(sched.passes[2].pass_index == 1);
  CHECK(sched.passes[2].xpe_id == 0);
  CHECK(sched.passes[2].vector_id == 0);
  CHECK(sched.passes[2].slice_index == 1);
  CHECK(sched.passes[2].length == 6);

  const auto single = schedule_oxbnn(2, 9, 2, 9, 1);
  CHECK(single.total_passes == 1);
  CHECK(single.reduction_ops.empty());

  const auto deep = schedule_oxbnn(1, 4608, 1, 19, 447);
  CHECK(deep.total_passes == 243);
  CHECK(deep.reduction_ops.empty());
}

TEST_CASE("baseline schedule spreads one vector across XPEs per pass") {
  const auto sched = schedule_baseline(2, 15, 2, 9);
  CHECK(sched.total_passes == 2);
  REQUIRE(sched.passes.size() == 4);
  // pass 1 holds both slices of vector 0
  CHECK(sched.passes[0].pass_index == 0);
  CHECK(sched.passes[0].xpe_id == 0);
  CHECK(sched.passes[0].vector_id == 0);
  CHECK(sched.passes[0].slice_index == 0);
  CHECK(sched.passes[1].pass_index == 0);
  CHECK(sched.passes[1].xpe_id == 1);
  CHECK(sched.passes[1].vector_id == 0);
  CHECK(sched.passes[1].slice_index == 1);
  // one reduction per output vector
  REQUIRE(sched.reduction_ops.size() == 2);
  CHECK(sched.reduction_ops[0].vector_id == 0);
  CHECK(sched.reduction_ops[1].vector_id == 1);

  // S == N: identical pass grid to the oxbnn policy, zero reductions
  const auto base_eq = schedule_baseline(2, 9, 2, 9);
  const auto ox_eq = schedule_oxbnn(2, 9, 2, 9, 447);
  REQUIRE(base_eq.passes.size() == ox_eq.passes.size());
  for (std::size_t i = 0; i < base_eq.passes.size(); ++i) {
    CHECK(base_eq.passes[i].pass_index == ox_eq.passes[i].pass_index);
    CHECK(base_eq.passes[i].xpe_id == ox_eq.passes[i].xpe_id);
    CHECK(base_eq.passes[i].vector_id == ox_eq.passes[i].vector_id);
  }
  CHECK(base_eq.reduction_ops.empty());

  const auto wide = schedule_baseline(1, 45, 5, 9);
  CHECK(wide.total_passes == 1);
  CHECK(wide.passes.size() == 5);
  CHECK(wide.reduction_ops.size() == 4);
}

TEST_CASE("pass-count formula and psum-elimination bound") {
  SplitMix64 rng(23);
  for (int rep = 0; rep < 200; ++rep) {
    const long h = 1 + static_cast<long>(rng.below(10));
    const int s = 1 + static_cast<int>(rng.below(128));
    const int m = 1 + static_cast<int>(rng.below(8));
    const int n = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(s)));
    const long alpha = 1 + static_cast<long>(rng.below(12));
    const long k = ceil_div(s, n);

    const auto ox = schedule_oxbnn(h, s, m, n, alpha);
    CHECK(ox.total_passes == ceil_div(h, m) * k);
    CHECK(ox.reduction_ops.empty() == (k <= alpha));

    const auto base = schedule_baseline(h, s, m, n);
    CHECK(static_cast<long>(base.passes.size()) == h * k);
    CHECK(static_cast<long>(base.reduction_ops.size()) == (k > 1 ? h * (k - 1) : 0));
  }
}

TEST_CASE("schedules are deterministic") {
  const auto a = schedule_oxbnn(5, 40, 3, 7, 9);
  const auto b = schedule_oxbnn(5, 40, 3, 7, 9);
  CHECK(a.serialize() == b.serialize());
  CHECK(schedule_baseline(5, 40, 3, 7).serialize() ==
        schedule_baseline(5, 40, 3, 7).serialize());
}

TEST_CASE("golden schedule traces for the two-vector S=15 N=9 case") {
  const std::string dir = std::string(OXBNN_SOURCE_DIR) + "/tests/golden/";
  CHECK(schedule_oxbnn(2, 15, 2, 9, 447).serialize() ==
        read_file(dir + "fig4_oxbnn.trace"));
  CHECK(schedule_baseline(2, 15, 2, 9).serialize() ==
        read_file(dir + "fig4_baseline.trace"));
}

TEST_CASE("sliced psums sum to the unsliced bitcount") {
  // S=9 split (5,4): psum1 + psum2 equals the whole-vector dot
  SplitMix64 rng(31);
  const auto inputs = random_matrix(2, 9, rng);
  const auto weights = random_matrix(2, 9, rng);
  const auto sched = schedule_baseline(2, 9, 2, 5);
  const auto finals = execute_schedule(sched, inputs, weights);
  for (long v = 0; v < 2; ++v) {
    const auto direct = bnn::xnor_dot(inputs[v], weights[v]);
    CHECK(finals[v].z == direct.z);
    CHECK(finals[v].z_max == 9);
  }
}

TEST_CASE("identical operand matrices give z == S under any slicing") {
  SplitMix64 rng(37);
  const auto m = random_matrix(3, 21, rng);
  for (int n : {1, 4, 9, 21}) {
    const auto ox = execute_schedule(schedule_oxbnn(3, 21, 2, n, 50), m, m);
    const auto base = execute_schedule(schedule_baseline(3, 21, 2, n), m, m);
    for (long v = 0; v < 3; ++v) {
      CHECK(ox[v].z == 21);
      CHECK(base[v].z == 21);
    }
  }
}

TEST_CASE("both policies equal the unsliced oracle on random instances") {
  SplitMix64 rng(41);
  for (int rep = 0; rep < 50; ++rep) {
    const long h = 1 + static_cast<long>(rng.below(8));
    const int s = 1 + static_cast<int>(rng.below(128));
    const int m = 1 + static_cast<int>(rng.below(8));
    const int n = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(s)));
    const auto inputs = random_matrix(h, s, rng);
    const auto weights = random_matrix(h, s, rng);

    const auto ox =
        execute_schedule(schedule_oxbnn(h, s, m, n, 1 + s / n), inputs, weights);
    const auto base =
        execute_schedule(schedule_baseline(h, s, m, n), inputs, weights);
    for (long v = 0; v < h; ++v) {
      const auto direct = bnn::xnor_dot(inputs[v], weights[v]);
      CHECK(ox[v].z == direct.z);
      CHECK(base[v].z == direct.z);
    }
  }
}

TEST_CASE("capacity-overflow fallback still reproduces the oracle") {
  SplitMix64 rng(43);
  const long h = 3;
  const int s = 10, n = 2, m = 2;
  const long alpha = 2;  // k = 5 > alpha: three segments
  const auto sched = schedule_oxbnn(h, s, m, n, alpha);
  CHECK_FALSE(sched.reduction_ops.empty());
  CHECK(sched.reduction_ops.front().segmented);
  CHECK(static_cast<long>(sched.reduction_ops.size()) == h * 2);

  const auto inputs = random_matrix(h, s, rng);
  const auto weights = random_matrix(h, s, rng);
  const auto finals = execute_schedule(sched, inputs, weights);
  for (long v = 0; v < h; ++v)
    CHECK(finals[v].z == bnn::xnor_dot(inputs[v], weights[v]).z);
}

TEST_CASE("execute_schedule validates operand dimensions") {
  SplitMix64 rng(47);
  const auto sched = schedule_oxbnn(2, 9, 2, 3, 9);
  const auto ok = random_matrix(2, 9, rng);
  CHECK_THROWS_AS(execute_schedule(sched, random_matrix(1, 9, rng), ok),
                  ValidationError);
  CHECK_THROWS_AS(execute_schedule(sched, random_matrix(2, 8, rng), ok),
                  ValidationError);
}

TEST_CASE("im2col row order matches the oracle flattening") {
  SplitMix64 rng(53);
  ConvWorkload w{6, 6, 2, 3, 3, 2, 2, 1};
  const auto input = bnn::BinaryTensor::random(2, 6, 6, rng);
  std::vector<bnn::BinaryTensor> filters = {bnn::BinaryTensor::random(2, 3, 3, rng),
                                            bnn::BinaryTensor::random(2, 3, 3, rng)};
  const auto oracle = bnn::conv_reference(input, filters, w.stride, w.padding);
  const auto [pi, pw] = build_pair_matrices(input, filters, w);
  REQUIRE(static_cast<long>(pi.size()) == w.pair_count());
  for (std::size_t j = 0; j < pi.size(); ++j) {
    CHECK(bnn::xnor_dot(pi[j], pw[j]).z == oracle.z[j]);
  }
}
