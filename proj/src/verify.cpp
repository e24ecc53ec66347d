#include "oxbnn/verify.hpp"

#include <sstream>

#include "oxbnn/bnn.hpp"
#include "oxbnn/mapping.hpp"

namespace oxbnn::verify {

namespace {

// Random conv shapes kept small enough that H * filters <= max_h and
// S <= max_s while still covering strides, padding and both slice regimes.
mapping::ConvWorkload draw_workload(SplitMix64& rng, const SweepOptions& opt) {
  mapping::ConvWorkload w;
  for (;;) {
    w.kernel_height = 1 + static_cast<int>(rng.below(3));
    w.kernel_width = 1 + static_cast<int>(rng.below(3));
    const int max_c = opt.max_s / (w.kernel_height * w.kernel_width);
    w.input_channels = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_c)));
    w.stride = 1 + static_cast<int>(rng.below(2));
    w.padding = static_cast<int>(rng.below(2));
    w.input_height = w.kernel_height + static_cast<int>(rng.below(3));
    w.input_width = w.kernel_width + static_cast<int>(rng.below(3));
    w.output_channels = 1 + static_cast<int>(rng.below(2));
    w.groups = 1;
    if (w.kernel_height > w.input_height + 2 * w.padding ||
        w.kernel_width > w.input_width + 2 * w.padding)
      continue;
    if (w.pair_count() > opt.max_h) continue;
    return w;
  }
}

std::string describe_mismatch(const char* route, long vec, long got, long want) {
  std::ostringstream out;
  out << route << " mismatch at vector " << vec << ": got " << got << ", expected "
      << want;
  return out.str();
}

}  // namespace

SweepReport run_equivalence_sweep(const SweepOptions& options) {
  SweepReport report;
  SplitMix64 seeder(options.seed);

  for (long inst = 0; inst < options.instances; ++inst) {
    const std::uint64_t inst_seed = seeder.next();
    SplitMix64 rng(inst_seed);

    const auto workload = draw_workload(rng, options);
    const int s = workload.vector_size();
    const long h = workload.pair_count();
    const int n = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(s)));
    const int m = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(options.max_m)));

    const auto input = bnn::BinaryTensor::random(workload.input_channels,
                                                 workload.input_height,
                                                 workload.input_width, rng);
    std::vector<bnn::BinaryTensor> filters;
    for (int f = 0; f < workload.output_channels; ++f) {
      filters.push_back(bnn::BinaryTensor::random(workload.input_channels,
                                                  workload.kernel_height,
                                                  workload.kernel_width, rng));
    }

    const auto oracle = bnn::conv_reference(input, filters, workload.stride,
                                            workload.padding);
    const auto [pair_in, pair_w] = mapping::build_pair_matrices(input, filters, workload);

    const auto ox = mapping::schedule_oxbnn(h, s, m, n, /*alpha=*/1 + s / n);
    const auto base = mapping::schedule_baseline(h, s, m, n);
    auto ox_results = mapping::execute_schedule(ox, pair_in, pair_w);
    const auto base_results = mapping::execute_schedule(base, pair_in, pair_w);

    if (options.inject_fault && inst == options.instances / 2 && !ox_results.empty())
      ox_results.front().z += 1;

    ++report.instances_run;
    std::string detail;
    for (long v = 0; v < h && detail.empty(); ++v) {
      const auto idx = static_cast<std::size_t>(v);
      const auto direct = bnn::xnor_dot(pair_in[idx], pair_w[idx]);
      const long want = oracle.z[idx];  // pair id v = filter * H + window
      if (direct.z != want)
        detail = describe_mismatch("unsliced-vs-oracle", v, direct.z, want);
      else if (ox_results[idx].z != want)
        detail = describe_mismatch("oxbnn-policy", v, ox_results[idx].z, want);
      else if (base_results[idx].z != want)
        detail = describe_mismatch("baseline-policy", v, base_results[idx].z, want);
    }

    if (!detail.empty()) {
      ++report.failures;
      if (!report.first_failure) {
        report.first_failure = Counterexample{inst, h, s, m, n, inst_seed, detail};
      }
    }
  }
  return report;
}

}  // namespace oxbnn::verify
