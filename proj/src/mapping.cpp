#include "oxbnn/mapping.hpp"

#include <sstream>

namespace oxbnn::mapping {

namespace {

long ceil_div(long a, long b) { return (a + b - 1) / b; }

std::string psum_id(const ReductionRecord& r, int index) {
  return (r.segmented ? "g" : "p") + std::to_string(r.vector_id) + "." +
         std::to_string(index);
}

}  // namespace

void ConvWorkload::validate() const {
  if (input_height < 1 || input_width < 1 || input_channels < 1 ||
      kernel_height < 1 || kernel_width < 1 || output_channels < 1)
    throw ValidationError("workload dimensions must be positive");
  if (stride < 1) throw ValidationError("stride must be positive");
  if (padding < 0) throw ValidationError("padding must be non-negative");
  if (groups < 1 || input_channels % groups != 0 || output_channels % groups != 0)
    throw ValidationError("groups must divide input and output channels");
  if (kernel_height > input_height + 2 * padding ||
      kernel_width > input_width + 2 * padding)
    throw ValidationError("kernel larger than padded input");
}

int ConvWorkload::out_height() const {
  return (input_height + 2 * padding - kernel_height) / stride + 1;
}

int ConvWorkload::out_width() const {
  return (input_width + 2 * padding - kernel_width) / stride + 1;
}

long ConvWorkload::window_count() const {
  return static_cast<long>(out_height()) * out_width();
}

int ConvWorkload::vector_size() const {
  return kernel_height * kernel_width * (input_channels / groups);
}

long ConvWorkload::pair_count() const {
  return window_count() * output_channels;
}

FlattenDims flatten(const ConvWorkload& workload) {
  workload.validate();
  return FlattenDims{workload.window_count(), workload.vector_size()};
}

std::vector<int> slice_vector(int s, int n) {
  if (s < 1 || n < 1) throw ValidationError("slice_vector arguments must be positive");
  std::vector<int> lengths;
  lengths.reserve(static_cast<std::size_t>(ceil_div(s, n)));
  for (int off = 0; off < s; off += n) lengths.push_back(std::min(n, s - off));
  return lengths;
}

PassSchedule schedule_oxbnn(long h, int s, int m, int n, long alpha) {
  if (h < 1 || s < 1 || m < 1 || n < 1 || alpha < 1)
    throw ValidationError("schedule parameters must be positive");
  const auto lengths = slice_vector(s, n);
  const int k = static_cast<int>(lengths.size());
  const long rounds = ceil_div(h, m);

  PassSchedule sched;
  sched.policy = Policy::oxbnn;
  sched.h = h;
  sched.s = s;
  sched.m = m;
  sched.n = n;
  sched.alpha = alpha;
  sched.total_passes = rounds * k;
  sched.passes.reserve(static_cast<std::size_t>(h) * k);

  // Vector v -> XPE (v mod m); its k slices run in consecutive passes of
  // round (v div m), accumulating in that XPE's PCA.
  for (long r = 0; r < rounds; ++r) {
    for (int j = 0; j < k; ++j) {
      for (int x = 0; x < m; ++x) {
        const long v = r * m + x;
        if (v >= h) break;
        int offset = j * n;
        sched.passes.push_back(PassRecord{r * k + j, x, v, j, offset, lengths[static_cast<std::size_t>(j)]});
      }
    }
  }

  // Capacity overflow: the PCA saturates every alpha slices, forcing a
  // readout per segment and an integer reduction of the segment psums.
  if (k > alpha) {
    const int segments = static_cast<int>(ceil_div(k, alpha));
    for (long v = 0; v < h; ++v)
      for (int t = 1; t < segments; ++t)
        sched.reduction_ops.push_back(ReductionRecord{v, t, segments - 1, true});
  }
  return sched;
}

PassSchedule schedule_baseline(long h, int s, int m, int n) {
  if (h < 1 || s < 1 || m < 1 || n < 1)
    throw ValidationError("schedule parameters must be positive");
  const auto lengths = slice_vector(s, n);
  const int k = static_cast<int>(lengths.size());

  PassSchedule sched;
  sched.policy = Policy::baseline;
  sched.h = h;
  sched.s = s;
  sched.m = m;
  sched.n = n;
  sched.alpha = 0;
  sched.total_passes = ceil_div(h * k, m);
  sched.passes.reserve(static_cast<std::size_t>(h) * k);

  // Slices fill a (pass, xpe) grid in slot order, packing one vector's slices
  // into as many XPEs as fit per pass and spilling round-robin.
  for (long v = 0; v < h; ++v) {
    for (int j = 0; j < k; ++j) {
      const long slot = v * k + j;
      sched.passes.push_back(PassRecord{slot / m, static_cast<int>(slot % m), v, j,
                                        j * n, lengths[static_cast<std::size_t>(j)]});
    }
  }

  if (k > 1) {
    for (long v = 0; v < h; ++v)
      for (int t = 1; t < k; ++t)
        sched.reduction_ops.push_back(ReductionRecord{v, t, k - 1, false});
  }
  return sched;
}

std::string PassSchedule::serialize() const {
  std::ostringstream out;
  out << "policy " << (policy == Policy::oxbnn ? "oxbnn" : "baseline") << " h " << h
      << " s " << s << " m " << m << " n " << n;
  if (policy == Policy::oxbnn) out << " alpha " << alpha;
  out << "\n";
  for (const auto& p : passes) {
    out << "pass " << p.pass_index << " xpe " << p.xpe_id << " vec " << p.vector_id
        << " slice " << p.slice_index << " off " << p.offset << " len " << p.length
        << "\n";
  }
  for (const auto& r : reduction_ops) {
    const std::string lhs =
        r.step == 1 ? psum_id(r, 0)
                    : "r" + std::to_string(r.vector_id) + "." + std::to_string(r.step - 1);
    const std::string rhs = psum_id(r, r.step);
    const std::string dst =
        r.step == r.total_steps
            ? "f" + std::to_string(r.vector_id)
            : "r" + std::to_string(r.vector_id) + "." + std::to_string(r.step);
    out << "reduce vec " << r.vector_id << " out " << dst << " in " << lhs << " "
        << rhs << "\n";
  }
  return out.str();
}

std::vector<bnn::BitcountResult> execute_schedule(const PassSchedule& schedule,
                                                  const BinaryMatrix& inputs,
                                                  const BinaryMatrix& weights) {
  if (static_cast<long>(inputs.size()) != schedule.h ||
      static_cast<long>(weights.size()) != schedule.h)
    throw ValidationError("matrix row count does not match the schedule");
  for (long v = 0; v < schedule.h; ++v) {
    if (inputs[static_cast<std::size_t>(v)].size() != schedule.s ||
        weights[static_cast<std::size_t>(v)].size() != schedule.s)
      throw ValidationError("matrix row size does not match the schedule");
  }

  const int k = static_cast<int>(slice_vector(schedule.s, schedule.n).size());
  std::vector<long> psums(static_cast<std::size_t>(schedule.h) * k, 0);
  for (const auto& p : schedule.passes) {
    const auto& iv = inputs[static_cast<std::size_t>(p.vector_id)];
    const auto& wv = weights[static_cast<std::size_t>(p.vector_id)];
    const auto r = bnn::xnor_dot_span(iv.data() + p.offset, wv.data() + p.offset, p.length);
    psums[static_cast<std::size_t>(p.vector_id) * k + p.slice_index] = r.z;
  }

  std::vector<bnn::BitcountResult> finals(static_cast<std::size_t>(schedule.h));
  if (schedule.reduction_ops.empty()) {
    // In-PCA accumulation (oxbnn) or single-slice vectors: the bitcounts of a
    // vector's slices accrue in one place.
    for (long v = 0; v < schedule.h; ++v) {
      long z = 0;
      for (int j = 0; j < k; ++j) z += psums[static_cast<std::size_t>(v) * k + j];
      finals[static_cast<std::size_t>(v)] = bnn::BitcountResult{z, schedule.s};
    }
    return finals;
  }

  // Fold partial sums by integer addition following the reduction records.
  const bool segmented = schedule.reduction_ops.front().segmented;
  long operands_per_vector = 0;
  std::vector<long> staged;
  if (segmented) {
    // Segment psums: each segment accumulates alpha slices in the PCA before
    // the forced readout.
    const long segments = schedule.reduction_ops.front().total_steps + 1;
    operands_per_vector = segments;
    staged.assign(static_cast<std::size_t>(schedule.h) * segments, 0);
    for (long v = 0; v < schedule.h; ++v)
      for (int j = 0; j < k; ++j)
        staged[static_cast<std::size_t>(v) * segments + j / schedule.alpha] +=
            psums[static_cast<std::size_t>(v) * k + j];
  } else {
    operands_per_vector = k;
    staged = psums;
  }

  std::vector<long> partial(static_cast<std::size_t>(schedule.h));
  for (long v = 0; v < schedule.h; ++v)
    partial[static_cast<std::size_t>(v)] = staged[static_cast<std::size_t>(v) * operands_per_vector];
  for (const auto& r : schedule.reduction_ops) {
    partial[static_cast<std::size_t>(r.vector_id)] +=
        staged[static_cast<std::size_t>(r.vector_id) * operands_per_vector + r.step];
  }
  for (long v = 0; v < schedule.h; ++v)
    finals[static_cast<std::size_t>(v)] = bnn::BitcountResult{partial[static_cast<std::size_t>(v)], schedule.s};
  return finals;
}

BinaryMatrix im2col(const bnn::BinaryTensor& input, const ConvWorkload& workload) {
  workload.validate();
  if (workload.groups != 1)
    throw ValidationError("im2col lowering handles groups == 1 only");
  if (input.channels() != workload.input_channels ||
      input.height() != workload.input_height ||
      input.width() != workload.input_width)
    throw ValidationError("input tensor does not match the workload shape");

  BinaryMatrix rows;
  rows.reserve(static_cast<std::size_t>(workload.window_count()));
  for (int oy = 0; oy < workload.out_height(); ++oy) {
    for (int ox = 0; ox < workload.out_width(); ++ox) {
      rows.emplace_back(bnn::flatten_window(input, oy * workload.stride - workload.padding,
                                            ox * workload.stride - workload.padding,
                                            workload.kernel_height, workload.kernel_width));
    }
  }
  return rows;
}

BinaryMatrix flatten_filters(const std::vector<bnn::BinaryTensor>& filters) {
  BinaryMatrix rows;
  rows.reserve(filters.size());
  for (const auto& f : filters) rows.emplace_back(bnn::flatten_filter(f));
  return rows;
}

std::pair<BinaryMatrix, BinaryMatrix> build_pair_matrices(
    const bnn::BinaryTensor& input, const std::vector<bnn::BinaryTensor>& filters,
    const ConvWorkload& workload) {
  const auto windows = im2col(input, workload);
  const auto weight_rows = flatten_filters(filters);
  if (static_cast<int>(weight_rows.size()) != workload.output_channels)
    throw ValidationError("filter count does not match output channels");

  const long h = workload.window_count();
  BinaryMatrix pair_inputs, pair_weights;
  pair_inputs.reserve(static_cast<std::size_t>(h) * weight_rows.size());
  pair_weights.reserve(pair_inputs.capacity());
  for (std::size_t f = 0; f < weight_rows.size(); ++f) {
    for (long w = 0; w < h; ++w) {
      pair_inputs.push_back(windows[static_cast<std::size_t>(w)]);
      pair_weights.push_back(weight_rows[f]);
    }
  }
  return {std::move(pair_inputs), std::move(pair_weights)};
}

}  // namespace oxbnn::mapping
