#pragma once

#include <string>
#include <utility>
#include <vector>

#include "oxbnn/bnn.hpp"
#include "oxbnn/common.hpp"

// Lowers binarized convolutions to (H x S) operand matrices, slices vectors to
// the XPE size N, and produces PASS schedules under two policies:
//   oxbnn    - all slices of one vector accumulate in a single XPE's PCA, so
//              no partial-sum reductions are needed while ceil(S/N) <= alpha;
//   baseline - one vector's slices spread across XPEs within a pass, and each
//              output pays ceil(S/N)-1 reduction-network additions.
namespace oxbnn::mapping {

enum class Policy { oxbnn, baseline };

struct ConvWorkload {
  int input_height = 0;
  int input_width = 0;
  int input_channels = 0;
  int kernel_height = 0;
  int kernel_width = 0;
  int output_channels = 0;
  int stride = 1;
  int padding = 0;
  int groups = 1;  // input_channels for depthwise

  void validate() const;
  int out_height() const;
  int out_width() const;
  long window_count() const;  // H
  int vector_size() const;    // S = kh * kw * (in_c / groups)
  long pair_count() const;    // window/filter pairs to evaluate
};

struct FlattenDims {
  long h = 0;  // window count
  int s = 0;   // flattened vector size
};

FlattenDims flatten(const ConvWorkload& workload);

// ceil(s/n) lengths: all n except a final remainder.
std::vector<int> slice_vector(int s, int n);

struct SlicePlan {
  long parent_vector_id = 0;
  int slice_index = 0;
  int offset = 0;
  int length = 0;
};

struct PassRecord {
  long pass_index = 0;
  int xpe_id = 0;
  long vector_id = 0;
  int slice_index = 0;
  int offset = 0;
  int length = 0;
};

// One partial-sum addition. Operand/output ids derive from (vector, step):
// step t folds psum t into the running partial of vector_id.
struct ReductionRecord {
  long vector_id = 0;
  int step = 0;         // 1-based
  int total_steps = 0;  // operands per vector minus one
  bool segmented = false;  // oxbnn capacity-overflow segments vs baseline psums
};

struct PassSchedule {
  Policy policy = Policy::oxbnn;
  long h = 0;
  int s = 0;
  int m = 0;
  int n = 0;
  long alpha = 0;  // meaningful for the oxbnn policy
  long total_passes = 0;
  std::vector<PassRecord> passes;
  std::vector<ReductionRecord> reduction_ops;

  // Line-oriented text trace, one pass or reduction per line.
  std::string serialize() const;
};

PassSchedule schedule_oxbnn(long h, int s, int m, int n, long alpha);
PassSchedule schedule_baseline(long h, int s, int m, int n);

using BinaryMatrix = std::vector<bnn::BinaryVector>;

// Evaluates every pass with xnor_dot on the slice pair and applies the
// reductions; row j of the input matrix pairs with row j of the weight matrix.
std::vector<bnn::BitcountResult> execute_schedule(const PassSchedule& schedule,
                                                  const BinaryMatrix& inputs,
                                                  const BinaryMatrix& weights);

// im2col lowering of an input tensor (groups == 1): H rows of size S, window
// bits flattened rows-then-columns-then-channels.
BinaryMatrix im2col(const bnn::BinaryTensor& input, const ConvWorkload& workload);
BinaryMatrix flatten_filters(const std::vector<bnn::BinaryTensor>& filters);

// Row j pairs window (j % H) with filter (j / H), matching the oracle's
// (filter, window) output order transposed to pair ids.
std::pair<BinaryMatrix, BinaryMatrix> build_pair_matrices(
    const bnn::BinaryTensor& input, const std::vector<bnn::BinaryTensor>& filters,
    const ConvWorkload& workload);

}  // namespace oxbnn::mapping
