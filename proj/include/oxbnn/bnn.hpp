#pragma once

#include <cstdint>
#include <vector>

#include "oxbnn/common.hpp"

// Bit-exact functional model of binarized quantization, the XNOR dot product,
// bitcount, and threshold activation, plus the sliding-window convolution
// oracle that every scheduler and simulator result is checked against.
namespace oxbnn::bnn {

using Bit = std::uint8_t;

// {0,1}-valued operand vector.
class BinaryVector {
 public:
  BinaryVector() = default;
  explicit BinaryVector(std::vector<Bit> bits);
  static BinaryVector random(int size, SplitMix64& rng);

  int size() const { return static_cast<int>(bits_.size()); }
  Bit operator[](int i) const { return bits_[static_cast<std::size_t>(i)]; }
  const std::vector<Bit>& bits() const { return bits_; }
  const Bit* data() const { return bits_.data(); }
  bool operator==(const BinaryVector&) const = default;

 private:
  std::vector<Bit> bits_;
};

// {-1,+1}-valued vector, the pre-image of a BinaryVector.
class BipolarVector {
 public:
  explicit BipolarVector(std::vector<std::int8_t> values);
  static BipolarVector random(int size, SplitMix64& rng);

  int size() const { return static_cast<int>(values_.size()); }
  std::int8_t operator[](int i) const { return values_[static_cast<std::size_t>(i)]; }
  const std::vector<std::int8_t>& values() const { return values_; }

 private:
  std::vector<std::int8_t> values_;
};

struct BitcountResult {
  long z = 0;      // number of agreeing positions
  long z_max = 0;  // vector size S
  bool operator==(const BitcountResult&) const = default;
};

// Q(x) = sign(x); x >= 0 maps to +1. Rejects non-finite input.
std::int8_t quantize_sign(double x);

// Element-wise -1 -> 0, +1 -> 1.
BinaryVector bipolar_to_binary(const BipolarVector& v);

// 1 iff a == b.
inline Bit xnor_bit(Bit a, Bit b) { return static_cast<Bit>(a == b); }

BitcountResult xnor_dot(const BinaryVector& i_vec, const BinaryVector& w_vec);
BitcountResult xnor_dot_span(const Bit* a, const Bit* b, int len);

// 2z - z_max; equals the {-1,+1} inner product of the pre-image vectors.
long bipolar_dot_from_bitcount(const BitcountResult& r);

// 1 if z > 0.5 * z_max, else 0. The tie z == z_max/2 maps to 0.
Bit activation_compare(const BitcountResult& r);

// Shape-carrying {0,1} tensor, stored (channel, row, col).
class BinaryTensor {
 public:
  BinaryTensor(int channels, int height, int width);
  static BinaryTensor random(int channels, int height, int width, SplitMix64& rng);

  int channels() const { return channels_; }
  int height() const { return height_; }
  int width() const { return width_; }

  Bit at(int c, int y, int x) const { return data_[index(c, y, x)]; }
  void set(int c, int y, int x, Bit v) { data_[index(c, y, x)] = v; }
  // Zero padding in the {0,1} domain: out-of-bounds positions read as 0.
  Bit at_padded(int c, int y, int x) const;
  const std::vector<Bit>& data() const { return data_; }

 private:
  std::size_t index(int c, int y, int x) const;
  int channels_, height_, width_;
  std::vector<Bit> data_;
};

struct ConvOutput {
  int filters = 0;
  int out_height = 0;
  int out_width = 0;
  long z_max = 0;  // flattened window size S
  std::vector<long> z;  // row-major (filter, y, x)

  long at(int f, int y, int x) const {
    return z[(static_cast<std::size_t>(f) * out_height + y) * out_width + x];
  }
};

// Full sliding-window oracle. Filters are (channel, ky, kx) tensors whose
// channel count matches the input. Windows and filters flatten in the same
// fixed order: rows, then columns, then channels.
ConvOutput conv_reference(const BinaryTensor& input,
                          const std::vector<BinaryTensor>& filters, int stride,
                          int padding);

// Flattened window in oracle order; padding positions contribute 0 bits.
std::vector<Bit> flatten_window(const BinaryTensor& input, int y0, int x0,
                                int kernel_h, int kernel_w);
std::vector<Bit> flatten_filter(const BinaryTensor& filter);

}  // namespace oxbnn::bnn
