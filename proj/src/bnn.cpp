#include "oxbnn/bnn.hpp"

#include <cmath>
#include <string>

namespace oxbnn::bnn {

BinaryVector::BinaryVector(std::vector<Bit> bits) : bits_(std::move(bits)) {
  for (Bit b : bits_) {
    if (b > 1) throw ValidationError("binary vector element must be 0 or 1");
  }
}

BinaryVector BinaryVector::random(int size, SplitMix64& rng) {
  std::vector<Bit> bits(static_cast<std::size_t>(size));
  for (auto& b : bits) b = static_cast<Bit>(rng.bit());
  return BinaryVector(std::move(bits));
}

BipolarVector::BipolarVector(std::vector<std::int8_t> values)
    : values_(std::move(values)) {
  for (std::int8_t v : values_) {
    if (v != -1 && v != 1)
      throw ValidationError("bipolar vector element must be -1 or +1");
  }
}

BipolarVector BipolarVector::random(int size, SplitMix64& rng) {
  std::vector<std::int8_t> values(static_cast<std::size_t>(size));
  for (auto& v : values) v = rng.bit() ? std::int8_t{1} : std::int8_t{-1};
  return BipolarVector(std::move(values));
}

std::int8_t quantize_sign(double x) {
  if (!std::isfinite(x)) throw ValidationError("quantize_sign requires a finite input");
  return x >= 0.0 ? std::int8_t{1} : std::int8_t{-1};
}

BinaryVector bipolar_to_binary(const BipolarVector& v) {
  std::vector<Bit> bits(static_cast<std::size_t>(v.size()));
  for (int i = 0; i < v.size(); ++i) bits[static_cast<std::size_t>(i)] = v[i] > 0 ? 1 : 0;
  return BinaryVector(std::move(bits));
}

BitcountResult xnor_dot(const BinaryVector& i_vec, const BinaryVector& w_vec) {
  if (i_vec.size() != w_vec.size()) {
    throw ValidationError("xnor_dot size mismatch: " + std::to_string(i_vec.size()) +
                          " vs " + std::to_string(w_vec.size()));
  }
  return xnor_dot_span(i_vec.data(), w_vec.data(), i_vec.size());
}

BitcountResult xnor_dot_span(const Bit* a, const Bit* b, int len) {
  long z = 0;
  for (int i = 0; i < len; ++i) z += (a[i] == b[i]);
  return BitcountResult{z, len};
}

long bipolar_dot_from_bitcount(const BitcountResult& r) { return 2 * r.z - r.z_max; }

Bit activation_compare(const BitcountResult& r) {
  return static_cast<Bit>(2 * r.z > r.z_max);
}

BinaryTensor::BinaryTensor(int channels, int height, int width)
    : channels_(channels), height_(height), width_(width) {
  if (channels < 1 || height < 1 || width < 1)
    throw ValidationError("tensor dimensions must be positive");
  data_.assign(static_cast<std::size_t>(channels) * height * width, 0);
}

BinaryTensor BinaryTensor::random(int channels, int height, int width,
                                  SplitMix64& rng) {
  BinaryTensor t(channels, height, width);
  for (auto& b : t.data_) b = static_cast<Bit>(rng.bit());
  return t;
}

std::size_t BinaryTensor::index(int c, int y, int x) const {
  return (static_cast<std::size_t>(c) * height_ + y) * width_ + x;
}

Bit BinaryTensor::at_padded(int c, int y, int x) const {
  if (y < 0 || y >= height_ || x < 0 || x >= width_) return 0;
  return at(c, y, x);
}

std::vector<Bit> flatten_window(const BinaryTensor& input, int y0, int x0,
                                int kernel_h, int kernel_w) {
  std::vector<Bit> out;
  out.reserve(static_cast<std::size_t>(kernel_h) * kernel_w * input.channels());
  for (int ky = 0; ky < kernel_h; ++ky)
    for (int kx = 0; kx < kernel_w; ++kx)
      for (int c = 0; c < input.channels(); ++c)
        out.push_back(input.at_padded(c, y0 + ky, x0 + kx));
  return out;
}

std::vector<Bit> flatten_filter(const BinaryTensor& filter) {
  std::vector<Bit> out;
  out.reserve(static_cast<std::size_t>(filter.height()) * filter.width() *
              filter.channels());
  for (int ky = 0; ky < filter.height(); ++ky)
    for (int kx = 0; kx < filter.width(); ++kx)
      for (int c = 0; c < filter.channels(); ++c)
        out.push_back(filter.at(c, ky, kx));
  return out;
}

ConvOutput conv_reference(const BinaryTensor& input,
                          const std::vector<BinaryTensor>& filters, int stride,
                          int padding) {
  if (filters.empty()) throw ValidationError("conv_reference needs at least one filter");
  if (stride < 1) throw ValidationError("stride must be positive");
  if (padding < 0) throw ValidationError("padding must be non-negative");
  const int kh = filters.front().height();
  const int kw = filters.front().width();
  for (const auto& f : filters) {
    if (f.channels() != input.channels() || f.height() != kh || f.width() != kw)
      throw ValidationError("filter shape does not match input");
  }
  const int span_h = input.height() + 2 * padding;
  const int span_w = input.width() + 2 * padding;
  if (kh > span_h || kw > span_w)
    throw ValidationError("kernel larger than padded input");

  ConvOutput out;
  out.filters = static_cast<int>(filters.size());
  out.out_height = (span_h - kh) / stride + 1;
  out.out_width = (span_w - kw) / stride + 1;
  out.z_max = static_cast<long>(kh) * kw * input.channels();
  out.z.reserve(static_cast<std::size_t>(out.filters) * out.out_height * out.out_width);

  std::vector<std::vector<Bit>> flat_filters;
  flat_filters.reserve(filters.size());
  for (const auto& f : filters) flat_filters.push_back(flatten_filter(f));

  for (int f = 0; f < out.filters; ++f) {
    for (int oy = 0; oy < out.out_height; ++oy) {
      for (int ox = 0; ox < out.out_width; ++ox) {
        const auto window = flatten_window(input, oy * stride - padding,
                                           ox * stride - padding, kh, kw);
        const auto r = xnor_dot_span(window.data(), flat_filters[static_cast<std::size_t>(f)].data(),
                                     static_cast<int>(window.size()));
        out.z.push_back(r.z);
      }
    }
  }
  return out;
}

}  // namespace oxbnn::bnn
