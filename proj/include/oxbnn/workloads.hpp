#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "oxbnn/bnn.hpp"
#include "oxbnn/common.hpp"
#include "oxbnn/mapping.hpp"

// BNN model descriptions: a line-oriented layer format, shape-chain
// validation, the four built-in networks, and synthetic binary tensors for
// functional testing.
//
// Layer grammar (one record per line, '#' starts a comment):
//   conv   IN_H IN_W IN_C K_H K_W OUT_C STRIDE PAD
//   dwconv IN_H IN_W IN_C K_H K_W OUT_C STRIDE PAD   (OUT_C == IN_C)
//   fc     IN_H IN_W IN_C K_H K_W OUT_C STRIDE PAD   (kernel covers the input)
//   pool   IN_H IN_W IN_C K STRIDE PAD
// The first line must be `model NAME`.
namespace oxbnn::workloads {

enum class LayerKind { conv, dwconv, fc, pool };

struct Layer {
  LayerKind kind = LayerKind::conv;
  mapping::ConvWorkload shape;

  bool is_compute() const { return kind != LayerKind::pool; }
};

struct ModelSpec {
  std::string name;
  std::vector<Layer> layers;

  // Shape-chain rules: a layer's input must be the network input, an earlier
  // output, a channel-halving of one (split), or a channel-sum of two at the
  // same resolution (concat). Throws with the first offending layer index.
  void validate() const;
  int max_vector_size() const;
};

const char* layer_kind_name(LayerKind kind);

ModelSpec parse_model(const std::string& text);
std::string serialize_model(const ModelSpec& spec);
ModelSpec load_model_file(const std::string& path);

const std::vector<std::string>& builtin_model_names();
ModelSpec builtin_model(const std::string& name);  // name is case/sep insensitive
std::vector<ModelSpec> builtin_models();

// Deterministic pseudo-random {0,1} tensors for every compute layer.
struct LayerTensors {
  bnn::BinaryTensor input;
  std::vector<bnn::BinaryTensor> filters;
};

struct ModelTensors {
  // Indexed like spec.layers; pooling entries are empty.
  std::vector<std::optional<LayerTensors>> per_layer;
};

LayerTensors synthesize_layer_tensors(const Layer& layer, std::uint64_t seed,
                                      std::size_t layer_index);
ModelTensors synthesize_tensors(const ModelSpec& spec, std::uint64_t seed);

}  // namespace oxbnn::workloads
