#include "oxbnn/workloads.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <string_view>

namespace oxbnn::workloads {

namespace {

#include "oxbnn/models_data.inc"  // generated: embeds data/models/*.model

std::string normalize_name(std::string name) {
  for (char& c : name) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    if (c == '-') c = '_';
  }
  return name;
}

struct Shape {
  int h, w, c;
  auto operator<=>(const Shape&) const = default;
};

Shape input_shape(const Layer& l) {
  return {l.shape.input_height, l.shape.input_width, l.shape.input_channels};
}

Shape output_shape(const Layer& l) {
  return {l.shape.out_height(), l.shape.out_width(), l.shape.output_channels};
}

}  // namespace

const char* layer_kind_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::conv: return "conv";
    case LayerKind::dwconv: return "dwconv";
    case LayerKind::fc: return "fc";
    case LayerKind::pool: return "pool";
  }
  return "?";
}

void ModelSpec::validate() const {
  if (layers.empty()) throw ValidationError("model has no layers");

  std::set<Shape> available;
  available.insert(input_shape(layers.front()));
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const Layer& l = layers[i];
    l.shape.validate();
    if (l.kind == LayerKind::dwconv &&
        (l.shape.groups != l.shape.input_channels ||
         l.shape.output_channels != l.shape.input_channels))
      throw ValidationError("layer " + std::to_string(i) + ": depthwise needs out_c == in_c");
    if (l.kind == LayerKind::fc &&
        (l.shape.out_height() != 1 || l.shape.out_width() != 1))
      throw ValidationError("layer " + std::to_string(i) + ": fc kernel must cover its input");
    if (l.kind == LayerKind::pool &&
        l.shape.output_channels != l.shape.input_channels)
      throw ValidationError("layer " + std::to_string(i) + ": pooling preserves channels");

    if (i > 0) {
      const Shape in = input_shape(l);
      bool ok = available.contains(in) || available.contains({in.h, in.w, 2 * in.c});
      if (!ok) {
        // concat: any two available channel counts at this resolution summing
        // to the requested one (split halves are covered above).
        std::vector<int> chans;
        for (const auto& s : available)
          if (s.h == in.h && s.w == in.w) chans.push_back(s.c);
        for (int a : chans) {
          if (std::binary_search(chans.begin(), chans.end(), in.c - a)) {
            ok = true;
            break;
          }
        }
      }
      if (!ok) {
        throw ValidationError("layer " + std::to_string(i) + ": input shape " +
                              std::to_string(in.h) + "x" + std::to_string(in.w) + "x" +
                              std::to_string(in.c) + " is not derivable from earlier layers");
      }
    }
    available.insert(output_shape(l));
  }
}

int ModelSpec::max_vector_size() const {
  int s = 0;
  for (const auto& l : layers)
    if (l.is_compute()) s = std::max(s, l.shape.vector_size());
  return s;
}

ModelSpec parse_model(const std::string& text) {
  ModelSpec spec;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool have_header = false;

  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string kind;
    if (!(ls >> kind)) continue;

    if (!have_header) {
      if (kind != "model") throw ParseError("expected `model NAME` header", lineno);
      if (!(ls >> spec.name)) throw ParseError("missing model name", lineno);
      have_header = true;
      continue;
    }

    Layer layer;
    mapping::ConvWorkload& s = layer.shape;
    if (kind == "conv" || kind == "dwconv" || kind == "fc") {
      layer.kind = kind == "conv" ? LayerKind::conv
                   : kind == "dwconv" ? LayerKind::dwconv
                                      : LayerKind::fc;
      if (!(ls >> s.input_height >> s.input_width >> s.input_channels >>
            s.kernel_height >> s.kernel_width >> s.output_channels >> s.stride >>
            s.padding))
        throw ParseError("expected 8 integer fields after " + kind, lineno);
      s.groups = layer.kind == LayerKind::dwconv ? s.input_channels : 1;
    } else if (kind == "pool") {
      layer.kind = LayerKind::pool;
      int k = 0;
      if (!(ls >> s.input_height >> s.input_width >> s.input_channels >> k >>
            s.stride >> s.padding))
        throw ParseError("expected 6 integer fields after pool", lineno);
      s.kernel_height = s.kernel_width = k;
      s.output_channels = s.input_channels;
    } else {
      throw ParseError("unknown layer kind: " + kind, lineno);
    }
    std::string extra;
    if (ls >> extra) throw ParseError("trailing tokens after layer record", lineno);
    try {
      s.validate();
    } catch (const ValidationError& e) {
      throw ParseError(e.what(), lineno);
    }
    spec.layers.push_back(layer);
  }

  if (!have_header) throw ParseError("empty model description", lineno == 0 ? 1 : lineno);
  spec.validate();
  return spec;
}

std::string serialize_model(const ModelSpec& spec) {
  std::ostringstream out;
  out << "model " << spec.name << "\n";
  for (const auto& l : spec.layers) {
    const auto& s = l.shape;
    if (l.kind == LayerKind::pool) {
      out << "pool " << s.input_height << " " << s.input_width << " "
          << s.input_channels << " " << s.kernel_height << " " << s.stride << " "
          << s.padding << "\n";
    } else {
      out << layer_kind_name(l.kind) << " " << s.input_height << " " << s.input_width
          << " " << s.input_channels << " " << s.kernel_height << " "
          << s.kernel_width << " " << s.output_channels << " " << s.stride << " "
          << s.padding << "\n";
    }
  }
  return out.str();
}

ModelSpec load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open model file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

const std::vector<std::string>& builtin_model_names() {
  static const std::vector<std::string> names = {"vgg_small", "resnet18",
                                                 "mobilenet_v2", "shufflenet_v2"};
  return names;
}

ModelSpec builtin_model(const std::string& name) {
  const std::string key = normalize_name(name);
  if (key == "vgg_small") return parse_model(std::string(kModelVggSmall));
  if (key == "resnet18") return parse_model(std::string(kModelResnet18));
  if (key == "mobilenet_v2") return parse_model(std::string(kModelMobilenetV2));
  if (key == "shufflenet_v2") return parse_model(std::string(kModelShufflenetV2));
  throw ValidationError("unknown built-in model: " + name);
}

std::vector<ModelSpec> builtin_models() {
  std::vector<ModelSpec> out;
  for (const auto& name : builtin_model_names()) out.push_back(builtin_model(name));
  return out;
}

LayerTensors synthesize_layer_tensors(const Layer& layer, std::uint64_t seed,
                                      std::size_t layer_index) {
  if (!layer.is_compute())
    throw UsageError("pooling layers have no operand tensors");
  const auto& s = layer.shape;
  SplitMix64 rng(seed ^ (0x632be59bd9b4e019ULL * (layer_index + 1)));
  LayerTensors t{bnn::BinaryTensor::random(s.input_channels, s.input_height,
                                           s.input_width, rng),
                 {}};
  const int filter_channels = s.input_channels / s.groups;
  t.filters.reserve(static_cast<std::size_t>(s.output_channels));
  for (int f = 0; f < s.output_channels; ++f) {
    t.filters.push_back(bnn::BinaryTensor::random(filter_channels, s.kernel_height,
                                                  s.kernel_width, rng));
  }
  return t;
}

ModelTensors synthesize_tensors(const ModelSpec& spec, std::uint64_t seed) {
  ModelTensors out;
  out.per_layer.reserve(spec.layers.size());
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    if (spec.layers[i].is_compute())
      out.per_layer.emplace_back(synthesize_layer_tensors(spec.layers[i], seed, i));
    else
      out.per_layer.emplace_back(std::nullopt);
  }
  return out;
}

}  // namespace oxbnn::workloads
