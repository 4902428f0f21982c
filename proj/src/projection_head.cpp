#include "modalign/projection_head.hpp"

#include <algorithm>
#include <cctype>

#include "binary_io.hpp"

namespace modalign {

namespace {

constexpr std::string_view kMagic = "PHD1";
constexpr std::uint16_t kVersion = 1;

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

const ModelSpec* find_model(const std::vector<ModelSpec>& models, std::string_view name) {
  const std::string key = lower(name);
  for (const auto& m : models) {
    if (lower(m.name) == key) return &m;
  }
  return nullptr;
}

}  // namespace

const std::vector<ModelSpec>& structure_models() {
  static const std::vector<ModelSpec> models{
      {"GearNet", 3072}, {"GVP", 148}, {"ScanNet", 128}, {"GAT", 64}};
  return models;
}

const std::vector<ModelSpec>& language_models() {
  static const std::vector<ModelSpec> models{
      {"Gemma2-2B", 2304}, {"LLaMa3.1-8B", 4096}, {"LLaMa3.1-70B", 8192}};
  return models;
}

HeadConfig preset_config(std::string_view structure_model, std::string_view language_model, int layers,
                         std::uint64_t seed) {
  const ModelSpec* gdm = find_model(structure_models(), structure_model);
  const ModelSpec* llm = find_model(language_models(), language_model);
  if (gdm == nullptr) fail(ErrorCode::UnknownPreset, "unknown structure model: " + std::string(structure_model));
  if (llm == nullptr) fail(ErrorCode::UnknownPreset, "unknown language model: " + std::string(language_model));
  if (layers < 1 || layers > 3) fail(ErrorCode::UnknownPreset, "presets exist for 1 to 3 layers");

  const bool gearnet = gdm->name == "GearNet";
  std::vector<Eigen::Index> hidden;
  if (layers > 1) {
    // Hidden widths chosen per language model; GearNet's 3072-d input gets
    // its own widths since it is wider than the other structure models.
    if (llm->name == "Gemma2-2B") {
      hidden = layers == 2 ? (gearnet ? std::vector<Eigen::Index>{2560} : std::vector<Eigen::Index>{1024})
                           : (gearnet ? std::vector<Eigen::Index>{2816, 2560} : std::vector<Eigen::Index>{512, 1024});
    } else if (llm->name == "LLaMa3.1-8B") {
      hidden = layers == 2 ? (gearnet ? std::vector<Eigen::Index>{3584} : std::vector<Eigen::Index>{2048})
                           : (gearnet ? std::vector<Eigen::Index>{3584, 3840} : std::vector<Eigen::Index>{512, 2048});
    } else {
      hidden = layers == 2 ? std::vector<Eigen::Index>{4096}
                           : (gearnet ? std::vector<Eigen::Index>{4096, 6144} : std::vector<Eigen::Index>{1024, 4096});
    }
  }
  return HeadConfig{gdm->dim, llm->dim, std::move(hidden), seed};
}

std::string encode_head(const ProjectionHead<double>& head) {
  detail::ByteWriter out;
  out.raw(kMagic);
  out.uint<std::uint16_t>(kVersion);
  out.uint<std::uint8_t>(static_cast<std::uint8_t>(head.layers().size()));
  for (const auto& layer : head.layers()) {
    out.uint<std::uint32_t>(static_cast<std::uint32_t>(layer.weight.rows()));
    out.uint<std::uint32_t>(static_cast<std::uint32_t>(layer.weight.cols()));
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) out.f64(layer.weight(r, c));
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) out.f64(layer.bias(r));
  }
  return out.bytes();
}

ProjectionHead<double> decode_head(std::string_view bytes) {
  if (bytes.size() < 4 || bytes.substr(0, 4) != kMagic) fail(ErrorCode::BadMagic, "missing PHD1 magic");
  detail::ByteReader in(bytes, ErrorCode::ShapeMismatch);
  in.raw(4);
  const auto version = in.uint<std::uint16_t>();
  if (version != kVersion) fail(ErrorCode::VersionUnsupported, "PHD1 version " + std::to_string(version));
  const auto count = in.uint<std::uint8_t>();
  if (count < 1 || count > 3) fail(ErrorCode::ShapeMismatch, "PHD1 layer count must be 1 to 3");

  ProjectionHead<double>::Layers layers;
  HeadConfig config;
  for (unsigned k = 0; k < count; ++k) {
    const auto rows = static_cast<Eigen::Index>(in.uint<std::uint32_t>());
    const auto cols = static_cast<Eigen::Index>(in.uint<std::uint32_t>());
    if (rows == 0 || cols == 0) fail(ErrorCode::ShapeMismatch, "zero-sized layer");
    if (k == 0) {
      config.input_dim = cols;
    } else if (cols != layers.back().weight.rows()) {
      fail(ErrorCode::ShapeMismatch, "layer " + std::to_string(k) + " input does not match previous output");
    }
    if (in.remaining() / 8 < static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols + 1)) {
      fail(ErrorCode::ShapeMismatch, "layer " + std::to_string(k) + " is truncated");
    }
    Layer<double> layer{Matrix<double>(rows, cols), Vector<double>(rows)};
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) layer.weight(r, c) = in.f64();
    }
    for (Eigen::Index r = 0; r < rows; ++r) layer.bias(r) = in.f64();
    if (k + 1 < count) config.hidden_dims.push_back(rows);
    layers.push_back(std::move(layer));
  }
  if (in.remaining() != 0) fail(ErrorCode::ShapeMismatch, "trailing bytes after last layer");
  config.output_dim = layers.back().weight.rows();
  return ProjectionHead<double>(std::move(config), std::move(layers));
}

void save_head(const ProjectionHead<double>& head, const std::string& path) {
  detail::write_file(path, encode_head(head));
}

ProjectionHead<double> load_head(const std::string& path) { return decode_head(detail::read_file(path)); }

}  // namespace modalign
