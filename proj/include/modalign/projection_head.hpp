#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "modalign/embedding_store.hpp"
#include "modalign/error.hpp"
#include "modalign/rng.hpp"

namespace modalign {

/// Guard below which a raw projection is treated as the zero vector.
inline constexpr double kNormEpsilon = 1e-12;

struct HeadConfig {
  Eigen::Index input_dim = 0;
  Eigen::Index output_dim = 0;
  std::vector<Eigen::Index> hidden_dims;
  std::uint64_t seed = 0;

  std::size_t layer_count() const noexcept { return hidden_dims.size() + 1; }

  /// input_dim, hidden..., output_dim
  std::vector<Eigen::Index> chain() const {
    std::vector<Eigen::Index> dims{input_dim};
    dims.insert(dims.end(), hidden_dims.begin(), hidden_dims.end());
    dims.push_back(output_dim);
    return dims;
  }

  void validate() const {
    if (hidden_dims.size() > 2) fail(ErrorCode::InvalidConfig, "projection heads have 1 to 3 layers");
    for (auto d : chain()) {
      if (d <= 0) fail(ErrorCode::InvalidConfig, "layer dimensions must be positive");
    }
  }

  friend bool operator==(const HeadConfig&, const HeadConfig&) = default;
};

template <typename Scalar>
struct Layer {
  Matrix<Scalar> weight;  // out x in
  Vector<Scalar> bias;    // out
};

/// Affine layers with ReLU between them and an L2-normalised output.
template <typename Scalar = double>
class ProjectionHead {
 public:
  using Layers = std::vector<Layer<Scalar>>;

  ProjectionHead(HeadConfig config, Layers layers) : config_(std::move(config)), layers_(std::move(layers)) {
    config_.validate();
    const auto dims = config_.chain();
    if (layers_.size() != config_.layer_count()) fail(ErrorCode::ShapeMismatch, "layer count does not match config");
    for (std::size_t k = 0; k < layers_.size(); ++k) {
      const auto& l = layers_[k];
      if (l.weight.rows() != dims[k + 1] || l.weight.cols() != dims[k] || l.bias.size() != dims[k + 1]) {
        fail(ErrorCode::ShapeMismatch, "layer " + std::to_string(k) + " shape does not match config");
      }
      if (!l.weight.allFinite() || !l.bias.allFinite()) fail(ErrorCode::NonFiniteValue, "non-finite head parameter");
    }
  }

  const HeadConfig& config() const noexcept { return config_; }
  const Layers& layers() const noexcept { return layers_; }
  Layers& layers() noexcept { return layers_; }
  Eigen::Index input_dim() const noexcept { return config_.input_dim; }
  Eigen::Index output_dim() const noexcept { return config_.output_dim; }

  std::size_t parameter_count() const noexcept {
    std::size_t n = 0;
    for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
    return n;
  }

  friend bool operator==(const ProjectionHead& a, const ProjectionHead& b) {
    if (a.layers_.size() != b.layers_.size()) return false;
    for (std::size_t k = 0; k < a.layers_.size(); ++k) {
      const auto& la = a.layers_[k];
      const auto& lb = b.layers_[k];
      if (la.weight.rows() != lb.weight.rows() || la.weight.cols() != lb.weight.cols() ||
          la.weight != lb.weight || la.bias != lb.bias) {
        return false;
      }
    }
    return true;
  }

 private:
  HeadConfig config_;
  Layers layers_;
};

/// Same shapes as the head's parameters.
template <typename Scalar = double>
struct HeadGradients {
  std::vector<Layer<Scalar>> layers;

  static HeadGradients zeros_like(const ProjectionHead<Scalar>& head) {
    HeadGradients g;
    for (const auto& l : head.layers()) {
      g.layers.push_back({Matrix<Scalar>::Zero(l.weight.rows(), l.weight.cols()),
                          Vector<Scalar>::Zero(l.bias.size())});
    }
    return g;
  }
};

/// Glorot-uniform weights drawn in layer order then row-major order from a
/// SplitMix64 stream seeded with config.seed; zero biases.
template <typename Scalar = double>
ProjectionHead<Scalar> init_head(const HeadConfig& config) {
  config.validate();
  const auto dims = config.chain();
  SplitMix64 rng(config.seed);
  typename ProjectionHead<Scalar>::Layers layers;
  for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
    const Eigen::Index in = dims[k];
    const Eigen::Index out = dims[k + 1];
    const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
    Layer<Scalar> layer{Matrix<Scalar>(out, in), Vector<Scalar>::Zero(out)};
    for (Eigen::Index r = 0; r < out; ++r) {
      for (Eigen::Index c = 0; c < in; ++c) layer.weight(r, c) = static_cast<Scalar>(rng.uniform(-bound, bound));
    }
    layers.push_back(std::move(layer));
  }
  return ProjectionHead<Scalar>(config, std::move(layers));
}

/// Intermediate values for one sample, kept for the backward pass.
template <typename Scalar>
struct SampleTrace {
  std::vector<Vector<Scalar>> inputs;  // input to each layer (post-ReLU for interior)
  Vector<Scalar> raw;                  // final affine output before normalisation
  Scalar raw_norm{};
  Vector<Scalar> output;               // unit vector
};

template <typename Scalar, typename Derived>
SampleTrace<Scalar> trace_forward(const ProjectionHead<Scalar>& head, const Eigen::MatrixBase<Derived>& x) {
  if (x.size() != head.input_dim()) fail(ErrorCode::ShapeMismatch, "input length does not match head input dim");
  SampleTrace<Scalar> t;
  const auto& layers = head.layers();
  Vector<Scalar> h = x.template cast<Scalar>();
  for (std::size_t k = 0; k < layers.size(); ++k) {
    t.inputs.push_back(h);
    Vector<Scalar> z = layers[k].weight * h + layers[k].bias;
    if (k + 1 < layers.size()) {
      h = z.cwiseMax(Scalar(0));
    } else {
      t.raw = std::move(z);
    }
  }
  t.raw_norm = t.raw.norm();
  if (!(t.raw_norm > static_cast<Scalar>(kNormEpsilon))) {
    fail(ErrorCode::DegenerateOutput, "projection has (near) zero norm");
  }
  t.output = t.raw / t.raw_norm;
  return t;
}

template <typename Scalar, typename Derived>
Vector<Scalar> forward(const ProjectionHead<Scalar>& head, const Eigen::MatrixBase<Derived>& x) {
  return trace_forward(head, x).output;
}

/// Column-wise forward: each column of `inputs` is one sample.
template <typename Scalar, typename Derived>
Matrix<Scalar> forward_batch(const ProjectionHead<Scalar>& head, const Eigen::MatrixBase<Derived>& inputs) {
  Matrix<Scalar> out(head.output_dim(), inputs.cols());
  for (Eigen::Index i = 0; i < inputs.cols(); ++i) out.col(i) = forward(head, inputs.col(i));
  return out;
}

/// Accumulates into `grads` the parameter gradient of one sample given the
/// gradient `upstream` with respect to its normalised output.
template <typename Scalar, typename Derived>
void accumulate_backward(const ProjectionHead<Scalar>& head, const SampleTrace<Scalar>& trace,
                         const Eigen::MatrixBase<Derived>& upstream, HeadGradients<Scalar>& grads) {
  if (upstream.size() != head.output_dim()) fail(ErrorCode::ShapeMismatch, "upstream gradient length mismatch");
  if (grads.layers.size() != head.layers().size()) fail(ErrorCode::ShapeMismatch, "gradient layer count mismatch");
  const auto& layers = head.layers();
  const Vector<Scalar>& y = trace.output;
  // d(r/|r|)/dr = (I - y y^T) / |r|
  Vector<Scalar> delta = (upstream - y * y.dot(upstream)) / trace.raw_norm;
  for (std::size_t k = layers.size(); k-- > 0;) {
    grads.layers[k].weight.noalias() += delta * trace.inputs[k].transpose();
    grads.layers[k].bias += delta;
    if (k == 0) break;
    Vector<Scalar> back = layers[k].weight.transpose() * delta;
    // trace.inputs[k] is relu(z_{k-1}); positive entries mark the active units
    delta = (trace.inputs[k].array() > Scalar(0)).select(back, Scalar(0));
  }
}

/// Batch gradient summed over samples in column order. `inputs` is in x B,
/// `upstream` is out x B.
template <typename Scalar, typename D1, typename D2>
HeadGradients<Scalar> backward(const ProjectionHead<Scalar>& head, const Eigen::MatrixBase<D1>& inputs,
                               const Eigen::MatrixBase<D2>& upstream) {
  if (inputs.cols() != upstream.cols()) fail(ErrorCode::ShapeMismatch, "batch sizes differ");
  if (upstream.rows() != head.output_dim() || inputs.rows() != head.input_dim()) {
    fail(ErrorCode::ShapeMismatch, "batch dimensions do not match the head");
  }
  auto grads = HeadGradients<Scalar>::zeros_like(head);
  for (Eigen::Index i = 0; i < inputs.cols(); ++i) {
    accumulate_backward(head, trace_forward(head, inputs.col(i)), upstream.col(i), grads);
  }
  return grads;
}

/// Shared-dimension presets for the structure-model / language-model grid.
struct ModelSpec {
  std::string name;
  Eigen::Index dim;
};

const std::vector<ModelSpec>& structure_models();
const std::vector<ModelSpec>& language_models();

/// Config for the structure-side head of a (structure model, language
/// model) pair with 1, 2 or 3 layers. Names match case-insensitively.
/// Throws UnknownPreset.
HeadConfig preset_config(std::string_view structure_model, std::string_view language_model, int layers,
                         std::uint64_t seed = 0);

/// PHD1 checkpoint codec (64-bit parameters).
std::string encode_head(const ProjectionHead<double>& head);
ProjectionHead<double> decode_head(std::string_view bytes);
void save_head(const ProjectionHead<double>& head, const std::string& path);
ProjectionHead<double> load_head(const std::string& path);

}  // namespace modalign
