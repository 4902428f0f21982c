#include "modalign/synthetic.hpp"

#include <cmath>
#include <cstdio>

#include "modalign/rng.hpp"

namespace modalign {

namespace {

std::string synthetic_id(std::int64_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "SYN%06lld", static_cast<long long>(index + 1));
  return buf;
}

Matrix<double> gaussian_matrix(Eigen::Index rows, Eigen::Index cols, double scale, SplitMix64& rng) {
  Matrix<double> m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = scale * rng.normal();
  }
  return m;
}

std::vector<float> to_float(const Vector<double>& v) {
  std::vector<float> out(static_cast<std::size_t>(v.size()));
  for (Eigen::Index k = 0; k < v.size(); ++k) out[static_cast<std::size_t>(k)] = static_cast<float>(v(k));
  return out;
}

Vector<double> gaussian_vector(Eigen::Index n, SplitMix64& rng) {
  Vector<double> v(n);
  for (Eigen::Index k = 0; k < n; ++k) v(k) = rng.normal();
  return v;
}

}  // namespace

PairedDataset gen_synthetic(const SyntheticSpec& spec) {
  if (spec.latent_dim < 2 || spec.graph_dim < 2 || spec.text_dim < 2) {
    fail(ErrorCode::BadDims, "synthetic dimensions must be at least 2");
  }
  if (spec.n < 2) fail(ErrorCode::BadDims, "synthetic fixtures need at least 2 proteins");
  if (spec.noise < 0 || !std::isfinite(spec.noise)) fail(ErrorCode::BadDims, "noise must be finite and non-negative");
  if (spec.identity_maps && (spec.graph_dim != spec.latent_dim || spec.text_dim != spec.latent_dim)) {
    fail(ErrorCode::BadDims, "identity maps need graph, text and latent dims to match");
  }

  SplitMix64 rng(spec.seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(spec.latent_dim));
  Matrix<double> to_graph, to_text;
  if (spec.identity_maps) {
    to_graph = Matrix<double>::Identity(spec.graph_dim, spec.latent_dim);
    to_text = Matrix<double>::Identity(spec.text_dim, spec.latent_dim);
  } else {
    to_graph = gaussian_matrix(spec.graph_dim, spec.latent_dim, scale, rng);
    to_text = gaussian_matrix(spec.text_dim, spec.latent_dim, scale, rng);
  }

  EmbeddingSet graph("synthetic_graph", Modality::Graph, spec.graph_dim);
  EmbeddingSet text("synthetic_text", Modality::Text, spec.text_dim);
  for (std::int64_t i = 0; i < spec.n; ++i) {
    const Vector<double> z = gaussian_vector(spec.latent_dim, rng);
    const Vector<double> g = to_graph * z + spec.noise * gaussian_vector(spec.graph_dim, rng);
    const Vector<double> t = to_text * z + spec.noise * gaussian_vector(spec.text_dim, rng);
    const std::string id = synthetic_id(i);
    graph.add(id, to_float(g));
    text.add(id, to_float(t));
  }
  return pair_datasets(std::move(graph), std::move(text));
}

PairedDataset gen_independent(std::int64_t n, Eigen::Index graph_dim, Eigen::Index text_dim, std::uint64_t seed) {
  if (graph_dim < 2 || text_dim < 2) fail(ErrorCode::BadDims, "dimensions must be at least 2");
  if (n < 2) fail(ErrorCode::BadDims, "need at least 2 proteins");
  SplitMix64 rng(seed);
  EmbeddingSet graph("independent_graph", Modality::Graph, graph_dim);
  EmbeddingSet text("independent_text", Modality::Text, text_dim);
  for (std::int64_t i = 0; i < n; ++i) {
    const std::string id = synthetic_id(i);
    graph.add(id, to_float(gaussian_vector(graph_dim, rng)));
    text.add(id, to_float(gaussian_vector(text_dim, rng)));
  }
  return pair_datasets(std::move(graph), std::move(text));
}

}  // namespace modalign
