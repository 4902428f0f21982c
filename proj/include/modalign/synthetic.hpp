#pragma once

#include <cstdint>

#include "modalign/embedding_store.hpp"

namespace modalign {

struct SyntheticSpec {
  std::int64_t n = 1000;
  Eigen::Index latent_dim = 64;
  Eigen::Index graph_dim = 128;
  Eigen::Index text_dim = 256;
  double noise = 0.1;
  std::uint64_t seed = 42;
  /// Use identity maps instead of random ones (requires all dims equal).
  bool identity_maps = false;
};

/// Paired fixture with shared latent structure:
///   z_i ~ N(0, I_latent), graph_i = A z_i + noise * e, text_i = B z_i + noise * e'
/// with A, B drawn once with N(0, 1/latent) entries. Draw order: A row-major,
/// B row-major, then per protein z, graph noise, text noise. IDs SYN000001...
PairedDataset gen_synthetic(const SyntheticSpec& spec);

/// Independent standard-normal graph and text vectors (no shared signal);
/// per protein the graph vector is drawn before the text vector.
PairedDataset gen_independent(std::int64_t n, Eigen::Index graph_dim, Eigen::Index text_dim, std::uint64_t seed);

}  // namespace modalign
