#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "modalign/error.hpp"

namespace modalign {

enum class Modality { Graph, Text };

std::string_view to_string(Modality m) noexcept;
Modality parse_modality(std::string_view text);

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// One model's pooled per-protein embeddings. Records keep insertion order;
/// vectors are stored column-wise (dim x count) in 32-bit floats.
class EmbeddingSet {
 public:
  EmbeddingSet(std::string model_name, Modality modality, Eigen::Index dim);

  /// Appends a record, enforcing the set invariants (dimension, unique
  /// non-empty ID, finite values).
  void add(std::string id, std::span<const float> values);

  const std::string& model_name() const noexcept { return model_name_; }
  Modality modality() const noexcept { return modality_; }
  Eigen::Index dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return ids_.size(); }
  const std::vector<std::string>& ids() const noexcept { return ids_; }

  std::optional<Eigen::Index> find(const std::string& id) const;

  Eigen::Map<const Matrix<float>> vectors() const {
    return {values_.data(), dim_, static_cast<Eigen::Index>(ids_.size())};
  }

  Eigen::Map<const Vector<float>> vector(Eigen::Index index) const {
    return {values_.data() + index * dim_, dim_};
  }

  /// Columns for `ids`, widened to Scalar. Throws UnknownId.
  template <typename Scalar>
  Matrix<Scalar> gather(std::span<const std::string> ids) const {
    Matrix<Scalar> out(dim_, static_cast<Eigen::Index>(ids.size()));
    for (std::size_t k = 0; k < ids.size(); ++k) {
      out.col(static_cast<Eigen::Index>(k)) = vector(require(ids[k])).template cast<Scalar>();
    }
    return out;
  }

  /// Bitwise equality of names, order, IDs, and vector payloads.
  friend bool operator==(const EmbeddingSet& a, const EmbeddingSet& b);

 private:
  Eigen::Index require(const std::string& id) const;

  std::string model_name_;
  Modality modality_;
  Eigen::Index dim_;
  std::vector<std::string> ids_;
  std::vector<float> values_;
  std::unordered_map<std::string, Eigen::Index> index_;
};

/// Reads an EMB1 file. The format carries no model metadata, so the caller
/// names the modality; model_name defaults to the file stem.
EmbeddingSet read_embedding_file(const std::string& path, Modality modality,
                                 std::optional<std::string> model_name = std::nullopt);

/// Parses EMB1 bytes already in memory.
EmbeddingSet decode_embedding_set(std::string_view bytes, std::string model_name, Modality modality);

std::string encode_embedding_set(const EmbeddingSet& set);

void write_embedding_file(const EmbeddingSet& set, const std::string& path);

/// Companion manifest written next to an EMB1 file.
struct EmbeddingManifest {
  std::string model_name;
  Modality modality = Modality::Graph;
  std::int64_t dim = 0;
  std::int64_t count = 0;
  std::string source;
};

EmbeddingManifest make_manifest(const EmbeddingSet& set, std::string source);

struct PairedDataset {
  EmbeddingSet graph;
  EmbeddingSet text;
  /// Sorted intersection of the two ID sets. All downstream reductions
  /// iterate in this order.
  std::vector<std::string> ids;
};

PairedDataset pair_datasets(EmbeddingSet graph, EmbeddingSet text);

struct DatasetSplit {
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> test;
  std::uint64_t seed = 0;
};

/// 80/10/10 split: SplitMix64-seeded Fisher-Yates over the sorted IDs, cut
/// at floor(0.8 N) and floor(0.1 N). Requires at least 10 IDs.
DatasetSplit split_dataset(const PairedDataset& paired, std::uint64_t seed);
DatasetSplit split_ids(std::vector<std::string> ids, std::uint64_t seed);

}  // namespace modalign
