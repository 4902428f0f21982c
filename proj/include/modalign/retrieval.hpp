#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "modalign/embedding_store.hpp"
#include "modalign/projection_head.hpp"

namespace modalign {

/// Exact-scan index of projected unit vectors (one column per protein).
class RetrievalIndex {
 public:
  /// Validates unique IDs and unit-norm columns (within 1e-9).
  RetrievalIndex(std::vector<std::string> ids, Matrix<double> vectors);

  const std::vector<std::string>& ids() const noexcept { return ids_; }
  const Matrix<double>& vectors() const noexcept { return vectors_; }
  Eigen::Index dim() const noexcept { return vectors_.rows(); }
  std::size_t size() const noexcept { return ids_.size(); }

 private:
  std::vector<std::string> ids_;
  Matrix<double> vectors_;
};

/// Projects the graph-side embeddings of `ids` (sorted) through `graph_head`.
RetrievalIndex build_index(std::span<const std::string> ids, const ProjectionHead<double>& graph_head,
                           const PairedDataset& paired);

struct Neighbor {
  std::string id;
  double cosine = 0;
};

struct RetrievalResult {
  std::string query_id;
  std::vector<Neighbor> neighbors;  // cosine descending, ties by ascending ID
  std::string augmented_text;
};

/// Exact top-k by dot product; k larger than the index returns it all.
RetrievalResult query_topk(const RetrievalIndex& index, const Vector<double>& query, std::size_t k,
                           std::string query_id = {});

/// Projects protein `id`'s graph embedding and queries with it.
RetrievalResult query_topk(const RetrievalIndex& index, const std::string& id,
                           const ProjectionHead<double>& graph_head, const PairedDataset& paired, std::size_t k);

/// Neighbour descriptions in rank order, one per line, then a blank line,
/// then the original input. Throws MissingDescription.
std::string augment_input(const RetrievalResult& result, const std::map<std::string, std::string>& descriptions,
                          const std::string& original_input);

}  // namespace modalign
