#include "modalign/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "modalign/alignment_metrics.hpp"
#include "modalign/parallel.hpp"

namespace modalign {

RetrievalIndex::RetrievalIndex(std::vector<std::string> ids, Matrix<double> vectors)
    : ids_(std::move(ids)), vectors_(std::move(vectors)) {
  if (ids_.empty()) fail(ErrorCode::EmptyIndex, "retrieval index is empty");
  if (static_cast<Eigen::Index>(ids_.size()) != vectors_.cols()) {
    fail(ErrorCode::ShapeMismatch, "one vector per indexed ID required");
  }
  std::unordered_set<std::string> seen;
  for (const auto& id : ids_) {
    if (!seen.insert(id).second) fail(ErrorCode::DuplicateId, "duplicate indexed ID " + id);
  }
  for (Eigen::Index c = 0; c < vectors_.cols(); ++c) {
    if (std::fabs(vectors_.col(c).norm() - 1.0) > 1e-9) fail(ErrorCode::ShapeMismatch, "index vectors must be unit norm");
  }
}

RetrievalIndex build_index(std::span<const std::string> ids, const ProjectionHead<double>& graph_head,
                           const PairedDataset& paired) {
  if (ids.empty()) fail(ErrorCode::EmptyIndex, "no proteins to index");
  std::vector<std::string> sorted(ids.begin(), ids.end());
  std::sort(sorted.begin(), sorted.end());
  const Matrix<double> inputs = paired.graph.gather<double>(sorted);
  Matrix<double> projected(graph_head.output_dim(), inputs.cols());
  parallel_for(static_cast<std::size_t>(inputs.cols()), [&](std::size_t i) {
    const auto c = static_cast<Eigen::Index>(i);
    projected.col(c) = forward(graph_head, inputs.col(c));
  });
  return RetrievalIndex(std::move(sorted), std::move(projected));
}

RetrievalResult query_topk(const RetrievalIndex& index, const Vector<double>& query, std::size_t k,
                           std::string query_id) {
  if (k < 1) fail(ErrorCode::InvalidConfig, "k must be at least 1");
  if (index.size() == 0) fail(ErrorCode::EmptyIndex, "retrieval index is empty");
  if (query.size() != index.dim()) fail(ErrorCode::DimMismatch, "query dimension does not match the index");

  std::vector<double> scores(index.size());
  parallel_for(index.size(), [&](std::size_t i) {
    scores[i] = dot_sequential(index.vectors().col(static_cast<Eigen::Index>(i)), query);
  });
  std::vector<std::size_t> order(index.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t keep = std::min(k, order.size());
  const auto& ids = index.ids();
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return ids[a] < ids[b];
                    });

  RetrievalResult result;
  result.query_id = std::move(query_id);
  for (std::size_t r = 0; r < keep; ++r) result.neighbors.push_back({ids[order[r]], scores[order[r]]});
  return result;
}

RetrievalResult query_topk(const RetrievalIndex& index, const std::string& id,
                           const ProjectionHead<double>& graph_head, const PairedDataset& paired, std::size_t k) {
  const auto slot = paired.graph.find(id);
  if (!slot) fail(ErrorCode::UnknownId, "protein " + id + " has no graph embedding");
  const Vector<double> query = forward(graph_head, paired.graph.vector(*slot).cast<double>());
  return query_topk(index, query, k, id);
}

std::string augment_input(const RetrievalResult& result, const std::map<std::string, std::string>& descriptions,
                          const std::string& original_input) {
  if (result.neighbors.empty()) return original_input;
  std::string out;
  for (const auto& n : result.neighbors) {
    auto it = descriptions.find(n.id);
    if (it == descriptions.end()) fail(ErrorCode::MissingDescription, "no description for neighbour " + n.id);
    out += it->second;
    out += '\n';
  }
  out += '\n';
  out += original_input;
  return out;
}

}  // namespace modalign
