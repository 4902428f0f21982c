#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "modalign/contrastive.hpp"
#include "modalign/embedding_store.hpp"
#include "modalign/projection_head.hpp"

namespace modalign {

struct Reweighting {
  std::set<std::string> rare_ids;
  double factor = 2.0;
};

struct TrainConfig {
  double learning_rate = 1e-3;
  int epochs = 40;
  int batch_size = 32;
  double temperature = 0.2;
  std::uint64_t seed = 42;
  std::optional<Reweighting> reweight;

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_loss = 0;
  double val_loss = 0;
  bool checkpointed = false;
};

struct TrainHistory {
  /// Validation loss of the heads as passed in, the checkpoint baseline.
  double initial_val_loss = 0;
  std::vector<EpochRecord> epochs;
};

struct TrainResult {
  ProjectionHead<double> graph_head;
  ProjectionHead<double> text_head;
  TrainHistory history;
};

/// Projects the given IDs of one modality through `head` (one column per ID).
Matrix<double> project(const ProjectionHead<double>& head, const EmbeddingSet& set,
                       std::span<const std::string> ids);

/// Mean in-chunk contrastive loss over `ids` taken in sorted order in chunks
/// of batch_size; each chunk weighted by its size. Unweighted terms.
double validation_loss(const PairedDataset& paired, std::span<const std::string> ids,
                       const ProjectionHead<double>& graph_head, const ProjectionHead<double>& text_head,
                       const TrainConfig& cfg);

/// Jointly trains both heads with Adam on in-batch InfoNCE. Each epoch
/// reshuffles the training IDs with a generator seeded once from cfg.seed;
/// the final partial batch is kept. Returns the parameters with the best
/// validation loss (strict improvement over the incoming heads).
TrainResult train_pair(const PairedDataset& paired, const DatasetSplit& split, ProjectionHead<double> graph_head,
                       ProjectionHead<double> text_head, const TrainConfig& cfg);

}  // namespace modalign
