#include "modalign/trainer.hpp"

#include <algorithm>
#include <limits>

#include "modalign/rng.hpp"

namespace modalign {

void TrainConfig::validate() const {
  if (!(temperature > 0)) fail(ErrorCode::InvalidConfig, "temperature must be positive");
  if (batch_size < 1) fail(ErrorCode::InvalidConfig, "batch size must be at least 1");
  if (epochs < 0) fail(ErrorCode::InvalidConfig, "epochs must be non-negative");
  if (!(learning_rate > 0)) fail(ErrorCode::InvalidConfig, "learning rate must be positive");
  if (reweight && !(reweight->factor >= 1)) fail(ErrorCode::InvalidConfig, "reweight factor must be >= 1");
}

Matrix<double> project(const ProjectionHead<double>& head, const EmbeddingSet& set,
                       std::span<const std::string> ids) {
  return forward_batch(head, set.gather<double>(ids));
}

double validation_loss(const PairedDataset& paired, std::span<const std::string> ids,
                       const ProjectionHead<double>& graph_head, const ProjectionHead<double>& text_head,
                       const TrainConfig& cfg) {
  std::vector<std::string> sorted(ids.begin(), ids.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.empty()) return 0.0;
  const auto batch = static_cast<std::size_t>(cfg.batch_size);
  double total = 0;
  for (std::size_t start = 0; start < sorted.size(); start += batch) {
    const std::span<const std::string> chunk(sorted.data() + start, std::min(batch, sorted.size() - start));
    const auto g = project(graph_head, paired.graph, chunk);
    const auto t = project(text_head, paired.text, chunk);
    total += batch_loss<double>(g, t, cfg.temperature).loss * static_cast<double>(chunk.size());
  }
  return total / static_cast<double>(sorted.size());
}

namespace {

struct BatchProjection {
  std::vector<SampleTrace<double>> traces;
  Matrix<double> outputs;
};

BatchProjection project_traced(const ProjectionHead<double>& head, const EmbeddingSet& set,
                               std::span<const std::string> ids) {
  BatchProjection p;
  p.outputs.resize(head.output_dim(), static_cast<Eigen::Index>(ids.size()));
  const Matrix<double> inputs = set.gather<double>(ids);
  for (Eigen::Index i = 0; i < inputs.cols(); ++i) {
    p.traces.push_back(trace_forward(head, inputs.col(i)));
    p.outputs.col(i) = p.traces.back().output;
  }
  return p;
}

HeadGradients<double> backprop(const ProjectionHead<double>& head, const BatchProjection& p,
                               const Matrix<double>& upstream) {
  auto grads = HeadGradients<double>::zeros_like(head);
  for (std::size_t i = 0; i < p.traces.size(); ++i) {
    accumulate_backward(head, p.traces[i], upstream.col(static_cast<Eigen::Index>(i)), grads);
  }
  return grads;
}

}  // namespace

TrainResult train_pair(const PairedDataset& paired, const DatasetSplit& split, ProjectionHead<double> graph_head,
                       ProjectionHead<double> text_head, const TrainConfig& cfg) {
  cfg.validate();
  if (graph_head.input_dim() != paired.graph.dim()) {
    fail(ErrorCode::ConfigMismatch, "graph head input dim does not match graph embeddings");
  }
  if (text_head.input_dim() != paired.text.dim()) {
    fail(ErrorCode::ConfigMismatch, "text head input dim does not match text embeddings");
  }
  if (graph_head.output_dim() != text_head.output_dim()) {
    fail(ErrorCode::ConfigMismatch, "heads must share an output dimension");
  }

  TrainHistory history;
  history.initial_val_loss = validation_loss(paired, split.validation, graph_head, text_head, cfg);
  if (cfg.epochs == 0) return {std::move(graph_head), std::move(text_head), std::move(history)};

  std::vector<std::string> train_ids = split.train;
  std::sort(train_ids.begin(), train_ids.end());
  if (train_ids.empty()) fail(ErrorCode::ConfigMismatch, "training split is empty");

  ProjectionHead<double> best_graph = graph_head;
  ProjectionHead<double> best_text = text_head;
  double best_val = history.initial_val_loss;

  auto graph_state = AdamState<double>::for_head(graph_head);
  auto text_state = AdamState<double>::for_head(text_head);
  const AdamConfig adam{cfg.learning_rate};
  SplitMix64 rng(cfg.seed);
  const auto batch = static_cast<std::size_t>(cfg.batch_size);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::vector<std::string> order = train_ids;
    fisher_yates(order, rng);
    double loss_sum = 0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::span<const std::string> chunk(order.data() + start, std::min(batch, order.size() - start));
      const auto g = project_traced(graph_head, paired.graph, chunk);
      const auto t = project_traced(text_head, paired.text, chunk);
      Vector<double> weights = Vector<double>::Ones(static_cast<Eigen::Index>(chunk.size()));
      if (cfg.reweight) {
        for (std::size_t i = 0; i < chunk.size(); ++i) {
          if (cfg.reweight->rare_ids.contains(chunk[i])) weights(static_cast<Eigen::Index>(i)) = cfg.reweight->factor;
        }
      }
      const double loss = batch_loss(g.outputs, t.outputs, cfg.temperature, weights).loss;
      const auto upstream = loss_gradients(g.outputs, t.outputs, cfg.temperature, weights);
      const auto graph_grads = backprop(graph_head, g, upstream.graph);
      const auto text_grads = backprop(text_head, t, upstream.text);
      adam_step(graph_head, graph_grads, graph_state, adam);
      adam_step(text_head, text_grads, text_state, adam);
      loss_sum += loss * static_cast<double>(chunk.size());
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(order.size());
    rec.val_loss = validation_loss(paired, split.validation, graph_head, text_head, cfg);
    if (rec.val_loss < best_val) {
      best_val = rec.val_loss;
      best_graph = graph_head;
      best_text = text_head;
      rec.checkpointed = true;
    }
    history.epochs.push_back(rec);
  }
  return {std::move(best_graph), std::move(best_text), std::move(history)};
}

}  // namespace modalign
