#include "modalign/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "modalign/contrastive.hpp"
#include "modalign/projection_head.hpp"
#include "modalign/rng.hpp"

namespace modalign {

namespace {

struct Instance {
  ProjectionHead<double> graph;
  ProjectionHead<double> text;
  Matrix<double> graph_inputs;
  Matrix<double> text_inputs;
  Vector<double> weights;
  double tau = 0.2;
};

Eigen::Index draw_dim(SplitMix64& rng) { return 2 + static_cast<Eigen::Index>(rng.below(15)); }

ProjectionHead<double> random_head(SplitMix64& rng, Eigen::Index in, Eigen::Index out, std::size_t hidden) {
  HeadConfig cfg{in, out, {}, rng.next()};
  for (std::size_t k = 0; k < hidden; ++k) cfg.hidden_dims.push_back(draw_dim(rng));
  auto head = init_head(cfg);
  for (auto& layer : head.layers()) {
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias(r) = 0.1 * rng.normal();
  }
  return head;
}

Matrix<double> random_inputs(SplitMix64& rng, Eigen::Index rows, Eigen::Index cols) {
  Matrix<double> m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = rng.normal();
  }
  return m;
}

double total_loss(const Instance& inst) {
  return batch_loss(forward_batch(inst.graph, inst.graph_inputs), forward_batch(inst.text, inst.text_inputs),
                    inst.tau, inst.weights)
      .loss;
}

void compare_head(Instance& inst, ProjectionHead<double>& head, const HeadGradients<double>& analytic, double step,
                  GradCheckReport& report) {
  auto probe = [&](double& param, double expected) {
    const double saved = param;
    param = saved + step;
    const double up = total_loss(inst);
    param = saved - step;
    const double down = total_loss(inst);
    param = saved;
    report.max_rel_error = std::max(report.max_rel_error, relative_error(expected, (up - down) / (2 * step)));
    ++report.parameters;
  };
  for (std::size_t k = 0; k < head.layers().size(); ++k) {
    auto& layer = head.layers()[k];
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) probe(layer.weight(r, c), analytic.layers[k].weight(r, c));
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) probe(layer.bias(r), analytic.layers[k].bias(r));
  }
}

}  // namespace

double relative_error(double analytic, double numeric) {
  const double scale = std::max({std::fabs(analytic), std::fabs(numeric), 1e-6});
  return std::fabs(analytic - numeric) / scale;
}

GradCheckReport run_gradient_check(std::size_t instances, std::uint64_t seed, double step, double tolerance) {
  SplitMix64 rng(seed);
  GradCheckReport report;
  for (std::size_t n = 0; n < instances; ++n) {
    const Eigen::Index graph_in = draw_dim(rng);
    const Eigen::Index text_in = draw_dim(rng);
    const Eigen::Index out = draw_dim(rng);
    const auto hidden = static_cast<std::size_t>(rng.below(3));
    const Eigen::Index batch = 2 + static_cast<Eigen::Index>(rng.below(3));
    Instance inst{random_head(rng, graph_in, out, hidden), random_head(rng, text_in, out, 0),
                  random_inputs(rng, graph_in, batch), random_inputs(rng, text_in, batch),
                  Vector<double>::Ones(batch), 0.2};
    for (Eigen::Index i = 0; i < batch; ++i) inst.weights(i) = rng.below(2) == 0 ? 1.0 : 2.0;

    const auto g = forward_batch(inst.graph, inst.graph_inputs);
    const auto t = forward_batch(inst.text, inst.text_inputs);
    const auto upstream = loss_gradients(g, t, inst.tau, inst.weights);
    const auto graph_grads = backward(inst.graph, inst.graph_inputs, upstream.graph);
    const auto text_grads = backward(inst.text, inst.text_inputs, upstream.text);
    compare_head(inst, inst.graph, graph_grads, step, report);
    compare_head(inst, inst.text, text_grads, step, report);
    ++report.instances;
  }
  report.passed = report.max_rel_error < tolerance;
  return report;
}

}  // namespace modalign
