#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>

#include "modalign/embedding_store.hpp"
#include "modalign/error.hpp"
#include "modalign/projection_head.hpp"

namespace modalign {

/// Cosine of two unit vectors mapped to [0, 1].
template <typename Scalar, typename D1, typename D2>
Scalar shifted_sim(const Eigen::MatrixBase<D1>& u, const Eigen::MatrixBase<D2>& v) {
  if (u.size() != v.size()) fail(ErrorCode::DimMismatch, "vectors differ in length");
  return (u.dot(v) + Scalar(1)) / Scalar(2);
}

template <typename Scalar = double>
struct BatchLoss {
  Scalar loss{};
  Matrix<Scalar> sim;     // sim(i, j) = shifted_sim(g_i, t_j)
  Vector<Scalar> terms;   // unweighted per-sample InfoNCE terms
};

template <typename Scalar = double>
struct LossGradients {
  Matrix<Scalar> graph;  // d x B, gradient w.r.t. each projected graph vector
  Matrix<Scalar> text;   // d x B
};

namespace detail {

template <typename Scalar>
void check_batch(const Matrix<Scalar>& g, const Matrix<Scalar>& t, Scalar tau, const Vector<Scalar>& weights) {
  if (g.cols() == 0) fail(ErrorCode::EmptyBatch, "empty batch");
  if (g.cols() != t.cols() || g.rows() != t.rows()) fail(ErrorCode::ShapeMismatch, "graph/text batches differ in shape");
  if (weights.size() != g.cols()) fail(ErrorCode::ShapeMismatch, "one weight per sample required");
  if (!(tau > Scalar(0))) fail(ErrorCode::InvalidConfig, "temperature must be positive");
  if ((weights.array() < Scalar(1)).any()) fail(ErrorCode::InvalidConfig, "sample weights must be >= 1");
}

/// Row-wise softmax over logits sim/tau using max subtraction. Returns the
/// probabilities and fills `terms` with -log p_ii.
template <typename Scalar>
Matrix<Scalar> softmax_rows(const Matrix<Scalar>& sim, Scalar tau, Vector<Scalar>& terms) {
  const Eigen::Index n = sim.rows();
  Matrix<Scalar> probs(n, n);
  terms.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar peak = sim.row(i).maxCoeff() / tau;
    Scalar total = 0;
    for (Eigen::Index j = 0; j < n; ++j) total += std::exp(sim(i, j) / tau - peak);
    const Scalar lse = peak + std::log(total);
    for (Eigen::Index j = 0; j < n; ++j) probs(i, j) = std::exp(sim(i, j) / tau - lse);
    terms(i) = lse - sim(i, i) / tau;
  }
  return probs;
}

template <typename Scalar>
Matrix<Scalar> shifted_similarities(const Matrix<Scalar>& g, const Matrix<Scalar>& t) {
  Matrix<Scalar> sim(g.cols(), t.cols());
  for (Eigen::Index i = 0; i < g.cols(); ++i) {
    for (Eigen::Index j = 0; j < t.cols(); ++j) sim(i, j) = shifted_sim<Scalar>(g.col(i), t.col(j));
  }
  return sim;
}

/// Adds coef * d(term_i)/d(projections) into `out`. The raw (unit-weight)
/// contribution is formed first and scaled last, so changing a sample's
/// weight rescales its contribution exactly.
template <typename Scalar>
void add_term_gradient(const Matrix<Scalar>& g, const Matrix<Scalar>& t, const Matrix<Scalar>& probs, Scalar tau,
                       Scalar coef, Eigen::Index i, LossGradients<Scalar>& out) {
  const Eigen::Index n = g.cols();
  const Scalar half_inv_tau = Scalar(1) / (Scalar(2) * tau);
  Vector<Scalar> raw_g = Vector<Scalar>::Zero(g.rows());
  for (Eigen::Index j = 0; j < n; ++j) {
    const Scalar a = (probs(i, j) - (i == j ? Scalar(1) : Scalar(0))) * half_inv_tau;
    raw_g += a * t.col(j);
    out.text.col(j) += coef * (a * g.col(i));
  }
  out.graph.col(i) += coef * raw_g;
}

}  // namespace detail

/// Weighted InfoNCE over in-batch negatives with [0,1]-shifted cosine
/// similarity. Columns of g and t are unit vectors; column i of each is the
/// same protein. loss = sum_i (w_i / B) * term_i.
template <typename Scalar = double>
BatchLoss<Scalar> batch_loss(const Matrix<Scalar>& g, const Matrix<Scalar>& t, Scalar tau,
                             const Vector<Scalar>& weights) {
  detail::check_batch(g, t, tau, weights);
  BatchLoss<Scalar> out;
  out.sim = detail::shifted_similarities(g, t);
  detail::softmax_rows(out.sim, tau, out.terms);
  const Scalar batch = static_cast<Scalar>(g.cols());
  for (Eigen::Index i = 0; i < g.cols(); ++i) out.loss += (weights(i) / batch) * out.terms(i);
  return out;
}

template <typename Scalar = double>
BatchLoss<Scalar> batch_loss(const Matrix<Scalar>& g, const Matrix<Scalar>& t, Scalar tau) {
  return batch_loss(g, t, tau, Vector<Scalar>::Ones(g.cols()).eval());
}

/// Gradient of batch_loss w.r.t. every projected vector, accumulated term by
/// term in sample order.
template <typename Scalar = double>
LossGradients<Scalar> loss_gradients(const Matrix<Scalar>& g, const Matrix<Scalar>& t, Scalar tau,
                                     const Vector<Scalar>& weights) {
  detail::check_batch(g, t, tau, weights);
  Vector<Scalar> terms;
  const Matrix<Scalar> probs = detail::softmax_rows(detail::shifted_similarities(g, t), tau, terms);
  LossGradients<Scalar> out{Matrix<Scalar>::Zero(g.rows(), g.cols()), Matrix<Scalar>::Zero(t.rows(), t.cols())};
  const Scalar batch = static_cast<Scalar>(g.cols());
  for (Eigen::Index i = 0; i < g.cols(); ++i) {
    detail::add_term_gradient(g, t, probs, tau, weights(i) / batch, i, out);
  }
  return out;
}

/// Gradient of the single weighted term (w_i / B) * term_i.
template <typename Scalar = double>
LossGradients<Scalar> sample_term_gradients(const Matrix<Scalar>& g, const Matrix<Scalar>& t, Scalar tau,
                                            const Vector<Scalar>& weights, Eigen::Index i) {
  detail::check_batch(g, t, tau, weights);
  if (i < 0 || i >= g.cols()) fail(ErrorCode::ShapeMismatch, "sample index out of range");
  Vector<Scalar> terms;
  const Matrix<Scalar> probs = detail::softmax_rows(detail::shifted_similarities(g, t), tau, terms);
  LossGradients<Scalar> out{Matrix<Scalar>::Zero(g.rows(), g.cols()), Matrix<Scalar>::Zero(t.rows(), t.cols())};
  detail::add_term_gradient(g, t, probs, tau, weights(i) / static_cast<Scalar>(g.cols()), i, out);
  return out;
}

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First and second moments per parameter tensor, plus the step count.
template <typename Scalar = double>
struct AdamState {
  std::int64_t step = 0;
  std::vector<Layer<Scalar>> first;
  std::vector<Layer<Scalar>> second;

  static AdamState for_head(const ProjectionHead<Scalar>& head) {
    AdamState s;
    s.first = HeadGradients<Scalar>::zeros_like(head).layers;
    s.second = s.first;
    return s;
  }
};

namespace detail {

template <typename Param, typename Grad, typename Moment>
void adam_update(Param& param, const Grad& grad, Moment& m, Moment& v, const AdamConfig& cfg, double correction1,
                 double correction2) {
  using Scalar = typename Param::Scalar;
  m = Scalar(cfg.beta1) * m + Scalar(1 - cfg.beta1) * grad;
  v = Scalar(cfg.beta2) * v + Scalar(1 - cfg.beta2) * grad.cwiseAbs2();
  param.array() -= Scalar(cfg.learning_rate) * (m.array() / Scalar(correction1)) /
                   ((v.array() / Scalar(correction2)).sqrt() + Scalar(cfg.epsilon));
}

}  // namespace detail

/// Bias-corrected Adam update of every head parameter, no weight decay.
template <typename Scalar = double>
void adam_step(ProjectionHead<Scalar>& head, const HeadGradients<Scalar>& grads, AdamState<Scalar>& state,
               const AdamConfig& cfg = {}) {
  auto& layers = head.layers();
  if (grads.layers.size() != layers.size() || state.first.size() != layers.size() ||
      state.second.size() != layers.size()) {
    fail(ErrorCode::ShapeMismatch, "optimizer state does not match head");
  }
  for (std::size_t k = 0; k < layers.size(); ++k) {
    if (grads.layers[k].weight.rows() != layers[k].weight.rows() ||
        grads.layers[k].weight.cols() != layers[k].weight.cols() ||
        grads.layers[k].bias.size() != layers[k].bias.size() ||
        state.first[k].weight.rows() != layers[k].weight.rows() ||
        state.first[k].weight.cols() != layers[k].weight.cols()) {
      fail(ErrorCode::ShapeMismatch, "gradient shape does not match head layer " + std::to_string(k));
    }
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t k = 0; k < layers.size(); ++k) {
    detail::adam_update(layers[k].weight, grads.layers[k].weight, state.first[k].weight, state.second[k].weight,
                        cfg, c1, c2);
    detail::adam_update(layers[k].bias, grads.layers[k].bias, state.first[k].bias, state.second[k].bias, cfg, c1,
                        c2);
  }
}

}  // namespace modalign
