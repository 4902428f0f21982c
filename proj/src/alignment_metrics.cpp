#include "modalign/alignment_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "modalign/parallel.hpp"

namespace modalign {

namespace {

constexpr Eigen::Index kRowBlock = 256;

Matrix<double> project_parallel(const ProjectionHead<double>& head, const EmbeddingSet& set,
                                std::span<const std::string> ids) {
  const Matrix<double> inputs = set.gather<double>(ids);
  Matrix<double> out(head.output_dim(), inputs.cols());
  parallel_for(static_cast<std::size_t>(inputs.cols()), [&](std::size_t i) {
    const auto c = static_cast<Eigen::Index>(i);
    out.col(c) = forward(head, inputs.col(c));
  });
  return out;
}

std::vector<std::string> sorted_copy(std::span<const std::string> ids) {
  std::vector<std::string> out(ids.begin(), ids.end());
  std::sort(out.begin(), out.end());
  return out;
}

double median_of_sorted(const std::vector<double>& v, std::size_t begin, std::size_t end) {
  const std::size_t n = end - begin;
  const std::size_t mid = begin + n / 2;
  return n % 2 == 1 ? v[mid] : (v[mid - 1] + v[mid]) / 2.0;
}

}  // namespace

AlignmentReport alignment_report(const Matrix<double>& g, const Matrix<double>& t) {
  if (g.rows() != t.rows() || g.cols() != t.cols()) fail(ErrorCode::ShapeMismatch, "projection shapes differ");
  const Eigen::Index n = g.cols();
  if (n < 2) fail(ErrorCode::TooFewProteins, "need at least 2 proteins to score a model pair");

  double positive = 0;
  for (Eigen::Index i = 0; i < n; ++i) positive += dot_sequential(g.col(i), t.col(i));

  // Dot products are computed in parallel one block of rows at a time; the
  // sum itself runs serially in row-major order.
  double negative = 0;
  Matrix<double> block(n, kRowBlock);  // column r holds row (start + r) of |G^T T|
  for (Eigen::Index start = 0; start < n; start += kRowBlock) {
    const Eigen::Index rows = std::min(kRowBlock, n - start);
    parallel_for(static_cast<std::size_t>(rows), [&](std::size_t r) {
      const Eigen::Index i = start + static_cast<Eigen::Index>(r);
      for (Eigen::Index j = 0; j < n; ++j) {
        block(j, static_cast<Eigen::Index>(r)) = j == i ? 0.0 : std::fabs(dot_sequential(g.col(i), t.col(j)));
      }
    });
    for (Eigen::Index r = 0; r < rows; ++r) {
      const Eigen::Index i = start + r;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j != i) negative += block(j, r);
      }
    }
  }

  AlignmentReport rep;
  rep.n = n;
  rep.m = n * (n - 1);
  rep.positive = positive / static_cast<double>(n);
  rep.negative = negative / static_cast<double>(rep.m);
  rep.alignment = rep.positive - rep.negative;
  return rep;
}

AlignmentReport model_pair_score(std::span<const std::string> ids, const ProjectionHead<double>& graph_head,
                                 const ProjectionHead<double>& text_head, const PairedDataset& paired) {
  if (graph_head.output_dim() != text_head.output_dim()) {
    fail(ErrorCode::ConfigMismatch, "heads must share an output dimension");
  }
  if (ids.size() < 2) fail(ErrorCode::TooFewProteins, "need at least 2 proteins to score a model pair");
  const auto sorted = sorted_copy(ids);
  return alignment_report(project_parallel(graph_head, paired.graph, sorted),
                          project_parallel(text_head, paired.text, sorted));
}

PerProteinScores per_protein_scores(std::span<const std::string> ids, const ProjectionHead<double>& graph_head,
                                    const ProjectionHead<double>& text_head, const PairedDataset& paired) {
  if (graph_head.output_dim() != text_head.output_dim()) {
    fail(ErrorCode::ConfigMismatch, "heads must share an output dimension");
  }
  const auto sorted = sorted_copy(ids);
  const auto g = project_parallel(graph_head, paired.graph, sorted);
  const auto t = project_parallel(text_head, paired.text, sorted);
  PerProteinScores out;
  out.reserve(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const auto c = static_cast<Eigen::Index>(i);
    out.push_back({sorted[i], dot_sequential(g.col(c), t.col(c))});
  }
  return out;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) fail(ErrorCode::LengthMismatch, "pearson inputs differ in length");
  if (x.size() < 2) fail(ErrorCode::LengthMismatch, "pearson needs at least 2 points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0 || syy == 0) fail(ErrorCode::ZeroVariance, "pearson input is constant");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

CorrelationMatrix correlation_matrix(const std::vector<std::pair<std::string, PerProteinScores>>& lists) {
  CorrelationMatrix out;
  if (lists.empty()) return out;

  std::vector<std::string> ids;
  for (const auto& s : lists.front().second) ids.push_back(s.id);
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
    fail(ErrorCode::IdSetMismatch, "duplicate ID in " + lists.front().first);
  }

  std::vector<std::vector<double>> columns;
  for (const auto& [label, scores] : lists) {
    std::unordered_map<std::string, double> by_id;
    for (const auto& s : scores) by_id.emplace(s.id, s.score);
    if (by_id.size() != ids.size() || scores.size() != ids.size()) {
      fail(ErrorCode::IdSetMismatch, label + " covers a different protein set");
    }
    std::vector<double> col;
    col.reserve(ids.size());
    for (const auto& id : ids) {
      auto it = by_id.find(id);
      if (it == by_id.end()) fail(ErrorCode::IdSetMismatch, label + " is missing protein " + id);
      col.push_back(it->second);
    }
    out.labels.push_back(label);
    columns.push_back(std::move(col));
  }

  const auto k = static_cast<Eigen::Index>(columns.size());
  out.values = Matrix<double>::Identity(k, k);
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = a + 1; b < k; ++b) {
      const double r = pearson(columns[static_cast<std::size_t>(a)], columns[static_cast<std::size_t>(b)]);
      out.values(a, b) = r;
      out.values(b, a) = r;
    }
  }
  // a lone constant list never meets a partner above, so check it directly
  for (const auto& col : columns) {
    if (std::all_of(col.begin(), col.end(), [&](double v) { return v == col.front(); })) {
      fail(ErrorCode::ZeroVariance, "a score list is constant");
    }
  }
  return out;
}

RegressionFit ols_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) fail(ErrorCode::LengthMismatch, "regression inputs differ in length");
  if (x.size() < 2) fail(ErrorCode::LengthMismatch, "regression needs at least 2 points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0) fail(ErrorCode::ZeroVariance, "regressor is constant");
  RegressionFit fit;
  fit.n = static_cast<std::int64_t>(x.size());
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (syy > 0) fit.pearson_r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  return fit;
}

std::string_view to_string(ChainGroup g) noexcept { return g == ChainGroup::Single ? "single" : "multiple"; }

SummaryStats summarize(std::vector<double> values) {
  if (values.empty()) fail(ErrorCode::EmptyInput, "cannot summarise an empty group");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  const std::size_t half = (n + 1) / 2;
  SummaryStats s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
  s.median = median_of_sorted(values, 0, n);
  s.q1 = median_of_sorted(values, 0, half);
  s.q3 = median_of_sorted(values, n - half, n);
  s.min = values.front();
  s.max = values.back();
  return s;
}

std::map<ChainGroup, GroupSummary> group_summary(const PerProteinScores& scores,
                                                 const std::map<std::string, ChainGroup>& group_of) {
  std::map<ChainGroup, std::vector<double>> buckets{{ChainGroup::Single, {}}, {ChainGroup::Multiple, {}}};
  for (const auto& s : scores) {
    auto it = group_of.find(s.id);
    if (it == group_of.end()) fail(ErrorCode::UnknownId, "no chain group for protein " + s.id);
    buckets[it->second].push_back(s.score);
  }
  std::map<ChainGroup, GroupSummary> out;
  for (auto& [group, values] : buckets) {
    GroupSummary g;
    g.n = static_cast<std::int64_t>(values.size());
    if (!values.empty()) g.stats = summarize(std::move(values));
    out[group] = g;
  }
  return out;
}

}  // namespace modalign
