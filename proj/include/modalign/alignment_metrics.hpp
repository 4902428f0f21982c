#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "modalign/embedding_store.hpp"
#include "modalign/projection_head.hpp"

namespace modalign {

struct AlignmentReport {
  double positive = 0;   // mean cosine of matching pairs
  double negative = 0;   // mean |cosine| over all ordered non-matching pairs
  double alignment = 0;  // positive - negative
  std::int64_t n = 0;
  std::int64_t m = 0;    // n (n - 1)
};

/// Sequential left-to-right dot product. The metric reductions use this so
/// their rounding is fixed by definition rather than by SIMD width.
template <typename D1, typename D2>
double dot_sequential(const Eigen::MatrixBase<D1>& a, const Eigen::MatrixBase<D2>& b) {
  double s = 0;
  for (Eigen::Index k = 0; k < a.size(); ++k) s += static_cast<double>(a(k)) * static_cast<double>(b(k));
  return s;
}

/// Scores already-projected unit vectors (column i of g and t = protein i).
/// Negatives are summed in one running total in (i, j) row-major order.
AlignmentReport alignment_report(const Matrix<double>& g, const Matrix<double>& t);

/// Projects `ids` through both heads (forward is column-parallel) and scores.
AlignmentReport model_pair_score(std::span<const std::string> ids, const ProjectionHead<double>& graph_head,
                                 const ProjectionHead<double>& text_head, const PairedDataset& paired);

struct ProteinScore {
  std::string id;
  double score = 0;
};
using PerProteinScores = std::vector<ProteinScore>;

/// Cosine of each protein's own projected pair, in sorted-ID order.
PerProteinScores per_protein_scores(std::span<const std::string> ids, const ProjectionHead<double>& graph_head,
                                    const ProjectionHead<double>& text_head, const PairedDataset& paired);

/// Pearson correlation (centred two-pass form). Throws LengthMismatch or
/// ZeroVariance.
double pearson(std::span<const double> x, std::span<const double> y);

struct CorrelationMatrix {
  std::vector<std::string> labels;
  Matrix<double> values;
};

/// Pairwise Pearson over ID-aligned score lists; all lists must cover the
/// same ID set.
CorrelationMatrix correlation_matrix(const std::vector<std::pair<std::string, PerProteinScores>>& lists);

struct RegressionFit {
  double slope = 0;
  double intercept = 0;
  std::optional<double> pearson_r;  // empty when y is constant
  std::int64_t n = 0;
};

/// Simple least squares y = slope * x + intercept.
RegressionFit ols_fit(std::span<const double> x, std::span<const double> y);

enum class ChainGroup { Single, Multiple };

std::string_view to_string(ChainGroup g) noexcept;

struct SummaryStats {
  double mean = 0;
  double median = 0;
  double q1 = 0;
  double q3 = 0;
  double min = 0;
  double max = 0;
};

struct GroupSummary {
  std::int64_t n = 0;
  std::optional<SummaryStats> stats;  // empty when n == 0
};

/// Quartiles are Tukey hinges: medians of the lower and upper halves, the
/// halves sharing the median when n is odd.
SummaryStats summarize(std::vector<double> values);

/// Summary per chain group. Every scored ID needs a group (UnknownId).
std::map<ChainGroup, GroupSummary> group_summary(const PerProteinScores& scores,
                                                 const std::map<std::string, ChainGroup>& group_of);

}  // namespace modalign
