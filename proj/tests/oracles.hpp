#pragma once

// Straightforward reference implementations used only by tests. They favour
// obviousness over speed and share no code with the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

using Columns = std::vector<std::vector<double>>;  // one inner vector per protein

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

struct Alignment {
  double positive = 0;
  double negative = 0;
  double alignment = 0;
};

/// Double loop over unit vectors: mean matching cosine, mean |cosine| over
/// ordered non-matching pairs.
inline Alignment alignment(const Columns& g, const Columns& t) {
  const std::size_t n = g.size();
  double pos = 0;
  for (std::size_t i = 0; i < n; ++i) pos += dot(g[i], t[i]);
  double neg = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) neg += std::fabs(dot(g[i], t[j]));
    }
  }
  Alignment a;
  a.positive = pos / static_cast<double>(n);
  a.negative = neg / static_cast<double>(n * (n - 1));
  a.alignment = a.positive - a.negative;
  return a;
}

/// Per-sample InfoNCE terms over shifted cosine similarity.
inline std::vector<double> info_nce_terms(const Columns& g, const Columns& t, double tau) {
  const std::size_t n = g.size();
  std::vector<double> terms(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> logits(n);
    for (std::size_t j = 0; j < n; ++j) logits[j] = ((dot(g[i], t[j]) + 1.0) / 2.0) / tau;
    const double peak = *std::max_element(logits.begin(), logits.end());
    double total = 0;
    for (double l : logits) total += std::exp(l - peak);
    terms[i] = peak + std::log(total) - logits[i];
  }
  return terms;
}

/// Top-k by full sort: cosine descending, ID ascending.
inline std::vector<std::pair<std::string, double>> topk(const std::vector<std::string>& ids, const Columns& vecs,
                                                        const std::vector<double>& query, std::size_t k) {
  std::vector<std::pair<std::string, double>> all;
  for (std::size_t i = 0; i < ids.size(); ++i) all.emplace_back(ids[i], dot(vecs[i], query));
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  all.resize(std::min(k, all.size()));
  return all;
}

/// Pearson from raw power sums in long double.
inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  long double n = static_cast<long double>(x.size()), sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += static_cast<long double>(x[i]) * x[i];
    syy += static_cast<long double>(y[i]) * y[i];
    sxy += static_cast<long double>(x[i]) * y[i];
  }
  const long double cov = n * sxy - sx * sy;
  const long double vx = n * sxx - sx * sx;
  const long double vy = n * syy - sy * sy;
  return static_cast<double>(cov / std::sqrt(vx * vy));
}

/// Solves the 2x2 normal equations [n sx; sx sxx][b; m] = [sy; sxy] by
/// Cramer's rule in long double. Returns {slope, intercept}.
inline std::pair<double, double> normal_equations(const std::vector<double>& x, const std::vector<double>& y) {
  long double n = static_cast<long double>(x.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += static_cast<long double>(x[i]) * x[i];
    sxy += static_cast<long double>(x[i]) * y[i];
  }
  const long double det = n * sxx - sx * sx;
  const long double slope = (n * sxy - sx * sy) / det;
  const long double intercept = (sxx * sy - sx * sxy) / det;
  return {static_cast<double>(slope), static_cast<double>(intercept)};
}

/// LCS by enumerating every subsequence of `a` (as an index mask) and
/// checking whether it is also a subsequence of `b`.
inline std::size_t lcs_exhaustive(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::size_t best = 0;
  const std::uint32_t masks = 1u << a.size();
  for (std::uint32_t mask = 0; mask < masks; ++mask) {
    const auto len = static_cast<std::size_t>(__builtin_popcount(mask));
    if (len <= best) continue;
    std::size_t pos = 0;
    bool ok = true;
    for (std::size_t i = 0; i < a.size() && ok; ++i) {
      if (!(mask & (1u << i))) continue;
      while (pos < b.size() && b[pos] != a[i]) ++pos;
      if (pos == b.size()) ok = false;
      else ++pos;
    }
    if (ok) best = len;
  }
  return best;
}

struct RarityRow {
  std::string label;
  std::size_t count = 0;
};

/// Counts labels, sorts ascending by (count, label), and tags members of the
/// first `top` categories "rare" and of the last `top` "popular" (rare wins).
/// Records carrying `blank` take part in no category.
inline std::map<std::string, std::string> rarity_labels(const std::vector<std::pair<std::string, std::string>>& id_label,
                                                        std::size_t top, const std::string& blank) {
  std::map<std::string, std::size_t> counts;
  for (const auto& [id, label] : id_label) {
    if (label != blank) ++counts[label];
  }
  std::vector<RarityRow> rows;
  for (const auto& [label, count] : counts) rows.push_back({label, count});
  std::sort(rows.begin(), rows.end(), [](const RarityRow& a, const RarityRow& b) {
    return a.count != b.count ? a.count < b.count : a.label < b.label;
  });
  std::set<std::string> rare, popular;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (r < top) rare.insert(rows[r].label);
    if (r + top >= rows.size()) popular.insert(rows[r].label);
  }
  std::map<std::string, std::string> out;
  for (const auto& [id, label] : id_label) {
    out[id] = rare.count(label) ? "rare" : popular.count(label) ? "popular" : "unlabeled";
  }
  return out;
}

}  // namespace oracle
