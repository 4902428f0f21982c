#include "modalign/text_metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

namespace modalign {

namespace {

bool word_byte(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts count_ngrams(const TokenSeq& tokens, std::size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                      tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

}  // namespace

TokenSeq tokenize(std::string_view text) {
  TokenSeq out;
  std::string current;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (word_byte(c)) {
      current.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
    } else if (!current.empty()) {
      out.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

std::size_t lcs_length(const TokenSeq& a, const TokenSeq& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), row(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      row[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], row[j - 1]);
    }
    std::swap(prev, row);
  }
  return prev[b.size()];
}

double rouge_l(const TokenSeq& candidate, const TokenSeq& reference) {
  if (candidate.empty() || reference.empty()) return 0.0;
  const double l = static_cast<double>(lcs_length(candidate, reference));
  const double p = l / static_cast<double>(candidate.size());
  const double r = l / static_cast<double>(reference.size());
  if (p + r == 0) return 0.0;
  return 2 * p * r / (p + r);
}

double bleu(const TokenSeq& candidate, const TokenSeq& reference, std::size_t max_n) {
  if (candidate.empty()) return 0.0;
  double log_sum = 0;
  std::size_t orders = 0;
  for (std::size_t n = 1; n <= max_n; ++n) {
    const auto cand = count_ngrams(candidate, n);
    if (cand.empty()) continue;
    const auto ref = count_ngrams(reference, n);
    std::size_t total = 0, matched = 0;
    for (const auto& [gram, count] : cand) {
      total += count;
      auto it = ref.find(gram);
      if (it != ref.end()) matched += std::min(count, it->second);
    }
    double precision = static_cast<double>(matched) / static_cast<double>(total);
    if (matched == 0) {
      if (n == 1) return 0.0;
      precision = 1.0 / (2.0 * static_cast<double>(total));
    }
    log_sum += std::log(precision);
    ++orders;
  }
  const double c = static_cast<double>(candidate.size());
  const double r = static_cast<double>(reference.size());
  const double brevity = c < r ? std::exp(1.0 - r / c) : 1.0;
  return brevity * std::exp(log_sum / static_cast<double>(orders));
}

TextScore score_text(std::string_view candidate, std::string_view reference) {
  const auto c = tokenize(candidate);
  const auto r = tokenize(reference);
  return {rouge_l(c, r), bleu(c, r)};
}

CorpusScore score_corpus(const std::vector<std::pair<std::string, std::string>>& pairs) {
  CorpusScore out;
  out.n = pairs.size();
  if (pairs.empty()) return out;
  for (const auto& [cand, ref] : pairs) {
    const auto s = score_text(cand, ref);
    out.rouge += s.rouge_l_f1;
    out.bleu += s.bleu;
  }
  out.rouge /= static_cast<double>(pairs.size());
  out.bleu /= static_cast<double>(pairs.size());
  return out;
}

}  // namespace modalign
