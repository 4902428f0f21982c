#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace modalign {

using TokenSeq = std::vector<std::string>;

/// Lowercases ASCII and splits on runs of non-alphanumeric characters.
/// Bytes >= 0x80 count as word characters so UTF-8 words stay whole.
TokenSeq tokenize(std::string_view text);

/// Length of the longest common subsequence (O(|a| |b|) DP).
std::size_t lcs_length(const TokenSeq& a, const TokenSeq& b);

/// ROUGE-L F1 (beta = 1).
double rouge_l(const TokenSeq& candidate, const TokenSeq& reference);

/// Sentence BLEU with clipped n-gram precisions for n = 1..max_n.
///  - orders with no candidate n-grams are dropped and the remaining orders
///    are weighted uniformly;
///  - a zero precision at n >= 2 becomes 1 / (2 * candidate n-gram count);
///  - zero unigram precision or an empty candidate scores 0;
///  - brevity penalty exp(1 - |ref| / |cand|) when |cand| < |ref|.
double bleu(const TokenSeq& candidate, const TokenSeq& reference, std::size_t max_n = 4);

struct TextScore {
  double rouge_l_f1 = 0;
  double bleu = 0;
};

TextScore score_text(std::string_view candidate, std::string_view reference);

struct CorpusScore {
  double rouge = 0;
  double bleu = 0;
  std::size_t n = 0;
};

/// Macro average of per-pair scores; pairs are (candidate, reference).
CorpusScore score_corpus(const std::vector<std::pair<std::string, std::string>>& pairs);

}  // namespace modalign
