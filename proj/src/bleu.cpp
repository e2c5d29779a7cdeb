#include "lmbr/bleu.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "lmbr/errors.hpp"

namespace lmbr {

BleuStats& BleuStats::operator+=(const BleuStats& o) {
  for (int n = 0; n < kBleuOrder; ++n) {
    matches[static_cast<std::size_t>(n)] += o.matches[static_cast<std::size_t>(n)];
    totals[static_cast<std::size_t>(n)] += o.totals[static_cast<std::size_t>(n)];
  }
  candidate_length += o.candidate_length;
  reference_length += o.reference_length;
  return *this;
}

double BleuStats::score() const {
  if (candidate_length == 0.0) return 0.0;
  double log_sum = 0.0;
  int used = 0;
  for (std::size_t n = 0; n < static_cast<std::size_t>(kBleuOrder); ++n) {
    if (totals[n] == 0.0) continue;
    if (matches[n] == 0.0) return 0.0;
    log_sum += std::log(matches[n] / totals[n]);
    ++used;
  }
  if (used == 0) return 0.0;
  const double bp = std::exp(std::min(0.0, 1.0 - reference_length / candidate_length));
  return bp * std::exp(log_sum / used);
}

BleuStats sentence_stats(const std::vector<TokenId>& candidate, const std::vector<TokenId>& reference) {
  BleuStats s;
  s.candidate_length = static_cast<double>(candidate.size());
  s.reference_length = static_cast<double>(reference.size());
  for (std::size_t n = 1; n <= static_cast<std::size_t>(kBleuOrder); ++n) {
    std::map<std::vector<TokenId>, int> ref_counts;
    for (std::size_t i = 0; i + n <= reference.size(); ++i)
      ++ref_counts[std::vector<TokenId>(reference.begin() + static_cast<std::ptrdiff_t>(i),
                                        reference.begin() + static_cast<std::ptrdiff_t>(i + n))];
    std::map<std::vector<TokenId>, int> cand_counts;
    for (std::size_t i = 0; i + n <= candidate.size(); ++i)
      ++cand_counts[std::vector<TokenId>(candidate.begin() + static_cast<std::ptrdiff_t>(i),
                                         candidate.begin() + static_cast<std::ptrdiff_t>(i + n))];
    double matched = 0.0, total = 0.0;
    for (const auto& [g, c] : cand_counts) {
      total += c;
      auto it = ref_counts.find(g);
      if (it != ref_counts.end()) matched += std::min(c, it->second);
    }
    s.matches[n - 1] = matched;
    s.totals[n - 1] = total;
  }
  return s;
}

double corpus_bleu(const std::vector<std::vector<TokenId>>& candidates,
                   const std::vector<std::vector<TokenId>>& references) {
  if (candidates.size() != references.size())
    throw DataError("BLEU: " + std::to_string(candidates.size()) + " candidates but " +
                    std::to_string(references.size()) + " references");
  if (candidates.empty()) throw DataError("BLEU: empty candidate set");
  BleuStats total;
  for (std::size_t i = 0; i < candidates.size(); ++i) total += sentence_stats(candidates[i], references[i]);
  return total.score();
}

}  // namespace lmbr
