#include "lmbr/mbr.hpp"

#include <algorithm>
#include <map>

#include "lmbr/errors.hpp"

namespace lmbr {

namespace {

std::span<const TokenId> strip_eos(std::span<const TokenId> y) {
  while (!y.empty() && y.back() == kEos) y = y.first(y.size() - 1);
  return y;
}

double posterior(const CombinationConfig& cfg, std::span<const TokenId> gram) {
  return cfg.table ? cfg.table->lookup(gram) : 0.0;
}

}  // namespace

double evidence(std::span<const TokenId> y, const CombinationConfig& cfg) {
  y = strip_eos(y);
  // Count distinct n-grams first so that each table entry is visited once.
  std::map<Ngram, std::size_t> counts;
  for (std::size_t end = 1; end <= y.size(); ++end)
    for (std::size_t n = 1; n <= static_cast<std::size_t>(kMaxOrder) && n <= end; ++n)
      ++counts[Ngram(y.subspan(end - n, n))];
  double total = cfg.weights.theta0 * static_cast<double>(y.size());
  for (const auto& [g, count] : counts)
    total += cfg.weights.order_weight(g.order()) * static_cast<double>(count) * posterior(cfg, g.tokens());
  return total;
}

double stepwise_gain(std::span<const TokenId> history, TokenId next, const CombinationConfig& cfg) {
  if (next == kEos) return 0.0;
  double gain = cfg.weights.theta0;
  std::array<TokenId, kMaxOrder> window{};
  const std::size_t t = history.size() + 1;
  for (std::size_t n = 1; n <= static_cast<std::size_t>(kMaxOrder) && n <= t; ++n) {
    std::copy(history.end() - static_cast<std::ptrdiff_t>(n - 1), history.end(), window.begin());
    window[n - 1] = next;
    gain += cfg.weights.order_weight(static_cast<int>(n)) * posterior(cfg, std::span<const TokenId>(window.data(), n));
  }
  return gain;
}

double accumulate_evidence(std::span<const TokenId> y, const CombinationConfig& cfg) {
  y = strip_eos(y);
  double total = 0.0;
  for (std::size_t t = 0; t < y.size(); ++t) total += stepwise_gain(y.first(t), y[t], cfg);
  return total;
}

double combined_score(std::span<const TokenId> y, double scorer_logprob, const CombinationConfig& cfg) {
  return evidence(y, cfg) + cfg.lambda * scorer_logprob;
}

RescoreResult lmbr_rescore(const std::vector<std::vector<TokenId>>& hypotheses, const CombinationConfig& cfg) {
  if (hypotheses.empty()) throw DataError("lmbr_rescore: empty hypothesis list");
  RescoreResult best{0, evidence(hypotheses[0], cfg)};
  for (std::size_t i = 1; i < hypotheses.size(); ++i) {
    const double e = evidence(hypotheses[i], cfg);
    if (e > best.evidence) best = {i, e};
  }
  return best;
}

}  // namespace lmbr
