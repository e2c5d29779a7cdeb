#include "lmbr/scorer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lmbr/errors.hpp"

namespace lmbr {

Distribution::Distribution(std::vector<std::pair<TokenId, double>> entries, double default_logprob)
    : entries_(std::move(entries)), default_(default_logprob) {
  std::sort(entries_.begin(), entries_.end());
}

double Distribution::logprob(TokenId t) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), t,
                             [](const auto& e, TokenId id) { return e.first < id; });
  return (it != entries_.end() && it->first == t) ? it->second : default_;
}

double Distribution::mass() const {
  double m = 0.0;
  for (const auto& [t, lp] : entries_) m += std::exp(lp);
  return m;
}

TokenId Distribution::argmax() const {
  TokenId best = kUnk;
  double best_lp = -std::numeric_limits<double>::infinity();
  for (const auto& [t, lp] : entries_)
    if (lp > best_lp) {
      best = t;
      best_lp = lp;
    }
  return best;
}

double score_step(Scorer& scorer, const ScorerState& state, TokenId token) {
  return scorer.distribution(state).logprob(token);
}

double sequence_logprob(Scorer& scorer, std::span<const TokenId> source, std::span<const TokenId> tokens,
                        bool with_eos) {
  ScorerState state = scorer.start(source);
  double total = 0.0;
  for (TokenId t : tokens) {
    total += score_step(scorer, state, t);
    state = scorer.advance(state, t);
  }
  if (with_eos) total += score_step(scorer, state, kEos);
  return total;
}

UniformScorer::UniformScorer(std::vector<TokenId> vocabulary) : vocab_(std::move(vocabulary)) {
  std::sort(vocab_.begin(), vocab_.end());
  vocab_.erase(std::unique(vocab_.begin(), vocab_.end()), vocab_.end());
  if (vocab_.empty()) throw DataError("uniform scorer needs a non-empty vocabulary");
  const double lp = -std::log(static_cast<double>(vocab_.size()));
  std::vector<std::pair<TokenId, double>> entries;
  for (TokenId t : vocab_) entries.emplace_back(t, lp);
  dist_ = Distribution(std::move(entries), lp);
}

Distribution ensemble_distribution(std::span<const Distribution> members) {
  if (members.empty()) throw DataError("ensemble needs at least one member");
  const auto& first = members[0].entries();
  std::vector<std::pair<TokenId, double>> summed = first;
  double def = members[0].default_logprob();
  for (std::size_t m = 1; m < members.size(); ++m) {
    const auto& e = members[m].entries();
    if (e.size() != first.size())
      throw DataError("ensemble vocabulary mismatch: member " + std::to_string(m) + " lists " +
                      std::to_string(e.size()) + " tokens, member 0 lists " + std::to_string(first.size()));
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (e[i].first != summed[i].first)
        throw DataError("ensemble vocabulary mismatch at token id " + std::to_string(e[i].first));
      summed[i].second += e[i].second;
    }
    def += members[m].default_logprob();
  }
  double peak = -std::numeric_limits<double>::infinity();
  for (const auto& [t, lp] : summed) peak = std::max(peak, lp);
  double z = 0.0;
  for (const auto& [t, lp] : summed) z += std::exp(lp - peak);
  const double log_z = summed.empty() ? 0.0 : peak + std::log(z);
  for (auto& [t, lp] : summed) lp -= log_z;
  return Distribution(std::move(summed), def - log_z);
}

EnsembleScorer::EnsembleScorer(std::vector<std::shared_ptr<Scorer>> members) : members_(std::move(members)) {
  if (members_.empty()) throw DataError("ensemble needs at least one member");
}

ScorerState EnsembleScorer::start(std::span<const TokenId> source) {
  ScorerState s;
  for (auto& m : members_) s.children.push_back(m->start(source));
  return s;
}

Distribution EnsembleScorer::distribution(const ScorerState& state) {
  std::vector<Distribution> dists;
  dists.reserve(members_.size());
  for (std::size_t i = 0; i < members_.size(); ++i) dists.push_back(members_[i]->distribution(state.children[i]));
  return ensemble_distribution(dists);
}

ScorerState EnsembleScorer::advance(const ScorerState& state, TokenId token) {
  ScorerState s;
  for (std::size_t i = 0; i < members_.size(); ++i) s.children.push_back(members_[i]->advance(state.children[i], token));
  return s;
}

std::vector<TokenId> EnsembleScorer::vocabulary() const { return members_[0]->vocabulary(); }

}  // namespace lmbr
