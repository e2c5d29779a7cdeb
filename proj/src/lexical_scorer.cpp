#include "lmbr/lexical_scorer.hpp"

#include <algorithm>
#include <cmath>

#include "lmbr/errors.hpp"

namespace lmbr {

namespace {

constexpr double kWindow[3] = {0.15, 0.7, 0.15};

std::size_t aligned_position(std::size_t t, std::size_t target_len, std::size_t source_len) {
  if (target_len <= 1 || source_len <= 1) return 0;
  const double r = static_cast<double>(t) * static_cast<double>(source_len - 1) / static_cast<double>(target_len - 1);
  return std::min(source_len - 1, static_cast<std::size_t>(std::lround(r)));
}

}  // namespace

LexicalScorer LexicalScorer::train(const std::vector<std::vector<TokenId>>& sources,
                                   const std::vector<std::vector<TokenId>>& targets, std::vector<TokenId> vocabulary,
                                   double k, double eps) {
  if (sources.size() != targets.size()) throw DataError("parallel corpus sides differ in length");
  if (sources.empty()) throw DataError("cannot train a translation model on an empty corpus");
  if (!(k > 0.0) || !(eps > 0.0 && eps < 1.0)) throw DataError("bad translation model smoothing constants");
  LexicalScorer m;
  std::sort(vocabulary.begin(), vocabulary.end());
  vocabulary.erase(std::unique(vocabulary.begin(), vocabulary.end()), vocabulary.end());
  if (!std::binary_search(vocabulary.begin(), vocabulary.end(), kUnk) ||
      !std::binary_search(vocabulary.begin(), vocabulary.end(), kEos))
    throw DataError("translation model vocabulary must contain UNK and EOS");
  m.vocab_ = std::move(vocabulary);
  m.eps_ = eps;
  for (std::size_t i = 0; i < m.vocab_.size(); ++i) m.index_[m.vocab_[i]] = i;
  const std::size_t v = m.vocab_.size();
  const std::size_t eos_slot = m.index_.at(kEos);

  std::map<TokenId, std::vector<double>> counts;
  for (std::size_t s = 0; s < sources.size(); ++s) {
    const auto& x = sources[s];
    const auto& y = targets[s];
    if (x.empty()) continue;
    for (std::size_t t = 0; t < y.size(); ++t) {
      auto slot = m.index_.find(y[t]);
      const std::size_t ys = slot == m.index_.end() ? m.index_.at(kUnk) : slot->second;
      const std::size_t j = aligned_position(t, y.size(), x.size());
      for (int d = -1; d <= 1; ++d) {
        const auto jd = static_cast<std::ptrdiff_t>(j) + d;
        if (jd < 0 || jd >= static_cast<std::ptrdiff_t>(x.size())) continue;
        auto& row = counts[x[static_cast<std::size_t>(jd)]];
        row.resize(v, 0.0);
        row[ys] += kWindow[d + 1];
      }
    }
  }
  for (auto& [f, row] : counts) {
    double total = 0.0;
    for (std::size_t i = 0; i < v; ++i)
      if (i != eos_slot) total += row[i] + k;
    std::vector<double> p(v, 0.0);
    for (std::size_t i = 0; i < v; ++i)
      if (i != eos_slot) p[i] = (row[i] + k) / total;
    m.table_.emplace(f, std::move(p));
  }
  return m;
}

std::vector<double> LexicalScorer::position_mix(std::span<const TokenId> source, std::size_t t) const {
  const std::size_t v = vocab_.size();
  const std::size_t eos_slot = index_.at(kEos);
  std::vector<double> mix(v, 0.0);
  if (t >= source.size()) {
    const double rest = eps_ / static_cast<double>(v - 1);
    std::fill(mix.begin(), mix.end(), rest);
    mix[eos_slot] = 1.0 - eps_;
    return mix;
  }
  const std::vector<double> uniform = [&] {
    std::vector<double> u(v, 1.0 / static_cast<double>(v - 1));
    u[eos_slot] = 0.0;
    return u;
  }();
  double wsum = 0.0;
  for (int d = -1; d <= 1; ++d) {
    const auto jd = static_cast<std::ptrdiff_t>(t) + d;
    if (jd < 0 || jd >= static_cast<std::ptrdiff_t>(source.size())) continue;
    auto row = table_.find(source[static_cast<std::size_t>(jd)]);
    const auto& p = row == table_.end() ? uniform : row->second;
    for (std::size_t i = 0; i < v; ++i) mix[i] += kWindow[d + 1] * p[i];
    wsum += kWindow[d + 1];
  }
  for (auto& m : mix) m *= (1.0 - eps_) / wsum;
  mix[eos_slot] = eps_;
  return mix;
}

double LexicalScorer::logprob(std::span<const TokenId> source, std::size_t t, TokenId y) const {
  auto slot = index_.find(y);
  const auto mix = position_mix(source, t);
  return std::log(mix[slot == index_.end() ? index_.at(kUnk) : slot->second]);
}

ScorerState LexicalScorer::start(std::span<const TokenId> source) {
  ScorerState s;
  s.words.push_back(0);
  s.words.insert(s.words.end(), source.begin(), source.end());
  return s;
}

Distribution LexicalScorer::distribution(const ScorerState& state) {
  std::vector<TokenId> source(state.words.begin() + 1, state.words.end());
  const auto mix = position_mix(source, static_cast<std::size_t>(state.words[0]));
  std::vector<std::pair<TokenId, double>> entries;
  entries.reserve(vocab_.size());
  for (std::size_t i = 0; i < vocab_.size(); ++i) entries.emplace_back(vocab_[i], std::log(mix[i]));
  return Distribution(std::move(entries), std::log(mix[index_.at(kUnk)]));
}

ScorerState LexicalScorer::advance(const ScorerState& state, TokenId) {
  ScorerState s = state;
  ++s.words[0];
  return s;
}

}  // namespace lmbr
