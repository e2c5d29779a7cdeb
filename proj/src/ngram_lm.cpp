#include "lmbr/ngram_lm.hpp"

#include <algorithm>
#include <cmath>

#include "lmbr/errors.hpp"

namespace lmbr {

NgramLM NgramLM::train(const std::vector<std::vector<TokenId>>& corpus, int order, double k) {
  if (corpus.empty()) throw DataError("cannot train a language model on an empty corpus");
  if (order < 1 || order > kMaxOrder) throw DataError("language model order must be in [1, 4]");
  if (!(k > 0.0)) throw DataError("add-k constant must be positive");

  NgramLM lm;
  lm.order_ = order;
  lm.k_ = k;
  lm.vocab_set_ = {kUnk, kEos};
  for (const auto& sentence : corpus)
    for (TokenId t : sentence) {
      if (t == kEpsilon || t == kEos) throw DataError("training sentences must not contain epsilon or EOS");
      lm.vocab_set_.insert(t);
    }
  lm.vocab_.assign(lm.vocab_set_.begin(), lm.vocab_set_.end());
  std::sort(lm.vocab_.begin(), lm.vocab_.end());

  for (const auto& sentence : corpus) {
    std::vector<TokenId> padded(static_cast<std::size_t>(order - 1), kEos);
    padded.insert(padded.end(), sentence.begin(), sentence.end());
    padded.push_back(kEos);
    for (std::size_t i = static_cast<std::size_t>(order - 1); i < padded.size(); ++i) {
      lm.total_events_ += 1.0;
      for (int n = 1; n <= order; ++n) {
        const std::span<const TokenId> event(padded.data() + i + 1 - static_cast<std::size_t>(n), static_cast<std::size_t>(n));
        lm.events_[static_cast<std::size_t>(n - 1)][Ngram(event)] += 1.0;
        lm.contexts_[static_cast<std::size_t>(n - 1)][Ngram(event.first(static_cast<std::size_t>(n - 1)))] += 1.0;
      }
    }
  }
  return lm;
}

double NgramLM::prob(std::span<const TokenId> context, TokenId w) const {
  const double kv = k_ * static_cast<double>(vocab_.size());
  const auto& unigrams = events_[0];
  auto it = unigrams.find(Ngram{w});
  double p = ((it == unigrams.end() ? 0.0 : it->second) + k_) / (total_events_ + kv);
  std::array<TokenId, kMaxOrder> buf{};
  for (int n = 2; n <= order_; ++n) {
    const auto h = static_cast<std::size_t>(n - 1);
    std::copy(context.end() - static_cast<std::ptrdiff_t>(h), context.end(), buf.begin());
    const std::span<const TokenId> hist(buf.data(), h);
    const auto& ctx = contexts_[static_cast<std::size_t>(n - 1)];
    auto c = ctx.find(Ngram(hist));
    if (c == ctx.end()) continue;
    buf[h] = w;
    const auto& ev = events_[static_cast<std::size_t>(n - 1)];
    auto e = ev.find(Ngram(std::span<const TokenId>(buf.data(), h + 1)));
    p = ((e == ev.end() ? 0.0 : e->second) + kv * p) / (c->second + kv);
  }
  return p;
}

double NgramLM::conditional_logprob(std::span<const TokenId> context, TokenId w) const {
  std::vector<TokenId> padded(static_cast<std::size_t>(order_ - 1), kEos);
  for (TokenId t : context) padded.push_back(map(t));
  return std::log(prob(std::span<const TokenId>(padded).last(static_cast<std::size_t>(order_ - 1)), map(w)));
}

double NgramLM::sentence_logprob(std::span<const TokenId> tokens) const {
  std::vector<TokenId> padded(static_cast<std::size_t>(order_ - 1), kEos);
  for (TokenId t : tokens) padded.push_back(map(t));
  padded.push_back(kEos);
  double total = 0.0;
  const auto h = static_cast<std::size_t>(order_ - 1);
  for (std::size_t i = h; i < padded.size(); ++i)
    total += std::log(prob(std::span<const TokenId>(padded.data() + i - h, h), padded[i]));
  return total;
}

ScorerState NgramLM::start(std::span<const TokenId>) {
  ScorerState s;
  s.words.assign(static_cast<std::size_t>(order_ - 1), kEos);
  return s;
}

Distribution NgramLM::distribution(const ScorerState& state) {
  std::vector<TokenId> context(state.words.begin(), state.words.end());
  std::vector<std::pair<TokenId, double>> entries;
  entries.reserve(vocab_.size());
  double unk = 0.0;
  for (TokenId t : vocab_) {
    const double lp = std::log(prob(context, t));
    entries.emplace_back(t, lp);
    if (t == kUnk) unk = lp;
  }
  return Distribution(std::move(entries), unk);
}

ScorerState NgramLM::advance(const ScorerState& state, TokenId token) {
  ScorerState s = state;
  if (!s.words.empty()) {
    s.words.erase(s.words.begin());
    s.words.push_back(map(token));
  }
  return s;
}

}  // namespace lmbr
