#include "lmbr/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "lmbr/errors.hpp"

namespace lmbr {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Sorted set of lattice states reachable by a prefix.
using StateSet = std::vector<StateId>;

StateSet follow(const Lattice& lat, const StateSet& from, TokenId label) {
  StateSet out;
  for (StateId s : from)
    for (auto ai : lat.out_arcs(s))
      if (lat.arc(ai).label == label) out.push_back(lat.arc(ai).dst);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool any_final(const Lattice& lat, const StateSet& states) {
  return std::any_of(states.begin(), states.end(), [&](StateId s) { return lat.is_final(s); });
}

struct Live {
  Hypothesis hyp;
  ScorerState state;
  StateSet lattice_states;
};

struct Expansion {
  std::size_t parent;
  TokenId token;
  double evidence;
  double logprob;
  double score;
};

/// Largest possible gain of one non-EOS step. Infinite when the scorer may
/// return positive log-probabilities.
double step_gain_bound(const CombinationConfig& c, bool normalized) {
  if (!normalized && c.lambda > 0.0) return std::numeric_limits<double>::infinity();
  double bound = c.weights.theta0;
  for (int n = 1; n <= kMaxOrder; ++n) {
    const double pmax = c.table ? c.table->max_posterior(n) : 0.0;
    bound += std::max(0.0, c.weights.order_weight(n) * pmax);
  }
  return std::max(0.0, bound);
}

bool lex_less(const std::vector<TokenId>& a, TokenId a_next, const std::vector<TokenId>& b, TokenId b_next) {
  // Compares a + [a_next] with b + [b_next] without materialising either.
  const std::size_t na = a.size() + 1, nb = b.size() + 1;
  for (std::size_t i = 0; i < std::min(na, nb); ++i) {
    const TokenId x = i < a.size() ? a[i] : a_next;
    const TokenId y = i < b.size() ? b[i] : b_next;
    if (x != y) return x < y;
  }
  return na < nb;
}

std::vector<TokenId> lattice_tokens(const Lattice& lat, const StateSet& states) {
  std::vector<TokenId> out;
  for (StateId s : states)
    for (auto ai : lat.out_arcs(s)) out.push_back(lat.arc(ai).label);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

bool better(const Hypothesis& a, const Hypothesis& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.tokens < b.tokens;
}

std::size_t effective_max_len(const DecodeConfig& cfg, std::size_t source_len) {
  return cfg.max_len > 0 ? cfg.max_len : 2 * source_len + 5;
}

std::vector<TokenId> candidate_vocab(std::span<const TokenId> scorer_vocab, const PosteriorTable* table) {
  std::vector<TokenId> out(scorer_vocab.begin(), scorer_vocab.end());
  if (table) {
    const auto uni = table->unigram_tokens();
    out.insert(out.end(), uni.begin(), uni.end());
  }
  out.push_back(kEos);
  std::erase_if(out, [](TokenId t) { return t == kEpsilon; });
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

DecodeResult beam_decode(std::span<const TokenId> source, Scorer& scorer, const DecodeConfig& cfg) {
  if (cfg.beam < 1) throw DataError("beam width must be at least 1");
  const CombinationConfig& comb = cfg.combination;
  const std::size_t max_len = effective_max_len(cfg, source.size());
  const Lattice* constraint = cfg.constrain_to;

  std::vector<Live> live(1);
  live[0].state = scorer.start(source);
  if (constraint) live[0].lattice_states = {constraint->start()};
  const Distribution first = scorer.distribution(live[0].state);
  std::vector<TokenId> base = scorer.vocabulary();
  for (const auto& [t, lp] : first.entries()) base.push_back(t);
  const auto candidates = candidate_vocab(base, comb.table);
  const auto table_tokens = comb.table ? comb.table->unigram_tokens() : std::vector<TokenId>{};
  const double gain_bound = step_gain_bound(comb, scorer.normalized());
  const double eos_bound = scorer.normalized() || comb.lambda == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();

  std::vector<Hypothesis> finished;
  double best_finished = kNegInf;
  // Final scores are recomputed over the whole sequence so that they match
  // exhaustive_decode bit for bit and ties resolve the same way.
  auto retire = [&](Hypothesis h) {
    h.evidence = evidence(h.tokens, comb);
    h.score = h.evidence + comb.lambda * h.scorer_logprob;
    best_finished = std::max(best_finished, h.score);
    finished.push_back(std::move(h));
  };

  for (std::size_t len = 0; !live.empty(); ++len) {
    std::vector<Distribution> dists;
    dists.reserve(live.size());
    for (const auto& l : live) dists.push_back(scorer.distribution(l.state));

    if (len == max_len) {
      for (std::size_t i = 0; i < live.size(); ++i) {
        if (constraint && !any_final(*constraint, live[i].lattice_states)) continue;
        Hypothesis h = live[i].hyp;
        h.scorer_logprob += dists[i].logprob(kEos);
        h.score = h.evidence + comb.lambda * h.scorer_logprob;
        h.complete = false;
        retire(std::move(h));
      }
      break;
    }

    std::vector<Expansion> expansions;
    for (std::size_t i = 0; i < live.size(); ++i) {
      const Live& l = live[i];
      std::vector<TokenId> options;
      if (constraint) {
        options = lattice_tokens(*constraint, l.lattice_states);
        if (any_final(*constraint, l.lattice_states)) options.push_back(kEos);
      } else if (cfg.candidate_cap > 0 && cfg.candidate_cap < candidates.size()) {
        std::vector<TokenId> ranked = candidates;
        std::stable_sort(ranked.begin(), ranked.end(),
                         [&](TokenId a, TokenId b) { return dists[i].logprob(a) > dists[i].logprob(b); });
        ranked.resize(cfg.candidate_cap);
        options = ranked;
        options.insert(options.end(), table_tokens.begin(), table_tokens.end());
        options.push_back(kEos);
        std::sort(options.begin(), options.end());
        options.erase(std::unique(options.begin(), options.end()), options.end());
      } else {
        options = candidates;
      }
      for (TokenId t : options) {
        const double ev = l.hyp.evidence + stepwise_gain(l.hyp.tokens, t, comb);
        const double lp = l.hyp.scorer_logprob + dists[i].logprob(t);
        expansions.push_back({i, t, ev, lp, ev + comb.lambda * lp});
      }
    }

    auto order = [&](const Expansion& a, const Expansion& b) {
      if (a.score != b.score) return a.score > b.score;
      return lex_less(live[a.parent].hyp.tokens, a.token, live[b.parent].hyp.tokens, b.token);
    };
    const std::size_t keep = std::min(cfg.beam, expansions.size());
    std::partial_sort(expansions.begin(), expansions.begin() + static_cast<std::ptrdiff_t>(keep), expansions.end(), order);
    expansions.resize(keep);

    std::vector<Live> next;
    for (const auto& e : expansions) {
      const Live& parent = live[e.parent];
      Hypothesis h;
      h.tokens = parent.hyp.tokens;
      h.evidence = e.evidence;
      h.scorer_logprob = e.logprob;
      h.score = e.score;
      if (e.token == kEos) {
        h.complete = true;
        retire(std::move(h));
        continue;
      }
      h.tokens.push_back(e.token);
      Live child{std::move(h), scorer.advance(parent.state, e.token), {}};
      if (constraint) child.lattice_states = follow(*constraint, parent.lattice_states, e.token);
      next.push_back(std::move(child));
    }
    live = std::move(next);

    if (!finished.empty() && !live.empty()) {
      double best_possible = kNegInf;
      for (const auto& l : live) {
        const double remaining = static_cast<double>(max_len - l.hyp.tokens.size());
        const double optimistic = remaining == 0.0 ? 0.0 : gain_bound * remaining;
        best_possible = std::max(best_possible, l.hyp.score + optimistic + comb.lambda * eos_bound);
      }
      if (best_possible < best_finished) break;
    }
  }

  std::sort(finished.begin(), finished.end(), better);
  DecodeResult result;
  result.hypotheses = std::move(finished);
  result.truncated = result.hypotheses.empty() || !result.hypotheses.front().complete;
  return result;
}

Hypothesis exhaustive_decode(std::span<const TokenId> source, Scorer& scorer, const DecodeConfig& cfg) {
  const CombinationConfig& comb = cfg.combination;
  const std::size_t max_len = effective_max_len(cfg, source.size());
  const Lattice* constraint = cfg.constrain_to;
  const ScorerState root = scorer.start(source);
  std::vector<TokenId> base = scorer.vocabulary();
  const Distribution first = scorer.distribution(root);
  for (const auto& [t, lp] : first.entries()) base.push_back(t);
  auto candidates = candidate_vocab(base, comb.table);
  std::erase(candidates, kEos);

  if (!constraint) {
    double space = 0.0, layer = 1.0;
    for (std::size_t n = 0; n <= max_len; ++n) {
      space += layer;
      layer *= static_cast<double>(candidates.size());
    }
    if (space > kExhaustiveLimit)
      throw DataError("exhaustive search space of " + std::to_string(space) + " sequences is too large");
  } else if (count_paths(*constraint) > kExhaustiveLimit) {
    throw DataError("constraint lattice has too many paths for exhaustive search");
  }

  Hypothesis best;
  bool have_best = false;
  std::vector<TokenId> prefix;
  // Evidence is recomputed from scratch for every sequence so the oracle
  // does not share the stepwise bookkeeping of the beam search.
  std::function<void(const ScorerState&, double, const StateSet&)> walk = [&](const ScorerState& state, double logprob,
                                                                               const StateSet& lat_states) {
    const Distribution dist = scorer.distribution(state);
    if (!constraint || any_final(*constraint, lat_states)) {
      Hypothesis h;
      h.tokens = prefix;
      h.scorer_logprob = logprob + dist.logprob(kEos);
      h.evidence = evidence(prefix, comb);
      h.score = h.evidence + comb.lambda * h.scorer_logprob;
      h.complete = true;
      if (!have_best || better(h, best)) {
        best = std::move(h);
        have_best = true;
      }
    }
    if (prefix.size() == max_len) return;
    const auto options = constraint ? lattice_tokens(*constraint, lat_states) : candidates;
    for (TokenId t : options) {
      if (t == kEos) continue;
      prefix.push_back(t);
      walk(scorer.advance(state, t), logprob + dist.logprob(t),
           constraint ? follow(*constraint, lat_states, t) : StateSet{});
      prefix.pop_back();
    }
  };
  walk(root, 0.0, constraint ? StateSet{constraint->start()} : StateSet{});
  if (!have_best) throw DataError("no complete hypothesis within the length limit");
  return best;
}

std::size_t rescore(const std::vector<std::vector<TokenId>>& hypotheses, std::span<const TokenId> source,
                    Scorer& scorer, const CombinationConfig& cfg) {
  if (hypotheses.empty()) throw DataError("rescore: empty hypothesis list");
  std::size_t best = 0;
  double best_score = kNegInf;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    double s = evidence(hypotheses[i], cfg);
    if (cfg.lambda != 0.0) s += cfg.lambda * sequence_logprob(scorer, source, hypotheses[i]);
    if (s > best_score) {
      best = i;
      best_score = s;
    }
  }
  return best;
}

}  // namespace lmbr
