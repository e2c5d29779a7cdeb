#include "lmbr/posteriors.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>

#include <omp.h>

#include "lmbr/errors.hpp"

namespace lmbr {

Ngram::Ngram(std::span<const TokenId> tokens) {
  if (tokens.size() > static_cast<std::size_t>(kMaxOrder))
    throw DataError("n-gram longer than " + std::to_string(kMaxOrder));
  std::copy(tokens.begin(), tokens.end(), tokens_.begin());
  order_ = static_cast<int>(tokens.size());
}

Ngram Ngram::extended(TokenId t, int max_len) const {
  Ngram g;
  const int keep = std::min(order_, max_len - 1);
  for (int i = 0; i < keep; ++i) g.tokens_[static_cast<std::size_t>(i)] = tokens_[static_cast<std::size_t>(order_ - keep + i)];
  g.tokens_[static_cast<std::size_t>(keep)] = t;
  g.order_ = keep + 1;
  return g;
}

Ngram Ngram::suffix(int n) const {
  Ngram g;
  n = std::min(n, order_);
  for (int i = 0; i < n; ++i) g.tokens_[static_cast<std::size_t>(i)] = tokens_[static_cast<std::size_t>(order_ - n + i)];
  g.order_ = n;
  return g;
}

std::size_t count_occurrences(std::span<const TokenId> seq, const Ngram& g) {
  const auto n = static_cast<std::size_t>(g.order());
  if (n == 0 || seq.size() < n) return 0;
  std::size_t count = 0;
  for (std::size_t i = 0; i + n <= seq.size(); ++i)
    if (std::equal(g.tokens().begin(), g.tokens().end(), seq.begin() + static_cast<std::ptrdiff_t>(i))) ++count;
  return count;
}

// ---------------------------------------------------------------------------
// PosteriorTable

PosteriorTable::PosteriorTable(int max_order, double alpha, double beta, std::uint64_t source_hash)
    : max_order_(max_order), alpha_(alpha), beta_(beta), source_hash_(source_hash) {
  if (max_order < 1 || max_order > kMaxOrder)
    throw DataError("max order must be in [1, " + std::to_string(kMaxOrder) + "]");
}

double PosteriorTable::lookup(const Ngram& g) const {
  auto it = entries_.find(g);
  return it == entries_.end() ? 0.0 : it->second;
}

double PosteriorTable::lookup(std::span<const TokenId> tokens) const {
  if (tokens.empty() || tokens.size() > static_cast<std::size_t>(max_order_)) return 0.0;
  return lookup(Ngram(tokens));
}

void PosteriorTable::set(const Ngram& g, double posterior) {
  if (g.order() < 1 || g.order() > max_order_)
    throw DataError("n-gram order " + std::to_string(g.order()) + " outside table range");
  if (!(posterior > 0.0 && posterior <= 1.0))
    throw DataError("posterior " + std::to_string(posterior) + " outside (0, 1]");
  entries_[g] = posterior;
  auto& m = max_by_order_[static_cast<std::size_t>(g.order())];
  m = std::max(m, posterior);
}

double PosteriorTable::max_posterior(int order) const {
  if (order < 1 || order > kMaxOrder) return 0.0;
  return max_by_order_[static_cast<std::size_t>(order)];
}

std::vector<TokenId> PosteriorTable::unigram_tokens() const {
  std::vector<TokenId> out;
  for (const auto& [g, p] : entries_)
    if (g.order() == 1) out.push_back(g[0]);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::pair<Ngram, double>> PosteriorTable::sorted_entries() const {
  std::vector<std::pair<Ngram, double>> out(entries_.begin(), entries_.end());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

// ---------------------------------------------------------------------------
// N-gram enumeration

std::vector<Ngram> collect_ngrams(const Lattice& input, int max_order, std::size_t cap) {
  if (max_order < 1 || max_order > kMaxOrder)
    throw DataError("max order must be in [1, " + std::to_string(kMaxOrder) + "]");
  const Lattice lat = trim(input);
  const auto order = topological_order(lat);
  std::vector<std::unordered_set<Ngram, NgramHash>> histories(lat.num_states());
  histories[static_cast<std::size_t>(lat.start())].insert(Ngram{});
  std::unordered_set<Ngram, NgramHash> found;
  std::size_t live_histories = 1;

  for (StateId s : order) {
    auto& here = histories[static_cast<std::size_t>(s)];
    for (auto ai : lat.out_arcs(s)) {
      const Arc& a = lat.arc(ai);
      auto& there = histories[static_cast<std::size_t>(a.dst)];
      for (const Ngram& h : here) {
        const Ngram g = h.extended(a.label, max_order);
        for (int n = 1; n <= g.order(); ++n) found.insert(g.suffix(n));
        if (there.insert(g.suffix(max_order - 1)).second) ++live_histories;
      }
      if (found.size() > cap || live_histories > cap)
        throw DataError("n-gram enumeration exceeded the cap of " + std::to_string(cap));
    }
    live_histories -= here.size();
    here.clear();
  }
  std::vector<Ngram> out(found.begin(), found.end());
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Single-pattern failure automaton

namespace {

/// KMP automaton for one pattern: states 0..m-1 are the matched prefix
/// length, m is the absorbing match state.
class PatternAutomaton {
 public:
  explicit PatternAutomaton(const Ngram& g) : pattern_(g), m_(g.order()) {
    std::array<int, kMaxOrder + 1> fail{};
    for (int q = 1; q < m_; ++q) {
      int k = fail[static_cast<std::size_t>(q)];
      while (k > 0 && g[q] != g[k]) k = fail[static_cast<std::size_t>(k)];
      fail[static_cast<std::size_t>(q + 1)] = (g[q] == g[k] && q != k) ? k + 1 : 0;
    }
    for (int q = 0; q < m_; ++q)
      for (int j = 0; j < m_; ++j) next_[static_cast<std::size_t>(q)][static_cast<std::size_t>(j)] = step_slow(q, g[j], fail);
  }

  int length() const { return m_; }

  int next(int q, TokenId a) const {
    for (int j = 0; j < m_; ++j)
      if (pattern_[j] == a) return next_[static_cast<std::size_t>(q)][static_cast<std::size_t>(j)];
    return 0;
  }

 private:
  int step_slow(int q, TokenId a, const std::array<int, kMaxOrder + 1>& fail) const {
    while (true) {
      if (pattern_[q] == a) return q + 1;
      if (q == 0) return 0;
      q = fail[static_cast<std::size_t>(q)];
    }
  }

  Ngram pattern_;
  int m_;
  std::array<std::array<int, kMaxOrder>, kMaxOrder> next_{};
};

std::vector<double> backward_mass(const Lattice& lat, const std::vector<StateId>& order) {
  std::vector<double> mass(lat.num_states(), 0.0);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    double b = lat.is_final(*it) ? std::exp(-lat.final_weight(*it)) : 0.0;
    for (auto ai : lat.out_arcs(*it)) {
      const Arc& a = lat.arc(ai);
      b += std::exp(-a.weight) * mass[static_cast<std::size_t>(a.dst)];
    }
    mass[static_cast<std::size_t>(*it)] = b;
  }
  return mass;
}

}  // namespace

double ngram_path_posterior(const Lattice& lat, const Ngram& g) {
  if (g.order() < 1) return 0.0;
  const PatternAutomaton automaton(g);
  const int m = automaton.length();
  const auto order = topological_order(lat);
  const auto beta = backward_mass(lat, order);
  const double total = beta[static_cast<std::size_t>(lat.start())];
  if (!(total > 0.0)) throw DataError("lattice carries no probability mass");

  std::vector<double> alpha(lat.num_states() * static_cast<std::size_t>(m), 0.0);
  auto at = [&](StateId s, int q) -> double& {
    return alpha[static_cast<std::size_t>(s) * static_cast<std::size_t>(m) + static_cast<std::size_t>(q)];
  };
  at(lat.start(), 0) = 1.0;
  double matched = 0.0;
  for (StateId s : order) {
    for (int q = 0; q < m; ++q) {
      const double mass = at(s, q);
      if (mass == 0.0) continue;
      for (auto ai : lat.out_arcs(s)) {
        const Arc& a = lat.arc(ai);
        const double flow = mass * std::exp(-a.weight);
        const int q2 = automaton.next(q, a.label);
        if (q2 == m)
          matched += flow * beta[static_cast<std::size_t>(a.dst)];
        else
          at(a.dst, q2) += flow;
      }
    }
  }
  return std::clamp(matched / total, 0.0, 1.0);
}

double posterior_bruteforce(const Lattice& lat, const Ngram& g, std::size_t max_paths) {
  double total = 0.0, containing = 0.0;
  for (const auto& p : enumerate_paths(lat, max_paths)) {
    total += p.prob;
    if (count_occurrences(p.tokens, g) > 0) containing += p.prob;
  }
  if (!(total > 0.0)) throw DataError("lattice carries no probability mass");
  return containing / total;
}

double smooth_posterior(double p, double alpha) { return (1.0 - alpha) * p + alpha * 0.5; }

// ---------------------------------------------------------------------------
// Table construction

namespace {

/// Topologically indexed copy of a lattice for repeated forward passes.
/// Positions replace state ids; incoming arcs are stored per position.
struct ForwardIndex {
  std::size_t num_positions = 0;
  std::size_t start_pos = 0;
  std::vector<std::size_t> in_begin;  // CSR offsets, size num_positions + 1
  std::vector<std::size_t> in_src;
  std::vector<TokenId> in_label;
  std::vector<double> in_prob;
  std::vector<double> forward;   // unconstrained mass reaching each position
  std::vector<double> backward;  // mass from each position to a final
  double total = 0.0;

  struct LabelArcs {
    std::size_t min_src = 0, max_src = 0;
    std::vector<std::size_t> src;
    std::vector<double> prob_times_backward;
  };
  std::unordered_map<TokenId, LabelArcs> by_label;

  explicit ForwardIndex(const Lattice& lat) {
    const auto order = topological_order(lat);
    num_positions = order.size();
    std::vector<std::size_t> pos(lat.num_states());
    for (std::size_t i = 0; i < order.size(); ++i) pos[static_cast<std::size_t>(order[i])] = i;
    start_pos = pos[static_cast<std::size_t>(lat.start())];

    in_begin.assign(num_positions + 1, 0);
    for (const auto& a : lat.arcs()) ++in_begin[pos[static_cast<std::size_t>(a.dst)] + 1];
    for (std::size_t i = 0; i < num_positions; ++i) in_begin[i + 1] += in_begin[i];
    in_src.resize(lat.arcs().size());
    in_label.resize(lat.arcs().size());
    in_prob.resize(lat.arcs().size());
    std::vector<std::size_t> fill(in_begin.begin(), in_begin.end() - 1);
    for (const auto& a : lat.arcs()) {
      const std::size_t k = fill[pos[static_cast<std::size_t>(a.dst)]]++;
      in_src[k] = pos[static_cast<std::size_t>(a.src)];
      in_label[k] = a.label;
      in_prob[k] = std::exp(-a.weight);
    }

    forward.assign(num_positions, 0.0);
    forward[start_pos] = 1.0;
    for (std::size_t i = 0; i < num_positions; ++i)
      for (std::size_t k = in_begin[i]; k < in_begin[i + 1]; ++k) forward[i] += forward[in_src[k]] * in_prob[k];

    const auto back = backward_mass(lat, order);
    backward.resize(num_positions);
    for (std::size_t i = 0; i < num_positions; ++i) backward[i] = back[static_cast<std::size_t>(order[i])];
    total = backward[start_pos];
    if (!(total > 0.0)) throw DataError("lattice carries no probability mass");

    for (const auto& a : lat.arcs()) {
      const std::size_t s = pos[static_cast<std::size_t>(a.src)];
      auto [it, fresh] = by_label.try_emplace(a.label);
      auto& la = it->second;
      if (fresh) la.min_src = la.max_src = s;
      la.min_src = std::min(la.min_src, s);
      la.max_src = std::max(la.max_src, s);
      la.src.push_back(s);
      la.prob_times_backward.push_back(std::exp(-a.weight) * backward[pos[static_cast<std::size_t>(a.dst)]]);
    }
  }
};

/// Posterior of one n-gram restricted to the topological window between the
/// first arc that can start a match and the last arc that can complete one.
/// Before the window every path is still in automaton state 0.
double windowed_posterior(const ForwardIndex& index, const Ngram& g, std::vector<double>& buffer) {
  const auto first = index.by_label.find(g[0]);
  const auto last = index.by_label.find(g.back());
  if (first == index.by_label.end() || last == index.by_label.end()) return 0.0;
  const PatternAutomaton automaton(g);
  const auto m = static_cast<std::size_t>(automaton.length());
  const std::size_t lo = first->second.min_src, hi = last->second.max_src;
  if (hi < lo) return 0.0;

  buffer.resize(index.num_positions * m);
  auto alpha = [&](std::size_t p, std::size_t q) -> double& { return buffer[p * m + q]; };
  for (std::size_t p = lo; p <= hi; ++p) {
    for (std::size_t q = 0; q < m; ++q) alpha(p, q) = 0.0;
    if (p == index.start_pos) alpha(p, 0) = 1.0;
    for (std::size_t k = index.in_begin[p]; k < index.in_begin[p + 1]; ++k) {
      const std::size_t src = index.in_src[k];
      const double prob = index.in_prob[k];
      const TokenId label = index.in_label[k];
      if (src < lo) {
        const auto q2 = static_cast<std::size_t>(automaton.next(0, label));
        if (q2 < m) alpha(p, q2) += index.forward[src] * prob;
        continue;
      }
      for (std::size_t q = 0; q < m; ++q) {
        const double mass = alpha(src, q);
        if (mass == 0.0) continue;
        const auto q2 = static_cast<std::size_t>(automaton.next(static_cast<int>(q), label));
        if (q2 < m) alpha(p, q2) += mass * prob;
      }
    }
  }

  // Completing arcs all leave positions in [lo, hi].
  double matched = 0.0;
  const auto& completing = last->second;
  for (std::size_t k = 0; k < completing.src.size(); ++k) {
    const std::size_t src = completing.src[k];
    if (src < lo) continue;
    const double mass = alpha(src, m - 1);
    if (mass != 0.0 && automaton.next(static_cast<int>(m - 1), g.back()) == static_cast<int>(m))
      matched += mass * completing.prob_times_backward[k];
  }
  return std::clamp(matched / index.total, 0.0, 1.0);
}

PosteriorTable assemble(const std::vector<Ngram>& ngrams, const std::vector<double>& posteriors, int max_order,
                        double alpha, double beta, std::uint64_t source_hash) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw DataError("smoothing alpha must be in [0, 1]");
  PosteriorTable table(max_order, alpha, beta, source_hash);
  for (std::size_t i = 0; i < ngrams.size(); ++i) {
    const double p = std::min(1.0, smooth_posterior(posteriors[i], alpha));
    if (p > 0.0) table.set(ngrams[i], p);
  }
  return table;
}

}  // namespace

PosteriorTable compute_posterior_table(const Lattice& input, int max_order, double alpha, double beta,
                                       std::uint64_t source_hash, std::size_t cap) {
  const Lattice lat = trim(input);
  const auto ngrams = collect_ngrams(lat, max_order, cap);
  const ForwardIndex index(lat);
  std::vector<double> posteriors(ngrams.size(), 0.0);
  const auto count = static_cast<std::ptrdiff_t>(ngrams.size());
#pragma omp parallel
  {
    std::vector<double> buffer;
#pragma omp for schedule(dynamic, 64)
    for (std::ptrdiff_t i = 0; i < count; ++i)
      posteriors[static_cast<std::size_t>(i)] = windowed_posterior(index, ngrams[static_cast<std::size_t>(i)], buffer);
  }
  return assemble(ngrams, posteriors, max_order, alpha, beta, source_hash);
}

PosteriorTable compute_posterior_table_serial(const Lattice& input, int max_order, double alpha, double beta,
                                              std::uint64_t source_hash, std::size_t cap) {
  const Lattice lat = trim(input);
  const auto ngrams = collect_ngrams(lat, max_order, cap);
  std::vector<double> posteriors;
  posteriors.reserve(ngrams.size());
  for (const auto& g : ngrams) posteriors.push_back(ngram_path_posterior(lat, g));
  return assemble(ngrams, posteriors, max_order, alpha, beta, source_hash);
}

}  // namespace lmbr
