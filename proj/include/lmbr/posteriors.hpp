#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lmbr/lattice.hpp"
#include "lmbr/ngram.hpp"
#include "lmbr/symbols.hpp"

namespace lmbr {

inline constexpr std::size_t kDefaultNgramCap = 10'000'000;
inline constexpr double kDefaultAlpha = 0.1;

/// Smoothed n-gram path posteriors extracted from one lattice. Immutable once
/// built; lookups of absent n-grams return exactly zero.
class PosteriorTable {
 public:
  PosteriorTable() = default;
  PosteriorTable(int max_order, double alpha, double beta, std::uint64_t source_hash = 0);

  double lookup(const Ngram& g) const;
  double lookup(std::span<const TokenId> tokens) const;
  bool contains(const Ngram& g) const { return entries_.count(g) != 0; }

  /// Throws DataError for values outside (0, 1] or orders above max_order.
  void set(const Ngram& g, double posterior);

  int max_order() const { return max_order_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  std::uint64_t source_hash() const { return source_hash_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  /// Largest stored value of the given order, 0 when none.
  double max_posterior(int order) const;
  /// Sorted tokens that have a unigram entry.
  std::vector<TokenId> unigram_tokens() const;
  /// Entries ordered by (order, token ids).
  std::vector<std::pair<Ngram, double>> sorted_entries() const;

 private:
  std::unordered_map<Ngram, double, NgramHash> entries_;
  std::array<double, kMaxOrder + 1> max_by_order_{};
  int max_order_ = kMaxOrder;
  double alpha_ = 0.0;
  double beta_ = 1.0;
  std::uint64_t source_hash_ = 0;
};

/// Every n-gram of order 1..max_order on at least one start-to-final path,
/// sorted. Found by propagating per-state sets of (max_order-1)-token
/// histories in topological order. Throws DataError when more than `cap`
/// n-grams (or histories) are produced.
std::vector<Ngram> collect_ngrams(const Lattice& lat, int max_order, std::size_t cap = kDefaultNgramCap);

/// Probability mass of paths containing `g` at least once. Runs a forward
/// pass over the product of the lattice and the failure automaton of `g`;
/// paths are absorbed at their first match. Divides by the total mass, so
/// any acyclic lattice is accepted.
double ngram_path_posterior(const Lattice& lat, const Ngram& g);

/// Oracle: enumerates paths (at most `max_paths`) and sums the probability
/// of those containing `g`.
double posterior_bruteforce(const Lattice& lat, const Ngram& g, std::size_t max_paths = 10'000);

/// (1 - alpha) * p + alpha * 0.5
double smooth_posterior(double p, double alpha);

/// Smoothed posteriors for every collected n-gram. The n-gram loop runs
/// under OpenMP.
PosteriorTable compute_posterior_table(const Lattice& lat, int max_order, double alpha,
                                       double beta = 1.0, std::uint64_t source_hash = 0,
                                       std::size_t cap = kDefaultNgramCap);

/// Serial reference: same contract, one dense ngram_path_posterior call per
/// n-gram.
PosteriorTable compute_posterior_table_serial(const Lattice& lat, int max_order, double alpha,
                                              double beta = 1.0, std::uint64_t source_hash = 0,
                                              std::size_t cap = kDefaultNgramCap);

/// TSV: `tok tok ...<TAB>posterior` with 9 decimals, after `# key=value`
/// header comments for alpha, beta, max_order and lattice hash.
void write_posterior_table(std::ostream& out, const PosteriorTable& table, const SymbolTable& symbols);
PosteriorTable read_posterior_table(std::istream& in, SymbolTable& symbols);

}  // namespace lmbr
