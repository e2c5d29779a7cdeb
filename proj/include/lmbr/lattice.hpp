#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <vector>

#include "lmbr/symbols.hpp"

namespace lmbr {

using StateId = std::int32_t;

inline constexpr double kInfWeight = std::numeric_limits<double>::infinity();

/// Weights are negative natural logs: lower is more probable.
struct Arc {
  StateId src = 0;
  StateId dst = 0;
  TokenId label = kEpsilon;
  double weight = 0.0;

  friend bool operator==(const Arc&, const Arc&) = default;
};

struct Path {
  std::vector<TokenId> tokens;
  double prob = 0.0;
};

/// Acyclic weighted acceptor over token ids. Built once, then read-only;
/// concurrent const access is safe.
class Lattice {
 public:
  Lattice() = default;

  StateId add_state();
  /// Grows the state set so that `id` exists.
  void ensure_state(StateId id);
  void add_arc(StateId src, StateId dst, TokenId label, double weight);
  void set_start(StateId s);
  void set_final(StateId s, double weight = 0.0);

  std::size_t num_states() const { return out_.size(); }
  StateId start() const { return start_; }
  const std::vector<Arc>& arcs() const { return arcs_; }
  const Arc& arc(std::size_t i) const { return arcs_[i]; }
  /// Indices into arcs() leaving `s`, in insertion order.
  std::span<const std::size_t> out_arcs(StateId s) const;

  bool is_final(StateId s) const { return finals_.count(s) != 0; }
  /// kInfWeight for non-final states.
  double final_weight(StateId s) const;
  const std::map<StateId, double>& finals() const { return finals_; }

  /// Sorted distinct arc labels.
  std::vector<TokenId> vocabulary() const;

  /// Structural equality: same states, start, finals and arc multiset.
  friend bool operator==(const Lattice& a, const Lattice& b);

 private:
  StateId start_ = 0;
  std::vector<Arc> arcs_;
  std::vector<std::vector<std::size_t>> out_;
  std::map<StateId, double> finals_;
};

/// Checks start/final presence, finite weights and acyclicity. Throws DataError.
void validate(const Lattice& lat);

/// Kahn's algorithm with ties broken by ascending state id. Throws DataError
/// naming a back-edge when the graph is cyclic.
std::vector<StateId> topological_order(const Lattice& lat);

/// Keeps only states on some start-to-final path, renumbered in ascending
/// order of their old ids. Throws DataError when no final is reachable.
Lattice trim(const Lattice& lat);

/// Scales all weights by `beta` and pushes them so that the path
/// probabilities exp(-weight) sum to one. The result is trimmed.
Lattice normalize_posterior(const Lattice& lat, double beta = 1.0);

/// Number of start-to-final paths, as a double to survive large lattices.
double count_paths(const Lattice& lat);

/// All start-to-final paths with probability exp(-path weight). Throws
/// DataError when there are more than `max_paths`.
std::vector<Path> enumerate_paths(const Lattice& lat, std::size_t max_paths);

/// -log(exp(-a) + exp(-b)), stable for infinities.
double neglog_add(double a, double b);

}  // namespace lmbr
