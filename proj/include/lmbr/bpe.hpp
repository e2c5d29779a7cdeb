#pragma once

#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lmbr/lattice.hpp"
#include "lmbr/symbols.hpp"

namespace lmbr {

inline constexpr std::string_view kContinuation = "@@";

using MergePair = std::pair<std::string, std::string>;

/// Ordered list of symbol-pair merges. Segmentation starts from UTF-8
/// characters and repeatedly applies the earliest-ranked applicable merge;
/// every unit but the last of a word carries the `@@` suffix.
class BpeModel {
 public:
  BpeModel() = default;
  explicit BpeModel(std::vector<MergePair> merges);

  const std::vector<MergePair>& merges() const { return merges_; }
  std::vector<std::string> segment(std::string_view word) const;

  /// One `left right` merge per line, in application order.
  static BpeModel read(std::istream& in);
  void write(std::ostream& out) const;

 private:
  std::vector<MergePair> merges_;
  std::map<MergePair, std::size_t> rank_;
};

/// Greedy most-frequent-pair learning over a word frequency table; ties go
/// to the lexicographically smallest pair. Stops early when no pair is left.
BpeModel learn_bpe(const std::map<std::string, std::size_t>& word_counts, std::size_t num_merges);

/// Splits a word into UTF-8 characters.
std::vector<std::string> utf8_chars(std::string_view word);

/// Undoes segmentation: units ending in `@@` are glued to their successor.
std::vector<std::string> join_subwords(const std::vector<std::string>& units);

/// Replaces each word arc with a chain of subword arcs. The arc weight goes
/// on the first subword arc, zeros on the rest, so path weights are kept.
/// UNK and EOS pass through unsegmented. Subword tokens are interned into
/// `symbols`, which must also hold the word symbols.
Lattice convert_lattice(const Lattice& word_lattice, const BpeModel& model, SymbolTable& symbols);

}  // namespace lmbr
