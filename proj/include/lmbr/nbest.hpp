#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "lmbr/lattice.hpp"
#include "lmbr/symbols.hpp"

namespace lmbr {

struct NbestEntry {
  std::vector<TokenId> tokens;
  double score = 0.0;  // negative-log model score
};

/// All entries sharing one sentence id, in file order.
struct NbestList {
  std::string id;
  std::vector<NbestEntry> entries;
};

/// Reads `id ||| token sequence ||| score` lines; consecutive or not, entries
/// are grouped by id in order of first appearance.
std::vector<NbestList> read_nbest(std::istream& in, SymbolTable& symbols);
void write_nbest(std::ostream& out, const std::vector<NbestList>& lists, const SymbolTable& symbols);

/// Compiles an n-best list into a deterministic acceptor: a prefix trie with
/// weights pushed towards the start, then minimised by merging states with
/// identical weighted suffix sets. Path weights equal the entry scores.
/// Duplicate hypotheses keep their best (lowest) score; one warning per
/// duplicate is appended to `warnings` when given. Empty lists or empty
/// hypotheses throw DataError.
Lattice nbest_to_lattice(const std::vector<NbestEntry>& entries, std::vector<std::string>* warnings = nullptr);

/// Splits on the literal " ||| " separator, trimming surrounding blanks.
std::vector<std::string> split_fields(const std::string& line);

}  // namespace lmbr
