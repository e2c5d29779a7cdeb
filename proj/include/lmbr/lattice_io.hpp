#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

#include "lmbr/lattice.hpp"
#include "lmbr/symbols.hpp"

namespace lmbr {

/// Parses the arc-list text format:
///   src dst token [weight]   arc (weight defaults to 0)
///   state [weight]           final state
/// Blank lines and lines starting with '#' are skipped. The start state is
/// the first state mentioned. Unknown tokens are interned unless `symbols`
/// is frozen. Throws DataError with the offending line number.
Lattice read_lattice(std::istream& in, SymbolTable& symbols);
Lattice read_lattice_string(std::string_view text, SymbolTable& symbols);
Lattice read_lattice_file(const std::string& path, SymbolTable& symbols);

/// Writes the same format with weights in fixed 6-decimal notation.
void write_lattice(std::ostream& out, const Lattice& lat, const SymbolTable& symbols);
std::string write_lattice_string(const Lattice& lat, const SymbolTable& symbols);

/// "%.6f" without a negative zero.
std::string format_weight(double w);

/// 64-bit FNV-1a over the written form; identifies the source of a table.
std::uint64_t lattice_hash(const Lattice& lat, const SymbolTable& symbols);

}  // namespace lmbr
