#include "lmbr/symbols.hpp"

#include <cctype>

#include "lmbr/errors.hpp"

namespace lmbr {

SymbolTable::SymbolTable() {
  for (auto s : {kEpsilonSymbol, kUnkSymbol, kEosSymbol}) {
    ids_.emplace(std::string(s), static_cast<TokenId>(symbols_.size()));
    symbols_.emplace_back(s);
  }
}

TokenId SymbolTable::intern(std::string_view token) {
  if (auto it = ids_.find(std::string(token)); it != ids_.end()) return it->second;
  if (frozen_) throw DataError("unknown symbol '" + std::string(token) + "'");
  const auto id = static_cast<TokenId>(symbols_.size());
  symbols_.emplace_back(token);
  ids_.emplace(symbols_.back(), id);
  return id;
}

TokenId SymbolTable::find(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? -1 : it->second;
}

const std::string& SymbolTable::symbol(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= symbols_.size())
    throw DataError("symbol id " + std::to_string(id) + " out of range");
  return symbols_[static_cast<std::size_t>(id)];
}

std::vector<TokenId> SymbolTable::intern_all(const std::vector<std::string>& tokens) {
  std::vector<TokenId> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(intern(t));
  return ids;
}

std::vector<std::string> SymbolTable::strings(const std::vector<TokenId>& ids) const {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (auto id : ids) out.push_back(symbol(id));
  return out;
}

std::string SymbolTable::join(const std::vector<TokenId>& ids) const {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ' ';
    out += symbol(ids[i]);
  }
  return out;
}

SymbolTable SymbolTable::read(std::istream& in) {
  SymbolTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw DataError("symbol table line " + std::to_string(lineno) + ": expected token<TAB>id");
    std::string token = line.substr(0, tab);
    long id = 0;
    try {
      id = std::stol(line.substr(tab + 1));
    } catch (const std::exception&) {
      throw DataError("symbol table line " + std::to_string(lineno) + ": bad id");
    }
    auto existing = table.find(token);
    if (existing >= 0) {
      if (existing != id)
        throw DataError("symbol table line " + std::to_string(lineno) + ": '" + token +
                        "' conflicts with reserved id " + std::to_string(existing));
      continue;
    }
    if (id != static_cast<long>(table.size()))
      throw DataError("symbol table line " + std::to_string(lineno) + ": ids must be dense");
    table.intern(token);
  }
  table.freeze();
  return table;
}

void SymbolTable::write(std::ostream& out) const {
  for (std::size_t i = 0; i < symbols_.size(); ++i) out << symbols_[i] << '\t' << i << '\n';
}

std::vector<std::string> split_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace lmbr
