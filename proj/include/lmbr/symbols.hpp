#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace lmbr {

using TokenId = std::int32_t;

inline constexpr TokenId kEpsilon = 0;
inline constexpr TokenId kUnk = 1;
inline constexpr TokenId kEos = 2;

inline constexpr std::string_view kEpsilonSymbol = "<eps>";
inline constexpr std::string_view kUnkSymbol = "<unk>";
inline constexpr std::string_view kEosSymbol = "</s>";

/// Bijection between token strings and dense integer ids. Ids 0..2 are
/// reserved for epsilon, UNK and EOS.
class SymbolTable {
 public:
  SymbolTable();

  /// Returns the id of `token`, adding it if absent. Throws DataError when
  /// the table is frozen and the token is unknown.
  TokenId intern(std::string_view token);
  /// Returns -1 when absent.
  TokenId find(std::string_view token) const;
  const std::string& symbol(TokenId id) const;

  std::size_t size() const { return symbols_.size(); }
  bool frozen() const { return frozen_; }
  void freeze() { frozen_ = true; }

  std::vector<TokenId> intern_all(const std::vector<std::string>& tokens);
  std::vector<std::string> strings(const std::vector<TokenId>& ids) const;
  std::string join(const std::vector<TokenId>& ids) const;

  /// Reads `token<TAB>id` lines. Ids must be dense and agree with the
  /// reserved ids; the result is frozen.
  static SymbolTable read(std::istream& in);
  void write(std::ostream& out) const;

 private:
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, TokenId> ids_;
  bool frozen_ = false;
};

/// Splits on ASCII whitespace.
std::vector<std::string> split_tokens(std::string_view text);

}  // namespace lmbr
