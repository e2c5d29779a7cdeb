#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>

#include "lmbr/symbols.hpp"

namespace lmbr {

inline constexpr int kMaxOrder = 4;

/// Token n-gram of order 1..kMaxOrder stored inline.
class Ngram {
 public:
  Ngram() = default;
  explicit Ngram(std::span<const TokenId> tokens);
  Ngram(std::initializer_list<TokenId> tokens) : Ngram(std::span<const TokenId>(tokens.begin(), tokens.size())) {}

  int order() const { return order_; }
  TokenId operator[](int i) const { return tokens_[static_cast<std::size_t>(i)]; }
  std::span<const TokenId> tokens() const { return {tokens_.data(), static_cast<std::size_t>(order_)}; }
  TokenId back() const { return tokens_[static_cast<std::size_t>(order_ - 1)]; }

  /// This n-gram extended by `t`, dropping the oldest token when the
  /// result would exceed `max_len`.
  Ngram extended(TokenId t, int max_len) const;
  /// The last `n` tokens.
  Ngram suffix(int n) const;

  friend bool operator==(const Ngram& a, const Ngram& b) {
    return a.order_ == b.order_ && a.tokens_ == b.tokens_;
  }
  /// Orders by length first, then lexicographically by id.
  friend bool operator<(const Ngram& a, const Ngram& b) {
    if (a.order_ != b.order_) return a.order_ < b.order_;
    return a.tokens_ < b.tokens_;
  }

 private:
  std::array<TokenId, kMaxOrder> tokens_{};
  int order_ = 0;
};

struct NgramHash {
  std::size_t operator()(const Ngram& g) const {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ static_cast<std::uint64_t>(g.order());
    for (TokenId t : g.tokens()) {
      h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(t)) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

/// Number of (possibly overlapping) occurrences of `g` in `seq`.
std::size_t count_occurrences(std::span<const TokenId> seq, const Ngram& g);

}  // namespace lmbr
