#pragma once

#include <map>
#include <random>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "lmbr/bpe.hpp"
#include "lmbr/lattice.hpp"
#include "lmbr/symbols.hpp"

namespace fixture {

inline const std::vector<std::string> kWords{"ab", "abc", "ba", "c", "cab", "bb", "aab"};

// Random lattice whose labels are multi-character words.
inline lmbr::Lattice random_word_lattice(std::mt19937_64& rng, lmbr::SymbolTable& s) {
  std::vector<lmbr::TokenId> ids;
  for (const auto& w : kWords) ids.push_back(s.intern(w));
  lmbr::Lattice raw = random_lattice(rng, 6, 10, static_cast<int>(kWords.size()));
  lmbr::Lattice out;
  for (std::size_t i = 0; i < raw.num_states(); ++i) out.add_state();
  out.set_start(raw.start());
  for (const auto& [st, w] : raw.finals()) out.set_final(st, w);
  for (const auto& a : raw.arcs()) out.add_arc(a.src, a.dst, ids[static_cast<std::size_t>(a.label - tok(0))], a.weight);
  return out;
}

// Path distribution keyed by the space-joined word sequence.
inline std::map<std::string, double> word_distribution(const lmbr::Lattice& lat, const lmbr::SymbolTable& s,
                                                       bool join) {
  std::map<std::string, double> out;
  for (const auto& p : lmbr::enumerate_paths(lmbr::normalize_posterior(lat), 1'000'000)) {
    auto words = s.strings(p.tokens);
    if (join) words = lmbr::join_subwords(words);
    std::string key;
    for (const auto& w : words) key += w + " ";
    out[key] += p.prob;
  }
  return out;
}

inline lmbr::BpeModel small_model() { return lmbr::BpeModel(std::vector<lmbr::MergePair>{{"a", "b"}, {"ab", "c"}}); }

}  // namespace fixture
