#pragma once

#include <random>
#include <string>
#include <vector>

#include "lmbr/lattice.hpp"
#include "lmbr/lattice_io.hpp"
#include "lmbr/symbols.hpp"

namespace fixture {

inline const char* kL1 = "0 1 a 0.0\n1 2 b 0.5108\n1 2 c 0.9163\n2 0.0\n";

// Symbols a, b, c, d, e get ids 3..7 in a fresh table.
inline lmbr::SymbolTable letters(int n = 5) {
  lmbr::SymbolTable s;
  for (int i = 0; i < n; ++i) s.intern(std::string(1, static_cast<char>('a' + i)));
  return s;
}

inline lmbr::Lattice l1(lmbr::SymbolTable& s) { return lmbr::read_lattice_string(kL1, s); }

inline lmbr::TokenId tok(int i) { return static_cast<lmbr::TokenId>(3 + i); }

// Random acyclic lattice: arcs only go from lower to higher state ids, the
// last state is final and every state lies on a start-final path.
inline lmbr::Lattice random_lattice(std::mt19937_64& rng, int max_states = 8, int max_arcs = 12, int vocab = 3) {
  std::uniform_int_distribution<int> nstates(2, max_states);
  std::uniform_real_distribution<double> weight(0.0, 3.0);
  std::uniform_int_distribution<int> label(0, vocab - 1);
  const int n = nstates(rng);
  lmbr::Lattice lat;
  for (int i = 0; i < n; ++i) lat.add_state();
  lat.set_start(0);
  int arcs = 0;
  // A spine keeps every state connected.
  for (int i = 0; i + 1 < n; ++i, ++arcs) lat.add_arc(i, i + 1, tok(label(rng)), weight(rng));
  std::uniform_int_distribution<int> pick(0, n - 1);
  const int extra = std::uniform_int_distribution<int>(0, std::max(0, max_arcs - arcs))(rng);
  for (int k = 0; k < extra; ++k) {
    int a = pick(rng), b = pick(rng);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    lat.add_arc(a, b, tok(label(rng)), weight(rng));
  }
  lat.set_final(n - 1, weight(rng));
  if (n > 2 && rng() % 3 == 0) lat.set_final(static_cast<lmbr::StateId>(pick(rng) % (n - 1) + 1), weight(rng));
  return lat;
}

inline std::vector<lmbr::TokenId> random_sequence(std::mt19937_64& rng, int max_len, int vocab) {
  const int len = std::uniform_int_distribution<int>(0, max_len)(rng);
  std::vector<lmbr::TokenId> y;
  for (int i = 0; i < len; ++i) y.push_back(tok(std::uniform_int_distribution<int>(0, vocab - 1)(rng)));
  return y;
}

}  // namespace fixture
