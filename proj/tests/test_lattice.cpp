#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "fixtures.hpp"
#include "lmbr/errors.hpp"
#include "lmbr/lattice.hpp"
#include "lmbr/lattice_io.hpp"
#include "lmbr/nbest.hpp"

using namespace lmbr;

namespace {

std::map<std::string, double> path_map(const Lattice& lat, const SymbolTable& s) {
  std::map<std::string, double> m;
  for (const auto& p : enumerate_paths(lat, 10'000)) m[s.join(p.tokens)] += p.prob;
  return m;
}

std::string error_of(const std::string& text) {
  SymbolTable s;
  try {
    read_lattice_string(text, s);
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("symbol table reserves epsilon, unk and eos") {
  SymbolTable s;
  CHECK(s.symbol(kEpsilon) == "<eps>");
  CHECK(s.symbol(kUnk) == "<unk>");
  CHECK(s.symbol(kEos) == "</s>");
  CHECK(s.intern("a") == 3);
  CHECK(s.intern("a") == 3);
  CHECK(s.find("zz") == -1);
  std::stringstream io;
  s.write(io);
  auto back = SymbolTable::read(io);
  CHECK(back.frozen());
  CHECK(back.find("a") == 3);
  CHECK_THROWS_AS(back.intern("new"), DataError);
}

TEST_CASE("read L1") {
  SymbolTable s;
  auto lat = fixture::l1(s);
  CHECK(lat.num_states() == 3);
  CHECK(lat.arcs().size() == 3);
  CHECK(lat.is_final(2));
  CHECK(lat.start() == 0);
  CHECK(topological_order(lat) == std::vector<StateId>{0, 1, 2});
}

TEST_CASE("read errors") {
  CHECK(error_of("").find("no arcs") != std::string::npos);
  CHECK(error_of("0 1 a 0.0\n1 0 b 0.0\n0 0.0\n").find("cycle detected") != std::string::npos);
  CHECK(error_of("0 1 a 0.0\n1 x\n").find("line 2") != std::string::npos);
  CHECK(error_of("0 1 a 0.0\n1 2 b 0.0 extra\n2\n").find("line 2") != std::string::npos);
  CHECK(error_of("0 1 a 0.0\n").find("final") != std::string::npos);
  CHECK(error_of("0 1 a inf\n1 0\n") != "");

  SymbolTable frozen = fixture::letters(2);
  frozen.freeze();
  try {
    read_lattice_string("0 1 zebra 0.0\n1 0\n", frozen);
    FAIL("expected an error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("zebra") != std::string::npos);
  }
}

TEST_CASE("comments and defaults") {
  SymbolTable s;
  auto lat = read_lattice_string("# header\n0 1 a\n1 2 b 0.5 # tail\n2\n", s);
  CHECK(lat.arcs().size() == 2);
  CHECK(lat.final_weight(2) == 0.0);
}

TEST_CASE("topological order ties by id") {
  Lattice single;
  single.add_state();
  single.set_final(0);
  CHECK(topological_order(single) == std::vector<StateId>{0});

  SymbolTable s;
  auto diamond = read_lattice_string("0 2 a 0\n0 1 b 0\n1 3 a 0\n2 3 b 0\n3 0\n", s);
  CHECK(topological_order(diamond) == std::vector<StateId>{0, 1, 2, 3});
}

TEST_CASE("normalize_posterior examples") {
  SymbolTable s;
  auto two = normalize_posterior(read_lattice_string("0 1 a 1.0\n0 1 b 2.0\n1 0\n", s));
  auto m = path_map(two, s);
  CHECK(m["a"] == doctest::Approx(std::exp(-1.0) / (std::exp(-1.0) + std::exp(-2.0))).epsilon(1e-12));
  CHECK(m["a"] == doctest::Approx(0.7311).epsilon(1e-4));
  CHECK(m["b"] == doctest::Approx(0.2689).epsilon(1e-4));

  auto l1 = normalize_posterior(fixture::l1(s));
  auto p = path_map(l1, s);
  CHECK(p["a b"] == doctest::Approx(0.6).epsilon(1e-4));
  CHECK(p["a c"] == doctest::Approx(0.4).epsilon(1e-4));

  for (double beta : {0.3, 1.0, 4.0}) {
    auto eq = path_map(normalize_posterior(read_lattice_string("0 1 a 0.7\n0 1 b 0.7\n1 0\n", s), beta), s);
    CHECK(eq["a"] == doctest::Approx(0.5));
    CHECK(eq["b"] == doctest::Approx(0.5));
  }

  // beta scales log-odds.
  auto sharp = path_map(normalize_posterior(read_lattice_string("0 1 a 1.0\n0 1 b 2.0\n1 0\n", s), 2.0), s);
  CHECK(sharp["a"] / sharp["b"] == doctest::Approx(std::exp(2.0)));
}

TEST_CASE("normalize rejects disconnected lattices and trims dead states") {
  SymbolTable s;
  auto dead = read_lattice_string("0 1 a 0\n0 2 b 0\n2 3 c 0\n1 0\n", s);
  auto n = normalize_posterior(dead);
  CHECK(n.num_states() == 2);
  CHECK(count_paths(n) == 1.0);

  Lattice unreachable;
  unreachable.add_state();
  unreachable.add_state();
  unreachable.add_state();
  unreachable.add_arc(0, 1, 3, 0.0);
  unreachable.set_final(2);
  CHECK_THROWS_AS(normalize_posterior(unreachable), DataError);
  CHECK_THROWS_AS(normalize_posterior(fixture::l1(s), 0.0), DataError);
}

TEST_CASE("enumerate_paths") {
  SymbolTable s;
  auto p = path_map(normalize_posterior(fixture::l1(s)), s);
  CHECK(p.size() == 2);
  auto one = enumerate_paths(normalize_posterior(read_lattice_string("0 1 x 0.3\n1 2 y 0.2\n2 0\n", s)), 10);
  REQUIRE(one.size() == 1);
  CHECK(one[0].prob == doctest::Approx(1.0).epsilon(1e-12));
  auto four = enumerate_paths(
      normalize_posterior(read_lattice_string("0 1 a 0\n0 1 b 0\n1 2 c 0\n1 2 d 0\n2 0\n", s)), 10);
  REQUIRE(four.size() == 4);
  for (const auto& q : four) CHECK(q.prob == doctest::Approx(0.25));
  CHECK_THROWS_AS(enumerate_paths(normalize_posterior(fixture::l1(s)), 1), DataError);
}

TEST_CASE("property: normalized random lattices sum to one and normalization is idempotent") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 300; ++i) {
    auto lat = normalize_posterior(fixture::random_lattice(rng));
    double total = 0.0;
    const auto paths = enumerate_paths(lat, 100'000);
    for (const auto& p : paths) total += p.prob;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    const auto again = enumerate_paths(normalize_posterior(lat), 100'000);
    REQUIRE(again.size() == paths.size());
    for (std::size_t k = 0; k < paths.size(); ++k) {
      CHECK(again[k].tokens == paths[k].tokens);
      CHECK(std::abs(again[k].prob - paths[k].prob) <= 1e-12);
    }
  }
}

TEST_CASE("write_lattice") {
  SymbolTable s;
  auto l1 = fixture::l1(s);
  CHECK(read_lattice_string(write_lattice_string(l1, s), s) == l1);
  CHECK(format_weight(0.510825624) == "0.510826");
  CHECK(format_weight(-0.0) == "0.000000");

  Lattice no_final;
  no_final.add_state();
  no_final.add_state();
  no_final.add_arc(0, 1, 3, 0.0);
  std::ostringstream out;
  CHECK_THROWS_AS(write_lattice(out, no_final, s), DataError);
}

TEST_CASE("property: read(write(x)) is the identity on random lattices") {
  std::mt19937_64 rng(11);
  SymbolTable s = fixture::letters();
  for (int i = 0; i < 200; ++i) {
    auto lat = fixture::random_lattice(rng);
    // Round weights first: the text format keeps six decimals.
    auto text = write_lattice_string(lat, s);
    auto back = read_lattice_string(text, s);
    CHECK(write_lattice_string(back, s) == text);
    CHECK(read_lattice_string(write_lattice_string(back, s), s) == back);
  }
}

TEST_CASE("nbest_to_lattice") {
  SymbolTable s = fixture::letters();
  const TokenId a = s.find("a"), b = s.find("b"), c = s.find("c");
  {
    auto lat = nbest_to_lattice({{{a, b}, 0.51}, {{a, c}, 0.92}});
    const auto paths = enumerate_paths(lat, 10);
    std::map<std::vector<TokenId>, double> w;
    for (const auto& p : paths) w[p.tokens] = -std::log(p.prob);
    REQUIRE(w.size() == 2);
    CHECK(w[{a, b}] == doctest::Approx(0.51));
    CHECK(w[{a, c}] == doctest::Approx(0.92));
  }
  {
    auto lat = nbest_to_lattice({{{a, b, c}, 3.0}});
    CHECK(count_paths(lat) == 1.0);
    CHECK(lat.arcs().size() == 3);
  }
  {
    std::vector<std::string> warnings;
    auto lat = nbest_to_lattice({{{a, b}, 1.0}, {{a, b}, 2.0}}, &warnings);
    const auto paths = enumerate_paths(lat, 10);
    REQUIRE(paths.size() == 1);
    CHECK(-std::log(paths[0].prob) == doctest::Approx(1.0));
    CHECK(warnings.size() == 1);
  }
  CHECK_THROWS_AS(nbest_to_lattice({}), DataError);
  CHECK_THROWS_AS(nbest_to_lattice({{{a}, 1.0}, {{}, 2.0}}), DataError);
}

TEST_CASE("nbest_to_lattice shares suffixes") {
  SymbolTable s = fixture::letters();
  const TokenId a = s.find("a"), b = s.find("b"), c = s.find("c"), d = s.find("d");
  // Trie would need 6 arcs; both suffixes "c d" collapse.
  auto lat = nbest_to_lattice({{{a, c, d}, 1.0}, {{b, c, d}, 1.0}});
  CHECK(lat.arcs().size() == 4);
}

TEST_CASE("property: nbest_to_lattice recovers the hypothesis set and scores") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> score(0.0, 5.0);
  for (int it = 0; it < 200; ++it) {
    std::map<std::vector<TokenId>, double> want;
    std::vector<NbestEntry> entries;
    const int n = std::uniform_int_distribution<int>(1, 12)(rng);
    for (int k = 0; k < n; ++k) {
      auto y = fixture::random_sequence(rng, 5, 3);
      if (y.empty()) y.push_back(fixture::tok(0));
      const double sc = score(rng);
      entries.push_back({y, sc});
      auto [pos, fresh] = want.emplace(y, sc);
      if (!fresh) pos->second = std::min(pos->second, sc);
    }
    auto lat = nbest_to_lattice(entries);
    std::map<std::vector<TokenId>, double> got;
    for (const auto& p : enumerate_paths(lat, 10'000)) got[p.tokens] = -std::log(p.prob);
    REQUIRE(got.size() == want.size());
    for (const auto& [y, sc] : want) CHECK(got[y] == doctest::Approx(sc).epsilon(1e-9));
  }
}

TEST_CASE("read and write n-best files") {
  SymbolTable s;
  std::istringstream in("7 ||| a b ||| 0.5\n7 ||| a c ||| 1.5\n8 ||| b ||| 2\n");
  auto lists = read_nbest(in, s);
  REQUIRE(lists.size() == 2);
  CHECK(lists[0].id == "7");
  CHECK(lists[0].entries.size() == 2);
  CHECK(lists[1].entries[0].score == 2.0);
  std::ostringstream out;
  write_nbest(out, lists, s);
  std::istringstream again(out.str());
  auto back = read_nbest(again, s);
  CHECK(back[0].entries[1].tokens == lists[0].entries[1].tokens);

  std::istringstream bad("7 ||| a b\n");
  CHECK_THROWS_AS(read_nbest(bad, s), DataError);
}
