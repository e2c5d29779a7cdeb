#include <doctest.h>

#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "lmbr/errors.hpp"
#include "lmbr/ngram.hpp"
#include "lmbr/posteriors.hpp"
#include "lmbr/synth.hpp"
#include "lmbr/nbest.hpp"

using namespace lmbr;

namespace {

// Independent oracle for collect_ngrams: every n-gram of every path.
std::set<Ngram> ngrams_by_enumeration(const Lattice& lat, int max_order) {
  std::set<Ngram> out;
  for (const auto& p : enumerate_paths(lat, 100'000))
    for (std::size_t i = 0; i < p.tokens.size(); ++i)
      for (int n = 1; n <= max_order && i + static_cast<std::size_t>(n) <= p.tokens.size(); ++n)
        out.insert(Ngram(std::span<const TokenId>(p.tokens.data() + i, static_cast<std::size_t>(n))));
  return out;
}

}  // namespace

TEST_CASE("collect_ngrams examples") {
  SymbolTable s;
  auto l1 = normalize_posterior(fixture::l1(s));
  const TokenId a = s.find("a"), b = s.find("b"), c = s.find("c");
  auto two = collect_ngrams(l1, 2);
  CHECK(two.size() == 5);
  CHECK(std::set<Ngram>(two.begin(), two.end()) == std::set<Ngram>{{a}, {b}, {c}, {a, b}, {a, c}});
  CHECK(collect_ngrams(l1, 1).size() == 3);

  auto xy = normalize_posterior(read_lattice_string("0 1 x 0\n1 2 y 0\n2 0\n", s));
  CHECK(collect_ngrams(xy, 4).size() == 3);
  CHECK_THROWS_AS(collect_ngrams(l1, 2, 4), DataError);
  CHECK_THROWS_AS(collect_ngrams(l1, 5), DataError);
}

TEST_CASE("property: collect_ngrams equals the n-grams of enumerated paths") {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 200; ++i) {
    auto lat = normalize_posterior(fixture::random_lattice(rng));
    const int order = 1 + static_cast<int>(rng() % 4);
    auto got = collect_ngrams(lat, order);
    CHECK(std::set<Ngram>(got.begin(), got.end()) == ngrams_by_enumeration(lat, order));
  }
}

TEST_CASE("ngram_path_posterior examples") {
  SymbolTable s;
  auto l1 = normalize_posterior(fixture::l1(s));
  const TokenId a = s.find("a"), b = s.find("b"), c = s.find("c");
  CHECK(ngram_path_posterior(l1, {a}) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(ngram_path_posterior(l1, {a, b}) == doctest::Approx(0.6).epsilon(1e-4));
  CHECK(ngram_path_posterior(l1, {b, c}) == 0.0);
  CHECK(posterior_bruteforce(l1, {c}) == doctest::Approx(0.4).epsilon(1e-4));

  auto diamond = normalize_posterior(read_lattice_string("0 1 a 0\n1 2 b 0\n1 2 c 0\n2 0\n", s));
  CHECK(posterior_bruteforce(diamond, {a}) == doctest::Approx(1.0));
  CHECK(posterior_bruteforce(diamond, {b}) == doctest::Approx(0.5));

  // Repeats on one path count once.
  auto rep = normalize_posterior(read_lattice_string("0 1 a 0\n1 2 a 0\n2 3 a 0\n0 3 b 0\n3 0\n", s));
  CHECK(ngram_path_posterior(rep, {a, a}) == doctest::Approx(0.5));
}

TEST_CASE("property: forward posterior matches brute force on random lattices") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 250; ++i) {
    auto lat = normalize_posterior(fixture::random_lattice(rng));
    for (const auto& g : collect_ngrams(lat, 4)) {
      const double fast = ngram_path_posterior(lat, g);
      const double slow = posterior_bruteforce(lat, g, 100'000);
      CHECK(std::abs(fast - slow) <= 1e-9);
    }
  }
}

TEST_CASE("property: posterior bounds and containment") {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 150; ++i) {
    auto lat = normalize_posterior(fixture::random_lattice(rng));
    const auto paths = enumerate_paths(lat, 100'000);
    for (const auto& g : collect_ngrams(lat, 4)) {
      const double p = ngram_path_posterior(lat, g);
      CHECK(p >= 0.0);
      CHECK(p <= 1.0 + 1e-12);
      if (g.order() > 1) {
        CHECK(ngram_path_posterior(lat, g.suffix(g.order() - 1)) >= p - 1e-12);
        const std::vector<TokenId> toks(g.tokens().begin(), g.tokens().end() - 1);
        CHECK(ngram_path_posterior(lat, Ngram(toks)) >= p - 1e-12);
      }
      bool everywhere = true;
      for (const auto& path : paths) everywhere = everywhere && count_occurrences(path.tokens, g) > 0;
      if (everywhere) CHECK(std::abs(p - 1.0) <= 1e-9);
    }
  }
}

TEST_CASE("smooth_posterior") {
  CHECK(smooth_posterior(0.6, 0.0) == doctest::Approx(0.6));
  CHECK(smooth_posterior(0.6, 0.2) == doctest::Approx(0.58));
  CHECK(smooth_posterior(0.0, 0.2) == doctest::Approx(0.10));
  for (double p : {0.0, 0.3, 1.0}) CHECK(smooth_posterior(p, 1.0) == doctest::Approx(0.5));
}

TEST_CASE("compute_posterior_table examples") {
  SymbolTable s;
  auto l1 = normalize_posterior(fixture::l1(s));
  const TokenId a = s.find("a"), b = s.find("b"), c = s.find("c");
  auto t0 = compute_posterior_table(l1, 2, 0.0);
  CHECK(t0.size() == 5);
  CHECK(t0.lookup({a}) == doctest::Approx(1.0));
  CHECK(t0.lookup({b}) == doctest::Approx(0.6).epsilon(1e-4));
  CHECK(t0.lookup({c}) == doctest::Approx(0.4).epsilon(1e-4));
  CHECK(t0.lookup({a, b}) == doctest::Approx(0.6).epsilon(1e-4));
  CHECK(t0.lookup({a, c}) == doctest::Approx(0.4).epsilon(1e-4));
  CHECK(t0.lookup({b, c}) == 0.0);

  auto t2 = compute_posterior_table(l1, 2, 0.2);
  CHECK(t2.lookup({a}) == doctest::Approx(0.9));
  CHECK(t2.lookup({b}) == doctest::Approx(0.58).epsilon(1e-4));
  CHECK(t2.lookup({c}) == doctest::Approx(0.42).epsilon(1e-4));
  CHECK(t2.lookup({a, b}) == doctest::Approx(0.58).epsilon(1e-4));
  CHECK(t2.lookup({a, c}) == doctest::Approx(0.42).epsilon(1e-4));
  CHECK(t2.lookup({c, c}) == 0.0);

  auto single = compute_posterior_table(normalize_posterior(read_lattice_string("0 1 x 0.4\n1 2 y 1\n2 0\n", s)), 4, 0.0);
  for (const auto& [g, p] : single.sorted_entries()) CHECK(p == doctest::Approx(1.0));
  CHECK(single.unigram_tokens() == std::vector<TokenId>{s.find("x"), s.find("y")});
}

TEST_CASE("property: OpenMP table equals the serial reference") {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 100; ++i) {
    auto lat = normalize_posterior(fixture::random_lattice(rng, 8, 14, 4));
    auto par = compute_posterior_table(lat, 4, 0.1);
    auto ser = compute_posterior_table_serial(lat, 4, 0.1);
    REQUIRE(par.size() == ser.size());
    for (const auto& [g, p] : ser.sorted_entries()) CHECK(std::abs(par.lookup(g) - p) <= 1e-12);
  }
  // A large n-best lattice exercises the windowed kernel across threads.
  SynthConfig cfg;
  cfg.size = 2;
  cfg.nbest_size = 300;
  cfg.lm_corpus_size = 1;
  const auto task = synth_generate(cfg);
  for (const auto& list : task.nbest) {
    auto lat = normalize_posterior(nbest_to_lattice(list));
    auto par = compute_posterior_table(lat, 4, 0.1);
    auto ser = compute_posterior_table_serial(lat, 4, 0.1);
    REQUIRE(par.size() == ser.size());
    for (const auto& [g, p] : ser.sorted_entries()) CHECK(std::abs(par.lookup(g) - p) <= 1e-12);
  }
}

TEST_CASE("posterior table rejects bad values") {
  PosteriorTable t(2, 0.0, 1.0);
  CHECK_THROWS_AS(t.set(Ngram{3}, 0.0), DataError);
  CHECK_THROWS_AS(t.set(Ngram{3}, 1.5), DataError);
  CHECK_THROWS_AS(t.set(Ngram{3, 4, 5}, 0.5), DataError);
  t.set(Ngram{3}, 0.5);
  CHECK(t.lookup(Ngram{3}) == 0.5);
  CHECK(t.lookup(Ngram{4}) == 0.0);
}

TEST_CASE("posterior table file round trip") {
  SymbolTable s;
  auto raw = fixture::l1(s);
  auto table = compute_posterior_table(normalize_posterior(raw), 4, 0.1, 1.0, lattice_hash(raw, s));
  std::stringstream io;
  write_posterior_table(io, table, s);
  const std::string text = io.str();
  CHECK(text.find("# alpha=0.1") != std::string::npos);
  CHECK(text.find("a b\t0.590") != std::string::npos);
  auto back = read_posterior_table(io, s);
  CHECK(back.size() == table.size());
  CHECK(back.alpha() == doctest::Approx(0.1));
  CHECK(back.source_hash() == table.source_hash());
  for (const auto& [g, p] : table.sorted_entries()) CHECK(back.lookup(g) == doctest::Approx(p).epsilon(1e-9));

  std::istringstream bad("a b\tnope\n");
  CHECK_THROWS_AS(read_posterior_table(bad, s), DataError);
}
