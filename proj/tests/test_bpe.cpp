#include <doctest.h>

#include <cmath>
#include <sstream>

#include "bpe_fuzz.hpp"
#include "lmbr/errors.hpp"
#include "lmbr/posteriors.hpp"

using namespace lmbr;
using V = std::vector<std::string>;

TEST_CASE("learn_bpe examples") {
  const auto m = learn_bpe({{"abab", 10}}, 1);
  REQUIRE(m.merges().size() == 1);
  CHECK(m.merges()[0] == MergePair{"a", "b"});
  CHECK(learn_bpe({{"abab", 10}}, 0).merges().empty());
  CHECK(learn_bpe({{"a", 3}, {"b", 5}}, 10).merges().empty());
  CHECK_THROWS_AS(learn_bpe({}, 3), DataError);
}

TEST_CASE("learn_bpe breaks ties by pair order") {
  // "xy" and "ab" are equally frequent; ("a","b") sorts first.
  const auto m = learn_bpe({{"xy", 2}, {"ab", 2}}, 1);
  CHECK(m.merges()[0] == MergePair{"a", "b"});
}

TEST_CASE("segment") {
  CHECK(BpeModel().segment("ab") == V{"a@@", "b"});
  CHECK(BpeModel(std::vector<MergePair>{{"a", "b"}}).segment("ab") == V{"ab"});
  CHECK(fixture::small_model().segment("abcab") == V{"abc@@", "ab"});
  CHECK(BpeModel().segment("x") == V{"x"});
  CHECK(utf8_chars("h\xc3\xa9") == V{"h", "\xc3\xa9"});
}

TEST_CASE("property: segment then join restores the word") {
  std::mt19937_64 rng(5);
  const auto m = learn_bpe({{"abcab", 4}, {"bca", 3}, {"cc", 2}}, 4);
  for (int i = 0; i < 500; ++i) {
    std::string w;
    const int n = 1 + static_cast<int>(rng() % 7);
    for (int k = 0; k < n; ++k) w += static_cast<char>('a' + rng() % 3);
    CHECK(join_subwords(m.segment(w)) == V{w});
  }
}

TEST_CASE("model file round trip") {
  const auto m = learn_bpe({{"abcab", 4}, {"bca", 3}}, 3);
  std::stringstream io;
  m.write(io);
  CHECK(BpeModel::read(io).merges() == m.merges());
}

TEST_CASE("convert_lattice examples") {
  SymbolTable s;
  const Lattice l1 = fixture::l1(s);
  const Lattice conv = convert_lattice(l1, BpeModel(), s);
  CHECK(conv == l1);

  SymbolTable t;
  Lattice single = read_lattice_string("0 1 ab 0\n1 0\n", t);
  Lattice sub = normalize_posterior(convert_lattice(single, BpeModel(), t));
  const auto paths = enumerate_paths(sub, 10);
  REQUIRE(paths.size() == 1);
  CHECK(t.strings(paths[0].tokens) == V{"a@@", "b"});
  CHECK(paths[0].prob == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("convert_lattice passes UNK and EOS through") {
  SymbolTable s;
  Lattice lat = read_lattice_string("0 1 <unk> 0.5\n1 2 ab 0\n2 0\n", s);
  const auto out = convert_lattice(lat, BpeModel(), s);
  const auto paths = enumerate_paths(normalize_posterior(out), 10);
  CHECK(s.strings(paths[0].tokens) == V{"<unk>", "a@@", "b"});
}

TEST_CASE("property: conversion preserves the path distribution") {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 100; ++i) {
    SymbolTable s;
    const Lattice word = fixture::random_word_lattice(rng, s);
    const auto model = (i % 2) ? BpeModel() : fixture::small_model();
    const Lattice sub = convert_lattice(word, model, s);
    const auto a = fixture::word_distribution(word, s, false);
    const auto b = fixture::word_distribution(sub, s, true);
    REQUIRE(a.size() == b.size());
    for (auto ia = a.begin(), ib = b.begin(); ia != a.end(); ++ia, ++ib) {
      CHECK(ia->first == ib->first);
      CHECK(std::abs(ia->second - ib->second) <= 1e-12);
    }
  }
}

TEST_CASE("property: subword posteriors match the path-sum oracle") {
  std::mt19937_64 rng(19);
  for (int i = 0; i < 40; ++i) {
    SymbolTable s;
    const Lattice sub = normalize_posterior(convert_lattice(fixture::random_word_lattice(rng, s), BpeModel(), s));
    for (const auto& g : collect_ngrams(sub, 4))
      CHECK(std::abs(ngram_path_posterior(sub, g) - posterior_bruteforce(sub, g, 1'000'000)) <= 1e-9);
  }
}

TEST_CASE("word unigram posterior equals the posterior of its subword sequence") {
  SymbolTable s;
  Lattice word = normalize_posterior(read_lattice_string("0 1 ab 0.2\n0 1 c 1.1\n1 2 ab 0.7\n1 2 ba 0.3\n2 0\n", s));
  Lattice sub = normalize_posterior(convert_lattice(word, BpeModel(), s));
  const TokenId ab = s.find("ab");
  const std::vector<TokenId> split{s.find("a@@"), s.find("b")};
  CHECK(ngram_path_posterior(sub, Ngram(split)) ==
        doctest::Approx(ngram_path_posterior(word, Ngram(std::vector<TokenId>{ab}))).epsilon(1e-12));
}

TEST_CASE("conversion is deterministic") {
  std::mt19937_64 r1(23), r2(23);
  SymbolTable s1, s2;
  const auto a = convert_lattice(fixture::random_word_lattice(r1, s1), fixture::small_model(), s1);
  const auto b = convert_lattice(fixture::random_word_lattice(r2, s2), fixture::small_model(), s2);
  CHECK(write_lattice_string(a, s1) == write_lattice_string(b, s2));
}
