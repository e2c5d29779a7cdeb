#include <doctest.h>

#include "fixtures.hpp"
#include "lmbr/errors.hpp"
#include "lmbr/mbr.hpp"

using namespace lmbr;

namespace {

struct L1Table {
  SymbolTable s;
  PosteriorTable table;
  TokenId a, b, c;
  L1Table() {
    table = compute_posterior_table(normalize_posterior(fixture::l1(s)), 4, 0.0);
    a = s.find("a");
    b = s.find("b");
    c = s.find("c");
  }
  CombinationConfig cfg(double lambda = 1.0) const { return CombinationConfig{lambda, {}, &table}; }
};

PosteriorTable random_table(std::mt19937_64& rng, int vocab) {
  PosteriorTable t(4, 0.0, 1.0);
  std::uniform_real_distribution<double> p(0.01, 1.0);
  for (int i = 0; i < 20; ++i) {
    auto y = fixture::random_sequence(rng, 4, vocab);
    if (y.empty()) continue;
    t.set(Ngram(y), p(rng));
  }
  return t;
}

}  // namespace

TEST_CASE("evidence examples") {
  L1Table f;
  CHECK(evidence(std::vector<TokenId>{f.a, f.b}, f.cfg()) == doctest::Approx(4.2).epsilon(1e-4));
  CHECK(evidence(std::vector<TokenId>{f.a, f.c}, f.cfg()) == doctest::Approx(3.8).epsilon(1e-4));
  SymbolTable s = f.s;
  const TokenId z = s.intern("z");
  CHECK(evidence(std::vector<TokenId>{z, z}, f.cfg()) == doctest::Approx(2.0));
  // A trailing EOS is not part of the evidence.
  CHECK(evidence(std::vector<TokenId>{f.a, f.b, kEos}, f.cfg()) ==
        doctest::Approx(evidence(std::vector<TokenId>{f.a, f.b}, f.cfg())));
  // Null table counts length only.
  CHECK(evidence(std::vector<TokenId>{f.a, f.b, f.c}, CombinationConfig{}) == 3.0);
}

TEST_CASE("overlapping occurrences count separately") {
  PosteriorTable t(4, 0.0, 1.0);
  t.set(Ngram{3, 3}, 0.5);
  CombinationConfig c{1.0, {}, &t};
  c.weights.theta0 = 0.0;
  CHECK(evidence(std::vector<TokenId>{3, 3, 3}, c) == doctest::Approx(1.0));
}

TEST_CASE("stepwise_gain examples") {
  L1Table f;
  const std::vector<TokenId> none, a{f.a};
  CHECK(stepwise_gain(none, f.a, f.cfg()) == doctest::Approx(2.0));
  CHECK(stepwise_gain(a, f.b, f.cfg()) == doctest::Approx(2.2).epsilon(1e-4));
  CHECK(stepwise_gain(none, 99, f.cfg()) == doctest::Approx(1.0));
  CHECK(stepwise_gain(a, kEos, f.cfg()) == 0.0);
}

TEST_CASE("accumulate_evidence examples") {
  L1Table f;
  const std::vector<TokenId> ab{f.a, f.b};
  CHECK(accumulate_evidence(ab, f.cfg()) == doctest::Approx(4.2).epsilon(1e-4));
  CHECK(accumulate_evidence(std::vector<TokenId>{}, f.cfg()) == 0.0);
}

TEST_CASE("property: stepwise fold equals evidence") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> theta(-1.0, 2.0);
  for (int i = 0; i < 2000; ++i) {
    const int vocab = 1 + static_cast<int>(rng() % 5);
    auto table = random_table(rng, vocab);
    CombinationConfig c{1.0, {}, &table};
    c.weights.theta0 = theta(rng);
    for (auto& t : c.weights.theta) t = theta(rng);
    auto y = fixture::random_sequence(rng, 10, vocab);
    CHECK(std::abs(accumulate_evidence(y, c) - evidence(y, c)) <= 1e-12);
  }
}

TEST_CASE("combined_score") {
  L1Table f;
  const std::vector<TokenId> ab{f.a, f.b};
  CHECK(combined_score(ab, -4.1589, f.cfg()) == doctest::Approx(0.0411).epsilon(1e-3));
  CHECK(combined_score(ab, -4.1589, f.cfg(0.0)) == evidence(ab, f.cfg()));
  const CombinationConfig empty{1.0, {}, nullptr};
  CHECK(combined_score(ab, -3.0, empty) == doctest::Approx(-3.0 + 2.0));
}

TEST_CASE("lmbr_rescore") {
  L1Table f;
  std::vector<std::vector<TokenId>> paths{{f.a, f.c}, {f.a, f.b}};
  CHECK(lmbr_rescore(paths, f.cfg(0.0)).index == 1);
  CHECK(lmbr_rescore(paths, f.cfg(0.0)).evidence == doctest::Approx(4.2).epsilon(1e-4));
  CHECK(lmbr_rescore({{f.c}}, f.cfg(0.0)).index == 0);

  SymbolTable s;
  auto sym = compute_posterior_table(
      normalize_posterior(read_lattice_string("0 1 a 0\n0 1 b 0\n1 0\n", s)), 4, 0.0);
  CombinationConfig c{0.0, {}, &sym};
  CHECK(lmbr_rescore({{s.find("b")}, {s.find("a")}}, c).index == 0);
  CHECK_THROWS_AS(lmbr_rescore({}, c), DataError);
}

TEST_CASE("property: shifting one order's posteriors keeps the argmax over equal-length hypotheses") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> p(0.01, 0.7);
  for (int i = 0; i < 300; ++i) {
    // Every order-n n-gram over the alphabet is in the table, so adding c
    // to all of them shifts each hypothesis by c * (|y| - n + 1).
    const int order = 1 + static_cast<int>(rng() % 2);
    PosteriorTable table(4, 0.0, 1.0), shifted(4, 0.0, 1.0);
    for (int x = 0; x < 3; ++x)
      for (int y = 0; y < (order == 2 ? 3 : 1); ++y) {
        const Ngram g = order == 1 ? Ngram{fixture::tok(x)} : Ngram{fixture::tok(x), fixture::tok(y)};
        const double v = p(rng);
        table.set(g, v);
        shifted.set(g, v + 0.25);
      }
    for (const auto& [g, v] : random_table(rng, 3).sorted_entries())
      if (g.order() != order) {
        table.set(g, v);
        shifted.set(g, v);
      }
    std::vector<std::vector<TokenId>> hyps;
    const int len = 2 + static_cast<int>(rng() % 3);
    for (int k = 0; k < 6; ++k) {
      std::vector<TokenId> y;
      for (int j = 0; j < len; ++j) y.push_back(fixture::tok(static_cast<int>(rng() % 3)));
      hyps.push_back(y);
    }
    CombinationConfig base{0.0, {}, &table};
    CombinationConfig moved{0.0, {}, &shifted};
    const auto pick = lmbr_rescore(hyps, base).index;
    double best = -1e300;
    for (const auto& y : hyps) best = std::max(best, evidence(y, moved));
    CHECK(evidence(hyps[pick], moved) >= best - 1e-9);
    CHECK(evidence(hyps[pick], moved) - evidence(hyps[pick], base) ==
          doctest::Approx(0.25 * (len - order + 1)));
  }
}

TEST_CASE("property: raising a posterior never lowers evidence of a hypothesis containing it") {
  std::mt19937_64 rng(29);
  for (int i = 0; i < 300; ++i) {
    auto table = random_table(rng, 3);
    auto y = fixture::random_sequence(rng, 6, 3);
    if (y.empty()) continue;
    const std::size_t pos = rng() % y.size();
    const std::size_t n = 1 + rng() % std::min<std::size_t>(4, y.size() - pos);
    const Ngram g(std::span<const TokenId>(y.data() + pos, n));
    CombinationConfig c{0.0, {}, &table};
    const double before = evidence(y, c);
    PosteriorTable raised = table;
    raised.set(g, std::min(1.0, table.lookup(g) + 0.2));
    CombinationConfig r{0.0, {}, &raised};
    CHECK(evidence(y, r) >= before - 1e-12);
  }
}
