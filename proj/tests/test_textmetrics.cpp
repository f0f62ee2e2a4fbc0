#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "slt/error.hpp"
#include "slt/textmetrics.hpp"

using namespace slt;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected slt::Error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("count_syllables") {
  const auto en = SyllableRule::for_language("en");
  const auto cs = SyllableRule::for_language("cs");
  const auto de = SyllableRule::for_language("de");
  CHECK(count_syllables("a", en) == 1);
  CHECK(count_syllables("president", en) == 3);
  CHECK(count_syllables("make", en) == 1);
  CHECK(count_syllables("the", en) == 1);
  CHECK(count_syllables("table", en) == 2);
  CHECK(count_syllables("vlk", cs) == 1);
  CHECK(count_syllables("krk", cs) == 1);
  CHECK(count_syllables("Brno", cs) == 2);
  CHECK(count_syllables("řeč", cs) == 1);
  CHECK(count_syllables("dobrý", cs) == 2);
  CHECK(count_syllables("Übersetzung", de) == 4);
  CHECK(count_syllables(",", en) == 0);
}

TEST_CASE("syllable counts match vowel clusters on ASCII words without special rules") {
  auto rng = oracle::rng(2);
  const std::string letters = "bcdfgaeioumnpst";
  std::uniform_int_distribution<std::size_t> pick(0, letters.size() - 1), len(1, 9);
  const auto de = SyllableRule::for_language("de");
  for (int trial = 0; trial < 500; ++trial) {
    std::string w;
    for (std::size_t i = len(rng); i > 0; --i) w += letters[pick(rng)];
    CHECK(count_syllables(w, de) == oracle::ascii_vowel_clusters(w, "aeiouy"));
  }
}

TEST_CASE("document syllables are the sum over words") {
  const auto cs = SyllableRule::for_language("cs");
  const std::vector<std::string> words{"dobrý", "den", "vlk", "a", "krtek"};
  std::size_t sum = 0;
  for (const auto& w : words) sum += count_syllables(w, cs);
  CHECK(count_syllables(words, cs) == sum);
}

TEST_CASE("compression") {
  const std::vector<std::string> x{"the", "president", "spoke"};
  const auto same = compression(x, "en", x, "en");
  CHECK(same.syllable_ratio == 1.0);
  CHECK(same.char_ratio == 1.0);

  const std::vector<std::string> ten{"a", "a", "a", "a", "a", "a", "a", "a", "a", "a"};
  const std::vector<std::string> five{"a", "a", "a", "a", "a"};
  CHECK(compression(ten, "en", five, "en").syllable_ratio == 0.5);

  const std::vector<std::string> nothing{",", "."};
  CHECK(code_of([&] { compression(nothing, "en", x, "en"); }) == ErrorCode::ZeroSource);
}

TEST_CASE("compression_report") {
  const auto r = compression_report({{"a", {1.0, 1.2}}, {"b", {1.4, 0.8}}});
  CHECK(r.syllables.mean == doctest::Approx(1.2));
  CHECK(r.syllables.std == doctest::Approx(0.2));
  CHECK(r.characters.mean == doctest::Approx(1.0));
  CHECK(r.syllables.n == 2);
}

TEST_CASE("build_rank_table") {
  const std::vector<std::string> aab{"a", "a", "b"};
  const auto t = build_rank_table(aab);
  CHECK(*t.rank("a") == 1);
  CHECK(*t.rank("b") == 2);
  CHECK_FALSE(t.rank("c"));
  const std::vector<std::string> ab{"b", "a"};
  CHECK(*build_rank_table(ab).rank("a") == 1);
  const std::vector<std::string> punct{"a", ",", ",", "."};
  CHECK(build_rank_table(punct).size() == 1);
  CHECK_THROWS_AS(build_rank_table(std::vector<std::string>{}), Error);
}

TEST_CASE("rank table matches a sort-by-count oracle on a Zipf corpus") {
  auto rng = oracle::rng(100);
  std::vector<double> weights;
  for (int r = 1; r <= 30; ++r) weights.push_back(1.0 / r);
  std::discrete_distribution<int> zipf(weights.begin(), weights.end());
  std::vector<std::string> corpus;
  for (int i = 0; i < 100; ++i) corpus.push_back("w" + std::to_string(zipf(rng)));
  const auto table = build_rank_table(corpus);

  std::map<std::string, int> counts;
  for (const auto& w : corpus) ++counts[w];
  std::vector<std::pair<std::string, int>> order(counts.begin(), counts.end());
  std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  REQUIRE(table.size() == order.size());
  std::vector<std::size_t> ranks;
  for (std::size_t i = 0; i < order.size(); ++i) {
    CHECK(*table.rank(order[i].first) == i + 1);
    ranks.push_back(*table.rank(order[i].first));
  }
  for (const auto& [w1, c1] : counts)
    for (const auto& [w2, c2] : counts)
      if (c1 > c2) CHECK(*table.rank(w1) < *table.rank(w2));
  std::sort(ranks.begin(), ranks.end());
  for (std::size_t i = 0; i < ranks.size(); ++i) CHECK(ranks[i] == i + 1);
}

TEST_CASE("rank table TSV round trip and validation") {
  const RankTable t({"the", "a", "of"});
  const auto back = RankTable::from_tsv(t.to_tsv());
  CHECK(back.words() == t.words());
  CHECK_THROWS_AS(RankTable::from_tsv("a\t1\nb\t3\n"), Error);
  CHECK_THROWS_AS(RankTable::from_tsv("a\t1\na\t2\n"), Error);
}

TEST_CASE("log_rank_stats") {
  const RankTable table([] {
    std::vector<std::string> w;
    for (int i = 1; i <= 100; ++i) w.push_back("w" + std::to_string(i));
    return w;
  }());
  SUBCASE("rank 1 gives zero") {
    const std::vector<std::string> text{"w1"};
    const auto r = log_rank_stats(text, table);
    CHECK(r.mean == 0.0);
    CHECK(r.mean_defined);
  }
  SUBCASE("ranks 1 and 100 in base 10") {
    const std::vector<std::string> text{"w1", "w100"};
    ComplexityOptions opt;
    opt.log_base = 10.0;
    const auto r = log_rank_stats(text, table, opt);
    CHECK(r.mean == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.std == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.log_base == "10");
  }
  SUBCASE("natural log of ranks 1 and 7") {
    const std::vector<std::string> text{"w1", "w7"};
    CHECK(log_rank_stats(text, table).mean == doctest::Approx(std::log(7.0) / 2));
  }
  SUBCASE("OOV excluded but counted; punctuation stripped") {
    const std::vector<std::string> text{"w1", "zzz", ",", "w1"};
    const auto r = log_rank_stats(text, table);
    CHECK(r.sample_size == 2);
    CHECK(r.oov == 1);
    CHECK(r.oov_proportion == doctest::Approx(1.0 / 3));
  }
  SUBCASE("OOV ranked V+1") {
    const std::vector<std::string> text{"zzz"};
    ComplexityOptions opt;
    opt.oov = OovPolicy::rank_v_plus_one;
    CHECK(log_rank_stats(text, table, opt).mean == doctest::Approx(std::log(101.0)));
  }
  SUBCASE("all OOV") {
    const std::vector<std::string> text{"x", "y"};
    const auto r = log_rank_stats(text, table);
    CHECK_FALSE(r.mean_defined);
    CHECK(r.oov_proportion == 1.0);
  }
}

TEST_CASE("two_sample_z") {
  const auto r = two_sample_z({1, 1, 100}, {0, 1, 100});
  CHECK(std::abs(r.z - 7.0711) <= 1e-4);
  CHECK(r.p < 1e-11);
  const auto eq = two_sample_z({3, 1, 10}, {3, 2, 20});
  CHECK(eq.z == 0.0);
  CHECK(eq.p == 1.0);
  const auto table4 = two_sample_z({6.42, 2.89, 32488}, {6.16, 2.85, 32703});
  CHECK(table4.z == doctest::Approx((6.42 - 6.16) / std::sqrt(2.89 * 2.89 / 32488 + 2.85 * 2.85 / 32703)));
  CHECK(table4.p < 0.01);
  CHECK(two_sample_z({2, 0, 5}, {2, 0, 5}).p == 1.0);
  CHECK(code_of([] { two_sample_z({2, 0, 5}, {3, 0, 5}); }) == ErrorCode::DegenerateVariance);
  CHECK(code_of([] { two_sample_z({2, 1, 1}, {3, 1, 5}); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { two_sample_z({2, -1, 5}, {3, 1, 5}); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("two_sample_z is antisymmetric") {
  auto rng = oracle::rng(55);
  std::uniform_real_distribution<double> mean(-10, 10), sd(0.1, 5);
  std::uniform_int_distribution<std::size_t> n(2, 1000);
  for (int trial = 0; trial < 100; ++trial) {
    const SampleSummary a{mean(rng), sd(rng), n(rng)}, b{mean(rng), sd(rng), n(rng)};
    const auto ab = two_sample_z(a, b), ba = two_sample_z(b, a);
    CHECK(ab.z == -ba.z);
    CHECK(ab.p == ba.p);
  }
}

TEST_CASE("normal_cdf") {
  CHECK(normal_cdf(0.0) == 0.5);
  CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
}
