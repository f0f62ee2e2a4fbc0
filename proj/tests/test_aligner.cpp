#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "slt/aligner.hpp"
#include "slt/error.hpp"

using namespace slt;

namespace {

ParallelCorpus make_corpus(const std::vector<std::pair<std::string, std::string>>& lines) {
  ParallelCorpus c;
  for (const auto& [s, t] : lines) c.push_back({tokenize(s), tokenize(t)});
  return c;
}

std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>> as_pairs(const ParallelCorpus& c) {
  std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>> out;
  for (const auto& p : c) out.emplace_back(p.source, p.target);
  return out;
}

ParallelCorpus random_corpus(std::mt19937_64& rng, std::size_t pairs, int vocab) {
  std::uniform_int_distribution<int> len(1, 6);
  std::uniform_int_distribution<int> word(0, vocab - 1);
  ParallelCorpus c;
  for (std::size_t p = 0; p < pairs; ++p) {
    SentencePair sp;
    for (int i = len(rng); i > 0; --i) sp.source.push_back("s" + std::to_string(word(rng)));
    for (int i = len(rng); i > 0; --i) sp.target.push_back("t" + std::to_string(word(rng)));
    c.push_back(sp);
  }
  return c;
}

TimedTranscript timed(const std::string& doc, std::vector<double> starts) {
  TimedTranscript t;
  t.doc_id = doc;
  for (std::size_t i = 0; i < starts.size(); ++i) t.words.push_back({"w" + std::to_string(i), starts[i], starts[i], i});
  return t;
}

}  // namespace

TEST_CASE("model1 EM on the two-sentence corpus") {
  const auto corpus = make_corpus({{"a b", "x y"}, {"a", "x"}});
  EmOptions opt;
  opt.model = AlignmentModel::model1;
  opt.iterations = 5;
  const auto table = train_em(corpus, opt);
  CHECK(table.prob("a", "x") > table.prob("a", "y"));
  CHECK(table.prob("b", "y") > table.prob("b", "x"));

  const auto ref = oracle::model1_em(as_pairs(corpus), 5, 0.08);
  for (const auto& [e, row] : ref.t) {
    for (const auto& [f, p] : row) CHECK(table.prob(e, f) == doctest::Approx(p).epsilon(1e-12));
  }
  REQUIRE(table.log_likelihood().size() == ref.log_likelihood.size());
  for (std::size_t i = 0; i < ref.log_likelihood.size(); ++i)
    CHECK(table.log_likelihood()[i] == doctest::Approx(ref.log_likelihood[i]).epsilon(1e-12));
}

TEST_CASE("model1 EM matches the dense oracle on random corpora") {
  auto rng = oracle::rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const auto corpus = random_corpus(rng, 12, 6);
    EmOptions opt;
    opt.model = AlignmentModel::model1;
    opt.iterations = 4;
    const auto table = train_em(corpus, opt);
    const auto ref = oracle::model1_em(as_pairs(corpus), 4, 0.08);
    for (const auto& [e, row] : ref.t) {
      for (const auto& [f, p] : row) CHECK(table.prob(e, f) == doctest::Approx(p).epsilon(1e-10));
    }
  }
}

TEST_CASE("EM log-likelihood is non-decreasing and rows are stochastic") {
  auto rng = oracle::rng(17);
  for (auto model : {AlignmentModel::model1, AlignmentModel::model2_diagonal}) {
    for (int trial = 0; trial < 5; ++trial) {
      const auto corpus = random_corpus(rng, 20, 8);
      EmOptions opt;
      opt.model = model;
      opt.iterations = 8;
      const auto table = train_em(corpus, opt);
      const auto& ll = table.log_likelihood();
      REQUIRE(ll.size() == 9);
      for (std::size_t i = 1; i < ll.size(); ++i) CHECK(ll[i] >= ll[i - 1] - 1e-9);
      for (std::uint32_t e = 0; e < table.source_vocab_size(); ++e) CHECK(table.row_sum(e) == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
}

TEST_CASE("train_em errors") {
  CHECK_THROWS_AS(train_em({}), Error);
  EmOptions opt;
  opt.iterations = 0;
  CHECK_THROWS_AS(train_em(make_corpus({{"a", "b"}}), opt), Error);
}

TEST_CASE("diagonal_partition matches direct summation") {
  for (std::size_t m = 1; m < 12; ++m) {
    for (std::size_t n = 1; n < 12; ++n) {
      for (std::size_t j = 0; j < n; ++j) {
        for (double lambda : {0.0, 0.5, 4.0, 17.3}) {
          double direct = 0.0;
          for (std::size_t i = 0; i < m; ++i)
            direct += std::exp(-lambda * std::abs(double(i + 1) / double(m) - double(j + 1) / double(n)));
          CHECK(diagonal_partition(j, n, m, lambda) == doctest::Approx(direct).epsilon(1e-10));
        }
      }
    }
  }
}

TEST_CASE("position prior sums to the non-NULL share") {
  TranslationTable t;
  t.set_prior(AlignmentModel::model2_diagonal, 3.0, 0.08);
  for (std::size_t m : {1, 4, 9}) {
    for (std::size_t n : {1, 5, 7}) {
      for (std::size_t j = 0; j < n; ++j) {
        double sum = 0.0;
        for (std::size_t i = 0; i < m; ++i) sum += t.position_prior(i, j, m, n);
        CHECK(sum == doctest::Approx(0.92).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("align_viterbi: ties, NULL and OOV") {
  TranslationTable t;
  const auto a = t.add_source("a");
  const auto b = t.add_source("b");
  const auto x = t.add_target("x");
  const auto y = t.add_target("y");
  t.set_prob(a, x, 0.5);
  t.set_prob(b, x, 0.5);
  t.set_prob(a, y, 0.001);
  t.set_prob(TranslationTable::kNullId, y, 1.0);
  t.set_prob(TranslationTable::kNullId, x, 0.01);
  t.set_prior(AlignmentModel::model1, 0.0, 0.08);
  const std::vector<std::string> src{"a", "b"};
  const std::vector<std::string> tgt{"x", "y", "zzz"};
  const auto links = align_viterbi(t, src, tgt);
  CHECK(links.links() == std::vector<AlignmentLink>{{0, 0}});
}

TEST_CASE("AlignmentSet: order, inversion, pharaoh") {
  AlignmentSet s("d", "e", Direction::forward, {{2, 1}, {0, 0}, {2, 1}, {1, 3}});
  CHECK(s.size() == 3);
  CHECK(to_pharaoh(s) == "0-0 1-3 2-1");
  CHECK(parse_pharaoh("0-0 1-3 2-1") == s.links());
  CHECK(parse_pharaoh("").empty());
  CHECK_THROWS_AS(parse_pharaoh("0-x"), Error);
  CHECK(s.inverted().inverted() == s);
  CHECK(s.inverted().contains({3, 1}));
}

TEST_CASE("intersect is the set intersection") {
  auto rng = oracle::rng(1);
  std::uniform_int_distribution<std::size_t> pos(0, 6);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<AlignmentLink> f, b;
    for (int k = 0; k < 10; ++k) f.push_back({pos(rng), pos(rng)});
    for (int k = 0; k < 10; ++k) b.push_back({pos(rng), pos(rng)});
    const AlignmentSet fs("s", "t", Direction::forward, f);
    const AlignmentSet bs("s", "t", Direction::backward, b);
    const auto both = intersect(fs, bs);
    for (const auto& l : both.links()) CHECK((fs.contains(l) && bs.contains(l)));
    for (const auto& l : fs.links()) CHECK(both.contains(l) == bs.contains(l));
    CHECK(intersect(fs, bs).links() == intersect(bs, fs).links());
  }
  CHECK_THROWS_AS(intersect(AlignmentSet("a", "b", Direction::forward, {}), AlignmentSet("a", "c", Direction::forward, {})),
                  Error);
}

TEST_CASE("prune_time_regressive") {
  const auto src = timed("s", {0.0, 1.0, 2.0});
  const auto tgt = timed("t", {0.5, 1.0, 1.5});
  const AlignmentSet links("s", "t", Direction::intersection, {{0, 0}, {1, 1}, {2, 2}, {1, 2}});
  const auto kept = prune_time_regressive(links, src, tgt);
  CHECK(kept.links() == std::vector<AlignmentLink>{{0, 0}, {1, 1}, {1, 2}});
  CHECK(kept.direction() == Direction::pruned);
  CHECK_THROWS_AS(prune_time_regressive(AlignmentSet("s", "t", Direction::forward, {{5, 0}}), src, tgt), Error);
  CHECK_THROWS_AS(prune_time_regressive(AlignmentSet("x", "t", Direction::forward, {}), src, tgt), Error);
}

TEST_CASE("prune commutes with intersection") {
  auto rng = oracle::rng(8);
  std::uniform_int_distribution<std::size_t> pos(0, 7);
  std::uniform_real_distribution<double> step(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> ss, ts;
    double c1 = 0, c2 = 0;
    for (int i = 0; i < 8; ++i) ss.push_back(c1 += step(rng)), ts.push_back(c2 += step(rng));
    const auto src = timed("s", ss);
    const auto tgt = timed("t", ts);
    std::vector<AlignmentLink> f, b;
    for (int k = 0; k < 12; ++k) f.push_back({pos(rng), pos(rng)}), b.push_back({pos(rng), pos(rng)});
    const AlignmentSet fs("s", "t", Direction::forward, f);
    const AlignmentSet bs("s", "t", Direction::backward, b);
    CHECK(prune_time_regressive(intersect(fs, bs), src, tgt).links() ==
          intersect(prune_time_regressive(fs, src, tgt), prune_time_regressive(bs, src, tgt)).links());
  }
}

TEST_CASE("compose matches the brute-force join") {
  auto rng = oracle::rng(21);
  std::uniform_int_distribution<std::size_t> pos(0, 5);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<AlignmentLink> xy, yz;
    std::vector<std::pair<std::size_t, std::size_t>> pxy, pyz;
    for (int k = 0; k < 8; ++k) {
      xy.push_back({pos(rng), pos(rng)});
      yz.push_back({pos(rng), pos(rng)});
      pxy.emplace_back(xy.back().src, xy.back().tgt);
      pyz.emplace_back(yz.back().src, yz.back().tgt);
    }
    const auto composed = compose(AlignmentSet("x", "y", Direction::pruned, xy), AlignmentSet("y", "z", Direction::pruned, yz));
    const auto expect = oracle::join(pxy, pyz);
    REQUIRE(composed.size() == expect.size());
    for (const auto& [i, k] : expect) CHECK(composed.contains({i, k}));
    CHECK(composed.src_doc() == "x");
    CHECK(composed.tgt_doc() == "z");
  }
  CHECK_THROWS_AS(compose(AlignmentSet("x", "y", Direction::forward, {}), AlignmentSet("q", "z", Direction::forward, {})),
                  Error);
}

TEST_CASE("translation table TSV round trip") {
  const auto corpus = make_corpus({{"a b c", "x y z"}, {"a c", "x z"}, {"b", "y"}});
  const auto table = train_em(corpus);
  const auto back = TranslationTable::from_tsv(table.to_tsv());
  CHECK(back.model() == table.model());
  CHECK(back.lambda() == table.lambda());
  for (const std::string e : {"a", "b", "c"})
    for (const std::string f : {"x", "y", "z"}) CHECK(back.prob(e, f) == table.prob(e, f));
}

TEST_CASE("alignment_tokens lowercases and trims") {
  AlignerOptions opt;
  const std::vector<std::string> in{"Parliament", "ŽLUŤOUČKÝ", "a"};
  CHECK(alignment_tokens(in, opt, "cs") == std::vector<std::string>{"parli", "žluťo", "a"});
  opt.lowercase = false;
  opt.trim = 3;
  CHECK(alignment_tokens(in, opt) == std::vector<std::string>{"Par", "ŽLU", "a"});
}

TEST_CASE("align_documents on a monotone toy pair") {
  TimedTranscript src = timed("d/src", {0, 1, 2, 3});
  TimedTranscript tgt = timed("d/int", {1.5, 2.5, 3.5, 4.5});
  const std::vector<std::string> s{"one", "two", "three", "four"}, t{"jedna", "dva", "tri", "ctyri"};
  for (std::size_t i = 0; i < 4; ++i) src.words[i].surface = s[i], tgt.words[i].surface = t[i];
  ParallelCorpus extra;
  for (std::size_t i = 0; i < 4; ++i) {
    extra.push_back({{s[i]}, {t[i]}});
    extra.push_back({{s[i], s[(i + 1) % 4]}, {t[i], t[(i + 1) % 4]}});
  }
  const auto result = align_documents(std::vector<TimedTranscript>{src}, std::vector<TimedTranscript>{tgt}, extra);
  REQUIRE(result.links.size() == 1);
  CHECK(result.links[0].links() == std::vector<AlignmentLink>{{0, 0}, {1, 1}, {2, 2}, {3, 3}});
  CHECK(result.links[0].src_doc() == "d/src");
}
