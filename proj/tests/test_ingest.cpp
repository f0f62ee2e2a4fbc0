#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "slt/error.hpp"
#include "slt/ingest.hpp"
#include "slt/manifest.hpp"
#include "slt/text.hpp"

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

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("slt-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

void write(const std::filesystem::path& p, const std::string& content) { std::ofstream(p) << content; }

}  // namespace

TEST_CASE("parse_timed_transcript: single row") {
  const auto t = parse_timed_transcript_text("d1\tsrc\t0\thello\t0.00\t0.40\n", Track::source, "en");
  REQUIRE(t.size() == 1);
  CHECK(t.doc_id == "d1");
  CHECK(t.words[0].surface == "hello");
  CHECK(t.words[0].start == 0.0);
  CHECK(t.words[0].end == doctest::Approx(0.4));
}

TEST_CASE("parse_timed_transcript: three rows keep fields and get indices 0..2") {
  const std::string content =
      "d7\tint\t0\tdobrý\t1.5\t1.9\n"
      "d7\tint\t1\tden\t1.9\t2.2\n"
      "d7\tint\t2\tvšem\t2.3\t2.8\n";
  const auto t = parse_timed_transcript_text(content, Track::interpreter, "cs");
  REQUIRE(t.size() == 3);
  const std::vector<std::string> surfaces{"dobrý", "den", "všem"};
  const std::vector<double> starts{1.5, 1.9, 2.3};
  const std::vector<double> ends{1.9, 2.2, 2.8};
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(t.words[i].index == i);
    CHECK(t.words[i].surface == surfaces[i]);
    CHECK(t.words[i].start == starts[i]);
    CHECK(t.words[i].end == ends[i]);
  }
  CHECK(t.track == Track::interpreter);
  CHECK(t.language == "cs");
}

TEST_CASE("parse_timed_transcript: indices are renumbered after ordering") {
  const auto t = parse_timed_transcript_text("d\tsrc\t10\tb\t1\t2\nd\tsrc\t4\ta\t0\t1\n", Track::source, "en");
  REQUIRE(t.size() == 2);
  CHECK(t.words[0].surface == "a");
  CHECK(t.words[1].surface == "b");
  CHECK(t.words[1].index == 1);
}

TEST_CASE("parse_timed_transcript: errors") {
  CHECK(code_of([] {
          parse_timed_transcript_text("d\tsrc\t0\ta\t0.0\t0.1\nd\tsrc\t1\tb\t0.5\t0.6\nd\tsrc\t2\tc\t0.3\t0.4\n",
                                      Track::source, "en");
        }) == ErrorCode::NonMonotonicTime);
  CHECK(code_of([] { parse_timed_transcript_text("d\tsrc\t0\ta\t0.0\n", Track::source, "en"); }) ==
        ErrorCode::MalformedLine);
  CHECK(code_of([] { parse_timed_transcript_text("d\tsrc\t0\ta\t-1\t0.5\n", Track::source, "en"); }) ==
        ErrorCode::NegativeTime);
  CHECK(code_of([] { parse_timed_transcript_text("d\tsrc\t0\ta\t2\t1\n", Track::source, "en"); }) ==
        ErrorCode::MalformedLine);
  CHECK(code_of([] { parse_timed_transcript_text("d\tsrc\t0\ta\tx\t1\n", Track::source, "en"); }) ==
        ErrorCode::MalformedLine);
  CHECK(code_of([] { parse_timed_transcript_text("d\tmt\t0\ta\t0\t1\n", Track::source, "en"); }) ==
        ErrorCode::MalformedLine);
  CHECK(code_of([] { parse_timed_transcript_text("d\tsrc\t0\t \t0\t1\n", Track::source, "en"); }) ==
        ErrorCode::MalformedLine);
}

TEST_CASE("parse_timed_transcript: ties in start time are allowed") {
  const auto t = parse_timed_transcript_text("d\tsrc\t0\ta\t1\t1\nd\tsrc\t1\tb\t1\t2\n", Track::source, "en");
  CHECK(t.size() == 2);
}

TEST_CASE("parse_timed_transcript: surfaces are NFC-normalized") {
  // "z" + combining caron -> "ž"
  const auto t = parse_timed_transcript_text("d\tsrc\t0\tz\xCC\x8C\t0\t1\n", Track::source, "cs");
  CHECK(t.words[0].surface == "\xC5\xBE");
}

TEST_CASE("timed transcript round-trips through format/parse") {
  auto rng = oracle::rng(11);
  std::uniform_real_distribution<double> step(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    TimedTranscript t;
    t.doc_id = "doc" + std::to_string(trial);
    t.track = Track::interpreter;
    t.language = "de";
    double clock = step(rng);
    for (std::size_t i = 0; i < 1 + trial % 9; ++i) {
      const double dur = step(rng);
      t.words.push_back({"w" + std::to_string(i), clock, clock + dur, i});
      clock += step(rng);
    }
    const auto back = parse_timed_transcript_text(format_timed_transcript(t), Track::interpreter, "de");
    REQUIRE(back.size() == t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
      CHECK(back.words[i].surface == t.words[i].surface);
      CHECK(back.words[i].start == t.words[i].start);
      CHECK(back.words[i].end == t.words[i].end);
    }
  }
}

TEST_CASE("parse_incremental_log") {
  SUBCASE("two events") {
    const auto log = parse_incremental_log_text("{\"t\": 1.0, \"text\": \"a\"}\n{\"t\": 2.0, \"text\": \"a b\"}\n", "d");
    REQUIRE(log.events.size() == 2);
    CHECK(log.events[1].text == "a b");
    CHECK(log.session_end == 2.0);
  }
  SUBCASE("decreasing time") {
    CHECK(code_of([] {
            parse_incremental_log_text("{\"t\": 2.0, \"text\": \"a\"}\n{\"t\": 1.0, \"text\": \"b\"}\n", "d");
          }) == ErrorCode::NonIncreasingEventTime);
  }
  SUBCASE("empty") { CHECK(code_of([] { parse_incremental_log_text("\n", "d"); }) == ErrorCode::EmptyLog); }
  SUBCASE("trailing empty record sets the session end") {
    const auto log = parse_incremental_log_text("{\"t\": 1, \"text\": \"a\"}\n{\"t\": 9.5, \"text\": \"\"}\n", "d");
    CHECK(log.events.size() == 1);
    CHECK(log.session_end == 9.5);
  }
  SUBCASE("explicit session end wins") {
    const auto log = parse_incremental_log_text("{\"t\": 1, \"text\": \"a\"}\n{\"t\": 9.5, \"text\": \"\"}\n", "d", 12.0);
    CHECK(log.session_end == 12.0);
  }
  SUBCASE("session end before last event") {
    CHECK(code_of([] { parse_incremental_log_text("{\"t\": 3, \"text\": \"a\"}\n", "d", 1.0); }) ==
          ErrorCode::NonIncreasingEventTime);
  }
  SUBCASE("bad json") {
    CHECK(code_of([] { parse_incremental_log_text("{\"t\": 1, \"txt\": \"a\"}\n", "d"); }) == ErrorCode::MalformedLine);
  }
}

TEST_CASE("incremental log round-trips through format/parse") {
  auto rng = oracle::rng(5);
  std::uniform_real_distribution<double> gap(0.01, 3.0);
  std::uniform_int_distribution<int> word(0, 4);
  for (int trial = 0; trial < 20; ++trial) {
    IncrementalLog log;
    log.doc_id = "d";
    double t = 0.0;
    for (int k = 0; k < 5; ++k) {
      t += gap(rng);
      std::string text;
      for (int w = 0; w <= k; ++w) text += (w ? " " : "") + std::string(1, static_cast<char>('a' + word(rng)));
      log.events.push_back({t, text});
    }
    log.session_end = t + gap(rng);
    const auto back = parse_incremental_log_text(format_incremental_log(log), "d");
    REQUIRE(back.events.size() == log.events.size());
    for (std::size_t k = 0; k < log.events.size(); ++k) {
      CHECK(back.events[k].time == log.events[k].time);
      CHECK(back.events[k].text == log.events[k].text);
    }
    CHECK(back.session_end == log.session_end);
  }
}

TEST_CASE("tokenize") {
  CHECK(tokenize("Hello, world.") == std::vector<std::string>{"Hello", ",", "world", "."});
  CHECK(tokenize("").empty());
  CHECK(tokenize("a b") == std::vector<std::string>{"a", "b"});
  CHECK(tokenize("It costs 3.5 or 1,000 euros.") ==
        std::vector<std::string>{"It", "costs", "3.5", "or", "1,000", "euros", "."});
  CHECK(tokenize("a well-known (case)") == std::vector<std::string>{"a", "well-known", "(", "case", ")"});
  CHECK(tokenize("\"Quote\"...") == std::vector<std::string>{"\"", "Quote", "\"", ".", ".", "."});
  CHECK(tokenize("Žluťoučký Kůň", "cs", {true}) == std::vector<std::string>{"žluťoučký", "kůň"});
}

TEST_CASE("tokenize is idempotent on its own joined output") {
  const std::vector<std::string> inputs{"Hello, world.",       "Ich weiß es nicht; oder?", "Je to 3,5 % -- nebo ne?",
                                        "«Quoted» text!",      "x-ray's don't-stop",       "end.",
                                        "  multiple   spaces ", "a/b\\c", "€100 and $5"};
  for (const auto& in : inputs) {
    const auto once = tokenize(in);
    std::string joined;
    for (const auto& t : once) joined += (joined.empty() ? "" : " ") + t;
    CHECK(tokenize(joined) == once);
  }
}

TEST_CASE("trim_lemma") {
  CHECK(trim_lemma("parliament", 5) == "parli");
  CHECK(trim_lemma("ab", 5) == "ab");
  CHECK(trim_lemma("žlutý", 3) == "žlu");
  CHECK(trim_lemma("Übersetzung") == "Übers");
  CHECK_THROWS_AS(trim_lemma("x", 0), Error);
  for (const std::string w : {"parliament", "žluťoučký", "a", "Übersetzung"}) {
    for (std::size_t k = 1; k < 8; ++k) CHECK(trim_lemma(trim_lemma(w, k), k) == trim_lemma(w, k));
  }
}

TEST_CASE("strip_symbols") {
  const std::vector<std::string> in{"a", ",", "b", "."};
  CHECK(strip_symbols(in, {",", "."}) == std::vector<std::string>{"a", "b"});
  CHECK(strip_symbols(std::vector<std::string>{}, {","}).empty());
  const std::vector<std::string> plain{"x", "y"};
  CHECK(strip_symbols(plain, default_stripped_symbols()) == plain);
}

TEST_CASE("read_parallel_corpus") {
  const auto dir = temp_dir("parallel");
  write(dir / "a.txt", "Hello world .\nSecond line\n");
  write(dir / "b.txt", "Ahoj světe .\nDruhý řádek\n");
  const auto corpus = read_parallel_corpus((dir / "a.txt").string(), (dir / "b.txt").string());
  REQUIRE(corpus.size() == 2);
  CHECK(corpus[0].target == std::vector<std::string>{"Ahoj", "světe", "."});
  write(dir / "c.txt", "one\n");
  CHECK(code_of([&] { read_parallel_corpus((dir / "a.txt").string(), (dir / "c.txt").string()); }) ==
        ErrorCode::LengthMismatch);
}

TEST_CASE("manifest: load and check") {
  const auto dir = temp_dir("manifest");
  write(dir / "d1.en.tsv", "d1\tsrc\t0\thello\t0\t0.5\nd1\tsrc\t1\tthere\t0.5\t0.9\n");
  write(dir / "d1.cs.tsv", "d1\tint\t0\tahoj\t1\t1.5\n");
  write(dir / "d1.revised.txt", "Hello there.\nSecond sentence here.\n");
  write(dir / "d1.verbatim.txt", "hello there second sentence here\n");
  write(dir / "broken.tsv", "d2\tsrc\t0\tx\n");
  write(dir / "manifest.json", R"({"documents": [
    {"doc_id": "d1", "speech": "read", "trainset_overlap": true,
     "tracks": {"en": {"kind": "source", "language": "en", "duration_s": 1.0, "timed": "d1.en.tsv",
                       "versions": {"Revised": "d1.revised.txt", "Verbatim": "d1.verbatim.txt"}},
                "cs-int": {"kind": "interpreter", "language": "cs", "timed": "d1.cs.tsv"}}},
    {"doc_id": "d2", "tracks": {"en": {"kind": "source", "timed": "broken.tsv",
                                       "versions": {"Verbatim": "missing.txt"}}}}
  ]})");
  const auto docs = load_manifest((dir / "manifest.json").string());
  REQUIRE(docs.size() == 2);
  CHECK_FALSE(docs[0].spontaneous);
  CHECK(docs[0].trainset_overlap);
  CHECK(docs[1].spontaneous);
  CHECK(docs[0].tracks.at("en").duration_s == 1.0);
  const auto check = check_manifest(docs);
  CHECK(check.documents == 2);
  CHECK(check.problems.size() == 2);
  for (const auto& [doc, msg] : check.problems) CHECK(doc == "d2");
  const auto& en = check.stats.at("en");
  CHECK(en.at(TranscriptVersion::revised).units == 2);
  CHECK(en.at(TranscriptVersion::revised).mode == CountingMode::sentence);
  CHECK(en.at(TranscriptVersion::revised).words == 5);
  CHECK(en.at(TranscriptVersion::verbatim).units == 1);
  CHECK(en.at(TranscriptVersion::verbatim).mode == CountingMode::document);
  CHECK(check.spontaneous_fraction == 0.5);
}

TEST_CASE("manifest: schema errors are ConfigInvalid") {
  const auto dir = temp_dir("manifest-bad");
  write(dir / "m.json", R"({"documents": [{"doc_id": "x", "speech": "sung", "tracks": {}}]})");
  CHECK(code_of([&] { load_manifest((dir / "m.json").string()); }) == ErrorCode::ConfigInvalid);
  write(dir / "m2.json", R"({"docs": []})");
  CHECK(code_of([&] { load_manifest((dir / "m2.json").string()); }) == ErrorCode::ConfigInvalid);
}
