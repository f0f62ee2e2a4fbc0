#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace slt {

// Timestamps closer than this are considered equal.
inline constexpr double kTimeTolerance = 1e-6;

enum class Track { source, interpreter, mt };

std::string_view to_string(Track track);
// Accepts "source"/"src", "interpreter"/"int", "mt".
Track parse_track(std::string_view name);

struct WordToken {
  std::string surface;
  double start = 0.0;
  double end = 0.0;
  std::size_t index = 0;
};

struct TimedTranscript {
  std::string doc_id;
  Track track = Track::source;
  std::string language;
  std::vector<WordToken> words;

  std::size_t size() const { return words.size(); }
  std::vector<double> start_times() const;
  std::vector<std::string> surfaces() const;
};

struct LogEvent {
  double time = 0.0;
  std::string text;
};

// Snapshots of a re-translation system's full output, oldest first.
struct IncrementalLog {
  std::string doc_id;
  std::vector<LogEvent> events;
  double session_end = 0.0;
};

// Checks every TimedTranscript invariant; throws slt::Error on violation.
void validate(const TimedTranscript& transcript);
void validate(const IncrementalLog& log);

/// Reads the word-per-line TSV `doc_id, track, index, surface, start_s, end_s`.
/// Rows are ordered by their index column and then renumbered 0..n-1.
/// Surfaces are NFC-normalized. A file holds exactly one document track.
TimedTranscript parse_timed_transcript(const std::string& path, Track track, std::string language);
TimedTranscript parse_timed_transcript_text(std::string_view content, Track track,
                                            std::string language);
std::string format_timed_transcript(const TimedTranscript& transcript);

/// Reads JSON lines `{"t": seconds, "text": "..."}`. A trailing record with
/// empty text marks the session end; an explicit `session_end` wins over it.
/// Without either, the session ends at the last event.
IncrementalLog parse_incremental_log(const std::string& path,
                                     std::optional<double> session_end = std::nullopt);
IncrementalLog parse_incremental_log_text(std::string_view content, std::string doc_id,
                                          std::optional<double> session_end = std::nullopt);
// Writes the events plus a trailing session-end record.
std::string format_incremental_log(const IncrementalLog& log);

struct TokenizerOptions {
  bool lowercase = false;
};

// Whitespace split, then every punctuation or symbol character becomes its
// own token. Kept inside a word: `.` and `,` between digits (3.5, 1,000),
// and `-`, `'`, `’` between letters (well-known, don't).
std::vector<std::string> tokenize(std::string_view text, std::string_view language = {},
                                  const TokenizerOptions& options = {});

// First `k` code points of `token`.
std::string trim_lemma(std::string_view token, std::size_t k = 5);

std::vector<std::string> strip_symbols(std::span<const std::string> tokens,
                                       const std::set<std::string, std::less<>>& symbols);

// Comma and full stop, the symbols removed before vocabulary statistics.
const std::set<std::string, std::less<>>& default_stripped_symbols();

struct SentencePair {
  std::vector<std::string> source;
  std::vector<std::string> target;
};

using ParallelCorpus = std::vector<SentencePair>;

// Two line-parallel plain-text files, tokenized with `tokenize`.
ParallelCorpus read_parallel_corpus(const std::string& source_path, const std::string& target_path,
                                    std::string_view source_language = {},
                                    std::string_view target_language = {},
                                    const TokenizerOptions& options = {});

}  // namespace slt
