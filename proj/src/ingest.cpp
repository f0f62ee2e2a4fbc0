#include "slt/ingest.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "slt/error.hpp"
#include "slt/text.hpp"

namespace slt {

std::string_view to_string(Track track) {
  switch (track) {
    case Track::source: return "source";
    case Track::interpreter: return "interpreter";
    case Track::mt: return "mt";
  }
  return "source";
}

Track parse_track(std::string_view name) {
  if (name == "source" || name == "src") return Track::source;
  if (name == "interpreter" || name == "int") return Track::interpreter;
  if (name == "mt") return Track::mt;
  fail(ErrorCode::InvalidArgument, "unknown track '" + std::string(name) + "'");
}

std::vector<double> TimedTranscript::start_times() const {
  std::vector<double> out;
  out.reserve(words.size());
  for (const auto& w : words) out.push_back(w.start);
  return out;
}

std::vector<std::string> TimedTranscript::surfaces() const {
  std::vector<std::string> out;
  out.reserve(words.size());
  for (const auto& w : words) out.push_back(w.surface);
  return out;
}

namespace {

void check_time(double t, const std::string& where) {
  if (!std::isfinite(t)) fail(ErrorCode::MalformedLine, where + ": non-finite time");
  if (t < 0.0) fail(ErrorCode::NegativeTime, where + ": negative time " + text::format_double(t));
}

}  // namespace

void validate(const TimedTranscript& transcript) {
  for (std::size_t i = 0; i < transcript.words.size(); ++i) {
    const auto& w = transcript.words[i];
    const std::string where = transcript.doc_id + " word " + std::to_string(i);
    if (w.index != i) fail(ErrorCode::MalformedLine, where + ": index is not contiguous");
    if (w.surface.empty()) fail(ErrorCode::MalformedLine, where + ": empty surface");
    check_time(w.start, where);
    check_time(w.end, where);
    if (w.end < w.start - kTimeTolerance) fail(ErrorCode::MalformedLine, where + ": end before start");
    if (i > 0 && w.start < transcript.words[i - 1].start - kTimeTolerance) {
      fail(ErrorCode::NonMonotonicTime, where + ": start time decreases");
    }
  }
}

void validate(const IncrementalLog& log) {
  if (log.events.empty()) fail(ErrorCode::EmptyLog, "log '" + log.doc_id + "' has no events");
  for (std::size_t i = 0; i < log.events.size(); ++i) {
    const std::string where = log.doc_id + " event " + std::to_string(i);
    check_time(log.events[i].time, where);
    if (i > 0 && !(log.events[i].time > log.events[i - 1].time)) {
      fail(ErrorCode::NonIncreasingEventTime, where + ": event time does not increase");
    }
  }
  if (log.session_end < log.events.back().time) {
    fail(ErrorCode::NonIncreasingEventTime, log.doc_id + ": session ends before its last event");
  }
}

TimedTranscript parse_timed_transcript_text(std::string_view content, Track track,
                                            std::string language) {
  struct Row {
    long long index;
    WordToken token;
  };
  std::vector<Row> rows;
  std::string doc_id;
  std::size_t line_no = 0;
  for (auto raw : text::split(content, '\n')) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    if (text::trim(raw).empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    const auto cols = text::split(raw, '\t');
    if (cols.size() != 6) {
      fail(ErrorCode::MalformedLine,
           where + ": expected 6 tab-separated columns, got " + std::to_string(cols.size()));
    }
    const std::string id(text::trim(cols[0]));
    if (id.empty()) fail(ErrorCode::MalformedLine, where + ": empty doc_id");
    if (doc_id.empty()) {
      doc_id = id;
    } else if (id != doc_id) {
      fail(ErrorCode::MalformedLine, where + ": doc_id '" + id + "' differs from '" + doc_id + "'");
    }
    Track row_track;
    try {
      row_track = parse_track(text::trim(cols[1]));
    } catch (const Error&) {
      fail(ErrorCode::MalformedLine, where + ": unknown track '" + std::string(cols[1]) + "'");
    }
    if (row_track != track) {
      fail(ErrorCode::MalformedLine, where + ": track '" + std::string(cols[1]) + "' but expected '" +
                                         std::string(to_string(track)) + "'");
    }
    double index = 0.0;
    if (!text::parse_double(cols[2], index) || index < 0 || index != std::floor(index)) {
      fail(ErrorCode::MalformedLine, where + ": bad index '" + std::string(cols[2]) + "'");
    }
    Row row;
    row.index = static_cast<long long>(index);
    row.token.surface = text::nfc(text::trim(cols[3]));
    if (row.token.surface.empty()) fail(ErrorCode::MalformedLine, where + ": empty surface");
    if (!text::parse_double(cols[4], row.token.start) || !text::parse_double(cols[5], row.token.end)) {
      fail(ErrorCode::MalformedLine, where + ": bad timestamp");
    }
    check_time(row.token.start, where);
    check_time(row.token.end, where);
    if (row.token.end < row.token.start - kTimeTolerance) {
      fail(ErrorCode::MalformedLine, where + ": end before start");
    }
    rows.push_back(std::move(row));
  }

  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return a.index < b.index; });
  TimedTranscript out;
  out.doc_id = doc_id;
  out.track = track;
  out.language = std::move(language);
  out.words.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0 && rows[i].index == rows[i - 1].index) {
      fail(ErrorCode::MalformedLine, "duplicate index " + std::to_string(rows[i].index));
    }
    rows[i].token.index = i;
    out.words.push_back(std::move(rows[i].token));
  }
  validate(out);
  return out;
}

TimedTranscript parse_timed_transcript(const std::string& path, Track track, std::string language) {
  try {
    return parse_timed_transcript_text(text::read_file(path), track, std::move(language));
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

std::string format_timed_transcript(const TimedTranscript& transcript) {
  std::string out;
  const auto track = std::string(to_string(transcript.track));
  for (const auto& w : transcript.words) {
    out += transcript.doc_id;
    out += '\t';
    out += track;
    out += '\t';
    out += std::to_string(w.index);
    out += '\t';
    out += w.surface;
    out += '\t';
    out += text::format_double(w.start);
    out += '\t';
    out += text::format_double(w.end);
    out += '\n';
  }
  return out;
}

IncrementalLog parse_incremental_log_text(std::string_view content, std::string doc_id,
                                          std::optional<double> session_end) {
  IncrementalLog log;
  log.doc_id = std::move(doc_id);
  std::size_t line_no = 0;
  for (auto raw : text::split(content, '\n')) {
    ++line_no;
    raw = text::trim(raw);
    if (raw.empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(raw);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::MalformedLine, where + ": " + e.what());
    }
    if (!rec.is_object() || !rec.contains("t") || !rec["t"].is_number() || !rec.contains("text") ||
        !rec["text"].is_string()) {
      fail(ErrorCode::MalformedLine, where + ": expected {\"t\": number, \"text\": string}");
    }
    const double t = rec["t"].get<double>();
    check_time(t, where);
    log.events.push_back({t, text::nfc(rec["text"].get<std::string>())});
  }
  // A trailing empty record after real output is the session-end marker.
  std::optional<double> marker;
  if (log.events.size() > 1 && text::trim(log.events.back().text).empty()) {
    marker = log.events.back().time;
    log.events.pop_back();
  }
  if (log.events.empty()) fail(ErrorCode::EmptyLog, "log '" + log.doc_id + "' has no events");
  log.session_end = session_end.value_or(marker.value_or(log.events.back().time));
  validate(log);
  return log;
}

IncrementalLog parse_incremental_log(const std::string& path, std::optional<double> session_end) {
  auto stem = path.substr(path.find_last_of('/') + 1);
  if (const auto dot = stem.find('.'); dot != std::string::npos && dot > 0) stem.resize(dot);
  try {
    return parse_incremental_log_text(text::read_file(path), stem, session_end);
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

std::string format_incremental_log(const IncrementalLog& log) {
  std::string out;
  for (const auto& ev : log.events) {
    out += nlohmann::json{{"t", ev.time}, {"text", ev.text}}.dump();
    out += '\n';
  }
  out += nlohmann::json{{"t", log.session_end}, {"text", ""}}.dump();
  out += '\n';
  return out;
}

namespace {

bool joins_word(char32_t prev, char32_t c, char32_t next) {
  if ((c == U'.' || c == U',') && text::is_digit(prev) && text::is_digit(next)) return true;
  if ((c == U'-' || c == U'\'' || c == U'’') && text::is_letter(prev) && text::is_letter(next)) {
    return true;
  }
  return false;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view input, std::string_view language,
                                  const TokenizerOptions& options) {
  std::vector<std::string> tokens;
  const std::string normalized = text::nfc(input);
  for (const auto& chunk : text::split_whitespace(normalized)) {
    const auto cps = text::decode(chunk);
    std::vector<char32_t> word;
    auto flush = [&] {
      if (!word.empty()) tokens.push_back(text::encode(word));
      word.clear();
    };
    for (std::size_t i = 0; i < cps.size(); ++i) {
      const char32_t c = cps[i];
      if (!text::is_punct(c)) {
        word.push_back(c);
        continue;
      }
      const char32_t prev = i > 0 ? cps[i - 1] : U' ';
      const char32_t next = i + 1 < cps.size() ? cps[i + 1] : U' ';
      if (!word.empty() && joins_word(prev, c, next)) {
        word.push_back(c);
        continue;
      }
      flush();
      tokens.push_back(text::encode(c));
    }
    flush();
  }
  if (options.lowercase) {
    for (auto& t : tokens) t = text::lowercase(t, language);
  }
  return tokens;
}

std::string trim_lemma(std::string_view token, std::size_t k) {
  if (k == 0) fail(ErrorCode::InvalidArgument, "trim length must be at least 1");
  const std::string composed = text::nfc(token);
  token = composed;
  std::size_t seen = 0;
  for (std::size_t i = 0; i < token.size(); ++i) {
    if ((static_cast<unsigned char>(token[i]) & 0xC0) != 0x80) {
      if (seen == k) return std::string(token.substr(0, i));
      ++seen;
    }
  }
  return std::string(token);
}

std::vector<std::string> strip_symbols(std::span<const std::string> tokens,
                                       const std::set<std::string, std::less<>>& symbols) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (!symbols.contains(t)) out.push_back(t);
  }
  return out;
}

const std::set<std::string, std::less<>>& default_stripped_symbols() {
  static const std::set<std::string, std::less<>> symbols{",", "."};
  return symbols;
}

ParallelCorpus read_parallel_corpus(const std::string& source_path, const std::string& target_path,
                                    std::string_view source_language,
                                    std::string_view target_language,
                                    const TokenizerOptions& options) {
  const auto src = text::read_lines(source_path);
  const auto tgt = text::read_lines(target_path);
  if (src.size() != tgt.size()) {
    fail(ErrorCode::LengthMismatch, source_path + " has " + std::to_string(src.size()) +
                                        " lines but " + target_path + " has " +
                                        std::to_string(tgt.size()));
  }
  ParallelCorpus corpus;
  corpus.reserve(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) {
    SentencePair pair{tokenize(src[i], source_language, options),
                      tokenize(tgt[i], target_language, options)};
    if (pair.source.empty() || pair.target.empty()) {
      fail(ErrorCode::MalformedLine, "line " + std::to_string(i + 1) + ": empty side in parallel corpus");
    }
    corpus.push_back(std::move(pair));
  }
  return corpus;
}

}  // namespace slt
