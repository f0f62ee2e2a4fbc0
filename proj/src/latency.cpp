#include "slt/latency.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "slt/error.hpp"

namespace slt {

std::vector<FinalizationRecord> finalization_times(const IncrementalLog& log, std::string_view language,
                                                   const TokenizerOptions& options) {
  if (log.events.empty()) fail(ErrorCode::EmptyLog, "log '" + log.doc_id + "' has no events");
  std::vector<std::vector<std::string>> snapshots;
  snapshots.reserve(log.events.size());
  for (const auto& ev : log.events) snapshots.push_back(tokenize(ev.text, language, options));
  const auto& final_tokens = snapshots.back();

  // stable[k]: length of the prefix shared with the final output by every
  // snapshot from k onwards. Non-decreasing in k.
  const std::size_t count = snapshots.size();
  std::vector<std::size_t> stable(count);
  std::size_t running = final_tokens.size();
  for (std::size_t k = count; k-- > 0;) {
    const auto& snap = snapshots[k];
    const std::size_t limit = std::min(snap.size(), final_tokens.size());
    std::size_t common = 0;
    while (common < limit && snap[common] == final_tokens[common]) ++common;
    running = std::min(running, common);
    stable[k] = running;
  }

  std::vector<FinalizationRecord> records;
  records.reserve(final_tokens.size());
  std::size_t k = 0;
  for (std::size_t w = 0; w < final_tokens.size(); ++w) {
    while (stable[k] < w + 1) ++k;  // the last snapshot always qualifies
    records.push_back({w, log.events[k].time, final_tokens[w]});
  }
  return records;
}

TimedTranscript finalized_transcript(const IncrementalLog& log, std::string language,
                                     const TokenizerOptions& options) {
  TimedTranscript t;
  t.doc_id = log.doc_id;
  t.track = Track::mt;
  t.language = std::move(language);
  for (auto& r : finalization_times(log, t.language, options)) {
    t.words.push_back({std::move(r.surface), r.time, r.time, r.index});
  }
  return t;
}

double word_time(const TimedTranscript& transcript, std::size_t index) {
  if (index >= transcript.words.size()) {
    fail(ErrorCode::IndexOutOfRange, "word " + std::to_string(index) + " of '" + transcript.doc_id + "' (" +
                                         std::to_string(transcript.words.size()) + " words)");
  }
  return transcript.words[index].start;
}

std::vector<LatencySample> link_latencies(const AlignmentSet& links, std::span<const double> src_times,
                                          std::span<const double> tgt_times) {
  std::vector<LatencySample> samples;
  samples.reserve(links.size());
  for (const auto& l : links.links()) {
    if (l.src >= src_times.size() || l.tgt >= tgt_times.size() || !std::isfinite(src_times[l.src]) ||
        !std::isfinite(tgt_times[l.tgt])) {
      fail(ErrorCode::MissingTime, "no time for link " + std::to_string(l.src) + "-" + std::to_string(l.tgt));
    }
    const double s = src_times[l.src];
    const double t = tgt_times[l.tgt];
    samples.push_back({l, s, t, t - s});
  }
  return samples;
}

double nearest_rank(std::span<const double> sorted, double percentile) {
  if (sorted.empty()) fail(ErrorCode::EmptySamples, "no samples");
  if (!(percentile > 0.0 && percentile <= 100.0)) {
    fail(ErrorCode::InvalidArgument, "percentile must lie in (0, 100]");
  }
  const double n = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(percentile * n / 100.0));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

LatencyReport summarize(std::vector<LatencySample> samples, const SummaryOptions& options) {
  if (samples.empty()) fail(ErrorCode::EmptySamples, "cannot summarize zero latency samples");
  LatencyReport report;
  std::vector<double> values;
  values.reserve(samples.size());
  double sum = 0.0;
  for (const auto& s : samples) {
    values.push_back(s.latency);
    sum += s.latency;
  }
  const double n = static_cast<double>(values.size());
  report.avg = sum / n;
  double sq = 0.0;
  for (double v : values) sq += (v - report.avg) * (v - report.avg);
  report.std = std::sqrt(sq / n);
  std::sort(values.begin(), values.end());
  for (double p : options.percentiles) report.percentiles[p] = nearest_rank(values, p);
  if (options.source_words) {
    std::set<std::size_t> aligned;
    for (const auto& s : samples) aligned.insert(s.link.src);
    report.aligned_fraction =
        *options.source_words == 0
            ? 0.0
            : std::min(1.0, static_cast<double>(aligned.size()) / static_cast<double>(*options.source_words));
  }
  report.samples = std::move(samples);
  return report;
}

std::vector<double> finalization_time_vector(std::span<const FinalizationRecord> records) {
  std::vector<double> times(records.size(), std::nan(""));
  for (const auto& r : records) {
    if (r.index < times.size()) times[r.index] = r.time;
  }
  return times;
}

std::vector<LatencySample> relay_samples(const TimedTranscript& src, const TimedTranscript& mid,
                                         std::span<const FinalizationRecord> tgt_final,
                                         const AlignmentSet& a_src_mid, const AlignmentSet& a_mid_tgt) {
  if (a_src_mid.src_doc() != src.doc_id || a_src_mid.tgt_doc() != mid.doc_id || a_mid_tgt.src_doc() != mid.doc_id) {
    fail(ErrorCode::DocMismatch, "relay alignments do not chain through '" + mid.doc_id + "'");
  }
  for (const auto& l : a_src_mid.links()) {
    if (l.tgt >= mid.size()) fail(ErrorCode::IndexOutOfRange, "pivot index " + std::to_string(l.tgt));
  }
  const auto chained = compose(a_src_mid, a_mid_tgt);
  return link_latencies(chained, src.start_times(), finalization_time_vector(tgt_final));
}

LatencyReport relay_latency(const TimedTranscript& src, const TimedTranscript& mid,
                            std::span<const FinalizationRecord> tgt_final, const AlignmentSet& a_src_mid,
                            const AlignmentSet& a_mid_tgt, const SummaryOptions& options) {
  return summarize(relay_samples(src, mid, tgt_final, a_src_mid, a_mid_tgt), options);
}

LatencyReport relay_latency_direct(const TimedTranscript& src, std::span<const FinalizationRecord> tgt_final,
                                   const AlignmentSet& a_src_tgt, const SummaryOptions& options) {
  if (a_src_tgt.src_doc() != src.doc_id) {
    fail(ErrorCode::DocMismatch, "alignment source '" + a_src_tgt.src_doc() + "' is not '" + src.doc_id + "'");
  }
  return summarize(link_latencies(a_src_tgt, src.start_times(), finalization_time_vector(tgt_final)), options);
}

}  // namespace slt
