#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "slt/aligner.hpp"
#include "slt/ingest.hpp"

namespace slt {

struct FinalizationRecord {
  std::size_t index = 0;
  double time = 0.0;
  std::string surface;
};

/// For each word of the final output, the earliest event time from which the
/// word and its whole prefix stay unchanged until the end of the session.
/// Snapshots are tokenized with `tokenize(text, language, options)`.
std::vector<FinalizationRecord> finalization_times(const IncrementalLog& log, std::string_view language = {},
                                                   const TokenizerOptions& options = {});

// MT output as a timed transcript: each word starts and ends at its finalization time.
TimedTranscript finalized_transcript(const IncrementalLog& log, std::string language,
                                     const TokenizerOptions& options = {});

double word_time(const TimedTranscript& transcript, std::size_t index);

struct LatencySample {
  AlignmentLink link;
  double src_time = 0.0;
  double tgt_time = 0.0;
  double latency = 0.0;
};

// One sample per link. Times are indexed by word position; an index past the
// end or a non-finite time is reported as MissingTime.
std::vector<LatencySample> link_latencies(const AlignmentSet& links, std::span<const double> src_times,
                                          std::span<const double> tgt_times);

struct SummaryOptions {
  std::vector<double> percentiles{50.0, 90.0, 99.0};
  // Word count of the source side; enables aligned_fraction.
  std::optional<std::size_t> source_words;
};

struct LatencyReport {
  std::vector<LatencySample> samples;
  double avg = 0.0;
  double std = 0.0;  // population
  std::map<double, double> percentiles;
  std::optional<double> aligned_fraction;
};

// Nearest-rank percentile: the ceil(p/100 * n)-th smallest value.
double nearest_rank(std::span<const double> sorted, double percentile);

LatencyReport summarize(std::vector<LatencySample> samples, const SummaryOptions& options = {});

std::vector<LatencySample> relay_samples(const TimedTranscript& src, const TimedTranscript& mid,
                                         std::span<const FinalizationRecord> tgt_final,
                                         const AlignmentSet& a_src_mid, const AlignmentSet& a_mid_tgt);

/// Latency of a relay pipeline (source -> pivot -> target). Links are
/// composed through the pivot document and measured from source word
/// start to target finalization.
LatencyReport relay_latency(const TimedTranscript& src, const TimedTranscript& mid,
                            std::span<const FinalizationRecord> tgt_final, const AlignmentSet& a_src_mid,
                            const AlignmentSet& a_mid_tgt, const SummaryOptions& options = {});

// Same measurement with a precomputed source -> target alignment.
LatencyReport relay_latency_direct(const TimedTranscript& src, std::span<const FinalizationRecord> tgt_final,
                                   const AlignmentSet& a_src_tgt, const SummaryOptions& options = {});

std::vector<double> finalization_time_vector(std::span<const FinalizationRecord> records);

}  // namespace slt
