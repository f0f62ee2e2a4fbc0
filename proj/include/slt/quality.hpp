#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace slt {

// agg: the whole test set is one segment. one: each document is a segment
// and n-gram statistics are summed over segments.
enum class BleuMode { agg, one };
enum class Smoothing { none, add_one };

std::string_view to_string(BleuMode mode);
std::string_view to_string(Smoothing smoothing);

struct BleuConfig {
  int max_order = 4;
  bool lowercase = false;
  Smoothing smoothing = Smoothing::none;
  BleuMode mode = BleuMode::agg;
};

struct BleuReport {
  double score = 0.0;  // 0..100
  std::vector<double> precisions;
  std::vector<std::size_t> matches;
  std::vector<std::size_t> totals;
  // Orders that have at least one hypothesis n-gram; the geometric mean is
  // taken over these.
  int effective_order = 0;
  double brevity_penalty = 0.0;
  std::size_t hyp_length = 0;
  std::size_t ref_length = 0;
  BleuMode mode = BleuMode::agg;
  std::string tokenization = "none";
};

/// Segments are token lists. Orders above the hypothesis length do not
/// contribute; any contributing order with zero matches gives 0 unless
/// add-one smoothing (orders >= 2) is enabled.
BleuReport bleu(std::span<const std::vector<std::string>> hypotheses,
                std::span<const std::vector<std::string>> references, const BleuConfig& config = {});

// Raw text segments, tokenized with the ingest tokenizer first.
BleuReport bleu_text(std::span<const std::string> hypotheses, std::span<const std::string> references,
                     const BleuConfig& config = {}, std::string_view language = {});

struct AnnotationRecord {
  std::string sentence_id;
  std::string system;
  std::string annotator;
  double score = 0.0;  // 0..100
};

struct AnnotationSummary {
  std::string annotator;
  std::string system;
  double mean = 0.0;  // scores scaled to [0, 1]
  double std = 0.0;   // population
  std::size_t count = 0;
};

// TSV `sentence_id<TAB>system<TAB>annotator<TAB>score`.
std::vector<AnnotationRecord> parse_annotations(std::string_view content);

// Grouped by (annotator, system), sorted by annotator then system.
std::vector<AnnotationSummary> aggregate_annotations(std::span<const AnnotationRecord> records);

}  // namespace slt
