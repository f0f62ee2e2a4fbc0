#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "slt/ingest.hpp"

namespace slt {

/// Ordered BPE merge list. Earlier merges have higher priority. When
/// `end_of_word` is set (e.g. "</w>") it is appended to the last character
/// before merging and stripped from the output.
class BpeModel {
 public:
  BpeModel() = default;
  explicit BpeModel(std::vector<std::pair<std::string, std::string>> merges, std::string end_of_word = {});

  // One `left right` pair per line; `#version` headers are skipped. The
  // end-of-word marker is detected from the merges.
  static BpeModel from_text(std::string_view content);

  std::vector<std::string> apply(std::string_view word) const;

  std::size_t size() const { return merges_.size(); }
  const std::string& end_of_word() const { return end_of_word_; }

 private:
  std::optional<std::size_t> rank(const std::string& left, const std::string& right) const;

  std::vector<std::pair<std::string, std::string>> merges_;
  std::unordered_map<std::string, std::size_t> ranks_;
  std::string end_of_word_;
};

std::vector<std::string> apply_bpe(std::string_view word, const BpeModel& model);
std::size_t count_subwords(std::span<const std::string> sentence, const BpeModel& model);

// |target subwords| / |source subwords|.
double subword_ratio(std::span<const std::string> src, std::span<const std::string> tgt, const BpeModel& src_model,
                     const BpeModel& tgt_model);

struct FilterConfig {
  double max_ratio = 0.86;  // inclusive
  std::string source_language;
  std::string target_language;
};

struct FilterResult {
  ParallelCorpus kept;
  std::vector<std::size_t> kept_indices;
  std::vector<double> ratios;  // one per input pair
  std::size_t dropped = 0;
  std::optional<double> mean_kept_ratio;
  std::size_t source_merges = 0;
  std::size_t target_merges = 0;
};

/// Keeps, in order, the pairs whose subword ratio is at most `max_ratio`.
FilterResult filter_corpus(const ParallelCorpus& corpus, const FilterConfig& config, const BpeModel& src_model,
                           const BpeModel& tgt_model);

}  // namespace slt
