#pragma once

#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "slt/ingest.hpp"
#include "slt/stats.hpp"

namespace slt {

/// Orthographic syllable estimate: count maximal vowel clusters, plus
/// syllabic consonants standing between consonants (Czech r, l).
struct SyllableRule {
  std::string language;
  std::set<char32_t> vowels;
  std::set<char32_t> syllabic_consonants;
  // English: a final lone `e` after a consonant is silent unless it is the
  // only nucleus or ends a consonant + "le" cluster.
  bool silent_final_e = false;

  // Rules for en, cs and de; any other tag gets a generic Latin rule.
  static SyllableRule for_language(std::string_view language);
};

std::size_t count_syllables(std::string_view word, const SyllableRule& rule);
std::size_t count_syllables(std::span<const std::string> words, const SyllableRule& rule);
// Code points excluding whitespace.
std::size_t count_characters(std::span<const std::string> words);

struct CompressionRatio {
  double syllable_ratio = 0.0;
  double char_ratio = 0.0;
};

// Target total over source total, for syllables and characters.
CompressionRatio compression(std::span<const std::string> src, std::string_view src_language,
                             std::span<const std::string> tgt, std::string_view tgt_language);

struct CompressionSample {
  std::string doc_id;
  CompressionRatio ratio;
};

// Per-document ratios averaged over documents.
struct CompressionReport {
  std::vector<CompressionSample> documents;
  MeanStd syllables;
  MeanStd characters;
};

CompressionReport compression_report(std::vector<CompressionSample> documents);

/// Word -> frequency rank, 1 = most frequent. Ranks form a bijection onto 1..V.
class RankTable {
 public:
  RankTable() = default;
  // `words` in rank order.
  explicit RankTable(std::vector<std::string> words);

  std::optional<std::size_t> rank(std::string_view word) const;
  std::size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }

  // TSV `word<TAB>rank`.
  std::string to_tsv() const;
  static RankTable from_tsv(std::string_view content);

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t> ranks_;
};

// Ranks by descending frequency, ties broken lexicographically. Symbols in
// `strip` are removed first.
RankTable build_rank_table(std::span<const std::string> corpus,
                           const std::set<std::string, std::less<>>& strip = default_stripped_symbols());

enum class OovPolicy { exclude, rank_v_plus_one };

struct ComplexityOptions {
  OovPolicy oov = OovPolicy::exclude;
  // Logarithm base; natural log when unset.
  std::optional<double> log_base;
  std::set<std::string, std::less<>> strip = default_stripped_symbols();
};

struct ComplexityReport {
  double mean = 0.0;
  double std = 0.0;
  bool mean_defined = false;
  std::size_t sample_size = 0;  // words entering mean/std
  std::size_t in_vocabulary = 0;
  std::size_t oov = 0;
  double oov_proportion = 0.0;
  std::string log_base = "e";
};

ComplexityReport log_rank_stats(std::span<const std::string> text, const RankTable& table,
                                const ComplexityOptions& options = {});

struct SampleSummary {
  double mean = 0.0;
  double std = 0.0;
  std::size_t n = 0;
};

struct ZTestResult {
  double z = 0.0;
  double p = 1.0;  // two-sided
};

ZTestResult two_sample_z(const SampleSummary& a, const SampleSummary& b);

// Standard normal CDF.
double normal_cdf(double x);

}  // namespace slt
