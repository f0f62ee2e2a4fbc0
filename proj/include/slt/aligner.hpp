#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "slt/ingest.hpp"

namespace slt {

enum class AlignmentModel { model1, model2_diagonal };
enum class Direction { forward, backward, intersection, pruned, composed };

std::string_view to_string(AlignmentModel model);
AlignmentModel parse_alignment_model(std::string_view name);
std::string_view to_string(Direction direction);

struct AlignmentLink {
  std::size_t src = 0;
  std::size_t tgt = 0;

  auto operator<=>(const AlignmentLink&) const = default;
};

// Sorted, duplicate-free link set between two documents.
class AlignmentSet {
 public:
  AlignmentSet() = default;
  AlignmentSet(std::string src_doc, std::string tgt_doc, Direction direction,
               std::vector<AlignmentLink> links);

  const std::string& src_doc() const { return src_doc_; }
  const std::string& tgt_doc() const { return tgt_doc_; }
  Direction direction() const { return direction_; }
  const std::vector<AlignmentLink>& links() const { return links_; }

  std::size_t size() const { return links_.size(); }
  bool empty() const { return links_.empty(); }
  bool contains(AlignmentLink link) const;

  // Same links with source and target roles swapped.
  AlignmentSet inverted() const;
  AlignmentSet with_direction(Direction direction) const;

  bool operator==(const AlignmentSet&) const = default;

 private:
  std::string src_doc_;
  std::string tgt_doc_;
  Direction direction_ = Direction::forward;
  std::vector<AlignmentLink> links_;
};

// Pharaoh format: space separated `src-tgt` pairs on one line.
std::string to_pharaoh(const AlignmentSet& set);
std::vector<AlignmentLink> parse_pharaoh(std::string_view line);

struct EmOptions {
  AlignmentModel model = AlignmentModel::model2_diagonal;
  int iterations = 5;
  // Prior probability that a target word is generated by NULL.
  double null_prob = 0.08;
  // Diagonal tension, decay rate of exp(-lambda * |i/m - j/n|).
  double initial_lambda = 4.0;
  bool optimize_lambda = true;
};

/// Lexical table t(f|e) plus the alignment prior it was trained with.
/// Source id 0 is the NULL word.
class TranslationTable {
 public:
  static constexpr std::string_view kNullWord = "<NULL>";
  static constexpr std::uint32_t kNullId = 0;

  TranslationTable();

  double prob(std::string_view e, std::string_view f) const;
  double prob(std::uint32_t e, std::uint32_t f) const;

  std::optional<std::uint32_t> source_id(std::string_view word) const;
  std::optional<std::uint32_t> target_id(std::string_view word) const;
  const std::string& source_word(std::uint32_t id) const { return source_words_.at(id); }
  const std::string& target_word(std::uint32_t id) const { return target_words_.at(id); }
  std::size_t source_vocab_size() const { return source_words_.size(); }
  std::size_t target_vocab_size() const { return target_words_.size(); }

  const std::unordered_map<std::uint32_t, double>& row(std::uint32_t e) const { return rows_.at(e); }
  double row_sum(std::uint32_t e) const;

  AlignmentModel model() const { return model_; }
  double lambda() const { return lambda_; }
  double null_prob() const { return null_prob_; }
  // Corpus log-likelihood before the first and after every EM iteration.
  const std::vector<double>& log_likelihood() const { return log_likelihood_; }

  // Alignment prior a(i|j) for source position i (0-based, excluding NULL),
  // target position j, source length m, target length n. Sums to 1 - null_prob over i.
  double position_prior(std::size_t i, std::size_t j, std::size_t m, std::size_t n) const;

  /// TSV `e<TAB>f<TAB>prob`, preceded by `#` lines holding the prior.
  std::string to_tsv() const;
  static TranslationTable from_tsv(std::string_view content);

  // Builder used by training and deserialization.
  std::uint32_t add_source(std::string_view word);
  std::uint32_t add_target(std::string_view word);
  void set_prob(std::uint32_t e, std::uint32_t f, double p);
  void set_prior(AlignmentModel model, double lambda, double null_prob);

 private:
  friend TranslationTable train_em(const ParallelCorpus&, const EmOptions&);

  AlignmentModel model_ = AlignmentModel::model1;
  double lambda_ = 0.0;
  double null_prob_ = 0.08;
  std::vector<std::string> source_words_;
  std::vector<std::string> target_words_;
  std::unordered_map<std::string, std::uint32_t> source_index_;
  std::unordered_map<std::string, std::uint32_t> target_index_;
  std::vector<std::unordered_map<std::uint32_t, double>> rows_;
  std::vector<double> log_likelihood_;
};

/// EM training of t(f|e) on `corpus` (source = conditioning side). Rows of
/// source words are initialized uniformly over their co-occurring target
/// words. With model2_diagonal the tension lambda is re-estimated each
/// iteration by maximizing the expected complete-data log-likelihood, which
/// keeps the corpus log-likelihood non-decreasing.
TranslationTable train_em(const ParallelCorpus& corpus, const EmOptions& options = {});

// Sum over source positions of exp(-lambda * |(i+1)/m - (j+1)/n|), closed form.
double diagonal_partition(std::size_t j, std::size_t n, std::size_t m, double lambda);

/// Links every target position to its most probable source position, or to
/// nothing when NULL wins or the target word is unknown. Ties go to the
/// smaller source index.
AlignmentSet align_viterbi(const TranslationTable& table, std::span<const std::string> src,
                           std::span<const std::string> tgt, std::string src_doc = {},
                           std::string tgt_doc = {}, Direction direction = Direction::forward);

AlignmentSet intersect(const AlignmentSet& forward, const AlignmentSet& backward);

enum class PruneReference { source_start, source_end };

/// Drops links whose target word starts before the source word's start (or
/// end, with PruneReference::source_end). Equal times are kept.
AlignmentSet prune_time_regressive(const AlignmentSet& links, const TimedTranscript& src,
                                   const TimedTranscript& tgt,
                                   PruneReference reference = PruneReference::source_start);

// Relational composition {(i,k) : (i,j) in a_xy and (j,k) in a_yz}.
AlignmentSet compose(const AlignmentSet& a_xy, const AlignmentSet& a_yz);

struct AlignerOptions {
  EmOptions em;
  std::size_t trim = 5;
  bool lowercase = true;
  bool prune = true;
  PruneReference prune_reference = PruneReference::source_start;
  bool prune_before_intersection = false;
};

// Token preparation for alignment: optional lowercasing, then trim_lemma.
std::vector<std::string> alignment_tokens(std::span<const std::string> tokens,
                                          const AlignerOptions& options,
                                          std::string_view language = {});

struct DocumentAlignment {
  TranslationTable forward;
  TranslationTable backward;
  // One entry per document pair, in input order.
  std::vector<AlignmentSet> forward_links;
  std::vector<AlignmentSet> backward_links;
  std::vector<AlignmentSet> links;
};

/// Whole-document alignment: every document pair is one training sentence,
/// concatenated with `extra` sentence pairs. Forward and backward tables are
/// trained, Viterbi links intersected and (optionally) time-pruned.
DocumentAlignment align_documents(std::span<const TimedTranscript> src,
                                  std::span<const TimedTranscript> tgt, const ParallelCorpus& extra,
                                  const AlignerOptions& options = {});

}  // namespace slt
