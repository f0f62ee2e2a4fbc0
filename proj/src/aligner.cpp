#include "slt/aligner.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "slt/error.hpp"
#include "slt/text.hpp"

namespace slt {

std::string_view to_string(AlignmentModel model) {
  return model == AlignmentModel::model1 ? "model1" : "model2_diagonal";
}

AlignmentModel parse_alignment_model(std::string_view name) {
  if (name == "model1") return AlignmentModel::model1;
  if (name == "model2" || name == "model2_diagonal") return AlignmentModel::model2_diagonal;
  fail(ErrorCode::InvalidArgument, "unknown alignment model '" + std::string(name) + "'");
}

std::string_view to_string(Direction direction) {
  switch (direction) {
    case Direction::forward: return "forward";
    case Direction::backward: return "backward";
    case Direction::intersection: return "intersection";
    case Direction::pruned: return "pruned";
    case Direction::composed: return "composed";
  }
  return "forward";
}

// ---------------------------------------------------------------------------
// AlignmentSet

AlignmentSet::AlignmentSet(std::string src_doc, std::string tgt_doc, Direction direction,
                           std::vector<AlignmentLink> links)
    : src_doc_(std::move(src_doc)),
      tgt_doc_(std::move(tgt_doc)),
      direction_(direction),
      links_(std::move(links)) {
  std::sort(links_.begin(), links_.end());
  links_.erase(std::unique(links_.begin(), links_.end()), links_.end());
}

bool AlignmentSet::contains(AlignmentLink link) const {
  return std::binary_search(links_.begin(), links_.end(), link);
}

AlignmentSet AlignmentSet::inverted() const {
  std::vector<AlignmentLink> swapped;
  swapped.reserve(links_.size());
  for (const auto& l : links_) swapped.push_back({l.tgt, l.src});
  return {tgt_doc_, src_doc_, direction_, std::move(swapped)};
}

AlignmentSet AlignmentSet::with_direction(Direction direction) const {
  AlignmentSet out = *this;
  out.direction_ = direction;
  return out;
}

std::string to_pharaoh(const AlignmentSet& set) {
  std::string out;
  for (const auto& l : set.links()) {
    if (!out.empty()) out += ' ';
    out += std::to_string(l.src);
    out += '-';
    out += std::to_string(l.tgt);
  }
  return out;
}

std::vector<AlignmentLink> parse_pharaoh(std::string_view line) {
  std::vector<AlignmentLink> links;
  for (const auto& item : text::split_whitespace(line)) {
    const auto dash = item.find('-');
    double s = 0, t = 0;
    if (dash == std::string::npos || !text::parse_double(std::string_view(item).substr(0, dash), s) ||
        !text::parse_double(std::string_view(item).substr(dash + 1), t) || s < 0 || t < 0 ||
        s != std::floor(s) || t != std::floor(t)) {
      fail(ErrorCode::MalformedLine, "bad Pharaoh link '" + item + "'");
    }
    links.push_back({static_cast<std::size_t>(s), static_cast<std::size_t>(t)});
  }
  return links;
}

// ---------------------------------------------------------------------------
// TranslationTable

TranslationTable::TranslationTable() { add_source(kNullWord); }

std::uint32_t TranslationTable::add_source(std::string_view word) {
  auto [it, inserted] = source_index_.try_emplace(std::string(word), static_cast<std::uint32_t>(source_words_.size()));
  if (inserted) {
    source_words_.emplace_back(word);
    rows_.emplace_back();
  }
  return it->second;
}

std::uint32_t TranslationTable::add_target(std::string_view word) {
  auto [it, inserted] = target_index_.try_emplace(std::string(word), static_cast<std::uint32_t>(target_words_.size()));
  if (inserted) target_words_.emplace_back(word);
  return it->second;
}

void TranslationTable::set_prob(std::uint32_t e, std::uint32_t f, double p) { rows_.at(e)[f] = p; }

void TranslationTable::set_prior(AlignmentModel model, double lambda, double null_prob) {
  if (!(null_prob >= 0.0 && null_prob < 1.0)) {
    fail(ErrorCode::InvalidArgument, "NULL probability must lie in [0, 1)");
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) fail(ErrorCode::InvalidArgument, "lambda must be >= 0");
  model_ = model;
  lambda_ = lambda;
  null_prob_ = null_prob;
}

std::optional<std::uint32_t> TranslationTable::source_id(std::string_view word) const {
  auto it = source_index_.find(std::string(word));
  if (it == source_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::uint32_t> TranslationTable::target_id(std::string_view word) const {
  auto it = target_index_.find(std::string(word));
  if (it == target_index_.end()) return std::nullopt;
  return it->second;
}

double TranslationTable::prob(std::uint32_t e, std::uint32_t f) const {
  if (e >= rows_.size()) return 0.0;
  const auto& row = rows_[e];
  auto it = row.find(f);
  return it == row.end() ? 0.0 : it->second;
}

double TranslationTable::prob(std::string_view e, std::string_view f) const {
  const auto ei = source_id(e);
  const auto fi = target_id(f);
  if (!ei || !fi) return 0.0;
  return prob(*ei, *fi);
}

double TranslationTable::row_sum(std::uint32_t e) const {
  double s = 0.0;
  for (const auto& [f, p] : rows_.at(e)) s += p;
  return s;
}

double diagonal_partition(std::size_t j, std::size_t n, std::size_t m, double lambda) {
  const double jp = static_cast<double>(j + 1) / static_cast<double>(n);
  const std::size_t below = ((j + 1) * m) / n;  // positions with (i+1)/m <= (j+1)/n
  const double md = static_cast<double>(m);
  auto geometric = [&](std::size_t count) {
    if (count == 0) return 0.0;
    if (lambda == 0.0) return static_cast<double>(count);
    return std::expm1(-lambda * static_cast<double>(count) / md) / std::expm1(-lambda / md);
  };
  double z = 0.0;
  if (below > 0) {
    z += std::exp(-lambda * (jp - static_cast<double>(below) / md)) * geometric(below);
  }
  if (below < m) {
    z += std::exp(-lambda * (static_cast<double>(below + 1) / md - jp)) * geometric(m - below);
  }
  return z;
}

namespace {

double diagonal_distance(std::size_t i, std::size_t j, std::size_t m, std::size_t n) {
  return std::abs(static_cast<double>(i + 1) / static_cast<double>(m) -
                  static_cast<double>(j + 1) / static_cast<double>(n));
}

}  // namespace

double TranslationTable::position_prior(std::size_t i, std::size_t j, std::size_t m, std::size_t n) const {
  if (m == 0 || n == 0 || i >= m || j >= n) return 0.0;
  const double share = 1.0 - null_prob_;
  if (model_ == AlignmentModel::model1) return share / static_cast<double>(m);
  return share * std::exp(-lambda_ * diagonal_distance(i, j, m, n)) / diagonal_partition(j, n, m, lambda_);
}

std::string TranslationTable::to_tsv() const {
  std::string out;
  out += "# model=" + std::string(to_string(model_)) + "\n";
  out += "# lambda=" + text::format_double(lambda_) + "\n";
  out += "# null_prob=" + text::format_double(null_prob_) + "\n";
  for (std::uint32_t e = 0; e < rows_.size(); ++e) {
    std::vector<std::pair<std::string_view, double>> entries;
    entries.reserve(rows_[e].size());
    for (const auto& [f, p] : rows_[e]) entries.emplace_back(target_words_[f], p);
    std::sort(entries.begin(), entries.end());
    for (const auto& [f, p] : entries) {
      out += source_words_[e];
      out += '\t';
      out += f;
      out += '\t';
      out += text::format_double(p);
      out += '\n';
    }
  }
  return out;
}

TranslationTable TranslationTable::from_tsv(std::string_view content) {
  TranslationTable table;
  AlignmentModel model = AlignmentModel::model1;
  double lambda = 0.0;
  double null_prob = 0.08;
  std::size_t line_no = 0;
  for (auto line : text::split(content, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (text::trim(line).empty()) continue;
    if (line.front() == '#') {
      const auto body = text::trim(line.substr(1));
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) continue;
      const auto key = body.substr(0, eq);
      const auto value = body.substr(eq + 1);
      if (key == "model") model = parse_alignment_model(value);
      if (key == "lambda" && !text::parse_double(value, lambda)) fail(ErrorCode::MalformedLine, "bad lambda");
      if (key == "null_prob" && !text::parse_double(value, null_prob)) {
        fail(ErrorCode::MalformedLine, "bad null_prob");
      }
      continue;
    }
    const auto cols = text::split(line, '\t');
    double p = 0.0;
    if (cols.size() != 3 || !text::parse_double(cols[2], p) || p < 0.0 || p > 1.0) {
      fail(ErrorCode::MalformedLine, "translation table line " + std::to_string(line_no));
    }
    const auto e = table.add_source(cols[0]);
    const auto f = table.add_target(cols[1]);
    table.set_prob(e, f, p);
  }
  table.set_prior(model, lambda, null_prob);
  return table;
}

// ---------------------------------------------------------------------------
// EM training

namespace {

struct EncodedPair {
  std::vector<std::uint32_t> src;
  std::vector<std::uint32_t> tgt;
  // Distinct ids and the local slot of each position.
  std::vector<std::uint32_t> src_types;
  std::vector<std::uint32_t> tgt_types;
  std::vector<std::uint32_t> src_slot;
  std::vector<std::uint32_t> tgt_slot;
};

void index_types(const std::vector<std::uint32_t>& ids, std::vector<std::uint32_t>& types,
                 std::vector<std::uint32_t>& slots) {
  std::unordered_map<std::uint32_t, std::uint32_t> local;
  slots.reserve(ids.size());
  for (auto id : ids) {
    auto [it, inserted] = local.try_emplace(id, static_cast<std::uint32_t>(types.size()));
    if (inserted) types.push_back(id);
    slots.push_back(it->second);
  }
}

// Sufficient statistics for re-estimating lambda: total posterior mass on
// non-NULL links at each (m, n, j) shape.
struct PositionStats {
  double weighted_distance = 0.0;
  std::map<std::tuple<std::size_t, std::size_t, std::size_t>, double> mass;
};

struct EStepResult {
  double log_likelihood = 0.0;
  PositionStats positions;
};

using CountRows = std::vector<std::unordered_map<std::uint32_t, double>>;

// One pass over the corpus. When `counts` is non-null, posterior link counts
// are accumulated into it (in fixed corpus order).
EStepResult e_step(const std::vector<EncodedPair>& pairs, const TranslationTable& table,
                   CountRows* counts) {
  EStepResult result;
  const double p0 = table.null_prob();
  const bool diagonal = table.model() == AlignmentModel::model2_diagonal;
  std::vector<double> t_local;
  std::vector<double> c_local;
  std::vector<double> null_t;
  std::vector<double> null_c;
  std::vector<double> prior;
  std::vector<double> scores;
  for (const auto& pair : pairs) {
    const std::size_t m = pair.src.size();
    const std::size_t n = pair.tgt.size();
    const std::size_t us = pair.src_types.size();
    const std::size_t ut = pair.tgt_types.size();
    t_local.assign(us * ut, 0.0);
    null_t.assign(ut, 0.0);
    for (std::size_t a = 0; a < us; ++a) {
      for (std::size_t b = 0; b < ut; ++b) t_local[a * ut + b] = table.prob(pair.src_types[a], pair.tgt_types[b]);
    }
    for (std::size_t b = 0; b < ut; ++b) null_t[b] = table.prob(TranslationTable::kNullId, pair.tgt_types[b]);
    if (counts) {
      c_local.assign(us * ut, 0.0);
      null_c.assign(ut, 0.0);
    }
    prior.resize(m);
    scores.resize(m);
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t b = pair.tgt_slot[j];
      if (diagonal) {
        const double z = diagonal_partition(j, n, m, table.lambda());
        for (std::size_t i = 0; i < m; ++i) {
          prior[i] = (1.0 - p0) * std::exp(-table.lambda() * diagonal_distance(i, j, m, n)) / z;
        }
      } else {
        std::fill(prior.begin(), prior.end(), (1.0 - p0) / static_cast<double>(m));
      }
      const double null_score = p0 * null_t[b];
      double total = null_score;
      for (std::size_t i = 0; i < m; ++i) {
        scores[i] = prior[i] * t_local[pair.src_slot[i] * ut + b];
        total += scores[i];
      }
      if (!(total > 0.0)) continue;
      result.log_likelihood += std::log(total);
      if (!counts) continue;
      null_c[b] += null_score / total;
      double linked = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const double g = scores[i] / total;
        c_local[pair.src_slot[i] * ut + b] += g;
        linked += g;
        if (diagonal) result.positions.weighted_distance += g * diagonal_distance(i, j, m, n);
      }
      if (diagonal) result.positions.mass[{m, n, j}] += linked;
    }
    if (counts) {
      for (std::size_t a = 0; a < us; ++a) {
        auto& row = (*counts)[pair.src_types[a]];
        for (std::size_t b = 0; b < ut; ++b) {
          if (c_local[a * ut + b] != 0.0) row[pair.tgt_types[b]] += c_local[a * ut + b];
        }
      }
      auto& row = (*counts)[TranslationTable::kNullId];
      for (std::size_t b = 0; b < ut; ++b) {
        if (null_c[b] != 0.0) row[pair.tgt_types[b]] += null_c[b];
      }
    }
  }
  return result;
}

// Expected complete-data log-likelihood of the positional prior, up to a
// constant independent of lambda.
double lambda_objective(const PositionStats& stats, double lambda) {
  double q = -lambda * stats.weighted_distance;
  for (const auto& [shape, mass] : stats.mass) {
    const auto& [m, n, j] = shape;
    q -= mass * std::log(diagonal_partition(j, n, m, lambda));
  }
  return q;
}

double maximize_lambda(const PositionStats& stats, double current) {
  // The objective is concave in lambda (linear minus log-sum-exp).
  constexpr double kMax = 100.0;
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = 0.0;
  double hi = std::max(kMax, current);
  double x1 = hi - phi * (hi - lo);
  double x2 = lo + phi * (hi - lo);
  double f1 = lambda_objective(stats, x1);
  double f2 = lambda_objective(stats, x2);
  for (int it = 0; it < 100 && hi - lo > 1e-9; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = lambda_objective(stats, x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = lambda_objective(stats, x1);
    }
  }
  const double candidate = 0.5 * (lo + hi);
  return lambda_objective(stats, candidate) >= lambda_objective(stats, current) ? candidate : current;
}

}  // namespace

TranslationTable train_em(const ParallelCorpus& corpus, const EmOptions& options) {
  if (corpus.empty()) fail(ErrorCode::EmptyCorpus, "cannot train on an empty corpus");
  if (options.iterations < 1) fail(ErrorCode::InvalidArgument, "iterations must be >= 1");

  TranslationTable table;
  table.set_prior(options.model, options.model == AlignmentModel::model2_diagonal ? options.initial_lambda : 0.0,
                  options.null_prob);

  std::vector<EncodedPair> pairs;
  pairs.reserve(corpus.size());
  for (const auto& sp : corpus) {
    if (sp.source.empty() || sp.target.empty()) continue;
    EncodedPair p;
    for (const auto& w : sp.source) p.src.push_back(table.add_source(w));
    for (const auto& w : sp.target) p.tgt.push_back(table.add_target(w));
    index_types(p.src, p.src_types, p.src_slot);
    index_types(p.tgt, p.tgt_types, p.tgt_slot);
    pairs.push_back(std::move(p));
  }
  if (pairs.empty()) fail(ErrorCode::EmptyCorpus, "corpus has no pair with both sides nonempty");

  // Uniform initialization over co-occurring targets; NULL over all targets.
  std::vector<std::set<std::uint32_t>> cooc(table.source_vocab_size());
  for (const auto& p : pairs) {
    for (auto e : p.src_types) cooc[e].insert(p.tgt_types.begin(), p.tgt_types.end());
  }
  for (std::uint32_t e = 1; e < cooc.size(); ++e) {
    const double u = 1.0 / static_cast<double>(cooc[e].size());
    for (auto f : cooc[e]) table.set_prob(e, f, u);
  }
  const double u_null = 1.0 / static_cast<double>(table.target_vocab_size());
  for (std::uint32_t f = 0; f < table.target_vocab_size(); ++f) table.set_prob(TranslationTable::kNullId, f, u_null);

  for (int iter = 0; iter < options.iterations; ++iter) {
    CountRows counts(table.source_vocab_size());
    const auto stats = e_step(pairs, table, &counts);
    table.log_likelihood_.push_back(stats.log_likelihood);
    for (std::uint32_t e = 0; e < counts.size(); ++e) {
      double total = 0.0;
      for (const auto& [f, c] : counts[e]) total += c;
      if (!(total > 0.0)) continue;  // row keeps its previous distribution
      auto& row = table.rows_[e];
      for (auto& [f, p] : row) {
        auto it = counts[e].find(f);
        p = it == counts[e].end() ? 0.0 : it->second / total;
      }
    }
    if (options.model == AlignmentModel::model2_diagonal && options.optimize_lambda) {
      table.lambda_ = maximize_lambda(stats.positions, table.lambda_);
    }
  }
  table.log_likelihood_.push_back(e_step(pairs, table, nullptr).log_likelihood);
  return table;
}

// ---------------------------------------------------------------------------
// Link operations

AlignmentSet align_viterbi(const TranslationTable& table, std::span<const std::string> src,
                           std::span<const std::string> tgt, std::string src_doc, std::string tgt_doc,
                           Direction direction) {
  std::vector<AlignmentLink> links;
  const std::size_t m = src.size();
  const std::size_t n = tgt.size();
  std::vector<std::optional<std::uint32_t>> src_ids;
  src_ids.reserve(m);
  for (const auto& w : src) src_ids.push_back(table.source_id(w));
  for (std::size_t j = 0; j < n; ++j) {
    const auto f = table.target_id(tgt[j]);
    if (!f) continue;
    const double null_score = table.null_prob() * table.prob(TranslationTable::kNullId, *f);
    double best = 0.0;
    std::size_t best_i = m;
    for (std::size_t i = 0; i < m; ++i) {
      if (!src_ids[i]) continue;
      const double t = table.prob(*src_ids[i], *f);
      if (t == 0.0) continue;
      const double score = table.position_prior(i, j, m, n) * t;
      if (score > best) {
        best = score;
        best_i = i;
      }
    }
    if (best_i < m && best > null_score) links.push_back({best_i, j});
  }
  return {std::move(src_doc), std::move(tgt_doc), direction, std::move(links)};
}

namespace {

void require_same_docs(const AlignmentSet& a, const AlignmentSet& b) {
  if (a.src_doc() != b.src_doc() || a.tgt_doc() != b.tgt_doc()) {
    fail(ErrorCode::DocMismatch, "alignment sets refer to (" + a.src_doc() + ", " + a.tgt_doc() +
                                     ") and (" + b.src_doc() + ", " + b.tgt_doc() + ")");
  }
}

}  // namespace

AlignmentSet intersect(const AlignmentSet& forward, const AlignmentSet& backward) {
  require_same_docs(forward, backward);
  std::vector<AlignmentLink> common;
  std::set_intersection(forward.links().begin(), forward.links().end(), backward.links().begin(),
                        backward.links().end(), std::back_inserter(common));
  return {forward.src_doc(), forward.tgt_doc(), Direction::intersection, std::move(common)};
}

AlignmentSet prune_time_regressive(const AlignmentSet& links, const TimedTranscript& src,
                                   const TimedTranscript& tgt, PruneReference reference) {
  if (links.src_doc() != src.doc_id || links.tgt_doc() != tgt.doc_id) {
    fail(ErrorCode::DocMismatch, "links (" + links.src_doc() + ", " + links.tgt_doc() +
                                     ") do not match transcripts (" + src.doc_id + ", " + tgt.doc_id + ")");
  }
  std::vector<AlignmentLink> kept;
  kept.reserve(links.size());
  for (const auto& l : links.links()) {
    if (l.src >= src.size() || l.tgt >= tgt.size()) {
      fail(ErrorCode::IndexOutOfRange,
           "link " + std::to_string(l.src) + "-" + std::to_string(l.tgt) + " outside the transcripts");
    }
    const auto& s = src.words[l.src];
    const double bound = reference == PruneReference::source_start ? s.start : s.end;
    if (tgt.words[l.tgt].start < bound) continue;
    kept.push_back(l);
  }
  return {links.src_doc(), links.tgt_doc(), Direction::pruned, std::move(kept)};
}

AlignmentSet compose(const AlignmentSet& a_xy, const AlignmentSet& a_yz) {
  if (a_xy.tgt_doc() != a_yz.src_doc()) {
    fail(ErrorCode::DocMismatch,
         "cannot compose: middle documents '" + a_xy.tgt_doc() + "' and '" + a_yz.src_doc() + "' differ");
  }
  std::vector<AlignmentLink> out;
  const auto& right = a_yz.links();  // sorted by (src, tgt)
  for (const auto& l : a_xy.links()) {
    auto it = std::lower_bound(right.begin(), right.end(), AlignmentLink{l.tgt, 0});
    for (; it != right.end() && it->src == l.tgt; ++it) out.push_back({l.src, it->tgt});
  }
  return {a_xy.src_doc(), a_yz.tgt_doc(), Direction::composed, std::move(out)};
}

std::vector<std::string> alignment_tokens(std::span<const std::string> tokens, const AlignerOptions& options,
                                          std::string_view language) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    out.push_back(trim_lemma(options.lowercase ? text::lowercase(t, language) : t, options.trim));
  }
  return out;
}

DocumentAlignment align_documents(std::span<const TimedTranscript> src, std::span<const TimedTranscript> tgt,
                                  const ParallelCorpus& extra, const AlignerOptions& options) {
  if (src.size() != tgt.size()) {
    fail(ErrorCode::LengthMismatch, "need the same number of source and target documents");
  }
  std::vector<std::vector<std::string>> src_tokens;
  std::vector<std::vector<std::string>> tgt_tokens;
  ParallelCorpus forward_corpus;
  for (std::size_t d = 0; d < src.size(); ++d) {
    src_tokens.push_back(alignment_tokens(src[d].surfaces(), options, src[d].language));
    tgt_tokens.push_back(alignment_tokens(tgt[d].surfaces(), options, tgt[d].language));
    if (!src_tokens.back().empty() && !tgt_tokens.back().empty()) {
      forward_corpus.push_back({src_tokens.back(), tgt_tokens.back()});
    }
  }
  for (const auto& sp : extra) {
    forward_corpus.push_back({alignment_tokens(sp.source, options), alignment_tokens(sp.target, options)});
  }
  ParallelCorpus backward_corpus;
  backward_corpus.reserve(forward_corpus.size());
  for (const auto& sp : forward_corpus) backward_corpus.push_back({sp.target, sp.source});

  DocumentAlignment result{train_em(forward_corpus, options.em), train_em(backward_corpus, options.em), {}, {}, {}};
  for (std::size_t d = 0; d < src.size(); ++d) {
    auto fwd = align_viterbi(result.forward, src_tokens[d], tgt_tokens[d], src[d].doc_id, tgt[d].doc_id,
                             Direction::forward);
    auto bwd = align_viterbi(result.backward, tgt_tokens[d], src_tokens[d], tgt[d].doc_id, src[d].doc_id,
                             Direction::backward)
                   .inverted();
    AlignmentSet links;
    if (options.prune && options.prune_before_intersection) {
      links = intersect(prune_time_regressive(fwd, src[d], tgt[d], options.prune_reference),
                        prune_time_regressive(bwd, src[d], tgt[d], options.prune_reference))
                  .with_direction(Direction::pruned);
    } else {
      links = intersect(fwd, bwd);
      if (options.prune) links = prune_time_regressive(links, src[d], tgt[d], options.prune_reference);
    }
    result.forward_links.push_back(std::move(fwd));
    result.backward_links.push_back(std::move(bwd));
    result.links.push_back(std::move(links));
  }
  return result;
}

}  // namespace slt
