#include "slt/shortenfilter.hpp"

#include <cmath>
#include <limits>

#include "slt/error.hpp"
#include "slt/text.hpp"

namespace slt {

namespace {

std::string pair_key(const std::string& left, const std::string& right) { return left + '\x1f' + right; }

}  // namespace

BpeModel::BpeModel(std::vector<std::pair<std::string, std::string>> merges, std::string end_of_word)
    : merges_(std::move(merges)), end_of_word_(std::move(end_of_word)) {
  ranks_.reserve(merges_.size());
  for (std::size_t i = 0; i < merges_.size(); ++i) {
    // The first occurrence of a duplicated merge keeps its priority.
    ranks_.try_emplace(pair_key(merges_[i].first, merges_[i].second), i);
  }
}

BpeModel BpeModel::from_text(std::string_view content) {
  std::vector<std::pair<std::string, std::string>> merges;
  std::string marker;
  std::size_t line_no = 0;
  for (auto line : text::split(content, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (text::trim(line).empty() || line.starts_with("#version")) continue;
    const auto parts = text::split_whitespace(line);
    // fastBPE codes carry a trailing count column.
    if (parts.size() != 2 && parts.size() != 3) {
      fail(ErrorCode::MalformedLine, "merge line " + std::to_string(line_no));
    }
    if (parts[1].ends_with("</w>")) marker = "</w>";
    merges.emplace_back(parts[0], parts[1]);
  }
  return BpeModel(std::move(merges), marker);
}

std::optional<std::size_t> BpeModel::rank(const std::string& left, const std::string& right) const {
  auto it = ranks_.find(pair_key(left, right));
  if (it == ranks_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> BpeModel::apply(std::string_view word) const {
  std::vector<std::string> symbols;
  for (char32_t c : text::decode(word)) symbols.push_back(text::encode(c));
  if (symbols.empty()) return symbols;
  if (!end_of_word_.empty()) symbols.back() += end_of_word_;

  while (symbols.size() > 1) {
    std::optional<std::size_t> best;
    std::size_t best_pos = 0;
    for (std::size_t k = 0; k + 1 < symbols.size(); ++k) {
      const auto r = rank(symbols[k], symbols[k + 1]);
      if (r && (!best || *r < *best)) {
        best = r;
        best_pos = k;
      }
    }
    if (!best) break;
    const std::string left = symbols[best_pos];
    const std::string right = symbols[best_pos + 1];
    std::vector<std::string> merged;
    merged.reserve(symbols.size());
    for (std::size_t k = 0; k < symbols.size(); ++k) {
      if (k + 1 < symbols.size() && symbols[k] == left && symbols[k + 1] == right) {
        merged.push_back(left + right);
        ++k;
      } else {
        merged.push_back(symbols[k]);
      }
    }
    symbols = std::move(merged);
  }
  if (!end_of_word_.empty()) {
    auto& last = symbols.back();
    last.resize(last.size() - end_of_word_.size());
  }
  return symbols;
}

std::vector<std::string> apply_bpe(std::string_view word, const BpeModel& model) { return model.apply(word); }

std::size_t count_subwords(std::span<const std::string> sentence, const BpeModel& model) {
  std::size_t n = 0;
  for (const auto& w : sentence) n += model.apply(w).size();
  return n;
}

double subword_ratio(std::span<const std::string> src, std::span<const std::string> tgt, const BpeModel& src_model,
                     const BpeModel& tgt_model) {
  const auto s = count_subwords(src, src_model);
  if (s == 0) fail(ErrorCode::ZeroSource, "source sentence yields no subwords");
  return static_cast<double>(count_subwords(tgt, tgt_model)) / static_cast<double>(s);
}

FilterResult filter_corpus(const ParallelCorpus& corpus, const FilterConfig& config, const BpeModel& src_model,
                           const BpeModel& tgt_model) {
  if (!(config.max_ratio > 0.0)) fail(ErrorCode::InvalidArgument, "ratio threshold must be positive");
  FilterResult result;
  result.source_merges = src_model.size();
  result.target_merges = tgt_model.size();
  result.ratios.reserve(corpus.size());
  double kept_sum = 0.0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const double r = subword_ratio(corpus[i].source, corpus[i].target, src_model, tgt_model);
    result.ratios.push_back(r);
    if (r <= config.max_ratio) {
      result.kept.push_back(corpus[i]);
      result.kept_indices.push_back(i);
      kept_sum += r;
    } else {
      ++result.dropped;
    }
  }
  if (!result.kept.empty()) result.mean_kept_ratio = kept_sum / static_cast<double>(result.kept.size());
  return result;
}

}  // namespace slt
