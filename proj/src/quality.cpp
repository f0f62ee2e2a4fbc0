#include "slt/quality.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "slt/error.hpp"
#include "slt/ingest.hpp"
#include "slt/stats.hpp"
#include "slt/text.hpp"

namespace slt {

std::string_view to_string(BleuMode mode) { return mode == BleuMode::agg ? "agg" : "one"; }
std::string_view to_string(Smoothing smoothing) { return smoothing == Smoothing::none ? "none" : "add_one"; }

namespace {

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts count_ngrams(const std::vector<std::string>& tokens, int order) {
  NgramCounts counts;
  const auto n = static_cast<std::size_t>(order);
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                      tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

void accumulate(const std::vector<std::string>& hyp, const std::vector<std::string>& ref, BleuReport& report,
                int max_order) {
  report.hyp_length += hyp.size();
  report.ref_length += ref.size();
  for (int n = 1; n <= max_order; ++n) {
    const auto h = count_ngrams(hyp, n);
    const auto r = count_ngrams(ref, n);
    auto& matched = report.matches[static_cast<std::size_t>(n - 1)];
    auto& total = report.totals[static_cast<std::size_t>(n - 1)];
    for (const auto& [gram, c] : h) {
      total += c;
      auto it = r.find(gram);
      if (it != r.end()) matched += std::min(c, it->second);
    }
  }
}

std::vector<std::string> maybe_lower(const std::vector<std::string>& tokens, bool lower) {
  if (!lower) return tokens;
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(text::lowercase(t));
  return out;
}

}  // namespace

BleuReport bleu(std::span<const std::vector<std::string>> hypotheses,
                std::span<const std::vector<std::string>> references, const BleuConfig& config) {
  if (config.max_order < 1) fail(ErrorCode::InvalidArgument, "BLEU order must be >= 1");
  if (hypotheses.size() != references.size()) {
    fail(ErrorCode::LengthMismatch, std::to_string(hypotheses.size()) + " hypotheses vs " +
                                        std::to_string(references.size()) + " references");
  }
  if (references.empty()) fail(ErrorCode::EmptyReference, "no reference segments");
  for (std::size_t i = 0; i < references.size(); ++i) {
    if (references[i].empty()) fail(ErrorCode::EmptyReference, "reference segment " + std::to_string(i) + " is empty");
  }

  BleuReport report;
  report.mode = config.mode;
  const auto orders = static_cast<std::size_t>(config.max_order);
  report.matches.assign(orders, 0);
  report.totals.assign(orders, 0);
  if (config.mode == BleuMode::agg) {
    std::vector<std::string> hyp;
    std::vector<std::string> ref;
    for (std::size_t i = 0; i < hypotheses.size(); ++i) {
      hyp.insert(hyp.end(), hypotheses[i].begin(), hypotheses[i].end());
      ref.insert(ref.end(), references[i].begin(), references[i].end());
    }
    accumulate(maybe_lower(hyp, config.lowercase), maybe_lower(ref, config.lowercase), report, config.max_order);
  } else {
    for (std::size_t i = 0; i < hypotheses.size(); ++i) {
      accumulate(maybe_lower(hypotheses[i], config.lowercase), maybe_lower(references[i], config.lowercase),
                 report, config.max_order);
    }
  }

  report.precisions.assign(orders, 0.0);
  double log_sum = 0.0;
  bool zero = false;
  for (std::size_t k = 0; k < orders; ++k) {
    if (report.totals[k] == 0) continue;
    ++report.effective_order;
    double p = static_cast<double>(report.matches[k]) / static_cast<double>(report.totals[k]);
    if (config.smoothing == Smoothing::add_one && k > 0) {
      p = static_cast<double>(report.matches[k] + 1) / static_cast<double>(report.totals[k] + 1);
    }
    report.precisions[k] = p;
    if (p == 0.0) {
      zero = true;
    } else {
      log_sum += std::log(p);
    }
  }
  const double c = static_cast<double>(report.hyp_length);
  const double r = static_cast<double>(report.ref_length);
  report.brevity_penalty = report.hyp_length == 0 ? 0.0 : (c > r ? 1.0 : std::exp(1.0 - r / c));
  if (zero || report.effective_order == 0) {
    report.score = 0.0;
  } else {
    report.score = 100.0 * report.brevity_penalty * std::exp(log_sum / report.effective_order);
  }
  return report;
}

BleuReport bleu_text(std::span<const std::string> hypotheses, std::span<const std::string> references,
                     const BleuConfig& config, std::string_view language) {
  std::vector<std::vector<std::string>> hyp;
  std::vector<std::vector<std::string>> ref;
  for (const auto& h : hypotheses) hyp.push_back(tokenize(h, language));
  for (const auto& r : references) ref.push_back(tokenize(r, language));
  auto report = bleu(hyp, ref, config);
  report.tokenization = "slt-tokenize";
  return report;
}

std::vector<AnnotationRecord> parse_annotations(std::string_view content) {
  std::vector<AnnotationRecord> out;
  std::size_t line_no = 0;
  for (auto line : text::split(content, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (text::trim(line).empty()) continue;
    const auto cols = text::split(line, '\t');
    AnnotationRecord rec;
    if (cols.size() != 4 || !text::parse_double(cols[3], rec.score)) {
      fail(ErrorCode::MalformedLine, "annotation line " + std::to_string(line_no));
    }
    rec.sentence_id = std::string(text::trim(cols[0]));
    rec.system = std::string(text::trim(cols[1]));
    rec.annotator = std::string(text::trim(cols[2]));
    if (!(rec.score >= 0.0 && rec.score <= 100.0)) {
      fail(ErrorCode::MalformedLine, "annotation line " + std::to_string(line_no) + ": score outside 0..100");
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<AnnotationSummary> aggregate_annotations(std::span<const AnnotationRecord> records) {
  if (records.empty()) fail(ErrorCode::EmptyRecords, "no annotation records");
  std::map<std::pair<std::string, std::string>, std::vector<double>> groups;
  for (const auto& r : records) {
    if (!(r.score >= 0.0 && r.score <= 100.0)) {
      fail(ErrorCode::InvalidArgument, "annotation score outside 0..100");
    }
    groups[{r.annotator, r.system}].push_back(r.score / 100.0);
  }
  std::vector<AnnotationSummary> out;
  out.reserve(groups.size());
  for (auto& [key, scores] : groups) {
    std::sort(scores.begin(), scores.end());  // order-independent sums
    const auto ms = mean_std(scores);
    out.push_back({key.first, key.second, ms.mean, ms.std, ms.n});
  }
  return out;
}

}  // namespace slt
