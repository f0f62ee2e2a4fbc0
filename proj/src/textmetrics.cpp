#include "slt/textmetrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "slt/error.hpp"
#include "slt/text.hpp"

namespace slt {

namespace {

std::set<char32_t> to_set(std::u32string_view chars) { return {chars.begin(), chars.end()}; }

std::string_view primary_subtag(std::string_view language) {
  return language.substr(0, std::min(language.find_first_of("-_"), language.size()));
}

}  // namespace

SyllableRule SyllableRule::for_language(std::string_view language) {
  SyllableRule rule;
  rule.language = std::string(language);
  const auto primary = text::lowercase(primary_subtag(language));
  if (primary == "en") {
    rule.vowels = to_set(U"aeiouy");
    rule.silent_final_e = true;
  } else if (primary == "cs") {
    rule.vowels = to_set(U"aáeéěiíoóuúůyý");
    rule.syllabic_consonants = to_set(U"rl");
  } else if (primary == "de") {
    rule.vowels = to_set(U"aeiouyäöü");
  } else {
    rule.vowels = to_set(U"aeiouyàáâãäåæèéêëěìíîïòóôõöøœùúûüůýÿ");
  }
  return rule;
}

std::size_t count_syllables(std::string_view word, const SyllableRule& rule) {
  std::vector<char32_t> cps = text::decode(text::nfc(word));
  for (auto& c : cps) c = text::lowercase(c);
  auto is_vowel = [&](char32_t c) { return rule.vowels.contains(c); };
  auto is_consonant = [&](char32_t c) { return text::is_letter(c) && !is_vowel(c); };

  std::size_t count = 0;
  std::size_t last_cluster_start = 0;
  bool in_cluster = false;
  for (std::size_t i = 0; i < cps.size(); ++i) {
    const char32_t c = cps[i];
    if (is_vowel(c)) {
      if (!in_cluster) {
        ++count;
        last_cluster_start = i;
      }
      in_cluster = true;
      continue;
    }
    in_cluster = false;
    if (rule.syllabic_consonants.contains(c) && i > 0 && is_consonant(cps[i - 1]) &&
        (i + 1 == cps.size() || is_consonant(cps[i + 1]))) {
      ++count;
    }
  }
  if (rule.silent_final_e && count > 1 && cps.size() >= 2 && cps.back() == U'e' &&
      last_cluster_start == cps.size() - 1) {
    const bool le_ending = cps.size() >= 3 && cps[cps.size() - 2] == U'l' && is_consonant(cps[cps.size() - 3]);
    if (is_consonant(cps[cps.size() - 2]) && !le_ending) --count;
  }
  return count;
}

std::size_t count_syllables(std::span<const std::string> words, const SyllableRule& rule) {
  std::size_t total = 0;
  for (const auto& w : words) {
    if (!w.empty()) total += count_syllables(w, rule);
  }
  return total;
}

std::size_t count_characters(std::span<const std::string> words) {
  std::size_t total = 0;
  for (const auto& w : words) {
    for (char32_t c : text::decode(w)) {
      if (!text::is_space(c)) ++total;
    }
  }
  return total;
}

CompressionRatio compression(std::span<const std::string> src, std::string_view src_language,
                             std::span<const std::string> tgt, std::string_view tgt_language) {
  const auto src_syl = count_syllables(src, SyllableRule::for_language(src_language));
  const auto src_chr = count_characters(src);
  if (src_syl == 0 || src_chr == 0) fail(ErrorCode::ZeroSource, "source has no syllables or characters");
  const auto tgt_syl = count_syllables(tgt, SyllableRule::for_language(tgt_language));
  const auto tgt_chr = count_characters(tgt);
  return {static_cast<double>(tgt_syl) / static_cast<double>(src_syl),
          static_cast<double>(tgt_chr) / static_cast<double>(src_chr)};
}

CompressionReport compression_report(std::vector<CompressionSample> documents) {
  CompressionReport report;
  std::vector<double> syl;
  std::vector<double> chr;
  for (const auto& d : documents) {
    syl.push_back(d.ratio.syllable_ratio);
    chr.push_back(d.ratio.char_ratio);
  }
  report.syllables = mean_std(syl);
  report.characters = mean_std(chr);
  report.documents = std::move(documents);
  return report;
}

// ---------------------------------------------------------------------------

RankTable::RankTable(std::vector<std::string> words) : words_(std::move(words)) {
  ranks_.reserve(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (!ranks_.emplace(words_[i], i + 1).second) {
      fail(ErrorCode::InvalidArgument, "word '" + words_[i] + "' ranked twice");
    }
  }
}

std::optional<std::size_t> RankTable::rank(std::string_view word) const {
  auto it = ranks_.find(std::string(word));
  if (it == ranks_.end()) return std::nullopt;
  return it->second;
}

std::string RankTable::to_tsv() const {
  std::string out;
  for (std::size_t i = 0; i < words_.size(); ++i) {
    out += words_[i];
    out += '\t';
    out += std::to_string(i + 1);
    out += '\n';
  }
  return out;
}

RankTable RankTable::from_tsv(std::string_view content) {
  std::map<std::size_t, std::string> by_rank;
  std::size_t line_no = 0;
  for (auto line : text::split(content, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (text::trim(line).empty()) continue;
    const auto cols = text::split(line, '\t');
    double r = 0;
    if (cols.size() != 2 || cols[0].empty() || !text::parse_double(cols[1], r) || r < 1 || r != std::floor(r)) {
      fail(ErrorCode::MalformedLine, "rank table line " + std::to_string(line_no));
    }
    if (!by_rank.emplace(static_cast<std::size_t>(r), std::string(cols[0])).second) {
      fail(ErrorCode::MalformedLine, "rank " + std::string(cols[1]) + " appears twice");
    }
  }
  std::vector<std::string> words;
  words.reserve(by_rank.size());
  for (auto& [r, w] : by_rank) {
    if (r != words.size() + 1) fail(ErrorCode::MalformedLine, "ranks are not contiguous from 1");
    words.push_back(std::move(w));
  }
  return RankTable(std::move(words));
}

RankTable build_rank_table(std::span<const std::string> corpus, const std::set<std::string, std::less<>>& strip) {
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& t : corpus) {
    if (t.empty() || strip.contains(t)) continue;
    ++counts[t];
  }
  if (counts.empty()) fail(ErrorCode::EmptyCorpus, "frequency corpus has no words");
  std::vector<std::pair<std::string, std::size_t>> entries(counts.begin(), counts.end());
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> words;
  words.reserve(entries.size());
  for (auto& e : entries) words.push_back(std::move(e.first));
  return RankTable(std::move(words));
}

ComplexityReport log_rank_stats(std::span<const std::string> text_tokens, const RankTable& table,
                                const ComplexityOptions& options) {
  if (table.size() == 0) fail(ErrorCode::InvalidArgument, "rank table is empty");
  if (options.log_base && !(*options.log_base > 0.0 && *options.log_base != 1.0)) {
    fail(ErrorCode::InvalidArgument, "log base must be positive and not 1");
  }
  ComplexityReport report;
  report.log_base = options.log_base ? text::format_double(*options.log_base) : "e";
  const double divisor = options.log_base ? std::log(*options.log_base) : 1.0;
  std::vector<double> logs;
  for (const auto& t : text_tokens) {
    if (t.empty() || options.strip.contains(t)) continue;
    const auto r = table.rank(t);
    if (r) {
      ++report.in_vocabulary;
      logs.push_back(std::log(static_cast<double>(*r)) / divisor);
    } else {
      ++report.oov;
      if (options.oov == OovPolicy::rank_v_plus_one) {
        logs.push_back(std::log(static_cast<double>(table.size() + 1)) / divisor);
      }
    }
  }
  const std::size_t total = report.in_vocabulary + report.oov;
  report.oov_proportion = total == 0 ? 0.0 : static_cast<double>(report.oov) / static_cast<double>(total);
  report.sample_size = logs.size();
  report.mean_defined = !logs.empty();
  if (report.mean_defined) {
    std::sort(logs.begin(), logs.end());  // order-independent sums
    const auto ms = mean_std(logs);
    report.mean = ms.mean;
    report.std = ms.std;
  } else {
    report.mean = std::numeric_limits<double>::quiet_NaN();
    report.std = std::numeric_limits<double>::quiet_NaN();
  }
  return report;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

ZTestResult two_sample_z(const SampleSummary& a, const SampleSummary& b) {
  if (a.n < 2 || b.n < 2) fail(ErrorCode::InvalidArgument, "z-test needs n >= 2 on both sides");
  if (!(a.std >= 0.0) || !(b.std >= 0.0)) fail(ErrorCode::InvalidArgument, "standard deviation must be >= 0");
  const double se2 = a.std * a.std / static_cast<double>(a.n) + b.std * b.std / static_cast<double>(b.n);
  if (se2 == 0.0) {
    if (a.mean == b.mean) return {0.0, 1.0};
    fail(ErrorCode::DegenerateVariance, "both samples have zero variance but different means");
  }
  const double z = (a.mean - b.mean) / std::sqrt(se2);
  // erfc underflows to 0 for |z| > ~38; keep p inside (0, 1].
  const double p = std::clamp(std::erfc(std::abs(z) / std::sqrt(2.0)), std::numeric_limits<double>::denorm_min(), 1.0);
  return {z, p};
}

}  // namespace slt
