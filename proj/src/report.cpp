#include "slt/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <set>

#include "slt/error.hpp"
#include "slt/text.hpp"

namespace slt {

using nlohmann::json;

ReportFormat parse_report_format(std::string_view name) {
  if (name == "json") return ReportFormat::json;
  if (name == "csv") return ReportFormat::csv;
  if (name == "markdown" || name == "md") return ReportFormat::markdown;
  fail(ErrorCode::InvalidArgument, "unknown report format '" + std::string(name) + "'");
}

namespace {

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json to_json(const MeanStd& ms) { return {{"mean", number(ms.mean)}, {"std", number(ms.std)}, {"n", ms.n}}; }

}  // namespace

json to_json(const LatencyReport& r) {
  json percentiles = json::object();
  for (const auto& [p, v] : r.percentiles) percentiles[text::format_double(p)] = v;
  json j{{"avg", number(r.avg)}, {"std", number(r.std)}, {"percentiles", percentiles}, {"samples", r.samples.size()}};
  j["aligned_fraction"] = r.aligned_fraction ? number(*r.aligned_fraction) : json(nullptr);
  return j;
}

json to_json(const CompressionReport& r) {
  json docs = json::array();
  for (const auto& d : r.documents) {
    docs.push_back({{"doc_id", d.doc_id}, {"syllable_ratio", number(d.ratio.syllable_ratio)},
                    {"char_ratio", number(d.ratio.char_ratio)}});
  }
  return {{"syllables", to_json(r.syllables)}, {"characters", to_json(r.characters)}, {"documents", docs}};
}

json to_json(const ComplexityReport& r) {
  return {{"mean", number(r.mean)},
          {"std", number(r.std)},
          {"mean_defined", r.mean_defined},
          {"sample_size", r.sample_size},
          {"in_vocabulary", r.in_vocabulary},
          {"oov", r.oov},
          {"oov_proportion", number(r.oov_proportion)},
          {"log_base", r.log_base}};
}

json to_json(const BleuReport& r) {
  json precisions = json::array();
  for (double p : r.precisions) precisions.push_back(number(p));
  return {{"score", number(r.score)},
          {"precisions", precisions},
          {"matches", r.matches},
          {"totals", r.totals},
          {"effective_order", r.effective_order},
          {"brevity_penalty", number(r.brevity_penalty)},
          {"hyp_length", r.hyp_length},
          {"ref_length", r.ref_length},
          {"mode", std::string(to_string(r.mode))},
          {"tokenization", r.tokenization}};
}

json to_json(const RunReport& report) {
  json j;
  j["provenance"] = {{"config_hash", report.config_hash},
                     {"tool_version", report.tool_version},
                     {"generated_at", report.generated_at}};
  j["documents"] = report.documents;
  j["failures"] = json::array();
  for (const auto& f : report.failures) j["failures"].push_back({{"doc_id", f.doc_id}, {"error", f.error}});
  j["warnings"] = report.warnings;
  j["latency"] = json::array();
  for (const auto& r : report.latency) {
    auto row = to_json(r.report);
    row["system"] = r.system;
    row["measured_from"] = r.measured_from;
    row["documents"] = r.documents;
    j["latency"].push_back(std::move(row));
  }
  j["compression"] = json::array();
  for (const auto& r : report.compression) {
    auto row = to_json(r.report);
    row["system"] = r.system;
    j["compression"].push_back(std::move(row));
  }
  j["complexity"] = json::array();
  for (const auto& r : report.complexity) {
    auto row = to_json(r.report);
    row["system"] = r.system;
    row["language"] = r.language;
    row["documents"] = r.documents;
    j["complexity"].push_back(std::move(row));
  }
  j["ztests"] = json::array();
  for (const auto& r : report.ztests) {
    j["ztests"].push_back({{"a", r.a}, {"b", r.b}, {"z", number(r.result.z)}, {"p", number(r.result.p)}});
  }
  j["bleu"] = json::array();
  for (const auto& r : report.bleu) {
    j["bleu"].push_back({{"reference", r.reference},
                         {"system", r.system},
                         {"agg", to_json(r.agg)},
                         {"one", to_json(r.one)},
                         {"documents", r.documents}});
  }
  j["annotations"] = json::array();
  for (const auto& a : report.annotations) {
    j["annotations"].push_back({{"annotator", a.annotator},
                                {"system", a.system},
                                {"mean", number(a.mean)},
                                {"std", number(a.std)},
                                {"count", a.count}});
  }
  return j;
}

// ---------------------------------------------------------------------------

namespace {

std::string fixed(const json& v, int digits = 2) {
  if (!v.is_number()) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v.get<double>());
  return buf;
}

std::string scientific(const json& v) {
  if (!v.is_number()) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2e", v.get<double>());
  return buf;
}

std::string pm(const json& mean, const json& std) { return fixed(mean) + " ± " + fixed(std); }

const json& section(const json& report, const char* name) {
  static const json empty = json::array();
  auto it = report.find(name);
  return it == report.end() ? empty : *it;
}

std::vector<std::string> percentile_keys(const json& rows) {
  std::vector<std::pair<double, std::string>> keys;
  std::set<std::string> seen;
  for (const auto& row : rows) {
    for (const json section = row.value("percentiles", json::object()); const auto& [k, v] : section.items()) {
      double x = 0;
      if (seen.insert(k).second && text::parse_double(k, x)) keys.emplace_back(x, k);
    }
  }
  if (keys.empty()) return {"50", "90", "99"};
  std::sort(keys.begin(), keys.end());
  std::vector<std::string> out;
  for (auto& [x, k] : keys) out.push_back(k);
  return out;
}

std::string markdown(const json& report) {
  std::string out;
  out += "# Evaluation report\n\n";

  out += "## Latency (seconds)\n\n";
  const auto& latency = section(report, "latency");
  const auto keys = percentile_keys(latency);
  out += "| System | avg ± std |";
  for (const auto& k : keys) out += " " + k + "% |";
  out += "\n|---|---|";
  for (std::size_t i = 0; i < keys.size(); ++i) out += "---|";
  out += "\n";
  for (const auto& row : latency) {
    out += "| " + row.value("system", std::string()) + " | " + pm(row["avg"], row["std"]) + " |";
    const auto pct = row.value("percentiles", json::object());
    for (const auto& k : keys) out += " " + fixed(pct.contains(k) ? pct[k] : json()) + " |";
    out += "\n";
  }

  out += "\n## Length ratio to source\n\n";
  out += "| System | Syllables | Characters |\n|---|---|---|\n";
  for (const auto& row : section(report, "compression")) {
    out += "| " + row.value("system", std::string()) + " | " + pm(row["syllables"]["mean"], row["syllables"]["std"]) +
           " | " + pm(row["characters"]["mean"], row["characters"]["std"]) + " |\n";
  }

  out += "\n## Vocabulary complexity (log rank)\n\n";
  out += "| System | avg ± std | Words | OOV % |\n|---|---|---|---|\n";
  for (const auto& row : section(report, "complexity")) {
    const double oov = row["oov_proportion"].is_number() ? row["oov_proportion"].get<double>() : std::nan("");
    out += "| " + row.value("system", std::string()) + " | " + pm(row["mean"], row["std"]) + " | " +
           std::to_string(row.value("sample_size", 0)) + " | " + fixed(number(100.0 * oov)) + " |\n";
  }
  const auto& ztests = section(report, "ztests");
  if (!ztests.empty()) {
    out += "\n| A | B | z | p |\n|---|---|---|---|\n";
    for (const auto& row : ztests) {
      out += "| " + row.value("a", std::string()) + " | " + row.value("b", std::string()) + " | " + fixed(row["z"]) +
             " | " + scientific(row["p"]) + " |\n";
    }
  }

  out += "\n## BLEU\n\n";
  out += "| Reference | System | BLEU agg | BLEU one |\n|---|---|---|---|\n";
  for (const auto& row : section(report, "bleu")) {
    out += "| " + row.value("reference", std::string()) + " | " + row.value("system", std::string()) + " | " +
           fixed(row["agg"]["score"], 1) + " | " + fixed(row["one"]["score"], 1) + " |\n";
  }

  const auto& annotations = section(report, "annotations");
  if (!annotations.empty()) {
    std::vector<std::string> annotators;
    std::vector<std::string> systems;
    for (const auto& a : annotations) {
      const auto who = a.value("annotator", std::string());
      const auto sys = a.value("system", std::string());
      if (std::find(annotators.begin(), annotators.end(), who) == annotators.end()) annotators.push_back(who);
      if (std::find(systems.begin(), systems.end(), sys) == systems.end()) systems.push_back(sys);
    }
    out += "\n## Information preserved\n\n| System |";
    for (const auto& a : annotators) out += " " + a + " |";
    out += "\n|---|";
    for (std::size_t i = 0; i < annotators.size(); ++i) out += "---|";
    out += "\n";
    for (const auto& sys : systems) {
      out += "| " + sys + " |";
      for (const auto& who : annotators) {
        std::string cell = " |";
        for (const auto& a : annotations) {
          if (a.value("annotator", std::string()) == who && a.value("system", std::string()) == sys) {
            cell = " " + pm(a["mean"], a["std"]) + " |";
          }
        }
        out += cell;
      }
      out += "\n";
    }
  }

  const auto& failures = section(report, "failures");
  if (!failures.empty()) {
    out += "\n## Failed documents\n\n";
    for (const auto& f : failures) {
      out += "- " + f.value("doc_id", std::string()) + ": " + f.value("error", std::string()) + "\n";
    }
  }
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

std::string csv_value(const json& v) {
  if (v.is_number()) return text::format_double(v.get<double>());
  if (v.is_null()) return "";
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

std::string csv(const json& report) {
  std::string out = "section,key,field,value\n";
  auto emit = [&](const std::string& sec, const std::string& key, const std::string& field, const json& v) {
    out += csv_field(sec) + "," + csv_field(key) + "," + csv_field(field) + "," + csv_field(csv_value(v)) + "\n";
  };
  for (const auto& row : section(report, "latency")) {
    const auto key = row.value("system", std::string());
    emit("latency", key, "avg", row["avg"]);
    emit("latency", key, "std", row["std"]);
    for (const json section = row.value("percentiles", json::object()); const auto& [p, v] : section.items()) emit("latency", key, "p" + p, v);
    emit("latency", key, "samples", row["samples"]);
    emit("latency", key, "aligned_fraction", row["aligned_fraction"]);
  }
  for (const auto& row : section(report, "compression")) {
    const auto key = row.value("system", std::string());
    emit("compression", key, "syllables_mean", row["syllables"]["mean"]);
    emit("compression", key, "syllables_std", row["syllables"]["std"]);
    emit("compression", key, "characters_mean", row["characters"]["mean"]);
    emit("compression", key, "characters_std", row["characters"]["std"]);
  }
  for (const auto& row : section(report, "complexity")) {
    const auto key = row.value("system", std::string());
    emit("complexity", key, "mean", row["mean"]);
    emit("complexity", key, "std", row["std"]);
    emit("complexity", key, "sample_size", row["sample_size"]);
    emit("complexity", key, "oov_proportion", row["oov_proportion"]);
  }
  for (const auto& row : section(report, "ztests")) {
    const auto key = row.value("a", std::string()) + "|" + row.value("b", std::string());
    emit("ztest", key, "z", row["z"]);
    emit("ztest", key, "p", row["p"]);
  }
  for (const auto& row : section(report, "bleu")) {
    const auto key = row.value("reference", std::string()) + "|" + row.value("system", std::string());
    emit("bleu", key, "agg", row["agg"]["score"]);
    emit("bleu", key, "one", row["one"]["score"]);
  }
  for (const auto& row : section(report, "annotations")) {
    const auto key = row.value("annotator", std::string()) + "|" + row.value("system", std::string());
    emit("annotations", key, "mean", row["mean"]);
    emit("annotations", key, "std", row["std"]);
    emit("annotations", key, "count", row["count"]);
  }
  return out;
}

}  // namespace

std::string render_report(const json& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::json: return report.dump(2) + "\n";
    case ReportFormat::csv: return csv(report);
    case ReportFormat::markdown: return markdown(report);
  }
  return {};
}

std::string render_report(const RunReport& report, ReportFormat format) {
  return render_report(to_json(report), format);
}

}  // namespace slt
