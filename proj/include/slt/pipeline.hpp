#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "slt/aligner.hpp"
#include "slt/latency.hpp"
#include "slt/quality.hpp"
#include "slt/textmetrics.hpp"

namespace slt {

enum class SystemKind { interpreter, mt, relay };
enum class RelayMode { compose, direct };

struct SystemSpec {
  std::string name;
  SystemKind kind = SystemKind::interpreter;
  std::string language;
  // mt: name of the interpreter system whose speech the MT consumed; empty
  // means the MT consumed the source speech.
  std::string input;
  // relay: pivot interpreter system and the MT system that translated it.
  std::string via;
  std::string output;
  RelayMode mode = RelayMode::compose;
};

struct ReferenceSpec {
  std::string name;
  std::string language;
};

struct DocumentSpec {
  std::string doc_id;
  std::string source;                          // timed TSV
  std::map<std::string, std::string> outputs;  // system -> timed TSV or incremental log
  std::map<std::string, std::string> references;  // reference -> plain text
};

struct ExtraCorpus {
  std::string source;
  std::string target;
};

struct ExperimentConfig {
  std::string base_dir;  // relative paths resolve here
  std::string output_dir = "slteval-out";
  unsigned jobs = 1;
  std::string source_language = "en";
  std::vector<SystemSpec> systems;
  std::vector<ReferenceSpec> references;
  std::vector<DocumentSpec> documents;

  AlignerOptions aligner;
  std::map<std::string, ExtraCorpus> extra_corpora;  // keyed by system name

  std::vector<double> percentiles{50.0, 90.0, 99.0};
  bool compression_strip_punctuation = true;

  std::map<std::string, std::string> rank_corpora;  // language -> token corpus
  std::map<std::string, std::string> rank_tables;   // language -> TSV
  ComplexityOptions complexity;
  bool complexity_lowercase = false;
  std::vector<std::pair<std::string, std::string>> ztests;

  BleuConfig bleu;
  // (reference or interpreter system, system); empty = every MT/relay system
  // against every reference of the same language.
  std::vector<std::pair<std::string, std::string>> bleu_pairs;

  std::optional<std::string> annotations;

  std::string config_hash;
  nlohmann::json raw;
};

// Parses and validates; throws Error(ConfigInvalid) or Error(NoDocuments).
ExperimentConfig parse_experiment_config(const nlohmann::json& json, std::string base_dir = ".");
ExperimentConfig load_experiment_config(const std::string& path,
                                        const std::vector<std::string>& overrides = {});
// `a.b.c=value`; numeric parts index arrays. The value is parsed as JSON,
// falling back to a string.
void apply_override(nlohmann::json& json, std::string_view assignment);

std::string fnv1a_hex(std::string_view bytes);

struct LatencyRow {
  std::string system;
  std::string measured_from;  // source or pivot system
  LatencyReport report;
  std::vector<std::string> documents;
};

struct CompressionRow {
  std::string system;
  CompressionReport report;
};

struct ComplexityRow {
  std::string system;
  std::string language;
  ComplexityReport report;
  std::vector<std::string> documents;
};

struct ZTestRow {
  std::string a;
  std::string b;
  ZTestResult result;
};

struct BleuRow {
  std::string reference;
  std::string system;
  BleuReport agg;
  BleuReport one;
  std::vector<std::string> documents;
};

struct DocumentFailure {
  std::string doc_id;
  std::string error;
};

struct RunReport {
  std::string config_hash;
  std::string tool_version;
  std::string generated_at;
  std::vector<std::string> documents;
  std::vector<DocumentFailure> failures;
  std::vector<std::string> warnings;
  std::vector<LatencyRow> latency;
  std::vector<CompressionRow> compression;
  std::vector<ComplexityRow> complexity;
  std::vector<ZTestRow> ztests;
  std::vector<BleuRow> bleu;
  std::vector<AnnotationSummary> annotations;
  // Final links per system, document order as `documents`. Not serialized.
  std::map<std::string, std::vector<AlignmentSet>> alignments;

  bool ok() const { return failures.empty(); }
};

/// ingest -> align -> latency / compression / complexity / BLEU. Documents
/// that fail to load are reported and skipped.
RunReport run_pipeline(const ExperimentConfig& config);

enum class ReportFormat { json, csv, markdown };
ReportFormat parse_report_format(std::string_view name);

nlohmann::json to_json(const RunReport& report);
nlohmann::json to_json(const LatencyReport& report);
nlohmann::json to_json(const CompressionReport& report);
nlohmann::json to_json(const ComplexityReport& report);
nlohmann::json to_json(const BleuReport& report);

// Formats only; every number shown comes from the JSON document.
std::string render_report(const nlohmann::json& report, ReportFormat format);
std::string render_report(const RunReport& report, ReportFormat format);

}  // namespace slt
