#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace slt {

// Transcript versions of a corpus track: edited text, raw faithful
// transcript without punctuation, and punctuated transcript without
// false starts.
enum class TranscriptVersion { revised, verbatim, ortho };

// Verbatim transcripts are counted per document, the others per sentence.
enum class CountingMode { sentence, document };

std::string_view to_string(TranscriptVersion version);
TranscriptVersion parse_version(std::string_view name);
CountingMode counting_mode(TranscriptVersion version);

struct TrackFiles {
  std::string kind;  // source, interpreter or mt
  std::string language;
  std::optional<double> duration_s;
  std::optional<std::string> timed;  // word-timestamped TSV
  std::optional<std::string> log;    // incremental MT log
  std::map<TranscriptVersion, std::string> versions;
};

struct DocumentManifest {
  std::string doc_id;
  bool spontaneous = false;
  bool trainset_overlap = false;
  std::map<std::string, TrackFiles> tracks;  // keyed by track name, e.g. "en", "cs-int"
};

/// Loads `{"documents": [...]}`; relative paths resolve against the
/// manifest's directory.
std::vector<DocumentManifest> load_manifest(const std::string& path);

struct VersionStats {
  CountingMode mode = CountingMode::sentence;
  std::size_t units = 0;
  std::size_t words = 0;
};

struct ManifestCheck {
  std::size_t documents = 0;
  std::vector<std::pair<std::string, std::string>> problems;  // (doc_id, message)
  // track name -> version -> totals (units per counting mode, whitespace words)
  std::map<std::string, std::map<TranscriptVersion, VersionStats>> stats;
  double spontaneous_fraction = 0.0;

  bool ok() const { return problems.empty(); }
};

// Opens and parses every referenced file, collecting problems per document
// instead of stopping at the first one.
ManifestCheck check_manifest(const std::vector<DocumentManifest>& documents);

}  // namespace slt
