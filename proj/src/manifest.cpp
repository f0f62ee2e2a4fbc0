#include "slt/manifest.hpp"

#include <filesystem>

#include <nlohmann/json.hpp>

#include "slt/error.hpp"
#include "slt/ingest.hpp"
#include "slt/text.hpp"

namespace slt {

namespace fs = std::filesystem;

std::string_view to_string(TranscriptVersion version) {
  switch (version) {
    case TranscriptVersion::revised: return "Revised";
    case TranscriptVersion::verbatim: return "Verbatim";
    case TranscriptVersion::ortho: return "Ortho";
  }
  return "Revised";
}

TranscriptVersion parse_version(std::string_view name) {
  const auto lower = text::lowercase(name);
  if (lower == "revised") return TranscriptVersion::revised;
  if (lower == "verbatim") return TranscriptVersion::verbatim;
  if (lower == "ortho") return TranscriptVersion::ortho;
  fail(ErrorCode::InvalidArgument, "unknown transcript version '" + std::string(name) + "'");
}

CountingMode counting_mode(TranscriptVersion version) {
  return version == TranscriptVersion::verbatim ? CountingMode::document : CountingMode::sentence;
}

std::vector<DocumentManifest> load_manifest(const std::string& path) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text::read_file(path));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ConfigInvalid, path + ": " + e.what());
  }
  const fs::path base = fs::path(path).parent_path();
  auto resolve = [&](const std::string& p) {
    const fs::path fp(p);
    return (fp.is_absolute() ? fp : base / fp).lexically_normal().string();
  };

  std::vector<DocumentManifest> docs;
  try {
    for (const auto& d : root.at("documents")) {
      DocumentManifest doc;
      doc.doc_id = d.at("doc_id").get<std::string>();
      const auto speech = d.value("speech", std::string("spontaneous"));
      if (speech != "spontaneous" && speech != "read") {
        fail(ErrorCode::ConfigInvalid, doc.doc_id + ": speech must be 'read' or 'spontaneous'");
      }
      doc.spontaneous = speech == "spontaneous";
      doc.trainset_overlap = d.value("trainset_overlap", false);
      for (const auto& [name, t] : d.at("tracks").items()) {
        TrackFiles files;
        files.kind = t.value("kind", std::string("source"));
        parse_track(files.kind);
        files.language = t.value("language", std::string());
        if (t.contains("duration_s")) files.duration_s = t["duration_s"].get<double>();
        if (t.contains("timed")) files.timed = resolve(t["timed"].get<std::string>());
        if (t.contains("log")) files.log = resolve(t["log"].get<std::string>());
        if (t.contains("versions")) {
          for (const auto& [v, p] : t["versions"].items()) {
            files.versions[parse_version(v)] = resolve(p.get<std::string>());
          }
        }
        doc.tracks.emplace(name, std::move(files));
      }
      docs.push_back(std::move(doc));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ConfigInvalid, path + ": " + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigInvalid) throw;
    fail(ErrorCode::ConfigInvalid, path + ": " + e.what());
  }
  return docs;
}

ManifestCheck check_manifest(const std::vector<DocumentManifest>& documents) {
  ManifestCheck check;
  check.documents = documents.size();
  std::size_t spontaneous = 0;
  for (const auto& doc : documents) {
    if (doc.spontaneous) ++spontaneous;
    for (const auto& [name, files] : doc.tracks) {
      auto attempt = [&](const std::string& what, auto&& fn) {
        try {
          fn();
        } catch (const std::exception& e) {
          check.problems.emplace_back(doc.doc_id, name + " " + what + ": " + e.what());
        }
      };
      if (files.timed) {
        attempt("timed", [&] { parse_timed_transcript(*files.timed, parse_track(files.kind), files.language); });
      }
      if (files.log) {
        attempt("log", [&] { parse_incremental_log(*files.log); });
      }
      for (const auto& [version, path] : files.versions) {
        attempt(std::string(to_string(version)), [&] {
          const auto lines = text::read_lines(path);
          auto& st = check.stats[name][version];
          st.mode = counting_mode(version);
          std::size_t sentences = 0;
          for (const auto& line : lines) {
            const auto words = text::split_whitespace(line);
            if (words.empty()) continue;
            ++sentences;
            st.words += words.size();
          }
          st.units += st.mode == CountingMode::document ? 1 : sentences;
        });
      }
    }
  }
  check.spontaneous_fraction =
      documents.empty() ? 0.0 : static_cast<double>(spontaneous) / static_cast<double>(documents.size());
  return check;
}

}  // namespace slt
