#include "slt/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <set>
#include <thread>

#include "slt/error.hpp"
#include "slt/text.hpp"

namespace slt {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void apply_override(json& root, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    fail(ErrorCode::ConfigInvalid, "override '" + std::string(assignment) + "' is not key=value");
  }
  const auto key = assignment.substr(0, eq);
  const std::string raw(assignment.substr(eq + 1));
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::exception&) {
    value = raw;
  }
  json* node = &root;
  for (const auto& part : text::split(key, '.')) {
    if (part.empty()) fail(ErrorCode::ConfigInvalid, "empty key in override '" + std::string(assignment) + "'");
    if (node->is_array()) {
      std::size_t index = 0;
      const auto [end, ec] = std::from_chars(part.data(), part.data() + part.size(), index);
      if (ec != std::errc() || end != part.data() + part.size() || index >= node->size()) {
        fail(ErrorCode::ConfigInvalid, "override '" + std::string(assignment) + "': bad array index '" + std::string(part) + "'");
      }
      node = &(*node)[index];
      continue;
    }
    if (!node->is_object()) *node = json::object();
    node = &(*node)[std::string(part)];
  }
  *node = std::move(value);
}

namespace {

[[noreturn]] void config_error(const std::string& message) { fail(ErrorCode::ConfigInvalid, message); }

std::string resolve(const std::string& base, const std::string& p) {
  const fs::path fp(p);
  return (fp.is_absolute() ? fp : fs::path(base) / fp).lexically_normal().string();
}

std::vector<std::pair<std::string, std::string>> string_pairs(const json& j, const char* what) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& item : j) {
    if (!item.is_array() || item.size() != 2) config_error(std::string(what) + " entries must be [a, b] pairs");
    out.emplace_back(item[0].get<std::string>(), item[1].get<std::string>());
  }
  return out;
}

}  // namespace

ExperimentConfig parse_experiment_config(const json& root, std::string base_dir) {
  ExperimentConfig cfg;
  cfg.base_dir = std::move(base_dir);
  cfg.raw = root;
  cfg.config_hash = fnv1a_hex(root.dump());
  try {
    if (!root.is_object()) config_error("config must be a JSON object");
    cfg.output_dir = resolve(cfg.base_dir, root.value("output_dir", cfg.output_dir));
    const int jobs = root.value("jobs", 1);
    if (jobs < 1) config_error("jobs must be >= 1");
    cfg.jobs = static_cast<unsigned>(jobs);
    if (root.contains("source")) cfg.source_language = root["source"].value("language", cfg.source_language);

    std::set<std::string> names;
    for (const auto& s : root.value("systems", json::array())) {
      SystemSpec spec;
      spec.name = s.at("name").get<std::string>();
      const auto kind = s.at("kind").get<std::string>();
      if (kind == "interpreter") {
        spec.kind = SystemKind::interpreter;
      } else if (kind == "mt") {
        spec.kind = SystemKind::mt;
      } else if (kind == "relay") {
        spec.kind = SystemKind::relay;
      } else {
        config_error("system '" + spec.name + "': unknown kind '" + kind + "'");
      }
      spec.language = s.value("language", std::string());
      spec.input = s.value("input", std::string());
      spec.via = s.value("via", std::string());
      spec.output = s.value("output", std::string());
      const auto mode = s.value("mode", std::string("compose"));
      if (mode != "compose" && mode != "direct") config_error("system '" + spec.name + "': mode must be compose or direct");
      spec.mode = mode == "compose" ? RelayMode::compose : RelayMode::direct;
      if (!names.insert(spec.name).second) config_error("duplicate system '" + spec.name + "'");
      cfg.systems.push_back(std::move(spec));
    }
    auto find = [&](const std::string& name) -> const SystemSpec* {
      for (const auto& s : cfg.systems) {
        if (s.name == name) return &s;
      }
      return nullptr;
    };
    for (auto& s : cfg.systems) {
      if (s.kind == SystemKind::mt && !s.input.empty()) {
        const auto* in = find(s.input);
        if (!in || in->kind != SystemKind::interpreter) {
          config_error("system '" + s.name + "': input must name an interpreter system");
        }
      }
      if (s.kind == SystemKind::relay) {
        const auto* via = find(s.via);
        const auto* out = find(s.output);
        if (!via || via->kind != SystemKind::interpreter) config_error("relay '" + s.name + "': via must be an interpreter");
        if (!out || out->kind != SystemKind::mt || out->input != s.via) {
          config_error("relay '" + s.name + "': output must be an MT system whose input is '" + s.via + "'");
        }
        if (s.language.empty()) s.language = out->language;
      }
    }

    for (const auto& r : root.value("references", json::array())) {
      ReferenceSpec ref{r.at("name").get<std::string>(), r.value("language", std::string())};
      if (!names.insert(ref.name).second) config_error("reference '" + ref.name + "' clashes with another name");
      cfg.references.push_back(std::move(ref));
    }

    if (!root.contains("documents") || root["documents"].empty()) {
      fail(ErrorCode::NoDocuments, "config lists no documents");
    }
    std::set<std::string> doc_ids;
    for (const auto& d : root["documents"]) {
      DocumentSpec doc;
      doc.doc_id = d.at("doc_id").get<std::string>();
      if (!doc_ids.insert(doc.doc_id).second) config_error("duplicate doc_id '" + doc.doc_id + "'");
      doc.source = resolve(cfg.base_dir, d.at("source").get<std::string>());
      for (const json section = d.value("outputs", json::object()); const auto& [sys, p] : section.items()) {
        const auto* spec = find(sys);
        if (!spec || spec->kind == SystemKind::relay) {
          config_error("document '" + doc.doc_id + "': unknown output system '" + sys + "'");
        }
        doc.outputs[sys] = resolve(cfg.base_dir, p.get<std::string>());
      }
      for (const json section = d.value("references", json::object()); const auto& [ref, p] : section.items()) {
        const bool known = std::any_of(cfg.references.begin(), cfg.references.end(),
                                       [&](const ReferenceSpec& r) { return r.name == ref; });
        if (!known) config_error("document '" + doc.doc_id + "': unknown reference '" + ref + "'");
        doc.references[ref] = resolve(cfg.base_dir, p.get<std::string>());
      }
      cfg.documents.push_back(std::move(doc));
    }
    std::sort(cfg.documents.begin(), cfg.documents.end(),
              [](const DocumentSpec& a, const DocumentSpec& b) { return a.doc_id < b.doc_id; });

    if (root.contains("aligner")) {
      const auto& a = root["aligner"];
      auto& o = cfg.aligner;
      o.em.model = parse_alignment_model(a.value("model", std::string(to_string(o.em.model))));
      o.em.iterations = a.value("iterations", o.em.iterations);
      o.em.null_prob = a.value("null_prob", o.em.null_prob);
      o.em.initial_lambda = a.value("lambda", o.em.initial_lambda);
      o.em.optimize_lambda = a.value("optimize_lambda", o.em.optimize_lambda);
      const int trim = a.value("trim", static_cast<int>(o.trim));
      if (trim < 1) config_error("aligner.trim must be >= 1");
      o.trim = static_cast<std::size_t>(trim);
      o.lowercase = a.value("lowercase", o.lowercase);
      o.prune = a.value("prune", o.prune);
      const auto ref = a.value("prune_reference", std::string("start"));
      if (ref != "start" && ref != "end") config_error("aligner.prune_reference must be start or end");
      o.prune_reference = ref == "start" ? PruneReference::source_start : PruneReference::source_end;
      o.prune_before_intersection = a.value("prune_before_intersection", o.prune_before_intersection);
      if (o.em.iterations < 1) config_error("aligner.iterations must be >= 1");
      if (!(o.em.null_prob >= 0.0 && o.em.null_prob < 1.0)) config_error("aligner.null_prob must lie in [0, 1)");
      for (const json section = a.value("extra_corpora", json::object()); const auto& [sys, c] : section.items()) {
        if (!find(sys)) config_error("extra corpus for unknown system '" + sys + "'");
        cfg.extra_corpora[sys] = {resolve(cfg.base_dir, c.at("source").get<std::string>()),
                                  resolve(cfg.base_dir, c.at("target").get<std::string>())};
      }
    }

    if (root.contains("latency")) {
      cfg.percentiles = root["latency"].value("percentiles", cfg.percentiles);
    }
    if (cfg.percentiles.empty()) config_error("latency.percentiles is empty");
    for (double p : cfg.percentiles) {
      if (!(p > 0.0 && p <= 100.0)) config_error("percentiles must lie in (0, 100]");
    }

    if (root.contains("compression")) {
      cfg.compression_strip_punctuation =
          root["compression"].value("strip_punctuation", cfg.compression_strip_punctuation);
    }

    if (root.contains("complexity")) {
      const auto& c = root["complexity"];
      for (const json section = c.value("rank_corpora", json::object()); const auto& [lang, p] : section.items()) {
        cfg.rank_corpora[lang] = resolve(cfg.base_dir, p.get<std::string>());
      }
      for (const json section = c.value("rank_tables", json::object()); const auto& [lang, p] : section.items()) {
        cfg.rank_tables[lang] = resolve(cfg.base_dir, p.get<std::string>());
      }
      if (c.contains("log_base") && !c["log_base"].is_null()) {
        const double base = c["log_base"].get<double>();
        if (!(base > 0.0 && base != 1.0)) config_error("complexity.log_base must be positive and not 1");
        cfg.complexity.log_base = base;
      }
      const auto oov = c.value("oov", std::string("exclude"));
      if (oov != "exclude" && oov != "rank_v_plus_one") config_error("complexity.oov must be exclude or rank_v_plus_one");
      cfg.complexity.oov = oov == "exclude" ? OovPolicy::exclude : OovPolicy::rank_v_plus_one;
      cfg.complexity_lowercase = c.value("lowercase", false);
      if (c.contains("ztests")) cfg.ztests = string_pairs(c["ztests"], "complexity.ztests");
    }

    if (root.contains("bleu")) {
      const auto& b = root["bleu"];
      cfg.bleu.max_order = b.value("max_order", cfg.bleu.max_order);
      if (cfg.bleu.max_order < 1) config_error("bleu.max_order must be >= 1");
      cfg.bleu.lowercase = b.value("lowercase", cfg.bleu.lowercase);
      const auto smoothing = b.value("smoothing", std::string("none"));
      if (smoothing != "none" && smoothing != "add_one") config_error("bleu.smoothing must be none or add_one");
      cfg.bleu.smoothing = smoothing == "none" ? Smoothing::none : Smoothing::add_one;
      if (b.contains("pairs")) cfg.bleu_pairs = string_pairs(b["pairs"], "bleu.pairs");
    }
    if (root.contains("annotations") && !root["annotations"].is_null()) {
      cfg.annotations = resolve(cfg.base_dir, root["annotations"].get<std::string>());
    }
  } catch (const json::exception& e) {
    config_error(e.what());
  }

  for (const auto& [lang, p] : cfg.rank_corpora) {
    if (!fs::exists(p)) config_error("rank corpus for '" + lang + "' not found: " + p);
  }
  for (const auto& [lang, p] : cfg.rank_tables) {
    if (!fs::exists(p)) config_error("rank table for '" + lang + "' not found: " + p);
  }
  for (const auto& [sys, c] : cfg.extra_corpora) {
    if (!fs::exists(c.source) || !fs::exists(c.target)) config_error("extra corpus for '" + sys + "' not found");
  }
  if (cfg.annotations && !fs::exists(*cfg.annotations)) config_error("annotations not found: " + *cfg.annotations);
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path, const std::vector<std::string>& overrides) {
  json root;
  try {
    root = json::parse(text::read_file(path));
  } catch (const json::exception& e) {
    config_error(path + ": " + e.what());
  } catch (const Error& e) {
    config_error(e.what());
  }
  for (const auto& o : overrides) apply_override(root, o);
  return parse_experiment_config(root, fs::path(path).parent_path().string());
}

// ---------------------------------------------------------------------------

namespace {

struct LoadedDocument {
  std::string doc_id;
  TimedTranscript source;
  std::map<std::string, TimedTranscript> outputs;
  std::map<std::string, std::vector<std::string>> references;
};

const SystemSpec& system_named(const ExperimentConfig& cfg, const std::string& name) {
  for (const auto& s : cfg.systems) {
    if (s.name == name) return s;
  }
  fail(ErrorCode::ConfigInvalid, "unknown system '" + name + "'");
}

LoadedDocument load_document(const ExperimentConfig& cfg, const DocumentSpec& spec) {
  LoadedDocument doc;
  doc.doc_id = spec.doc_id;
  doc.source = parse_timed_transcript(spec.source, Track::source, cfg.source_language);
  doc.source.doc_id = spec.doc_id + "/source";
  for (const auto& [name, path] : spec.outputs) {
    const auto& sys = system_named(cfg, name);
    TimedTranscript t;
    if (sys.kind == SystemKind::interpreter) {
      t = parse_timed_transcript(path, Track::interpreter, sys.language);
    } else {
      t = finalized_transcript(parse_incremental_log(path), sys.language);
    }
    t.doc_id = spec.doc_id + "/" + name;
    doc.outputs.emplace(name, std::move(t));
  }
  for (const auto& [name, path] : spec.references) {
    std::string language;
    for (const auto& r : cfg.references) {
      if (r.name == name) language = r.language;
    }
    doc.references.emplace(name, tokenize(text::read_file(path), language));
  }
  return doc;
}

std::vector<std::string> without_punctuation(const std::vector<std::string>& tokens) {
  std::vector<std::string> out;
  for (const auto& t : tokens) {
    const auto cps = text::decode(t);
    if (std::any_of(cps.begin(), cps.end(), [](char32_t c) { return text::is_alnum(c); })) out.push_back(t);
  }
  return out;
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class Runner {
 public:
  Runner(const ExperimentConfig& cfg, RunReport& report) : cfg_(cfg), report_(report) {}

  void load() {
    std::vector<std::optional<LoadedDocument>> loaded(cfg_.documents.size());
    std::vector<std::string> errors(cfg_.documents.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i = next++; i < cfg_.documents.size(); i = next++) {
        try {
          loaded[i] = load_document(cfg_, cfg_.documents[i]);
        } catch (const std::exception& e) {
          errors[i] = e.what();
        }
      }
    };
    const unsigned threads = std::max(1u, std::min<unsigned>(cfg_.jobs, static_cast<unsigned>(cfg_.documents.size())));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (std::size_t i = 0; i < loaded.size(); ++i) {
      if (loaded[i]) {
        report_.documents.push_back(loaded[i]->doc_id);
        docs_.push_back(std::move(*loaded[i]));
      } else {
        report_.failures.push_back({cfg_.documents[i].doc_id, errors[i]});
      }
    }
  }

  void latency() {
    // Relays compose their components' links, so they run last.
    for (const bool relay_pass : {false, true}) {
      for (const auto& sys : cfg_.systems) {
        if ((sys.kind == SystemKind::relay) != relay_pass) continue;
        try {
          if (sys.kind == SystemKind::relay) {
            relay_latency_row(sys);
          } else {
            aligned_latency_row(sys, sys.name, sys.input);
          }
        } catch (const Error& e) {
          report_.warnings.push_back("latency " + sys.name + ": " + e.what());
        }
      }
    }
    auto order = [&](const LatencyRow& r) {
      for (std::size_t i = 0; i < cfg_.systems.size(); ++i) {
        if (cfg_.systems[i].name == r.system) return i;
      }
      return cfg_.systems.size();
    };
    std::stable_sort(report_.latency.begin(), report_.latency.end(),
                     [&](const LatencyRow& a, const LatencyRow& b) { return order(a) < order(b); });
  }

  void compression() {
    for (const auto& sys : cfg_.systems) {
      const auto& text_system = sys.kind == SystemKind::relay ? sys.output : sys.name;
      std::vector<CompressionSample> samples;
      for (const auto& doc : docs_) {
        auto it = doc.outputs.find(text_system);
        if (it == doc.outputs.end()) continue;
        add_compression(samples, doc, it->second.surfaces(), sys.language, sys.name);
      }
      if (!samples.empty()) report_.compression.push_back({sys.name, compression_report(std::move(samples))});
    }
    for (const auto& ref : cfg_.references) {
      std::vector<CompressionSample> samples;
      for (const auto& doc : docs_) {
        auto it = doc.references.find(ref.name);
        if (it != doc.references.end()) add_compression(samples, doc, it->second, ref.language, ref.name);
      }
      if (!samples.empty()) report_.compression.push_back({ref.name, compression_report(std::move(samples))});
    }
  }

  void complexity() {
    std::map<std::string, RankTable> tables;
    for (const auto& [lang, path] : cfg_.rank_tables) tables[lang] = RankTable::from_tsv(text::read_file(path));
    for (const auto& [lang, path] : cfg_.rank_corpora) {
      if (tables.contains(lang)) continue;
      std::vector<std::string> corpus;
      for (const auto& line : text::read_lines(path)) {
        auto tokens = tokenize(line, lang, {cfg_.complexity_lowercase});
        corpus.insert(corpus.end(), std::make_move_iterator(tokens.begin()), std::make_move_iterator(tokens.end()));
      }
      tables[lang] = build_rank_table(corpus);
    }
    auto run = [&](const std::string& name, const std::string& language, auto&& tokens_of) {
      auto table = tables.find(language);
      if (table == tables.end()) return;
      std::vector<std::string> pooled;
      std::vector<std::string> ids;
      for (const auto& doc : docs_) {
        const auto* tokens = tokens_of(doc);
        if (!tokens) continue;
        ids.push_back(doc.doc_id);
        for (const auto& t : *tokens) pooled.push_back(cfg_.complexity_lowercase ? text::lowercase(t, language) : t);
      }
      if (ids.empty()) return;
      report_.complexity.push_back({name, language, log_rank_stats(pooled, table->second, cfg_.complexity), ids});
    };
    std::map<std::string, std::map<std::string, std::vector<std::string>>> surfaces;
    for (const auto& doc : docs_) {
      for (const auto& [name, t] : doc.outputs) surfaces[name][doc.doc_id] = t.surfaces();
    }
    for (const auto& sys : cfg_.systems) {
      const auto& text_system = sys.kind == SystemKind::relay ? sys.output : sys.name;
      run(sys.name, sys.language, [&](const LoadedDocument& doc) -> const std::vector<std::string>* {
        auto s = surfaces.find(text_system);
        if (s == surfaces.end()) return nullptr;
        auto d = s->second.find(doc.doc_id);
        return d == s->second.end() ? nullptr : &d->second;
      });
    }
    for (const auto& ref : cfg_.references) {
      run(ref.name, ref.language, [&](const LoadedDocument& doc) -> const std::vector<std::string>* {
        auto it = doc.references.find(ref.name);
        return it == doc.references.end() ? nullptr : &it->second;
      });
    }
    for (const auto& [a, b] : cfg_.ztests) {
      const auto* ra = complexity_row(a);
      const auto* rb = complexity_row(b);
      if (!ra || !rb) {
        report_.warnings.push_back("ztest " + a + " vs " + b + ": missing complexity row");
        continue;
      }
      try {
        report_.ztests.push_back({a, b,
                                  two_sample_z({ra->report.mean, ra->report.std, ra->report.sample_size},
                                               {rb->report.mean, rb->report.std, rb->report.sample_size})});
      } catch (const Error& e) {
        report_.warnings.push_back("ztest " + a + " vs " + b + ": " + e.what());
      }
    }
  }

  void bleu() {
    auto pairs = cfg_.bleu_pairs;
    if (pairs.empty()) {
      for (const auto& ref : cfg_.references) {
        for (const auto& sys : cfg_.systems) {
          if (sys.kind != SystemKind::interpreter && sys.language == ref.language) pairs.emplace_back(ref.name, sys.name);
        }
      }
    }
    for (const auto& [ref_name, sys_name] : pairs) {
      const std::string hyp_system = text_system_of(sys_name);
      std::vector<std::vector<std::string>> hyps;
      std::vector<std::vector<std::string>> refs;
      std::vector<std::string> ids;
      for (const auto& doc : docs_) {
        const auto hyp = doc.outputs.find(hyp_system);
        if (hyp == doc.outputs.end()) continue;
        std::vector<std::string> ref_tokens;
        if (auto r = doc.references.find(ref_name); r != doc.references.end()) {
          ref_tokens = r->second;
        } else if (auto o = doc.outputs.find(text_system_of(ref_name)); o != doc.outputs.end()) {
          ref_tokens = o->second.surfaces();
        } else {
          continue;
        }
        hyps.push_back(hyp->second.surfaces());
        refs.push_back(std::move(ref_tokens));
        ids.push_back(doc.doc_id);
      }
      if (ids.empty()) {
        report_.warnings.push_back("bleu " + ref_name + "/" + sys_name + ": no documents");
        continue;
      }
      try {
        BleuConfig agg = cfg_.bleu;
        agg.mode = BleuMode::agg;
        BleuConfig one = cfg_.bleu;
        one.mode = BleuMode::one;
        BleuRow row{ref_name, sys_name, slt::bleu(hyps, refs, agg), slt::bleu(hyps, refs, one), ids};
        row.agg.tokenization = row.one.tokenization = "slt-tokenize";
        report_.bleu.push_back(std::move(row));
      } catch (const Error& e) {
        report_.warnings.push_back("bleu " + ref_name + "/" + sys_name + ": " + e.what());
      }
    }
  }

  void annotations() {
    if (!cfg_.annotations) return;
    const auto records = parse_annotations(text::read_file(*cfg_.annotations));
    if (!records.empty()) report_.annotations = aggregate_annotations(records);
  }

 private:
  std::string text_system_of(const std::string& name) const {
    for (const auto& s : cfg_.systems) {
      if (s.name == name && s.kind == SystemKind::relay) return s.output;
    }
    return name;
  }

  const ComplexityRow* complexity_row(const std::string& name) const {
    for (const auto& r : report_.complexity) {
      if (r.system == name) return &r;
    }
    return nullptr;
  }

  void add_compression(std::vector<CompressionSample>& samples, const LoadedDocument& doc,
                       const std::vector<std::string>& target, const std::string& language, const std::string& name) {
    auto src = doc.source.surfaces();
    auto tgt = target;
    if (cfg_.compression_strip_punctuation) {
      src = without_punctuation(src);
      tgt = without_punctuation(tgt);
    }
    try {
      samples.push_back({doc.doc_id, slt::compression(src, cfg_.source_language, tgt, language)});
    } catch (const Error& e) {
      report_.warnings.push_back("compression " + name + " " + doc.doc_id + ": " + e.what());
    }
  }

  // Aligns `from` (source speech, or an interpreter's output) with `to`'s
  // output over all documents that have both.
  struct AlignedPairs {
    std::vector<std::string> ids;
    std::vector<TimedTranscript> src;
    std::vector<TimedTranscript> tgt;
    std::vector<AlignmentSet> links;
  };

  AlignedPairs align(const std::string& to, const std::string& from, const std::string& extra_key) {
    AlignedPairs p;
    for (const auto& doc : docs_) {
      auto out = doc.outputs.find(to);
      if (out == doc.outputs.end()) continue;
      const TimedTranscript* src = &doc.source;
      if (!from.empty()) {
        auto in = doc.outputs.find(from);
        if (in == doc.outputs.end()) continue;
        src = &in->second;
      }
      p.ids.push_back(doc.doc_id);
      p.src.push_back(*src);
      p.tgt.push_back(out->second);
    }
    if (p.ids.empty()) fail(ErrorCode::NoDocuments, "no document has output '" + to + "'");
    ParallelCorpus extra;
    if (auto it = cfg_.extra_corpora.find(extra_key); it != cfg_.extra_corpora.end()) {
      extra = read_parallel_corpus(it->second.source, it->second.target);
    }
    p.links = align_documents(p.src, p.tgt, extra, cfg_.aligner).links;
    return p;
  }

  void push_latency(const std::string& system, const std::string& from, std::vector<LatencySample> samples,
                    std::size_t aligned_words, std::size_t source_words, std::vector<std::string> ids) {
    SummaryOptions opts;
    opts.percentiles = cfg_.percentiles;
    auto summary = summarize(std::move(samples), opts);
    summary.aligned_fraction =
        source_words == 0 ? 0.0 : static_cast<double>(aligned_words) / static_cast<double>(source_words);
    report_.latency.push_back({system, from.empty() ? "source" : from, std::move(summary), std::move(ids)});
  }

  static std::size_t distinct_sources(const AlignmentSet& links) {
    std::set<std::size_t> s;
    for (const auto& l : links.links()) s.insert(l.src);
    return s.size();
  }

  void aligned_latency_row(const SystemSpec& sys, const std::string& target, const std::string& from) {
    auto p = align(target, from, sys.name);
    std::vector<LatencySample> samples;
    std::size_t aligned = 0;
    std::size_t words = 0;
    for (std::size_t d = 0; d < p.ids.size(); ++d) {
      auto s = link_latencies(p.links[d], p.src[d].start_times(), p.tgt[d].start_times());
      samples.insert(samples.end(), s.begin(), s.end());
      aligned += distinct_sources(p.links[d]);
      words += p.src[d].size();
    }
    report_.alignments[sys.name] = p.links;
    push_latency(sys.name, from, std::move(samples), aligned, words, p.ids);
  }

  void relay_latency_row(const SystemSpec& sys) {
    if (sys.mode == RelayMode::direct) {
      aligned_latency_row(sys, sys.output, {});
      return;
    }
    const auto& via_links = report_.alignments.find(sys.via);
    const auto& out_links = report_.alignments.find(sys.output);
    if (via_links == report_.alignments.end() || out_links == report_.alignments.end()) {
      fail(ErrorCode::MissingTime, "component alignments for '" + sys.via + "' and '" + sys.output + "' are required");
    }
    const auto& via_row = latency_row(sys.via);
    const auto& out_row = latency_row(sys.output);
    std::vector<LatencySample> samples;
    std::vector<AlignmentSet> composed;
    std::vector<std::string> ids;
    std::size_t aligned = 0;
    std::size_t words = 0;
    for (const auto& doc : docs_) {
      const auto vi = std::find(via_row.documents.begin(), via_row.documents.end(), doc.doc_id);
      const auto oi = std::find(out_row.documents.begin(), out_row.documents.end(), doc.doc_id);
      if (vi == via_row.documents.end() || oi == out_row.documents.end()) continue;
      const auto& a_src_mid = via_links->second[static_cast<std::size_t>(vi - via_row.documents.begin())];
      const auto& a_mid_tgt = out_links->second[static_cast<std::size_t>(oi - out_row.documents.begin())];
      const auto& mid = doc.outputs.at(sys.via);
      const auto& out = doc.outputs.at(sys.output);
      std::vector<FinalizationRecord> finals;
      for (const auto& w : out.words) finals.push_back({w.index, w.start, w.surface});
      auto s = relay_samples(doc.source, mid, finals, a_src_mid, a_mid_tgt);
      samples.insert(samples.end(), s.begin(), s.end());
      auto chain = compose(a_src_mid, a_mid_tgt);
      aligned += distinct_sources(chain);
      words += doc.source.size();
      composed.push_back(std::move(chain));
      ids.push_back(doc.doc_id);
    }
    report_.alignments[sys.name] = std::move(composed);
    push_latency(sys.name, {}, std::move(samples), aligned, words, std::move(ids));
  }

  const LatencyRow& latency_row(const std::string& name) const {
    for (const auto& r : report_.latency) {
      if (r.system == name) return r;
    }
    fail(ErrorCode::MissingTime, "no latency row for '" + name + "'");
  }

  const ExperimentConfig& cfg_;
  RunReport& report_;
  std::vector<LoadedDocument> docs_;
};

}  // namespace

RunReport run_pipeline(const ExperimentConfig& config) {
  if (config.documents.empty()) fail(ErrorCode::NoDocuments, "no documents to process");
  RunReport report;
  report.config_hash = config.config_hash;
  report.tool_version = SLT_VERSION;
  report.generated_at = utc_now();
  Runner runner(config, report);
  runner.load();
  runner.latency();
  runner.compression();
  runner.complexity();
  runner.bleu();
  runner.annotations();
  return report;
}

}  // namespace slt
