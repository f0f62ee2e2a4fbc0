#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "slt/aligner.hpp"
#include "slt/error.hpp"
#include "slt/ingest.hpp"
#include "slt/latency.hpp"
#include "slt/manifest.hpp"
#include "slt/pipeline.hpp"
#include "slt/quality.hpp"
#include "slt/shortenfilter.hpp"
#include "slt/text.hpp"
#include "slt/textmetrics.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace slt;

namespace {

constexpr int kExitPartial = 1;
constexpr int kExitConfig = 2;

void write_file(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  const auto parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write " + path);
  out << content;
}

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::vector<std::string> tokens_of_file(const std::string& path, const std::string& language) {
  return tokenize(text::read_file(path), language);
}

// Word timeline of a target that is either a timed TSV or an incremental MT log.
TimedTranscript load_target(const std::string& timed, const std::string& log, Track track, const std::string& language) {
  if (!log.empty()) return finalized_transcript(parse_incremental_log(log), language);
  return parse_timed_transcript(timed, track, language);
}

ParallelCorpus maybe_corpus(const std::string& src, const std::string& tgt, const std::string& sl, const std::string& tl) {
  if (src.empty() && tgt.empty()) return {};
  if (src.empty() || tgt.empty()) fail(ErrorCode::ConfigInvalid, "extra corpus needs both --extra-src and --extra-tgt");
  return read_parallel_corpus(src, tgt, sl, tl);
}

// ---------------------------------------------------------------------------

struct IngestArgs {
  std::string manifest, timed, log, track = "source", language;
};

int cmd_ingest_validate(const IngestArgs& a) {
  if (!a.manifest.empty()) {
    const auto check = check_manifest(load_manifest(a.manifest));
    std::cout << "documents\t" << check.documents << "\n";
    std::cout << "spontaneous_fraction\t" << fixed(check.spontaneous_fraction) << "\n";
    for (const auto& [track, versions] : check.stats) {
      for (const auto& [version, st] : versions) {
        std::cout << track << "\t" << to_string(version) << "\t"
                  << (st.mode == CountingMode::document ? "documents" : "sentences") << "\t" << st.units << "\twords\t"
                  << st.words << "\n";
      }
    }
    for (const auto& [doc, msg] : check.problems) std::cerr << doc << ": " << msg << "\n";
    return check.ok() ? 0 : kExitPartial;
  }
  if (!a.timed.empty()) {
    const auto t = parse_timed_transcript(a.timed, parse_track(a.track), a.language);
    std::cout << t.doc_id << "\t" << to_string(t.track) << "\twords\t" << t.size() << "\n";
  }
  if (!a.log.empty()) {
    const auto log = parse_incremental_log(a.log);
    std::cout << log.doc_id << "\tevents\t" << log.events.size() << "\tsession_end\t" << text::format_double(log.session_end)
              << "\n";
  }
  if (a.manifest.empty() && a.timed.empty() && a.log.empty()) fail(ErrorCode::ConfigInvalid, "nothing to validate");
  return 0;
}

struct AlignTrainArgs {
  std::string src, tgt, src_lang, tgt_lang, out, model = "model2_diagonal";
  int iterations = 5;
  std::size_t trim = 5;
  bool keep_case = false;
  double null_prob = 0.08;
};

int cmd_align_train(const AlignTrainArgs& a) {
  AlignerOptions opt;
  opt.trim = a.trim;
  opt.lowercase = !a.keep_case;
  opt.em.model = parse_alignment_model(a.model);
  opt.em.iterations = a.iterations;
  opt.em.null_prob = a.null_prob;
  auto corpus = read_parallel_corpus(a.src, a.tgt, a.src_lang, a.tgt_lang);
  for (auto& p : corpus) {
    p.source = alignment_tokens(p.source, opt, a.src_lang);
    p.target = alignment_tokens(p.target, opt, a.tgt_lang);
  }
  const auto table = train_em(corpus, opt.em);
  write_file(a.out, table.to_tsv());
  std::cerr << "pairs " << corpus.size() << ", lambda " << text::format_double(table.lambda()) << ", log-likelihood "
            << text::format_double(table.log_likelihood().back()) << "\n";
  return 0;
}

struct AlignRunArgs {
  std::string src, tgt, tgt_log, src_lang, tgt_lang, extra_src, extra_tgt, out, forward_out, backward_out;
  std::string track = "interpreter", model = "model2_diagonal", prune_reference = "start";
  int iterations = 5;
  std::size_t trim = 5;
  bool no_prune = false;
};

int cmd_align_run(const AlignRunArgs& a) {
  AlignerOptions opt;
  opt.trim = a.trim;
  opt.em.model = parse_alignment_model(a.model);
  opt.em.iterations = a.iterations;
  opt.prune = !a.no_prune;
  opt.prune_reference = a.prune_reference == "end" ? PruneReference::source_end : PruneReference::source_start;
  const auto src = parse_timed_transcript(a.src, Track::source, a.src_lang);
  const auto tgt = load_target(a.tgt, a.tgt_log, parse_track(a.track), a.tgt_lang);
  const auto extra = maybe_corpus(a.extra_src, a.extra_tgt, a.src_lang, a.tgt_lang);
  const auto result = align_documents(std::vector<TimedTranscript>{src}, std::vector<TimedTranscript>{tgt}, extra, opt);
  write_file(a.out, to_pharaoh(result.links.front()) + "\n");
  if (!a.forward_out.empty()) write_file(a.forward_out, to_pharaoh(result.forward_links.front()) + "\n");
  if (!a.backward_out.empty()) write_file(a.backward_out, to_pharaoh(result.backward_links.front()) + "\n");
  std::cerr << "links " << result.links.front().size() << " (forward " << result.forward_links.front().size()
            << ", backward " << result.backward_links.front().size() << ")\n";
  return 0;
}

struct FinalizeArgs {
  std::string log, language, out;
};

int cmd_finalize(const FinalizeArgs& a) {
  write_file(a.out, format_timed_transcript(finalized_transcript(parse_incremental_log(a.log), a.language)));
  return 0;
}

struct LatencyArgs {
  std::string src, tgt, tgt_log, links, track = "interpreter", src_lang, tgt_lang, out;
  std::vector<double> percentiles{50, 90, 99};
};

int cmd_latency(const LatencyArgs& a) {
  const auto src = parse_timed_transcript(a.src, Track::source, a.src_lang);
  const auto tgt = load_target(a.tgt, a.tgt_log, parse_track(a.track), a.tgt_lang);
  const auto line = text::trim(text::read_file(a.links));
  const AlignmentSet links(src.doc_id, tgt.doc_id, Direction::pruned, parse_pharaoh(line));
  SummaryOptions opt;
  opt.percentiles = a.percentiles;
  opt.source_words = src.size();
  const auto report = summarize(link_latencies(links, src.start_times(), tgt.start_times()), opt);
  write_file(a.out, to_json(report).dump(2) + "\n");
  return 0;
}

struct CompressArgs {
  std::string src, tgt, src_lang = "en", tgt_lang;
  bool keep_punct = false;
};

std::vector<std::string> words_only(std::vector<std::string> tokens) {
  std::erase_if(tokens, [](const std::string& t) {
    for (char32_t c : text::decode(t)) {
      if (text::is_alnum(c)) return false;
    }
    return true;
  });
  return tokens;
}

int cmd_compress(const CompressArgs& a) {
  auto src = tokens_of_file(a.src, a.src_lang);
  auto tgt = tokens_of_file(a.tgt, a.tgt_lang);
  if (!a.keep_punct) {
    src = words_only(std::move(src));
    tgt = words_only(std::move(tgt));
  }
  const auto r = compression(src, a.src_lang, tgt, a.tgt_lang);
  std::cout << json{{"syllable_ratio", r.syllable_ratio}, {"char_ratio", r.char_ratio}}.dump(2) << "\n";
  return 0;
}

struct ComplexityArgs {
  std::string text, language, rank_corpus, rank_table, write_table, oov = "exclude";
  std::optional<double> log_base;
  bool lowercase = false;
};

int cmd_complexity(const ComplexityArgs& a) {
  RankTable table;
  if (!a.rank_table.empty()) {
    table = RankTable::from_tsv(text::read_file(a.rank_table));
  } else if (!a.rank_corpus.empty()) {
    table = build_rank_table(tokenize(text::read_file(a.rank_corpus), a.language, {a.lowercase}));
  } else {
    fail(ErrorCode::ConfigInvalid, "need --rank-corpus or --rank-table");
  }
  if (!a.write_table.empty()) write_file(a.write_table, table.to_tsv());
  ComplexityOptions opt;
  opt.log_base = a.log_base;
  opt.oov = a.oov == "rank_v_plus_one" ? OovPolicy::rank_v_plus_one : OovPolicy::exclude;
  const auto tokens = tokenize(text::read_file(a.text), a.language, {a.lowercase});
  std::cout << to_json(log_rank_stats(tokens, table, opt)).dump(2) << "\n";
  return 0;
}

struct BleuArgs {
  std::string hyp, ref, mode = "agg", smoothing = "none", language;
  int max_order = 4;
  bool lowercase = false;
};

int cmd_bleu(const BleuArgs& a) {
  BleuConfig cfg;
  cfg.max_order = a.max_order;
  cfg.lowercase = a.lowercase;
  cfg.smoothing = a.smoothing == "add_one" ? Smoothing::add_one : Smoothing::none;
  cfg.mode = a.mode == "one" ? BleuMode::one : BleuMode::agg;
  const auto hyp = text::read_lines(a.hyp);
  const auto ref = text::read_lines(a.ref);
  std::cout << to_json(bleu_text(hyp, ref, cfg, a.language)).dump(2) << "\n";
  return 0;
}

struct FilterArgs {
  std::string src, tgt, src_merges, tgt_merges, src_lang, tgt_lang, out_src, out_tgt;
  double ratio = 0.86;
};

std::string join_lines(const ParallelCorpus& corpus, bool source) {
  std::string out;
  for (const auto& p : corpus) {
    const auto& words = source ? p.source : p.target;
    for (std::size_t i = 0; i < words.size(); ++i) out += (i ? " " : "") + words[i];
    out += "\n";
  }
  return out;
}

int cmd_filter_corpus(const FilterArgs& a) {
  const auto corpus = read_parallel_corpus(a.src, a.tgt, a.src_lang, a.tgt_lang);
  const auto src_model = BpeModel::from_text(text::read_file(a.src_merges));
  const auto tgt_model = a.tgt_merges.empty() ? src_model : BpeModel::from_text(text::read_file(a.tgt_merges));
  FilterConfig cfg;
  cfg.max_ratio = a.ratio;
  cfg.source_language = a.src_lang;
  cfg.target_language = a.tgt_lang;
  const auto r = filter_corpus(corpus, cfg, src_model, tgt_model);
  if (!a.out_src.empty()) write_file(a.out_src, join_lines(r.kept, true));
  if (!a.out_tgt.empty()) write_file(a.out_tgt, join_lines(r.kept, false));
  std::cout << "kept\t" << r.kept.size() << "\ndropped\t" << r.dropped << "\nmean_kept_ratio\t"
            << (r.mean_kept_ratio ? fixed(*r.mean_kept_ratio) : "n/a") << "\nsource_merges\t" << r.source_merges
            << "\ntarget_merges\t" << r.target_merges << "\n";
  return 0;
}

struct ReportArgs {
  std::string config, out;
  std::vector<std::string> overrides;
  std::optional<unsigned> jobs;
  std::vector<std::string> formats{"json", "markdown"};
};

int cmd_report(const ReportArgs& a) {
  auto overrides = a.overrides;
  if (a.jobs) overrides.push_back("jobs=" + std::to_string(*a.jobs));
  const auto cfg = load_experiment_config(a.config, overrides);
  const auto report = run_pipeline(cfg);
  const auto out_dir = a.out.empty() ? fs::path(cfg.output_dir) : fs::path(a.out);
  fs::create_directories(out_dir);
  const auto j = to_json(report);
  for (const auto& f : a.formats) {
    const auto format = parse_report_format(f);
    const char* name = format == ReportFormat::json ? "report.json" : format == ReportFormat::csv ? "report.csv" : "report.md";
    write_file((out_dir / name).string(), format == ReportFormat::json ? j.dump(2) + "\n" : render_report(j, format));
  }
  for (const auto& [system, sets] : report.alignments) {
    std::string lines;
    for (const auto& s : sets) lines += to_pharaoh(s) + "\n";
    write_file((out_dir / "alignments" / (system + ".pharaoh")).string(), lines);
  }
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
  for (const auto& f : report.failures) std::cerr << "failed: " << f.doc_id << ": " << f.error << "\n";
  std::cerr << "documents " << report.documents.size() << ", failed " << report.failures.size() << ", output "
            << out_dir.string() << "\n";
  return report.ok() ? 0 : kExitPartial;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latency, length and quality evaluation for speech translation and interpreting"};
  app.set_version_flag("--version", SLT_VERSION);
  app.require_subcommand(1);
  int code = 0;
  std::function<int()> run;

  IngestArgs ingest;
  auto* c = app.add_subcommand("ingest-validate", "Check manifests, timed transcripts or MT logs");
  c->add_option("--manifest", ingest.manifest, "Corpus manifest JSON");
  c->add_option("--timed", ingest.timed, "Word-timestamped TSV");
  c->add_option("--track", ingest.track, "source, interpreter or mt");
  c->add_option("--language", ingest.language);
  c->add_option("--log", ingest.log, "Incremental MT log (JSON lines)");
  c->callback([&] { run = [&] { return cmd_ingest_validate(ingest); }; });

  AlignTrainArgs train;
  c = app.add_subcommand("align-train", "Train a lexical translation table by EM");
  c->add_option("--src", train.src)->required();
  c->add_option("--tgt", train.tgt)->required();
  c->add_option("--src-lang", train.src_lang);
  c->add_option("--tgt-lang", train.tgt_lang);
  c->add_option("--model", train.model, "model1 or model2_diagonal");
  c->add_option("--iterations", train.iterations);
  c->add_option("--trim", train.trim);
  c->add_option("--null-prob", train.null_prob);
  c->add_flag("--keep-case", train.keep_case);
  c->add_option("-o,--out", train.out, "Table TSV (default stdout)");
  c->callback([&] { run = [&] { return cmd_align_train(train); }; });

  AlignRunArgs arun;
  c = app.add_subcommand("align-run", "Align a source document to an output document");
  c->add_option("--src", arun.src, "Source timed TSV")->required();
  c->add_option("--tgt", arun.tgt, "Target timed TSV");
  c->add_option("--tgt-log", arun.tgt_log, "Target incremental MT log");
  c->add_option("--track", arun.track);
  c->add_option("--src-lang", arun.src_lang);
  c->add_option("--tgt-lang", arun.tgt_lang);
  c->add_option("--extra-src", arun.extra_src);
  c->add_option("--extra-tgt", arun.extra_tgt);
  c->add_option("--model", arun.model);
  c->add_option("--iterations", arun.iterations);
  c->add_option("--trim", arun.trim);
  c->add_option("--prune-reference", arun.prune_reference)->check(CLI::IsMember({"start", "end"}));
  c->add_flag("--no-prune", arun.no_prune);
  c->add_option("-o,--out", arun.out, "Pharaoh output");
  c->add_option("--forward-out", arun.forward_out);
  c->add_option("--backward-out", arun.backward_out);
  c->callback([&] {
    if (arun.tgt.empty() == arun.tgt_log.empty()) throw CLI::ValidationError("exactly one of --tgt and --tgt-log");
    run = [&] { return cmd_align_run(arun); };
  });

  FinalizeArgs fin;
  c = app.add_subcommand("finalize", "Finalization time of every word of an MT log");
  c->add_option("--log", fin.log)->required();
  c->add_option("--language", fin.language);
  c->add_option("-o,--out", fin.out, "Timed TSV (default stdout)");
  c->callback([&] { run = [&] { return cmd_finalize(fin); }; });

  LatencyArgs lat;
  c = app.add_subcommand("latency", "Latency summary from a Pharaoh alignment");
  c->add_option("--src", lat.src)->required();
  c->add_option("--tgt", lat.tgt);
  c->add_option("--tgt-log", lat.tgt_log);
  c->add_option("--track", lat.track);
  c->add_option("--links", lat.links, "Pharaoh file")->required();
  c->add_option("--src-lang", lat.src_lang);
  c->add_option("--tgt-lang", lat.tgt_lang);
  c->add_option("--percentiles", lat.percentiles);
  c->add_option("-o,--out", lat.out);
  c->callback([&] {
    if (lat.tgt.empty() == lat.tgt_log.empty()) throw CLI::ValidationError("exactly one of --tgt and --tgt-log");
    run = [&] { return cmd_latency(lat); };
  });

  CompressArgs comp;
  c = app.add_subcommand("compress", "Syllable and character length ratio of two texts");
  c->add_option("--src", comp.src)->required();
  c->add_option("--tgt", comp.tgt)->required();
  c->add_option("--src-lang", comp.src_lang);
  c->add_option("--tgt-lang", comp.tgt_lang)->required();
  c->add_flag("--keep-punct", comp.keep_punct);
  c->callback([&] { run = [&] { return cmd_compress(comp); }; });

  ComplexityArgs cx;
  c = app.add_subcommand("complexity", "Mean log frequency rank of a text");
  c->add_option("--text", cx.text)->required();
  c->add_option("--language", cx.language);
  c->add_option("--rank-corpus", cx.rank_corpus);
  c->add_option("--rank-table", cx.rank_table);
  c->add_option("--write-table", cx.write_table);
  c->add_option("--log-base", cx.log_base);
  c->add_option("--oov", cx.oov)->check(CLI::IsMember({"exclude", "rank_v_plus_one"}));
  c->add_flag("--lowercase", cx.lowercase);
  c->callback([&] { run = [&] { return cmd_complexity(cx); }; });

  BleuArgs bl;
  c = app.add_subcommand("bleu", "BLEU of line-aligned hypothesis and reference files");
  c->add_option("--hyp", bl.hyp)->required();
  c->add_option("--ref", bl.ref)->required();
  c->add_option("--mode", bl.mode)->check(CLI::IsMember({"agg", "one"}));
  c->add_option("--smoothing", bl.smoothing)->check(CLI::IsMember({"none", "add_one"}));
  c->add_option("--max-order", bl.max_order);
  c->add_option("--language", bl.language);
  c->add_flag("--lowercase", bl.lowercase);
  c->callback([&] { run = [&] { return cmd_bleu(bl); }; });

  FilterArgs fa;
  c = app.add_subcommand("filter-corpus", "Keep pairs whose target has at most ratio x source subwords");
  c->add_option("--src", fa.src)->required();
  c->add_option("--tgt", fa.tgt)->required();
  c->add_option("--src-merges", fa.src_merges)->required();
  c->add_option("--tgt-merges", fa.tgt_merges, "Defaults to --src-merges");
  c->add_option("--src-lang", fa.src_lang);
  c->add_option("--tgt-lang", fa.tgt_lang);
  c->add_option("--ratio", fa.ratio);
  c->add_option("--out-src", fa.out_src);
  c->add_option("--out-tgt", fa.out_tgt);
  c->callback([&] { run = [&] { return cmd_filter_corpus(fa); }; });

  ReportArgs rep;
  c = app.add_subcommand("report", "Run a full experiment from a config file");
  c->add_option("-c,--config", rep.config)->required();
  c->add_option("--set", rep.overrides, "key.path=value override")->take_all();
  c->add_option("-j,--jobs", rep.jobs);
  c->add_option("--format", rep.formats)->check(CLI::IsMember({"json", "csv", "markdown", "md"}));
  c->add_option("-o,--out", rep.out, "Output directory (default: config output_dir)");
  c->callback([&] { run = [&] { return cmd_report(rep); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }
  try {
    code = run();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    const bool config = e.code() == ErrorCode::ConfigInvalid || e.code() == ErrorCode::NoDocuments ||
                        e.code() == ErrorCode::InvalidArgument;
    return config ? kExitConfig : kExitPartial;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPartial;
  }
  return code;
}
