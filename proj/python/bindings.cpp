#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "slt/aligner.hpp"
#include "slt/error.hpp"
#include "slt/ingest.hpp"
#include "slt/latency.hpp"
#include "slt/pipeline.hpp"
#include "slt/quality.hpp"
#include "slt/shortenfilter.hpp"
#include "slt/textmetrics.hpp"

namespace py = pybind11;
using namespace slt;

namespace {

using Links = std::vector<std::pair<std::size_t, std::size_t>>;

AlignmentSet to_set(const Links& links, Direction direction = Direction::forward, std::string src = "src",
                    std::string tgt = "tgt") {
  std::vector<AlignmentLink> out;
  out.reserve(links.size());
  for (const auto& [i, j] : links) out.push_back({i, j});
  return {std::move(src), std::move(tgt), direction, std::move(out)};
}

Links to_links(const AlignmentSet& set) {
  Links out;
  for (const auto& l : set.links()) out.emplace_back(l.src, l.tgt);
  return out;
}

TimedTranscript from_starts(const std::vector<double>& starts, std::string doc) {
  TimedTranscript t;
  t.doc_id = std::move(doc);
  for (std::size_t i = 0; i < starts.size(); ++i) t.words.push_back({"w", starts[i], starts[i], i});
  return t;
}

IncrementalLog make_log(const std::vector<std::pair<double, std::string>>& events, std::optional<double> session_end) {
  IncrementalLog log;
  log.doc_id = "log";
  for (const auto& [t, text] : events) log.events.push_back({t, text});
  log.session_end = session_end.value_or(events.empty() ? 0.0 : events.back().first);
  validate(log);
  return log;
}

py::dict latency_dict(const LatencyReport& r) {
  py::dict d;
  d["avg"] = r.avg;
  d["std"] = r.std;
  d["percentiles"] = r.percentiles;
  d["samples"] = r.samples.size();
  d["latencies"] = [&] {
    std::vector<double> v;
    for (const auto& s : r.samples) v.push_back(s.latency);
    return v;
  }();
  if (r.aligned_fraction) d["aligned_fraction"] = *r.aligned_fraction;
  return d;
}

py::dict bleu_dict(const BleuReport& r) {
  py::dict d;
  d["score"] = r.score;
  d["precisions"] = r.precisions;
  d["matches"] = r.matches;
  d["totals"] = r.totals;
  d["effective_order"] = r.effective_order;
  d["brevity_penalty"] = r.brevity_penalty;
  d["hyp_length"] = r.hyp_length;
  d["ref_length"] = r.ref_length;
  return d;
}

ParallelCorpus corpus_from(const std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>>& pairs) {
  ParallelCorpus c;
  for (const auto& [s, t] : pairs) c.push_back({s, t});
  return c;
}

}  // namespace

PYBIND11_MODULE(_slteval, m) {
  m.doc() = "Latency, length and quality evaluation for speech translation";
  m.attr("__version__") = SLT_VERSION;

  static auto* error_type = new py::object(py::exception<Error>(m, "SltError", PyExc_RuntimeError));
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = (*error_type)(e.what());
      exc.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(error_type->ptr(), exc.ptr());
    }
  });

  m.def("tokenize", [](const std::string& text, const std::string& language, bool lowercase) {
    return tokenize(text, language, {lowercase});
  }, py::arg("text"), py::arg("language") = "", py::arg("lowercase") = false);
  m.def("trim_lemma", [](const std::string& token, std::size_t k) { return trim_lemma(token, k); }, py::arg("token"),
        py::arg("k") = 5);

  m.def("finalization_times", [](const std::vector<std::pair<double, std::string>>& events, std::optional<double> session_end) {
    std::vector<std::pair<std::string, double>> out;
    for (const auto& r : finalization_times(make_log(events, session_end))) out.emplace_back(r.surface, r.time);
    return out;
  }, py::arg("events"), py::arg("session_end") = py::none(),
        "Events are (time, text) snapshots; returns (word, finalization time) for the final output.");

  m.def("summarize", [](const std::vector<double>& latencies, const std::vector<double>& percentiles) {
    std::vector<LatencySample> s;
    for (double v : latencies) s.push_back({{0, 0}, 0.0, v, v});
    SummaryOptions opt;
    opt.percentiles = percentiles;
    return latency_dict(summarize(std::move(s), opt));
  }, py::arg("latencies"), py::arg("percentiles") = std::vector<double>{50, 90, 99});

  m.def("link_latency", [](const Links& links, const std::vector<double>& src_times, const std::vector<double>& tgt_times) {
    SummaryOptions opt;
    opt.source_words = src_times.size();
    return latency_dict(summarize(link_latencies(to_set(links), src_times, tgt_times), opt));
  }, py::arg("links"), py::arg("src_times"), py::arg("tgt_times"));

  m.def("align", [](const std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>>& corpus,
                    const std::string& model, int iterations) {
    EmOptions opt;
    opt.model = parse_alignment_model(model);
    opt.iterations = iterations;
    const auto fwd_corpus = corpus_from(corpus);
    ParallelCorpus bwd_corpus;
    for (const auto& p : fwd_corpus) bwd_corpus.push_back({p.target, p.source});
    const auto fwd = train_em(fwd_corpus, opt);
    const auto bwd = train_em(bwd_corpus, opt);
    std::vector<Links> out;
    for (const auto& p : fwd_corpus) {
      const auto f = align_viterbi(fwd, p.source, p.target, "s", "t");
      const auto b = align_viterbi(bwd, p.target, p.source, "t", "s", Direction::backward).inverted();
      out.push_back(to_links(intersect(f, b)));
    }
    return out;
  }, py::arg("corpus"), py::arg("model") = "model2_diagonal", py::arg("iterations") = 5,
        "Intersected forward/backward Viterbi links per sentence pair.");

  m.def("train_em", [](const std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>>& corpus,
                       const std::string& model, int iterations) {
    EmOptions opt;
    opt.model = parse_alignment_model(model);
    opt.iterations = iterations;
    const auto table = train_em(corpus_from(corpus), opt);
    py::dict d;
    d["log_likelihood"] = table.log_likelihood();
    d["lambda"] = table.lambda();
    d["table"] = table.to_tsv();
    return d;
  }, py::arg("corpus"), py::arg("model") = "model2_diagonal", py::arg("iterations") = 5);

  m.def("intersect", [](const Links& a, const Links& b) { return to_links(intersect(to_set(a), to_set(b))); });
  m.def("compose", [](const Links& xy, const Links& yz) {
    return to_links(compose(to_set(xy, Direction::pruned, "x", "y"), to_set(yz, Direction::pruned, "y", "z")));
  });
  m.def("prune_time_regressive", [](const Links& links, const std::vector<double>& src_starts,
                                    const std::vector<double>& tgt_starts) {
    return to_links(prune_time_regressive(to_set(links, Direction::intersection), from_starts(src_starts, "src"),
                                          from_starts(tgt_starts, "tgt")));
  }, py::arg("links"), py::arg("src_starts"), py::arg("tgt_starts"));

  m.def("count_syllables", [](const std::string& word, const std::string& language) {
    return count_syllables(word, SyllableRule::for_language(language));
  }, py::arg("word"), py::arg("language") = "en");
  m.def("compression", [](const std::vector<std::string>& src, const std::string& src_lang,
                          const std::vector<std::string>& tgt, const std::string& tgt_lang) {
    const auto r = compression(src, src_lang, tgt, tgt_lang);
    return std::make_pair(r.syllable_ratio, r.char_ratio);
  }, py::arg("src"), py::arg("src_language"), py::arg("tgt"), py::arg("tgt_language"));
  m.def("log_rank_stats", [](const std::vector<std::string>& text, const std::vector<std::string>& rank_corpus,
                             std::optional<double> log_base) {
    ComplexityOptions opt;
    opt.log_base = log_base;
    const auto r = log_rank_stats(text, build_rank_table(rank_corpus), opt);
    py::dict d;
    d["mean"] = r.mean_defined ? py::cast(r.mean) : py::none();
    d["std"] = r.mean_defined ? py::cast(r.std) : py::none();
    d["sample_size"] = r.sample_size;
    d["oov"] = r.oov;
    d["oov_proportion"] = r.oov_proportion;
    return d;
  }, py::arg("text"), py::arg("rank_corpus"), py::arg("log_base") = py::none());
  m.def("two_sample_z", [](std::tuple<double, double, std::size_t> a, std::tuple<double, double, std::size_t> b) {
    const auto r = two_sample_z({std::get<0>(a), std::get<1>(a), std::get<2>(a)}, {std::get<0>(b), std::get<1>(b), std::get<2>(b)});
    return std::make_pair(r.z, r.p);
  }, py::arg("a"), py::arg("b"), "Samples are (mean, std, n); returns (z, two-sided p).");

  m.def("bleu", [](const std::vector<std::string>& hyps, const std::vector<std::string>& refs, const std::string& mode,
                   const std::string& smoothing, bool lowercase, int max_order) {
    BleuConfig cfg;
    cfg.mode = mode == "one" ? BleuMode::one : BleuMode::agg;
    cfg.smoothing = smoothing == "add_one" ? Smoothing::add_one : Smoothing::none;
    cfg.lowercase = lowercase;
    cfg.max_order = max_order;
    return bleu_dict(bleu_text(hyps, refs, cfg));
  }, py::arg("hypotheses"), py::arg("references"), py::arg("mode") = "agg", py::arg("smoothing") = "none",
        py::arg("lowercase") = false, py::arg("max_order") = 4);

  m.def("apply_bpe", [](const std::string& word, const std::vector<std::pair<std::string, std::string>>& merges) {
    return apply_bpe(word, BpeModel(merges));
  }, py::arg("word"), py::arg("merges"));
  m.def("filter_corpus", [](const std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>>& corpus,
                            const std::vector<std::pair<std::string, std::string>>& merges, double max_ratio) {
    FilterConfig cfg;
    cfg.max_ratio = max_ratio;
    const BpeModel model(merges);
    const auto r = filter_corpus(corpus_from(corpus), cfg, model, model);
    py::dict d;
    d["kept_indices"] = r.kept_indices;
    d["ratios"] = r.ratios;
    d["dropped"] = r.dropped;
    d["mean_kept_ratio"] = r.mean_kept_ratio ? py::cast(*r.mean_kept_ratio) : py::none();
    return d;
  }, py::arg("corpus"), py::arg("merges"), py::arg("max_ratio") = 0.86);

  m.def("run_report", [](const std::string& config_path, const std::vector<std::string>& overrides) {
    const auto cfg = load_experiment_config(config_path, overrides);
    RunReport report;
    {
      py::gil_scoped_release release;
      report = run_pipeline(cfg);
    }
    return to_json(report).dump();
  }, py::arg("config"), py::arg("overrides") = std::vector<std::string>{}, "Runs a config and returns the JSON report.");
  m.def("render_report", [](const std::string& report_json, const std::string& format) {
    return render_report(nlohmann::json::parse(report_json), parse_report_format(format));
  }, py::arg("report_json"), py::arg("format") = "markdown");
}
