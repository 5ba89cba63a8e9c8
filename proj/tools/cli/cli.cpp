#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "capqe/caption_scorer.hpp"
#include "capqe/corpus.hpp"
#include "capqe/error.hpp"
#include "capqe/hashing.hpp"
#include "capqe/metrics.hpp"
#include "capqe/pipeline.hpp"
#include "capqe/records.hpp"
#include "capqe/refinement.hpp"
#include "capqe/repository.hpp"
#include "capqe/review_http.hpp"
#include "capqe/review_service.hpp"
#include "capqe/sampler.hpp"
#include "capqe/store.hpp"
#include "config.hpp"

namespace capqe::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Common {
  std::string config;
  std::string store;
  std::string corpus;
};

PipelineConfig load(const Common& c) {
  PipelineConfig cfg = c.config.empty() ? parse_config("") : load_config(c.config);
  if (!c.corpus.empty()) cfg.corpus = c.corpus;
  if (!c.store.empty()) {
    cfg.store = c.store;
  } else if (const char* env = std::getenv("CAPQE_STORE"); env && *env) {
    cfg.store = env;
  }
  return cfg;
}

Corpus corpus_of(const PipelineConfig& cfg) {
  if (cfg.corpus.empty()) {
    throw ArgumentError("no corpus: pass --corpus or set \"corpus\" in the config");
  }
  return load_corpus(cfg.corpus);
}

std::shared_ptr<FileStore> store_of(const PipelineConfig& cfg) {
  if (cfg.store.empty()) {
    throw ArgumentError("no store root: pass --store, set CAPQE_STORE or \"store\" in the config");
  }
  return std::make_shared<FileStore>(cfg.store);
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ArgumentError("cannot write " + path);
  f << content;
  if (!f.flush()) throw ArgumentError("write to " + path + " failed");
}

// Version ids hash the processing config together with the corpus content,
// so a changed corpus never reuses chunks published for another.
std::string run_hash(const PipelineConfig& cfg, const Corpus& corpus) {
  return sha256_hex(cfg.config_hash + ":" + sha256_hex(serialize_corpus(corpus)));
}

// CAPQE_KILL_POINT=<point>[@<chunk start>] ends the process at that point.
FaultHook kill_hook() {
  const char* env = std::getenv("CAPQE_KILL_POINT");
  if (!env || !*env) return {};
  std::string value(env);
  std::string point = value;
  std::optional<std::int64_t> at;
  if (auto pos = value.find('@'); pos != std::string::npos) {
    point = value.substr(0, pos);
    at = std::stoll(value.substr(pos + 1));
  }
  return [point, at](std::string_view p, const ChunkRange& range) {
    if (p == point && (!at || *at == range.start)) std::_Exit(kExitKilled);
  };
}

int cmd_sample(const PipelineConfig& cfg, std::optional<double> fraction,
               std::optional<std::uint64_t> seed, const std::string& out_path,
               const std::string& report_out, std::ostream& out) {
  const Corpus corpus = corpus_of(cfg);
  const double f = fraction.value_or(cfg.sample.fraction);
  const std::uint64_t s = seed.value_or(cfg.sample.seed);
  const SampleResult res = stratified_sample(corpus, f, s);
  if (!out_path.empty()) {
    write_file(out_path, serialize_corpus(corpus.subset({res.subset.begin(), res.subset.end()})));
  }
  if (!report_out.empty()) write_file(report_out, serialize_distribution_report(res.report));
  out << json{{"kind", "sample"},
              {"fraction", f},
              {"seed", s},
              {"n_images", corpus.images().size()},
              {"selected", res.subset.size()},
              {"max_abs_deviation", res.report.max_abs_deviation},
              {"total_variation_distance", res.report.total_variation_distance}}
             .dump()
      << "\n";
  return kExitOk;
}

int cmd_run(PipelineConfig cfg, std::optional<std::int64_t> chunk_size,
            std::optional<int> workers, std::ostream& out, std::ostream& err) {
  if (chunk_size) cfg.chunk_size = *chunk_size;
  if (workers) cfg.workers = *workers;
  const Corpus corpus = corpus_of(cfg);
  auto store = store_of(cfg);
  const ProviderSet providers = make_providers(cfg.providers);
  RunOptions opts;
  opts.chunk_size = cfg.chunk_size;
  opts.workers = cfg.workers;
  opts.store_retries = cfg.store_retries;
  opts.config_hash = run_hash(cfg, corpus);
  opts.fault_hook = kill_hook();
  const RunOutcome outcome = run_pipeline(corpus, providers, cfg.qe, *store, opts);
  out << json{{"kind", "run"},
              {"pipeline_config_hash", opts.config_hash},
              {"chunks", outcome.manifest.chunks.size() + outcome.failures.size()},
              {"processed", outcome.processed},
              {"skipped", outcome.skipped},
              {"failed", outcome.failures.size()},
              {"total_records", outcome.manifest.total_records},
              {"complete", outcome.manifest.complete}}
             .dump()
      << "\n";
  for (const auto& f : outcome.failures) {
    err << "failed range [" << f.range.start << ", " << f.range.end << ") version "
        << f.range.version_id << ": " << f.error << "\n";
  }
  return outcome.failures.empty() ? kExitOk : kExitPartial;
}

int cmd_score(const PipelineConfig& cfg, const std::string& in_path, const std::string& out_path,
              std::ostream& out) {
  const Corpus corpus = corpus_of(cfg);
  std::ifstream in(in_path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open " + in_path);
  std::ostringstream buf;
  buf << in.rdbuf();
  auto records = parse_records(buf.str(), in_path);
  const ProviderSet providers = make_providers(cfg.providers);

  std::size_t flagged = 0;
  const auto step = static_cast<std::size_t>(cfg.chunk_size);
  for (std::size_t start = 0; start < records.size(); start += step) {
    const std::size_t end = std::min(records.size(), start + step);
    std::vector<std::string> src, tgt, refs;
    for (std::size_t i = start; i < end; ++i) {
      const auto& r = records[i];
      if (!r.translated_text) {
        throw ValidationError("caption " + std::to_string(r.caption_id) + " has no translation");
      }
      const CaptionRecord* known = corpus.find_caption(r.caption_id);
      if (!known) throw NotFoundError("caption " + std::to_string(r.caption_id) + " not in corpus");
      src.push_back(r.source_text);
      tgt.push_back(*r.translated_text);
      refs.push_back(corpus.image_ref_for(*known));
    }
    const auto scored = score_translations(src, tgt, refs, providers, cfg.qe);
    for (std::size_t i = start; i < end; ++i) {
      records[i].back_translated_text = scored[i - start].back_translation;
      records[i].scores = scored[i - start].scores;
      if (flag_low_quality(*records[i].scores, cfg.qe)) ++flagged;
    }
  }
  const std::string content = serialize_records(records);
  if (out_path.empty() || out_path == "-") {
    out << content;
  } else {
    write_file(out_path, content);
    out << json{{"kind", "score"}, {"records", records.size()}, {"flagged", flagged}}.dump()
        << "\n";
  }
  return kExitOk;
}

int cmd_refine(const PipelineConfig& cfg, const std::string& report_out,
               const std::string& references, std::ostream& out) {
  const Corpus corpus = corpus_of(cfg);
  auto store = store_of(cfg);
  CaptionRepository repo(store);
  const auto before = repo.records();
  const ProviderSet providers = make_providers(cfg.providers);
  RefinementResult result = refine_flagged(before, corpus, providers, cfg.qe, cfg.refinement);

  std::vector<CaptionRecord> flagged_before, flagged_after;
  for (std::size_t i = 0; i < before.size(); ++i) {
    if (before[i].status != CaptionStatus::NeedsRefinement) continue;
    flagged_before.push_back(before[i]);
    flagged_after.push_back(result.records[i]);
    if (result.records[i] != before[i]) repo.commit(result.records[i], before[i].revision);
  }
  if (!references.empty() && !flagged_before.empty()) {
    const auto [b, a] = before_after_report(flagged_before, flagged_after,
                                            load_references(references));
    result.report.before = b;
    result.report.after = a;
  }
  const std::string report = serialize_refinement_report(result.report);
  if (!report_out.empty()) write_file(report_out, report);
  out << report.substr(0, report.find('\n') + 1);
  return result.report.n_provider_failed == 0 ? kExitOk : kExitPartial;
}

int cmd_evaluate(const std::string& hyp, const std::string& ref, const std::string& tokenizer,
                 const std::string& out_path, std::ostream& out) {
  const MetricReport report = evaluate_dataset(hyp, ref, parse_tokenizer(tokenizer));
  const std::string line = serialize_metric_report(report);
  if (!out_path.empty()) write_file(out_path, line);
  out << line;
  return kExitOk;
}

int cmd_serve(const PipelineConfig& cfg, const std::string& host, int port,
              const std::string& ui_dir, std::ostream& out) {
  auto store = store_of(cfg);
  auto service = std::make_shared<ReviewService>(store, corpus_of(cfg),
                                                 make_providers(cfg.providers), cfg.qe);
  ReviewHttpServer server(service, ui_dir);
  const int bound = server.bind(host, port);
  out << json{{"kind", "serve"}, {"host", host}, {"port", bound}}.dump() << std::endl;
  server.serve();
  return kExitOk;
}

int cmd_stats(const PipelineConfig& cfg, std::ostream& out) {
  auto store = store_of(cfg);
  CaptionRepository repo(store);
  json counts = json::object();
  for (CaptionStatus s : kAllStatuses) counts[std::string(to_string(s))] = 0;
  std::size_t total = 0;
  for (const auto& r : repo.records()) {
    counts[std::string(to_string(r.status))] = counts[std::string(to_string(r.status))].get<int>() + 1;
    ++total;
  }
  json j{{"kind", "stats"}, {"counts", counts}, {"total", total}};
  if (auto m = store->read_manifest()) {
    const Manifest manifest = parse_manifest(*m);
    j["manifest"] = {{"pipeline_config_hash", manifest.pipeline_config_hash},
                     {"chunks", manifest.chunks.size()},
                     {"total_records", manifest.total_records},
                     {"complete", manifest.complete}};
  }
  out << j.dump() << "\n";
  return kExitOk;
}

int cmd_export(const PipelineConfig& cfg, const std::string& out_path, const std::string& ids_out,
               const std::string& references, const std::string& ref_out, std::ostream& out) {
  auto store = store_of(cfg);
  CaptionRepository repo(store);
  const auto records = exportable_records(repo.records());
  std::optional<ReferenceMap> refs;
  if (!references.empty()) refs = load_references(references);
  std::string hyp, ids, ref;
  std::size_t skipped = 0;
  for (const auto& r : records) {
    std::string text = *r.translated_text;
    if (text.find('\n') != std::string::npos) {
      throw ValidationError("caption " + std::to_string(r.caption_id) + " spans several lines");
    }
    if (refs) {
      auto it = refs->find(r.caption_id);
      if (it == refs->end()) {
        ++skipped;
        continue;
      }
      ref += it->second + "\n";
    }
    hyp += text + "\n";
    ids += std::to_string(r.caption_id) + "\n";
  }
  write_file(out_path, hyp);
  if (!ids_out.empty()) write_file(ids_out, ids);
  if (!ref_out.empty()) {
    if (!refs) throw ArgumentError("--ref-out requires --references");
    write_file(ref_out, ref);
  }
  out << json{{"kind", "export"},
              {"exported", records.size() - skipped},
              {"without_reference", skipped}}
             .dump()
      << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Caption corpus translation, quality estimation and review", "capqe"};
  app.require_subcommand(1);

  Common common;
  auto add_common = [&](CLI::App* sub, bool store, bool corpus) {
    sub->add_option("--config", common.config, "Pipeline config (JSON)");
    if (store) sub->add_option("--store", common.store, "Store root (overrides CAPQE_STORE)");
    if (corpus) sub->add_option("--corpus", common.corpus, "Corpus file (JSONL)");
  };

  auto* sample = app.add_subcommand("sample", "Draw a label-stratified image subset");
  add_common(sample, false, true);
  std::optional<double> fraction;
  std::optional<std::uint64_t> seed;
  std::string sample_out, report_out;
  sample->add_option("--fraction", fraction, "Fraction of images to keep")
      ->check(CLI::Range(0.0, 1.0));
  sample->add_option("--seed", seed, "Seed for the unlabeled stratum");
  sample->add_option("--out", sample_out, "Write the subset corpus here");
  sample->add_option("--report-out", report_out, "Write the label distribution report here");

  auto* run = app.add_subcommand("run", "Translate and score the corpus chunk by chunk");
  add_common(run, true, true);
  std::optional<std::int64_t> chunk_size;
  std::optional<int> workers;
  bool resume = false;
  run->add_option("--chunk-size", chunk_size, "Captions per chunk")->check(CLI::PositiveNumber);
  run->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
  run->add_flag("--resume", resume, "Skip published chunks (always on)");

  auto* score = app.add_subcommand("score", "Score the translations of a records file");
  add_common(score, false, true);
  std::string score_in, score_out;
  score->add_option("--in", score_in, "Records with translated_text")->required();
  score->add_option("--out", score_out, "Scored records (default stdout)");

  auto* refine = app.add_subcommand("refine", "Refine flagged captions in a store");
  add_common(refine, true, true);
  std::string refine_report, refine_refs;
  refine->add_option("--report-out", refine_report, "Write the refinement report here");
  refine->add_option("--references", refine_refs, "Reference translations for metrics (JSONL)");

  auto* evaluate = app.add_subcommand("evaluate", "BLEU and chrF of line-aligned files");
  std::string hyp, ref, tokenizer = "standard", eval_out;
  evaluate->add_option("--hyp", hyp, "Hypothesis file")->required();
  evaluate->add_option("--ref", ref, "Reference file")->required();
  evaluate->add_option("--tokenizer", tokenizer, "standard or whitespace");
  evaluate->add_option("--out", eval_out, "Write the metric report here");

  auto* serve = app.add_subcommand("serve", "Serve the manual review API");
  add_common(serve, true, true);
  std::string host = "127.0.0.1", ui_dir;
  int port = 8080;
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port (0 picks a free one)");
  serve->add_option("--ui-dir", ui_dir, "Built review UI assets to serve under /");

  auto* stats = app.add_subcommand("stats", "Caption counts by status");
  add_common(stats, true, false);

  auto* exp = app.add_subcommand("export", "Write accepted translations one per line");
  add_common(exp, true, false);
  std::string export_out, ids_out, export_refs, ref_out;
  exp->add_option("--out", export_out, "Hypothesis file")->required();
  exp->add_option("--ids-out", ids_out, "Caption id of each exported line");
  exp->add_option("--references", export_refs, "Reference translations (JSONL)");
  exp->add_option("--ref-out", ref_out, "Aligned reference file");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    const auto subs = app.get_subcommands();
    out << (subs.empty() ? app.help() : subs.front()->help());
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kExitUsage;
  }

  try {
    if (*evaluate) return cmd_evaluate(hyp, ref, tokenizer, eval_out, out);
    const PipelineConfig cfg = load(common);
    if (*sample) return cmd_sample(cfg, fraction, seed, sample_out, report_out, out);
    if (*run) return cmd_run(cfg, chunk_size, workers, out, err);
    if (*score) return cmd_score(cfg, score_in, score_out, out);
    if (*refine) return cmd_refine(cfg, refine_report, refine_refs, out);
    if (*serve) return cmd_serve(cfg, host, port, ui_dir, out);
    if (*stats) return cmd_stats(cfg, out);
    if (*exp) return cmd_export(cfg, export_out, ids_out, export_refs, ref_out, out);
  } catch (const ParseError& e) {
    err << "error[parse] " << e.source() << ":" << e.line() << ": " << e.what() << "\n";
    return kExitError;
  } catch (const Error& e) {
    err << "error[" << e.code() << "]: " << e.what() << "\n";
    return kExitError;
  }
  return kExitUsage;
}

}  // namespace capqe::cli
