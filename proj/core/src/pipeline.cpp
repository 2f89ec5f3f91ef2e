#include "biasbench/pipeline.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "biasbench/extraction.hpp"
#include "biasbench/filler.hpp"
#include "biasbench/report.hpp"
#include "biasbench/rng.hpp"
#include "biasbench/run_store.hpp"
#include "biasbench/serialize.hpp"
#include "biasbench/simulator.hpp"
#include "biasbench/stats.hpp"

namespace biasbench {

using nlohmann::json;

StageError::StageError(std::string stage, std::string message, bool validation)
    : Error(fmt::format("{}: {}", stage, message)), stage_(std::move(stage)), validation_(validation) {}

void run_stage(const std::string& stage, const std::function<void()>& fn) {
  try {
    fn();
  } catch (const StageError&) {
    throw;
  } catch (const ParseError& e) {
    throw StageError(stage, e.what(), true);
  } catch (const ValidationError& e) {
    throw StageError(stage, e.what(), true);
  } catch (const std::exception& e) {
    throw StageError(stage, e.what(), false);
  }
}

namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void require_file(const std::filesystem::path& path, const char* produced_by) {
  if (!std::filesystem::exists(path))
    throw ValidationError(fmt::format("'{}' not found; run the {} stage first", path.string(), produced_by));
}

std::string grouping_stem(GroupBy g) {
  std::string s = g.to_string();
  std::replace(s.begin(), s.end(), ',', '_');
  return s;
}

void write_both(const std::filesystem::path& dir, const std::string& stem, const std::string& csv,
                const std::string& md) {
  write_report(dir / (stem + ".csv"), csv);
  write_report(dir / (stem + ".md"), md);
}

std::string num(double v) { return fmt::format("{}", v); }

}  // namespace

LoadedCorpus load_corpus(const RunManifest& manifest) {
  LoadedCorpus out;
  out.lexicon = load_lexicon(manifest.lexicon);
  if (!std::filesystem::is_directory(manifest.corpus_dir))
    throw ValidationError(fmt::format("corpus '{}' is not a directory", manifest.corpus_dir.string()));

  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(manifest.corpus_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  std::string hash_input;
  for (const auto& path : files) {
    const std::string source = slurp(path);
    hash_input += path.filename().string();
    hash_input += '\0';
    hash_input += source;
    hash_input += '\0';
    const std::string name = path.filename().string();
    try {
      out.templates.push_back(parse_template(source, &out.lexicon, false));
    } catch (const ParseError& e) {
      out.report.findings.push_back({name, FindingKind::SyntaxError, e.field(), e.what()});
    } catch (const ValidationError& e) {
      const std::string msg = e.what();
      const FindingKind kind =
          msg.find("undefined tag") != std::string::npos ? FindingKind::UndeclaredTag : FindingKind::DuplicateTag;
      out.report.findings.push_back({name, kind, name, msg});
    }
  }
  ValidationReport checked = validate_corpus(out.templates, out.lexicon);
  out.report.findings.insert(out.report.findings.end(), checked.findings.begin(), checked.findings.end());
  out.corpus_hash = fmt::format("{:016x}", stable_hash(hash_input));
  return out;
}

ValidationReport cmd_validate(const RunManifest& manifest, std::ostream& log) {
  LoadedCorpus corpus = load_corpus(manifest);
  for (const Finding& f : corpus.report.findings) {
    log << fmt::format("{}: {} ({}): {}\n", f.template_id, to_string(f.kind), f.subject, f.message);
  }
  log << fmt::format("{} templates, {} findings\n", corpus.templates.size(), corpus.report.size());
  return corpus.report;
}

ExpandCounts cmd_expand(const RunManifest& manifest, std::ostream& log) {
  LoadedCorpus corpus = load_corpus(manifest);
  if (!corpus.report.empty()) {
    const Finding& f = corpus.report.findings.front();
    throw ValidationError(fmt::format("corpus has {} findings; first: {}: {}", corpus.report.size(), f.template_id,
                                      f.message));
  }
  std::vector<ScenarioInstance> instances = fill_corpus(corpus.templates, corpus.lexicon, manifest.base_seed, manifest.k);
  std::vector<Prompt> prompts = expand_prompt_set(instances);

  const OutputLayout out{manifest.output_dir};
  std::vector<json> rows;
  rows.reserve(instances.size());
  for (const ScenarioInstance& inst : instances) rows.push_back(to_json(inst));
  write_jsonl(out.instances(), rows);
  rows.clear();
  rows.reserve(prompts.size());
  for (const Prompt& p : prompts) rows.push_back(to_json(p));
  write_jsonl(out.prompts(), rows);

  const std::size_t duplicates = static_cast<std::size_t>(
      std::count_if(instances.begin(), instances.end(), [](const ScenarioInstance& i) { return i.duplicate; }));
  json info = {{"corpus_hash", corpus.corpus_hash},
               {"base_seed", manifest.base_seed},
               {"k", manifest.k},
               {"templates", corpus.templates.size()},
               {"instances", instances.size()},
               {"prompts", prompts.size()},
               {"duplicate_instances", duplicates}};
  json models = json::array();
  for (const ModelConfig& c : manifest.run_configs()) {
    models.push_back({{"model_id", c.model_id}, {"endpoint", c.endpoint}, {"temperature", c.temperature},
                      {"top_p", c.top_p}, {"top_k", c.top_k}, {"max_tokens", c.max_tokens}});
  }
  info["runs"] = std::move(models);
  if (manifest.simulate) info["simulate"] = {{"profile", manifest.profile.filename().string()}, {"seed", manifest.simulate_seed}};
  write_report(out.run_info(), info.dump(2) + "\n");

  ExpandCounts counts{corpus.templates.size(), instances.size(), prompts.size()};
  log << fmt::format("{} → {} → {}\n", counts.templates, counts.instances, counts.prompts);
  if (duplicates > 0) log << fmt::format("note: {} instances repeat an earlier binding\n", duplicates);
  return counts;
}

std::vector<Prompt> load_prompts(const std::filesystem::path& path) {
  require_file(path, "expand");
  std::vector<Prompt> prompts;
  read_jsonl(path, [&](const json& j) { prompts.push_back(prompt_from_json(j)); });
  return prompts;
}

BatchSummary cmd_run(const RunManifest& manifest, bool resume, std::ostream& log) {
  const OutputLayout out{manifest.output_dir};
  std::vector<Prompt> prompts = load_prompts(out.prompts());
  std::vector<ModelConfig> configs = manifest.run_configs();
  if (!manifest.simulate) {
    for (const ModelConfig& c : configs) c.validate();
  }
  if (!resume) {
    for (const ModelConfig& c : configs) {
      const auto file = out.responses() / RunStore::file_name(c.model_id, c.temperature);
      std::error_code ec;
      if (std::filesystem::exists(file) && std::filesystem::file_size(file, ec) > 0)
        throw ValidationError(
            fmt::format("responses already exist in '{}'; pass --resume to continue", file.string()));
    }
  }
  RunStore store(out.responses());
  Responder responder = manifest.simulate ? make_simulated_responder(load_profile(manifest.profile), manifest.simulate_seed)
                                          : make_http_responder();
  BatchSummary s = run_batch(prompts, configs, manifest.parallelism, store, responder);
  log << fmt::format("{} submitted, {} skipped, {} failed\n", s.submitted, s.skipped, s.failed);
  return s;
}

ExtractSummary cmd_extract(const RunManifest& manifest, std::ostream& log) {
  const OutputLayout out{manifest.output_dir};
  std::map<PromptRef, Prompt> by_ref;
  for (Prompt& p : load_prompts(out.prompts())) {
    PromptRef ref = ref_of(p);
    by_ref.emplace(std::move(ref), std::move(p));
  }
  require_file(out.responses(), "run");
  const ExtractionConfig cfg = load_extraction_config(manifest.extraction_config);
  cfg.validate();

  std::set<std::pair<std::string, std::string>> wanted;
  for (const ModelConfig& c : manifest.run_configs()) wanted.emplace(c.model_id, temperature_key(c.temperature));

  ExtractSummary summary;
  std::vector<ResponseRecord> records;
  {
    RunStore store(out.responses());
    for (ResponseRecord& r : store.records()) {
      if (wanted.count({r.model_id, temperature_key(r.temperature)}) == 0) continue;
      if (!r.ok()) {
        ++summary.skipped_errors;
        continue;
      }
      records.push_back(std::move(r));
    }
  }

  std::vector<ExtractionRecord> results(records.size());
  std::vector<const Prompt*> prompt_of(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto it = by_ref.find(records[i].prompt_ref);
    if (it == by_ref.end())
      throw ValidationError(fmt::format("response for unknown prompt {}#{} L{}", records[i].prompt_ref.template_id,
                                        records[i].prompt_ref.instance_index, records[i].prompt_ref.level));
    prompt_of[i] = &it->second;
  }

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const ResponseRecord& r = records[i];
      const Prompt& p = *prompt_of[i];
      ExtractionRecord& x = results[i];
      x.prompt_ref = r.prompt_ref;
      x.bias = p.bias;
      x.model_id = r.model_id;
      x.temperature = r.temperature;
      x.scores = extract(r.response_text, p.answers, cfg);
      x.outcome = classify(x.scores, p.answers);
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(manifest.parallelism, records.size() / 256 + 1));
  const std::size_t chunk = (records.size() + threads - 1) / threads;
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) {
    const std::size_t b = std::min(records.size(), t * chunk);
    pool.emplace_back(work, b, std::min(records.size(), b + chunk));
  }
  work(0, std::min(records.size(), chunk));
  for (auto& th : pool) th.join();

  std::vector<json> rows;
  rows.reserve(results.size());
  for (const ExtractionRecord& x : results) rows.push_back(to_json(x));
  write_jsonl(out.extractions(), rows);
  summary.extracted = results.size();
  log << fmt::format("{} extracted, {} errored responses skipped\n", summary.extracted, summary.skipped_errors);
  return summary;
}

std::vector<Classification> load_classifications(const std::filesystem::path& extractions) {
  require_file(extractions, "extract");
  std::vector<Classification> out;
  read_jsonl(extractions, [&](const json& j) {
    ExtractionRecord x = extraction_from_json(j);
    out.push_back({x.prompt_ref, x.bias, x.model_id, x.temperature, x.outcome});
  });
  return out;
}

void cmd_score(const RunManifest& manifest, const std::vector<GroupBy>& groupings, std::ostream& log) {
  const OutputLayout out{manifest.output_dir};
  const std::vector<Classification> cls = load_classifications(out.extractions());
  for (GroupBy g : groupings) {
    if (g.mask == 0) throw ValidationError("empty grouping");
    const auto rows = resistance(cls, g);
    const std::string stem = "scores_" + grouping_stem(g);
    write_both(out.reports(), stem, render_scores(rows, g, ReportFormat::Csv),
               render_scores(rows, g, ReportFormat::Markdown));
    log << fmt::format("wrote {} ({} groups)\n", (out.reports() / (stem + ".csv")).string(), rows.size());
  }
}

void cmd_report(const RunManifest& manifest, std::ostream& log) {
  const OutputLayout out{manifest.output_dir};
  const std::vector<Classification> cls = load_classifications(out.extractions());
  const std::pair<Dimension, const char*> tables[] = {
      {Dimension::Model, "table_model_bias"},
      {Dimension::Level, "table_level_bias"},
      {Dimension::Temperature, "table_temperature_bias"},
  };
  for (const auto& [dim, stem] : tables) {
    const PivotTable t = pivot_by_bias(cls, dim);
    write_both(out.reports(), stem, render_pivot(t, ReportFormat::Csv), render_pivot(t, ReportFormat::Markdown));
    log << fmt::format("wrote {}\n", (out.reports() / (std::string(stem) + ".md")).string());
  }
}

AnalysisTest parse_analysis_test(std::string_view name) {
  if (name == "temperature") return AnalysisTest::Temperature;
  if (name == "size") return AnalysisTest::Size;
  if (name == "reasoning") return AnalysisTest::Reasoning;
  throw ValidationError(fmt::format("unknown test '{}' (expected temperature, size or reasoning)", name));
}

std::string_view to_string(AnalysisTest test) {
  switch (test) {
    case AnalysisTest::Temperature: return "temperature";
    case AnalysisTest::Size: return "size";
    case AnalysisTest::Reasoning: return "reasoning";
  }
  return "unknown";
}

void cmd_analyze(const RunManifest& manifest, AnalysisTest test, std::ostream& log) {
  const OutputLayout out{manifest.output_dir};
  const std::vector<CellScore> cells = cell_scores(load_classifications(out.extractions()));
  std::set<BiasCategory> present;
  for (const CellScore& c : cells) present.insert(c.bias);

  std::string csv;
  if (test == AnalysisTest::Temperature) {
    csv = "bias,F,p,beta,se,df1,df2,n\n";
    for (BiasCategory b : kAllBiases) {
      if (present.count(b) == 0) continue;
      const RegressionResult r = anova_temperature(cells, b);
      csv += fmt::format("{},{},{},{},{},{},{},{}\n", to_string(b), num(r.F), num(r.p), num(r.tested_beta()),
                         num(r.tested_se()), r.df_model, r.df_resid, r.n);
    }
  } else {
    const auto traits = manifest.traits();
    auto fit = [&](std::optional<BiasCategory> b) {
      return test == AnalysisTest::Size ? regress_size(cells, traits, b) : regress_reasoning(cells, traits, b);
    };
    csv = "bias,beta,se,R2,F,p,n\n";
    auto row = [&](const std::string& label, const RegressionResult& r) {
      csv += fmt::format("{},{},{},{},{},{},{}\n", label, num(r.tested_beta()), num(r.tested_se()), num(r.R2),
                         num(r.F), num(r.p), r.n);
    };
    for (BiasCategory b : kAllBiases) {
      if (present.count(b) != 0) row(std::string(to_string(b)), fit(b));
    }
    row("all", fit(std::nullopt));
  }
  const auto path = out.analysis() / (std::string(to_string(test)) + ".csv");
  write_report(path, csv);
  log << fmt::format("wrote {}\n", path.string());
}

void cmd_pipeline(const RunManifest& manifest, std::ostream& log) {
  run_stage("validate", [&] {
    if (!cmd_validate(manifest, log).empty()) throw ValidationError("corpus has validation findings");
  });
  run_stage("expand", [&] { cmd_expand(manifest, log); });
  run_stage("run", [&] { cmd_run(manifest, true, log); });
  run_stage("extract", [&] { cmd_extract(manifest, log); });
  run_stage("score", [&] {
    std::vector<GroupBy> groupings;
    for (const std::string& g : manifest.score_groupings) groupings.push_back(GroupBy::parse(g));
    cmd_score(manifest, groupings, log);
  });
  run_stage("report", [&] { cmd_report(manifest, log); });
  for (AnalysisTest test : {AnalysisTest::Temperature, AnalysisTest::Size, AnalysisTest::Reasoning}) {
    run_stage("analyze", [&] {
      try {
        cmd_analyze(manifest, test, log);
      } catch (const ValidationError& e) {
        log << fmt::format("skipped {} analysis: {}\n", to_string(test), e.what());
      }
    });
  }
}

}  // namespace biasbench
