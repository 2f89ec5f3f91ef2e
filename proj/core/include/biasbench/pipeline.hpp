#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "biasbench/error.hpp"
#include "biasbench/gateway.hpp"
#include "biasbench/manifest.hpp"
#include "biasbench/prompt.hpp"
#include "biasbench/scoring.hpp"
#include "biasbench/template.hpp"
#include "biasbench/validation.hpp"

namespace biasbench {

/// A failure inside a named stage. `validation()` is true when the cause
/// was bad input (ParseError or ValidationError) rather than a runtime fault.
class StageError : public Error {
 public:
  StageError(std::string stage, std::string message, bool validation);

  const std::string& stage() const { return stage_; }
  bool validation() const { return validation_; }
  /// 1 for validation failures, 2 otherwise.
  int exit_code() const { return validation_ ? 1 : 2; }

 private:
  std::string stage_;
  bool validation_;
};

/// Runs `fn`, rethrowing any exception as a StageError tagged with `stage`.
void run_stage(const std::string& stage, const std::function<void()>& fn);

/// Fixed file layout under the manifest's output directory.
struct OutputLayout {
  std::filesystem::path root;

  std::filesystem::path instances() const { return root / "instances.jsonl"; }
  std::filesystem::path prompts() const { return root / "prompts.jsonl"; }
  std::filesystem::path run_info() const { return root / "run.json"; }
  std::filesystem::path responses() const { return root / "responses"; }
  std::filesystem::path extractions() const { return root / "extractions.jsonl"; }
  std::filesystem::path reports() const { return root / "reports"; }
  std::filesystem::path analysis() const { return root / "analysis"; }
};

struct LoadedCorpus {
  std::vector<TemplateScenario> templates;
  PhraseLexicon lexicon;
  /// Parse failures plus every check_template finding.
  ValidationReport report;
  /// Stable hash over file names and bytes, as 16 hex digits.
  std::string corpus_hash;
};

/// Reads every "*.json" file in the corpus directory in name order.
LoadedCorpus load_corpus(const RunManifest& manifest);

ValidationReport cmd_validate(const RunManifest& manifest, std::ostream& log);

struct ExpandCounts {
  std::size_t templates = 0;
  std::size_t instances = 0;
  std::size_t prompts = 0;
};

/// Fills the corpus and writes instances, prompts and run metadata.
/// Prints "templates → instances → prompts". Throws ValidationError when the
/// corpus has findings.
ExpandCounts cmd_expand(const RunManifest& manifest, std::ostream& log);

std::vector<Prompt> load_prompts(const std::filesystem::path& path);

/// Collects responses for every (model, temperature) in the manifest. Without
/// `resume`, existing response files for those pairs are an error.
BatchSummary cmd_run(const RunManifest& manifest, bool resume, std::ostream& log);

struct ExtractSummary {
  std::size_t extracted = 0;
  std::size_t skipped_errors = 0;
};

/// Scores every successful response and writes extractions.jsonl.
ExtractSummary cmd_extract(const RunManifest& manifest, std::ostream& log);

std::vector<Classification> load_classifications(const std::filesystem::path& extractions);

/// Writes reports/scores_<dims>.csv and .md for each grouping.
void cmd_score(const RunManifest& manifest, const std::vector<GroupBy>& groupings, std::ostream& log);

/// Writes the model-by-bias, level-by-bias and temperature-by-bias tables.
void cmd_report(const RunManifest& manifest, std::ostream& log);

enum class AnalysisTest { Temperature, Size, Reasoning };

AnalysisTest parse_analysis_test(std::string_view name);
std::string_view to_string(AnalysisTest test);

/// Writes analysis/<test>.csv. Throws ValidationError when the data cannot
/// support the test (for example a single temperature).
void cmd_analyze(const RunManifest& manifest, AnalysisTest test, std::ostream& log);

/// validate, expand, run (resuming), extract, score, report, analyze.
/// Analyses the data cannot support are skipped with a note.
void cmd_pipeline(const RunManifest& manifest, std::ostream& log);

}  // namespace biasbench
