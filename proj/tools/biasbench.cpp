// biasbench: drive the bias benchmark from a run manifest.

#include <fmt/format.h>

#include <CLI11.hpp>
#include <algorithm>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "biasbench/pipeline.hpp"

namespace bb = biasbench;

namespace {

struct Overrides {
  std::string models;
  std::vector<double> temperatures;
  std::size_t parallelism = 0;
  bool simulate = false;
  std::string profile;
  std::optional<std::uint64_t> seed;
  std::string output;
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(' '));
    item.erase(item.find_last_not_of(' ') + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

bb::RunManifest load(const std::string& path, const Overrides& o) {
  bb::RunManifest m;
  bb::run_stage("manifest", [&] {
    std::filesystem::path p(path);
    std::ifstream in(p, std::ios::binary);
    if (!in) throw bb::ValidationError(fmt::format("cannot open manifest '{}'", path));
    std::stringstream ss;
    ss << in.rdbuf();
    m = bb::parse_manifest(ss.str(), p.has_parent_path() ? p.parent_path() : std::filesystem::path("."));

    if (!o.temperatures.empty()) m.temperatures = o.temperatures;
    if (o.parallelism > 0) m.parallelism = o.parallelism;
    if (o.simulate) m.simulate = true;
    if (!o.profile.empty()) m.profile = o.profile;
    if (o.seed) m.simulate_seed = *o.seed;
    if (!o.output.empty()) m.output_dir = o.output;
    if (!o.models.empty()) {
      const auto wanted = split_list(o.models);
      std::vector<bb::ModelSpec> picked;
      for (const std::string& id : wanted) {
        auto it = std::find_if(m.models.begin(), m.models.end(),
                               [&](const bb::ModelSpec& s) { return s.config.model_id == id; });
        if (it != m.models.end()) {
          picked.push_back(*it);
        } else if (m.simulate) {
          bb::ModelSpec s;
          s.config.model_id = id;
          picked.push_back(s);
        } else {
          throw bb::ValidationError(fmt::format("model '{}' is not in the manifest", id));
        }
      }
      m.models = std::move(picked);
    }
    m.validate();
  });
  return m;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cognitive-bias benchmark for language models"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string manifest_path = "manifest.json";
  Overrides o;
  app.add_option("-m,--manifest", manifest_path, "Run manifest (JSON)");
  app.add_option("--models", o.models, "Comma-separated model ids to use");
  app.add_option("--temperatures", o.temperatures, "Sampling temperatures")->delimiter(',');
  app.add_option("--parallelism", o.parallelism, "Concurrent requests or worker threads");
  app.add_flag("--simulate", o.simulate, "Use the seeded response simulator instead of HTTP");
  app.add_option("--profile", o.profile, "Simulator bias profile (JSON)");
  app.add_option("--seed", o.seed, "Simulator seed");
  app.add_option("--output", o.output, "Output directory (overrides the manifest)");

  auto* validate = app.add_subcommand("validate", "Check the template corpus");
  auto* expand = app.add_subcommand("expand", "Fill templates and build prompts");
  auto* run = app.add_subcommand("run", "Collect model responses");
  bool resume = false;
  run->add_flag("--resume", resume, "Skip prompts that already have a successful response");
  auto* extract = app.add_subcommand("extract", "Extract the implicit answer of each response");
  auto* score = app.add_subcommand("score", "Write resistance scores");
  std::string group_by;
  score->add_option("--group-by", group_by, "Dimensions, e.g. model,bias,level");
  auto* analyze = app.add_subcommand("analyze", "Run a statistical test");
  std::string test;
  analyze->add_option("--test", test, "temperature, size or reasoning")->required();
  auto* report = app.add_subcommand("report", "Write the model and level tables");
  auto* pipeline = app.add_subcommand("pipeline", "Run every stage in order");

  CLI11_PARSE(app, argc, argv);

  try {
    const bb::RunManifest m = load(manifest_path, o);
    std::ostream& log = std::cout;
    if (validate->parsed()) {
      bool clean = true;
      bb::run_stage("validate", [&] { clean = bb::cmd_validate(m, log).empty(); });
      return clean ? 0 : 1;
    }
    if (expand->parsed()) bb::run_stage("expand", [&] { bb::cmd_expand(m, log); });
    if (run->parsed()) bb::run_stage("run", [&] { bb::cmd_run(m, resume, log); });
    if (extract->parsed()) bb::run_stage("extract", [&] { bb::cmd_extract(m, log); });
    if (score->parsed()) {
      bb::run_stage("score", [&] {
        std::vector<bb::GroupBy> groupings;
        if (group_by.empty()) {
          for (const std::string& g : m.score_groupings) groupings.push_back(bb::GroupBy::parse(g));
        } else {
          groupings.push_back(bb::GroupBy::parse(group_by));
        }
        bb::cmd_score(m, groupings, log);
      });
    }
    if (analyze->parsed()) bb::run_stage("analyze", [&] { bb::cmd_analyze(m, bb::parse_analysis_test(test), log); });
    if (report->parsed()) bb::run_stage("report", [&] { bb::cmd_report(m, log); });
    if (pipeline->parsed()) bb::cmd_pipeline(m, log);
  } catch (const bb::StageError& e) {
    std::cerr << "error in " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
