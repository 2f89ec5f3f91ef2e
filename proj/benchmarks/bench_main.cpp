#include <benchmark/benchmark.h>

#include <filesystem>

#include "biasbench/extraction.hpp"
#include "biasbench/filler.hpp"
#include "biasbench/prompt.hpp"
#include "biasbench/similarity.hpp"
#include "biasbench/simulator.hpp"
#include "biasbench/stats.hpp"

namespace bb = biasbench;
namespace fs = std::filesystem;

namespace {

const fs::path kDemo = fs::path(BIASBENCH_DATA_DIR) / "demo";

struct Demo {
  bb::PhraseLexicon lexicon;
  std::vector<bb::TemplateScenario> templates;
  bb::ExtractionConfig cfg;

  Demo() {
    lexicon = bb::load_lexicon(kDemo / "lexicon.json");
    for (const auto& e : fs::directory_iterator(kDemo / "templates")) templates.push_back(bb::load_template(e.path(), &lexicon));
    cfg = bb::load_extraction_config(kDemo / "extraction.json");
  }
};

const Demo& demo() {
  static const Demo d;
  return d;
}

void BM_EditDistance(benchmark::State& state) {
  const std::string a(static_cast<std::size_t>(state.range(0)), 'a');
  std::string b = a;
  for (std::size_t i = 0; i < b.size(); i += 7) b[i] = 'b';
  const bb::PatternDistance pd(a);
  for (auto _ : state) benchmark::DoNotOptimize(pd.distance(b));
}
BENCHMARK(BM_EditDistance)->Arg(16)->Arg(64)->Arg(200);

void BM_FillCorpus(benchmark::State& state) {
  const auto& d = demo();
  for (auto _ : state) {
    auto instances = bb::fill_corpus(d.templates, d.lexicon, 1, static_cast<std::size_t>(state.range(0)));
    benchmark::DoNotOptimize(bb::expand_prompt_set(instances));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(d.templates.size()) * state.range(0));
}
BENCHMARK(BM_FillCorpus)->Arg(25)->Arg(250);

void BM_Extract(benchmark::State& state) {
  const auto& d = demo();
  const auto prompts = bb::expand_prompt_set(bb::fill_corpus(d.templates, d.lexicon, 1, 5));
  bb::BiasProfile profile;
  profile.default_rate = 0.4;
  profile.unrelated_rate = 0.1;
  std::vector<std::string> responses;
  for (const auto& p : prompts) responses.push_back(bb::simulate(p, profile, 3).response_text);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(bb::extract(responses[i], prompts[i].answers, d.cfg));
    i = (i + 1) % prompts.size();
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Extract);

void BM_OlsFit(benchmark::State& state) {
  const auto n = state.range(0);
  bb::DesignMatrix design;
  design.X = Eigen::MatrixXd::Random(n, 6);
  design.X.col(0).setOnes();
  design.columns = {"intercept", "a", "b", "c", "d", "e"};
  const Eigen::VectorXd y = Eigen::VectorXd::Random(n);
  for (auto _ : state) benchmark::DoNotOptimize(bb::partial_f_test(design, y, {1}));
}
BENCHMARK(BM_OlsFit)->Arg(100)->Arg(10000);

}  // namespace
BENCHMARK_MAIN();
