#include <gtest/gtest.h>

#include <fstream>
#include <nlohmann/json.hpp>
#include <random>

#include "biasbench/error.hpp"
#include "biasbench/extraction.hpp"
#include "biasbench/similarity.hpp"
#include "case_studies.hpp"
#include "oracles.hpp"

namespace bb = biasbench;

namespace {

const std::filesystem::path kLexicons = std::filesystem::path(BIASBENCH_DATA_DIR) / "lexicons";

bb::ExtractionConfig shipped() { return bb::default_extraction_config(kLexicons); }

std::set<std::string> plain(const std::set<std::string, std::less<>>& s) { return {s.begin(), s.end()}; }

oracle::Params params(const bb::ExtractionConfig& c) {
  return {c.similarity_threshold, c.avg_weight, c.max_weight, c.sentiment_window, c.unrelated_cutoff};
}

std::vector<oracle::Answer> oracle_answers(const std::vector<bb::AnswerChoice>& a) {
  std::vector<oracle::Answer> out;
  for (const auto& c : a) out.push_back({c.key, c.text});
  return out;
}

}  // namespace

TEST(Presence, PaddedExactAnswer) {
  bb::ExtractionConfig cfg;
  const auto r = bb::presence("yes please!", "yes please", cfg);
  EXPECT_DOUBLE_EQ(r.max_score, 1.0);
  EXPECT_GE(r.score_p, 0.75);
  const auto exact = bb::presence("yes please", "yes please", cfg);
  EXPECT_DOUBLE_EQ(exact.score_p, 1.0);
}

TEST(Presence, DisjointAlphabets) {
  bb::ExtractionConfig cfg;
  const auto r = bb::presence("xxxxxxxxxxxxxxxxxxxx", "abcdef", cfg);
  EXPECT_DOUBLE_EQ(r.score_p, 0.0);
  EXPECT_TRUE(r.matches.empty());
}

TEST(Presence, ShorterResponseScoresZero) {
  bb::ExtractionConfig cfg;
  const auto r = bb::presence("ok", "a much longer answer", cfg);
  EXPECT_EQ(r.score_p, 0.0);
  EXPECT_TRUE(r.matches.empty());
}

TEST(Presence, AgreesWithBruteForceOnFlightFixture) {
  bb::ExtractionConfig cfg;
  const std::string response = bb::normalize_text("I pick option B because flying is safe");
  const std::string answer = bb::normalize_text("B. Flying is safe");
  const auto lib = bb::presence_normalized(response, answer, cfg);
  ASSERT_LT(answer.size(), response.size());

  double sum = 0;
  double best = 0;
  std::vector<std::size_t> hits;
  for (std::size_t i = 0; i + answer.size() <= response.size(); ++i) {
    const double s = oracle::similarity(response.substr(i, answer.size()), answer);
    sum += s;
    best = std::max(best, s);
    if (s > cfg.similarity_threshold) hits.push_back(i);
  }
  const double n = static_cast<double>(response.size() - answer.size() + 1);
  EXPECT_NEAR(lib.max_score, best, 1e-15);
  EXPECT_NEAR(lib.avg_score, sum / n, 1e-12);
  EXPECT_NEAR(lib.score_p, 0.25 * sum / n + 0.75 * best, 1e-12);
  EXPECT_FALSE(hits.empty());
  ASSERT_EQ(lib.matches.size(), hits.size());
  for (std::size_t i = 0; i < hits.size(); ++i) EXPECT_EQ(lib.matches[i].offset, hits[i]);
}

TEST(Sentiment, TwoPositiveWords) {
  bb::ExtractionConfig cfg;
  cfg.positive_terms = {"recommend", "best"};
  cfg.negative_terms = {"risky"};
  const std::string response = bb::normalize_text("I recommend option B, it is the best.");
  const auto pr = bb::presence_normalized(response, "option b", cfg);
  ASSERT_EQ(pr.matches.size(), 1u);
  EXPECT_DOUBLE_EQ(bb::sentiment_weight(pr.matches, response, cfg), 0.75);
}

TEST(Sentiment, BalancedCounts) {
  bb::ExtractionConfig cfg;
  cfg.positive_terms = {"good"};
  cfg.negative_terms = {"bad"};
  for (int n = 0; n <= 4; ++n) {
    std::string text;
    for (int i = 0; i < n; ++i) text += "good bad ";
    text += "option b";
    const auto pr = bb::presence_normalized(text, "option b", cfg);
    ASSERT_EQ(pr.matches.size(), 1u);
    EXPECT_DOUBLE_EQ(bb::sentiment_weight(pr.matches, text, cfg), (1.0 + n) / (2.0 + 2.0 * n));
  }
}

TEST(Sentiment, NoMatchesIsNeutral) {
  EXPECT_DOUBLE_EQ(bb::sentiment_weight({}, "anything", bb::ExtractionConfig{}), 0.5);
}

TEST(Sentiment, WindowIsBounded) {
  bb::ExtractionConfig cfg;
  cfg.sentiment_window = 2;
  cfg.positive_terms = {"great"};
  const std::string far = "great one two three option b";
  const std::string near = "one two great option b";
  EXPECT_DOUBLE_EQ(bb::sentiment_weight(bb::presence_normalized(far, "option b", cfg).matches, far, cfg), 0.5);
  EXPECT_DOUBLE_EQ(bb::sentiment_weight(bb::presence_normalized(near, "option b", cfg).matches, near, cfg),
                   2.0 / 3.0);
}

TEST(Extract, AvailabilityCaseStudySelectsB) {
  const auto s = bb::extract(case_study::kAvailabilityResponse, case_study::availability_answers(), shipped());
  ASSERT_TRUE(s.selected);
  EXPECT_EQ(*s.selected, "B");
}

TEST(Extract, RepresentativenessCaseStudySelectsA) {
  const auto answers = case_study::representativeness_answers();
  const auto s = bb::extract(case_study::kRepresentativenessResponse, answers, shipped());
  ASSERT_TRUE(s.selected);
  EXPECT_EQ(*s.selected, "A");
  EXPECT_EQ(answers[0].label, bb::AnswerLabel::Biased);
}

TEST(Extract, OffTopicSelectsNothing) {
  const auto s = bb::extract("I enjoy cheese.", case_study::surgeon_answers(), shipped());
  EXPECT_FALSE(s.selected);
  for (const auto& c : s.choices) EXPECT_LT(c.confidence, 0.3);
}

TEST(Extract, ConfidenceIsProduct) {
  const auto s = bb::extract(case_study::kAvailabilityResponse, case_study::availability_answers(), shipped());
  for (const auto& c : s.choices) EXPECT_EQ(c.confidence, c.score_p * c.weight_s);
}

TEST(Extract, TieGoesToEarliestMention) {
  bb::ExtractionConfig cfg;
  std::vector<bb::AnswerChoice> answers = {{"A", "red", bb::AnswerLabel::Biased},
                                           {"B", "blue", bb::AnswerLabel::Unbiased}};
  EXPECT_EQ(*bb::extract("a. red", answers, cfg).selected, "A");
  EXPECT_EQ(*bb::extract("b. blue", answers, cfg).selected, "B");
  // Identical texts tie exactly; the smaller key wins.
  answers[1].text = "red";
  answers[1].key = "A2";
  EXPECT_EQ(*bb::extract("red", answers, cfg).selected, "A");
}

TEST(Extract, StripsReasoningBlocks) {
  EXPECT_EQ(bb::strip_reasoning("<think>A is tempting</think>B it is"), "B it is");
  EXPECT_EQ(bb::strip_reasoning("pondering A...</think>B"), "B");
  EXPECT_EQ(bb::strip_reasoning("B first <think>never closed"), "B first ");
  EXPECT_EQ(bb::strip_reasoning("x<think>1</think>y<think>2</think>z"), "xyz");
  for (const char* s : {"<think>a</think>b", "a</think>b<think>c</think>d", "<think>", "plain"})
    EXPECT_EQ(bb::strip_reasoning(s), oracle::strip_think(s));

  const auto answers = case_study::surgeon_answers();
  bb::ExtractionConfig cfg;
  const std::string text = "<think>The surgeon with the famous name is popular...</think>B. The surgeon with the "
                           "better success rate";
  EXPECT_EQ(*bb::extract(text, answers, cfg).selected, "B");
}

TEST(Extract, ConfigValidation) {
  bb::ExtractionConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.avg_weight = 0.5;
  EXPECT_THROW(cfg.validate(), bb::ValidationError);
  cfg = {};
  cfg.similarity_threshold = 0;
  EXPECT_THROW(cfg.validate(), bb::ValidationError);
  cfg = {};
  cfg.unrelated_cutoff = 1.0;
  EXPECT_THROW(cfg.validate(), bb::ValidationError);
}

TEST(ExtractProperty, ScoresStayInUnitInterval) {
  const auto cfg = shipped();
  std::mt19937_64 gen(77);
  const std::vector<std::string> words = {"good", "bad", "best", "option", "a", "b", "yes", "no", "risky",
                                          "safe", "maybe", "the", "plane", "**", "!", "recommend"};
  std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1);
  std::uniform_int_distribution<int> len(0, 40);
  auto sentence = [&](int n) {
    std::string s;
    for (int i = 0; i < n; ++i) s += words[pick(gen)] + " ";
    return s;
  };
  for (int trial = 0; trial < 300; ++trial) {
    const std::vector<bb::AnswerChoice> answers = {{"A", sentence(1 + trial % 4), bb::AnswerLabel::Biased},
                                                   {"B", sentence(2), bb::AnswerLabel::Unbiased}};
    const auto s = bb::extract(sentence(len(gen)), answers, cfg);
    for (const auto& c : s.choices) {
      ASSERT_GE(c.score_p, 0.0);
      ASSERT_LE(c.score_p, 1.0 + 1e-12);
      ASSERT_GT(c.weight_s, 0.0);
      ASSERT_LT(c.weight_s, 1.0);
      ASSERT_GE(c.confidence, 0.0);
      ASSERT_LE(c.confidence, 1.0);
    }
  }
}

TEST(ExtractProperty, SentimentIsMonotone) {
  bb::ExtractionConfig cfg;
  cfg.positive_terms = {"great"};
  cfg.negative_terms = {"awful"};
  std::mt19937_64 gen(5);
  const std::vector<std::string> filler = {"it", "is", "great", "awful", "so", "the", "we"};
  std::uniform_int_distribution<std::size_t> pick(0, filler.size() - 1);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> words;
    for (int i = 0; i < 6; ++i) words.push_back(filler[pick(gen)]);
    words.insert(words.begin() + 3, "option b");
    auto join = [](const std::vector<std::string>& w) {
      std::string s;
      for (const auto& x : w) s += (s.empty() ? "" : " ") + x;
      return s;
    };
    auto weight = [&](const std::string& text) {
      return bb::sentiment_weight(bb::presence_normalized(text, "option b", cfg).matches, text, cfg);
    };
    const std::string base = join(words);
    const double w0 = weight(base);
    auto plus = words;
    plus.insert(plus.begin() + 4, "great");
    auto minus = words;
    minus.insert(minus.begin() + 4, "awful");
    ASSERT_GE(weight(join(plus)), w0) << base;
    ASSERT_LE(weight(join(minus)), w0) << base;
  }
}

TEST(ExtractProperty, ExactMentionDominatesUnderNeutralSentiment) {
  bb::ExtractionConfig cfg;  // empty term lists: every weight is 0.5
  std::mt19937_64 gen(31);
  const std::vector<std::string> texts = {"take the train instead", "book a hotel room", "call my sister",
                                          "ignore the warning", "wait for next year"};
  const std::vector<std::string> filler = {"well", "i", "think", "honestly", "that", "would", "be", "fine"};
  std::uniform_int_distribution<std::size_t> pf(0, filler.size() - 1);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::size_t> idx = {0, 1, 2, 3, 4};
    std::shuffle(idx.begin(), idx.end(), gen);
    const std::vector<bb::AnswerChoice> answers = {{"A", texts[idx[0]], bb::AnswerLabel::Biased},
                                                   {"B", texts[idx[1]], bb::AnswerLabel::Unbiased},
                                                   {"C", texts[idx[2]], bb::AnswerLabel::Unbiased}};
    const std::size_t x = trial % 3;
    std::string response;
    for (int i = 0; i < 4; ++i) response += filler[pf(gen)] + " ";
    response += answers[x].text;
    for (int i = 0; i < 4; ++i) response += " " + filler[pf(gen)];

    bool others_absent = true;
    for (std::size_t j = 0; j < answers.size(); ++j) {
      if (j == x) continue;
      others_absent &= bb::presence(response, answers[j].text, cfg).matches.empty();
      others_absent &= bb::presence(response, answers[j].key + ". " + answers[j].text, cfg).matches.empty();
    }
    if (!others_absent) continue;
    ++checked;
    const auto s = bb::extract(response, answers, cfg);
    ASSERT_TRUE(s.selected) << response;
    ASSERT_EQ(*s.selected, answers[x].key) << response;
  }
  EXPECT_GT(checked, 150);
}

TEST(ExtractProperty, Deterministic) {
  const auto cfg = shipped();
  const auto a = bb::extract(case_study::kAvailabilityResponse, case_study::availability_answers(), cfg);
  const auto b = bb::extract(case_study::kAvailabilityResponse, case_study::availability_answers(), cfg);
  ASSERT_EQ(a.choices.size(), b.choices.size());
  for (std::size_t i = 0; i < a.choices.size(); ++i) EXPECT_EQ(a.choices[i].confidence, b.choices[i].confidence);
  EXPECT_EQ(a.selected, b.selected);
}

TEST(ExtractOracle, AgreesOnFixtureCorpus) {
  std::ifstream in(std::filesystem::path(BIASBENCH_TEST_DATA_DIR) / "extraction_fixtures.json");
  ASSERT_TRUE(in);
  const auto fixtures = nlohmann::json::parse(in);
  ASSERT_EQ(fixtures.size(), 200u);
  const auto cfg = shipped();
  const auto pos = plain(cfg.positive_terms);
  const auto neg = plain(cfg.negative_terms);
  for (const auto& fx : fixtures) {
    std::vector<bb::AnswerChoice> answers;
    for (const auto& a : fx["answers"]) {
      answers.push_back({a["key"], a["text"],
                         a["label"] == "biased" ? bb::AnswerLabel::Biased : bb::AnswerLabel::Unbiased});
    }
    const std::string response = fx["response"];
    const auto lib = bb::extract(response, answers, cfg);
    const auto ref = oracle::extract(response, oracle_answers(answers), params(cfg), pos, neg);
    ASSERT_EQ(lib.selected, ref.selected) << fx["id"];
    for (std::size_t i = 0; i < answers.size(); ++i)
      ASSERT_NEAR(lib.choices[i].confidence, ref.choices[i].s_a, 1e-9) << fx["id"];
  }
}
