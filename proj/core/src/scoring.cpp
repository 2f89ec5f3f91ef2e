#include "biasbench/scoring.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <sstream>

#include "biasbench/error.hpp"

namespace biasbench {

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::Biased: return "biased";
    case Outcome::Unbiased: return "unbiased";
    case Outcome::Unrelated: return "unrelated";
  }
  return "unknown";
}

std::optional<Outcome> parse_outcome(std::string_view text) {
  for (auto o : {Outcome::Biased, Outcome::Unbiased, Outcome::Unrelated}) {
    if (to_string(o) == text) return o;
  }
  return std::nullopt;
}

Outcome classify(const AnswerScores& extraction, const std::vector<AnswerChoice>& answers) {
  if (!extraction.selected) return Outcome::Unrelated;
  auto it = std::find_if(answers.begin(), answers.end(),
                         [&](const AnswerChoice& a) { return a.key == *extraction.selected; });
  if (it == answers.end()) return Outcome::Unrelated;
  return it->label == AnswerLabel::Biased ? Outcome::Biased : Outcome::Unbiased;
}

GroupBy GroupBy::of(std::initializer_list<Dimension> dims) {
  GroupBy g;
  for (Dimension d : dims) g.mask |= static_cast<unsigned>(d);
  return g;
}

GroupBy GroupBy::parse(std::string_view spec) {
  GroupBy g;
  std::string item;
  std::istringstream in{std::string(spec)};
  while (std::getline(in, item, ',')) {
    item.erase(0, item.find_first_not_of(' '));
    item.erase(item.find_last_not_of(' ') + 1);
    if (item.empty()) continue;
    if (item == "model") {
      g.mask |= static_cast<unsigned>(Dimension::Model);
    } else if (item == "bias") {
      g.mask |= static_cast<unsigned>(Dimension::Bias);
    } else if (item == "level") {
      g.mask |= static_cast<unsigned>(Dimension::Level);
    } else if (item == "temperature") {
      g.mask |= static_cast<unsigned>(Dimension::Temperature);
    } else {
      throw ValidationError(fmt::format("unknown group-by dimension '{}'", item));
    }
  }
  return g;
}

std::string GroupBy::to_string() const {
  std::vector<std::string> parts;
  if (has(Dimension::Model)) parts.emplace_back("model");
  if (has(Dimension::Bias)) parts.emplace_back("bias");
  if (has(Dimension::Level)) parts.emplace_back("level");
  if (has(Dimension::Temperature)) parts.emplace_back("temperature");
  return fmt::format("{}", fmt::join(parts, ","));
}

GroupKey key_for(const Classification& c, GroupBy g) {
  GroupKey k;
  if (g.has(Dimension::Model)) k.model = c.model_id;
  if (g.has(Dimension::Bias)) k.bias = c.bias;
  if (g.has(Dimension::Level)) k.level = c.prompt_ref.level;
  if (g.has(Dimension::Temperature)) k.temperature = c.temperature;
  return k;
}

void Tally::add(Outcome outcome) {
  switch (outcome) {
    case Outcome::Biased: ++n_biased; break;
    case Outcome::Unbiased: ++n_unbiased; break;
    case Outcome::Unrelated: ++n_unrelated; break;
  }
}

Tally& Tally::merge(const Tally& other) {
  n_biased += other.n_biased;
  n_unbiased += other.n_unbiased;
  n_unrelated += other.n_unrelated;
  return *this;
}

std::optional<double> Tally::score() const {
  const std::size_t total = n_total();
  if (total == 0) return std::nullopt;
  return 1.0 - static_cast<double>(n_biased) / static_cast<double>(total);
}

void ResistanceAccumulator::add(const Classification& c) { groups_[key_for(c, group_by_)].add(c.outcome); }

ResistanceAccumulator& ResistanceAccumulator::merge(const ResistanceAccumulator& other) {
  if (other.group_by_.mask != group_by_.mask) throw ValidationError("cannot merge aggregates with different grouping");
  for (const auto& [key, tally] : other.groups_) groups_[key].merge(tally);
  return *this;
}

std::vector<ResistanceScore> ResistanceAccumulator::rows() const {
  std::vector<ResistanceScore> out;
  out.reserve(groups_.size());
  for (const auto& [key, tally] : groups_) out.push_back({key, tally});
  return out;
}

std::vector<ResistanceScore> resistance(const std::vector<Classification>& classifications, GroupBy group_by) {
  ResistanceAccumulator acc(group_by);
  for (const Classification& c : classifications) acc.add(c);
  return acc.rows();
}

}  // namespace biasbench
