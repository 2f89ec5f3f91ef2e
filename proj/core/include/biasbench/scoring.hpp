#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "biasbench/extraction.hpp"
#include "biasbench/gateway.hpp"

namespace biasbench {

enum class Outcome { Biased, Unbiased, Unrelated };

std::string_view to_string(Outcome outcome);
std::optional<Outcome> parse_outcome(std::string_view text);

/// Label of the selected choice; Unrelated when nothing was selected.
Outcome classify(const AnswerScores& extraction, const std::vector<AnswerChoice>& answers);

struct Classification {
  PromptRef prompt_ref;
  BiasCategory bias = BiasCategory::Anchoring;
  std::string model_id;
  double temperature = 0.0;
  Outcome outcome = Outcome::Unrelated;
};

enum class Dimension : unsigned { Model = 1, Bias = 2, Level = 4, Temperature = 8 };

/// Subset of dimensions to aggregate over.
struct GroupBy {
  unsigned mask = 0;

  static GroupBy of(std::initializer_list<Dimension> dims);
  /// Comma-separated list such as "model,bias,level". Throws ValidationError
  /// for an unknown name.
  static GroupBy parse(std::string_view spec);

  bool has(Dimension d) const { return (mask & static_cast<unsigned>(d)) != 0; }
  std::string to_string() const;
};

struct GroupKey {
  std::optional<std::string> model;
  std::optional<BiasCategory> bias;
  std::optional<int> level;
  std::optional<double> temperature;

  auto operator<=>(const GroupKey&) const = default;
  bool operator==(const GroupKey&) const = default;
};

GroupKey key_for(const Classification& c, GroupBy group_by);

/// Outcome counts of one group. Merging is associative and commutative.
struct Tally {
  std::size_t n_biased = 0;
  std::size_t n_unbiased = 0;
  std::size_t n_unrelated = 0;

  std::size_t n_total() const { return n_biased + n_unbiased + n_unrelated; }
  void add(Outcome outcome);
  Tally& merge(const Tally& other);
  /// 1 - n_biased / n_total; absent for an empty group.
  std::optional<double> score() const;
};

struct ResistanceScore {
  GroupKey key;
  Tally tally;
  std::optional<double> score() const { return tally.score(); }
};

/// Streaming aggregate; shards built in parallel can be merged.
class ResistanceAccumulator {
 public:
  explicit ResistanceAccumulator(GroupBy group_by) : group_by_(group_by) {}

  void add(const Classification& c);
  ResistanceAccumulator& merge(const ResistanceAccumulator& other);
  /// One row per group, ordered by group key.
  std::vector<ResistanceScore> rows() const;
  GroupBy group_by() const { return group_by_; }

 private:
  GroupBy group_by_;
  std::map<GroupKey, Tally> groups_;
};

std::vector<ResistanceScore> resistance(const std::vector<Classification>& classifications, GroupBy group_by);

}  // namespace biasbench
