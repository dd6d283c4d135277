#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hallens/dataset.hpp"
#include "hallens/score_table.hpp"

namespace hallens {

// Drops samples whose hypothesis has more than `limit` whitespace tokens.
struct MaxHypTokens {
  int limit = 200;
  friend bool operator==(const MaxHypTokens&, const MaxHypTokens&) = default;
};

// Keeps the first `cap` samples (file order) whose first hypothesis token is
// one of `prefixes`; later ones are dropped.
struct PrefixCap {
  std::vector<std::string> prefixes;
  int cap = 500;
  friend bool operator==(const PrefixCap&, const PrefixCap&) = default;
};

// Samples labeled `label` survive only if low <= score <= high.
struct ScoreWindow {
  Label label = Label::Hallucination;
  double low = 0.0;
  double high = 1.0;
  friend bool operator==(const ScoreWindow&, const ScoreWindow&) = default;
};

using FilterRule = std::variant<MaxHypTokens, PrefixCap, ScoreWindow>;

std::string rule_name(const FilterRule& rule);
void validate(const FilterRule& rule);

struct RemovedSample {
  Sample sample;
  std::vector<std::string> rules;
};

struct FilterOutcome {
  Dataset kept;
  std::vector<RemovedSample> removed;
};

/// Length cap 200, "any"/"anything" prefix cap 500, and MIS windows
/// [0.1, 0.5] for hallucinated and [0.7, 0.9] for faithful samples.
std::vector<FilterRule> default_rules();

/// Applies rules in order, each to the survivors of the previous one. `mis`
/// may be null when no ScoreWindow rule is present.
FilterOutcome apply_filters(const Dataset& ds, const ScoreTable* mis, const std::vector<FilterRule>& rules);

std::string rules_to_json(const std::vector<FilterRule>& rules);
std::vector<FilterRule> rules_from_json(std::string_view text);
std::vector<FilterRule> load_rules(const std::filesystem::path& path);

struct GroupCount {
  Task task;
  Label label;
  std::size_t before = 0;
  std::size_t after = 0;
};

struct FiltrationReport {
  std::size_t total_in = 0;
  std::size_t total_kept = 0;
  std::vector<GroupCount> groups;                         // (task, label) order
  std::vector<std::pair<std::string, std::size_t>> per_rule;  // rule order
};

FiltrationReport filtration_report(const FilterOutcome& outcome, const std::vector<FilterRule>& rules);
std::string report_to_json(const FiltrationReport& report);

std::string removed_to_jsonl(const std::vector<RemovedSample>& removed);

}  // namespace hallens
