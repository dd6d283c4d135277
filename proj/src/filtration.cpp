#include "hallens/filtration.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "hallens/error.hpp"
#include "hallens/lexical_metrics.hpp"
#include "hallens/io.hpp"
#include "json.hpp"

namespace hallens {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

std::size_t whitespace_token_count(std::string_view text) {
  std::size_t count = 0;
  bool in_token = false;
  for (char c : text) {
    const bool space = c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
    if (!space && !in_token) ++count;
    in_token = !space;
  }
  return count;
}

std::string first_token(std::string_view hyp) {
  auto tokens = tokenize(hyp);
  // Skip leading punctuation such as an opening quote.
  for (auto& t : tokens) {
    if (t.size() != 1 || std::isalnum(static_cast<unsigned char>(t[0]))) return std::move(t);
  }
  return {};
}

}  // namespace

std::string rule_name(const FilterRule& rule) {
  return std::visit(overloaded{
                        [](const MaxHypTokens&) { return std::string("max_hyp_tokens"); },
                        [](const PrefixCap&) { return std::string("prefix_cap"); },
                        [](const ScoreWindow& w) { return "score_window[" + std::string(to_string(w.label)) + "]"; },
                    },
                    rule);
}

void validate(const FilterRule& rule) {
  std::visit(overloaded{
                 [](const MaxHypTokens& r) {
                   if (r.limit <= 0) throw UsageError("max_hyp_tokens: limit must be positive");
                 },
                 [](const PrefixCap& r) {
                   if (r.cap < 0) throw UsageError("prefix_cap: cap must be non-negative");
                   for (const auto& p : r.prefixes) {
                     if (p.empty() || tokenize(p) != std::vector<std::string>{p}) {
                       throw UsageError("prefix_cap: prefixes must be single lowercase words");
                     }
                   }
                 },
                 [](const ScoreWindow& r) {
                   if (!(std::isfinite(r.low) && std::isfinite(r.high) && r.low <= r.high)) {
                     throw UsageError("score_window: need finite low <= high");
                   }
                 },
             },
             rule);
}

std::vector<FilterRule> default_rules() {
  return {
      MaxHypTokens{200},
      PrefixCap{{"any", "anything"}, 500},
      ScoreWindow{Label::Hallucination, 0.1, 0.5},
      ScoreWindow{Label::NotHallucination, 0.7, 0.9},
  };
}

FilterOutcome apply_filters(const Dataset& ds, const ScoreTable* mis, const std::vector<FilterRule>& rules) {
  for (const auto& r : rules) validate(r);
  for (const auto& s : ds.samples) {
    if (!s.gold) throw DataError("filtration requires labels; sample '" + s.id + "' is unlabeled");
  }
  const bool needs_scores = std::any_of(rules.begin(), rules.end(),
                                        [](const FilterRule& r) { return std::holds_alternative<ScoreWindow>(r); });
  ScoreTable scores;
  if (needs_scores) {
    if (!mis) throw DataError("filtration: score-window rules need a score file");
    scores = align(*mis, ds);
  }

  // removed_by[i] is set once sample i is dropped.
  std::vector<const FilterRule*> removed_by(ds.samples.size(), nullptr);
  for (const auto& rule : rules) {
    std::size_t prefix_seen = 0;
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
      if (removed_by[i]) continue;
      const Sample& s = ds.samples[i];
      const bool drop = std::visit(
          overloaded{
              [&](const MaxHypTokens& r) { return whitespace_token_count(s.hyp) > static_cast<std::size_t>(r.limit); },
              [&](const PrefixCap& r) {
                const std::string head = first_token(s.hyp);
                if (std::find(r.prefixes.begin(), r.prefixes.end(), head) == r.prefixes.end()) return false;
                return ++prefix_seen > static_cast<std::size_t>(r.cap);
              },
              [&](const ScoreWindow& r) {
                if (*s.gold != r.label) return false;
                const double v = scores.at(s.id);
                return !(v >= r.low && v <= r.high);
              },
          },
          rule);
      if (drop) removed_by[i] = &rule;
    }
  }

  FilterOutcome outcome;
  outcome.kept.name = ds.name;
  outcome.kept.track = ds.track;
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    if (removed_by[i]) {
      outcome.removed.push_back({ds.samples[i], {rule_name(*removed_by[i])}});
    } else {
      outcome.kept.samples.push_back(ds.samples[i]);
    }
  }
  return outcome;
}

std::string rules_to_json(const std::vector<FilterRule>& rules) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& rule : rules) {
    nlohmann::ordered_json j;
    std::visit(overloaded{
                   [&](const MaxHypTokens& r) {
                     j["type"] = "max_hyp_tokens";
                     j["limit"] = r.limit;
                   },
                   [&](const PrefixCap& r) {
                     j["type"] = "prefix_cap";
                     j["prefixes"] = r.prefixes;
                     j["cap"] = r.cap;
                   },
                   [&](const ScoreWindow& r) {
                     j["type"] = "score_window";
                     j["label"] = std::string(to_string(r.label));
                     j["low"] = r.low;
                     j["high"] = r.high;
                   },
               },
               rule);
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

std::vector<FilterRule> rules_from_json(std::string_view text) {
  std::vector<FilterRule> rules;
  try {
    const auto arr = nlohmann::json::parse(text);
    if (!arr.is_array()) throw DataError("rules: expected a JSON array");
    for (const auto& j : arr) {
      const auto type = j.at("type").get<std::string>();
      if (type == "max_hyp_tokens") {
        rules.emplace_back(MaxHypTokens{j.at("limit").get<int>()});
      } else if (type == "prefix_cap") {
        rules.emplace_back(PrefixCap{j.at("prefixes").get<std::vector<std::string>>(), j.at("cap").get<int>()});
      } else if (type == "score_window") {
        auto label = parse_label(j.at("label").get<std::string>());
        if (!label) throw DataError("rules: unknown label in score_window");
        rules.emplace_back(ScoreWindow{*label, j.at("low").get<double>(), j.at("high").get<double>()});
      } else {
        throw DataError("rules: unknown rule type '" + type + "'");
      }
      try {
        validate(rules.back());
      } catch (const UsageError& e) {
        throw DataError(std::string("rules: ") + e.what());
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("rules: ") + e.what());
  }
  return rules;
}

std::vector<FilterRule> load_rules(const std::filesystem::path& path) {
  try {
    return rules_from_json(read_text_file(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

FiltrationReport filtration_report(const FilterOutcome& outcome, const std::vector<FilterRule>& rules) {
  FiltrationReport report;
  report.total_kept = outcome.kept.samples.size();
  report.total_in = report.total_kept + outcome.removed.size();

  std::map<std::pair<Task, Label>, GroupCount> groups;
  auto group = [&](const Sample& s) -> GroupCount& {
    const Label label = s.gold.value_or(Label::Hallucination);
    auto [it, inserted] = groups.try_emplace({s.task, label}, GroupCount{s.task, label});
    return it->second;
  };
  for (const auto& s : outcome.kept.samples) {
    ++group(s).before;
    ++group(s).after;
  }
  for (const auto& r : outcome.removed) ++group(r.sample).before;
  for (auto& [key, g] : groups) report.groups.push_back(g);

  std::map<std::string, std::size_t> hits;
  for (const auto& r : outcome.removed) {
    for (const auto& name : r.rules) ++hits[name];
  }
  std::set<std::string> listed;
  for (const auto& rule : rules) {
    const auto name = rule_name(rule);
    if (listed.insert(name).second) report.per_rule.emplace_back(name, hits[name]);
  }
  for (const auto& [name, count] : hits) {
    if (listed.insert(name).second) report.per_rule.emplace_back(name, count);
  }
  return report;
}

std::string report_to_json(const FiltrationReport& report) {
  nlohmann::ordered_json j;
  j["total_in"] = report.total_in;
  j["total_kept"] = report.total_kept;
  j["total_removed"] = report.total_in - report.total_kept;
  nlohmann::ordered_json groups = nlohmann::ordered_json::array();
  for (const auto& g : report.groups) {
    nlohmann::ordered_json row;
    row["task"] = std::string(to_string(g.task));
    row["label"] = std::string(to_string(g.label));
    row["before"] = g.before;
    row["after"] = g.after;
    groups.push_back(std::move(row));
  }
  j["groups"] = groups;
  nlohmann::ordered_json per_rule = nlohmann::ordered_json::object();
  for (const auto& [name, count] : report.per_rule) per_rule[name] = count;
  j["removed_per_rule"] = per_rule;
  return j.dump(2) + "\n";
}

std::string removed_to_jsonl(const std::vector<RemovedSample>& removed) {
  std::string out;
  for (const auto& r : removed) {
    auto j = nlohmann::ordered_json::parse(sample_to_json_line(r.sample));
    j["removed_by"] = r.rules;
    out += j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
    out += '\n';
  }
  return out;
}

}  // namespace hallens
