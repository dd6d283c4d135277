#include "hallens/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "hallens/error.hpp"
#include "hallens/kernels.hpp"
#include "hallens/io.hpp"
#include "json.hpp"

namespace hallens {

namespace {

// Keeps a rescaled threshold strictly inside (0,1) so normalization stays
// defined when calibration picked a boundary outside the observed scores.
constexpr double kThresholdMargin = 1e-6;

struct ResolvedMember {
  const std::string* id;
  ScoreTable table;  // aligned to the dataset
  std::map<Task, double> threshold;
};

std::vector<ResolvedMember> resolve_members(const Dataset& ds, std::span<const ScoreTable> tables,
                                            std::span<const ThresholdConfig> thresholds,
                                            std::span<const std::string> members) {
  std::set<Task> tasks;
  for (const auto& s : ds.samples) tasks.insert(s.task);

  std::vector<ResolvedMember> out;
  for (const auto& member : members) {
    auto table = std::find_if(tables.begin(), tables.end(), [&](const ScoreTable& t) { return t.scorer_id == member; });
    if (table == tables.end()) throw DataError("ensemble: no score table for member '" + member + "'");
    ResolvedMember r{&member, align(*table, ds), {}};
    for (Task task : tasks) {
      auto cfg = std::find_if(thresholds.begin(), thresholds.end(), [&](const ThresholdConfig& c) {
        return c.scorer_id == member && c.task == task && c.track == ds.track;
      });
      if (cfg == thresholds.end()) {
        throw DataError("ensemble: no threshold for member '" + member + "' on task " +
                        std::string(to_string(task)) + " (" + std::string(to_string(ds.track)) + " track)");
      }
      r.threshold[task] = cfg->threshold;
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

void EnsembleSpec::validate() const {
  if (members.empty()) throw UsageError("ensemble spec: no members");
  std::set<std::string> unique(members.begin(), members.end());
  if (unique.size() != members.size()) throw UsageError("ensemble spec: duplicate members");
  if (min_votes && (*min_votes < 1 || *min_votes > static_cast<int>(members.size()))) {
    throw UsageError("ensemble spec: min_votes must lie in [1, " + std::to_string(members.size()) + "]");
  }
  for (const auto& [name, range] : ranges) {
    if (!(std::isfinite(range.lo) && std::isfinite(range.hi) && range.lo < range.hi)) {
      throw UsageError("ensemble spec: invalid range for '" + name + "'");
    }
  }
}

ScoreRange EnsembleSpec::range_of(const std::string& member) const {
  auto it = ranges.find(member);
  return it == ranges.end() ? ScoreRange{} : it->second;
}

EnsembleSpec parse_ensemble_spec(std::string_view json_text) {
  EnsembleSpec spec;
  try {
    const auto j = nlohmann::json::parse(json_text);
    spec.members = j.at("members").get<std::vector<std::string>>();
    const auto strategy = j.at("strategy").get<std::string>();
    if (strategy == "voting") {
      spec.strategy = Strategy::Voting;
    } else if (strategy == "normalized_averaging" || strategy == "averaging") {
      spec.strategy = Strategy::NormalizedAveraging;
    } else {
      throw DataError("ensemble spec: unknown strategy '" + strategy + "'");
    }
    if (auto it = j.find("min_votes"); it != j.end() && !it->is_null()) spec.min_votes = it->get<int>();
    if (auto it = j.find("ranges"); it != j.end()) {
      for (const auto& [name, pair] : it->items()) {
        const auto bounds = pair.get<std::vector<double>>();
        if (bounds.size() != 2) throw DataError("ensemble spec: range for '" + name + "' needs [lo, hi]");
        spec.ranges[name] = ScoreRange{bounds[0], bounds[1]};
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("ensemble spec: ") + e.what());
  }
  try {
    spec.validate();
  } catch (const UsageError& e) {
    throw DataError(e.what());
  }
  return spec;
}

std::string ensemble_spec_to_json(const EnsembleSpec& spec) {
  nlohmann::ordered_json j;
  j["members"] = spec.members;
  j["strategy"] = spec.strategy == Strategy::Voting ? "voting" : "normalized_averaging";
  if (spec.min_votes) j["min_votes"] = *spec.min_votes;
  if (!spec.ranges.empty()) {
    nlohmann::ordered_json ranges = nlohmann::ordered_json::object();
    for (const auto& [name, r] : spec.ranges) ranges[name] = {r.lo, r.hi};
    j["ranges"] = ranges;
  }
  return j.dump(2) + "\n";
}

EnsembleSpec load_ensemble_spec(const std::filesystem::path& path) {
  try {
    return parse_ensemble_spec(read_text_file(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

double normalize_score(double p, double thr) {
  if (!(thr > 0.0 && thr < 1.0)) throw UsageError("normalize_score: threshold must lie in (0,1)");
  if (!(p >= 0.0 && p <= 1.0)) throw UsageError("normalize_score: score must lie in [0,1]");
  double out = 0.0;
  kernels::normalize_scores(kernels::Isa::Scalar, std::span<const double>(&p, 1), thr, std::span<double>(&out, 1));
  return out;
}

AveragedDecision averaged_decision(std::span<const double> normalized) {
  if (normalized.empty()) throw UsageError("averaged_decision: empty member list");
  double sum = 0.0;
  for (double v : normalized) {
    if (!(v >= 0.0 && v <= 1.0)) throw UsageError("averaged_decision: normalized score outside [0,1]");
    sum += v;
  }
  const double mean = sum / static_cast<double>(normalized.size());
  return {mean, mean >= 0.5 ? Label::NotHallucination : Label::Hallucination};
}

Label vote(std::span<const Label> member_labels, int min_votes) {
  if (min_votes < 1 || min_votes > static_cast<int>(member_labels.size())) {
    throw UsageError("vote: min_votes must lie in [1, member count]");
  }
  const auto faithful = std::count(member_labels.begin(), member_labels.end(), Label::NotHallucination);
  return faithful >= min_votes ? Label::NotHallucination : Label::Hallucination;
}

MinVotesResult select_min_votes(const std::vector<std::vector<Label>>& rows, std::span<const Label> golds) {
  if (rows.empty()) throw UsageError("select_min_votes: empty data");
  if (rows.size() != golds.size()) throw UsageError("select_min_votes: rows and golds differ in length");
  const std::size_t members = rows.front().size();
  if (members == 0) throw UsageError("select_min_votes: no members");

  // correct[k] = samples classified correctly with min_votes = k.
  std::vector<std::size_t> correct(members + 1, 0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != members) throw UsageError("select_min_votes: ragged label matrix");
    const auto votes = static_cast<std::size_t>(std::count(rows[i].begin(), rows[i].end(), Label::NotHallucination));
    for (std::size_t k = 1; k <= members; ++k) {
      const Label predicted = votes >= k ? Label::NotHallucination : Label::Hallucination;
      correct[k] += predicted == golds[i] ? 1 : 0;
    }
  }
  std::size_t best = 1;
  for (std::size_t k = 2; k <= members; ++k) {
    if (correct[k] > correct[best]) best = k;
  }
  return {static_cast<int>(best), static_cast<double>(correct[best]) / static_cast<double>(rows.size())};
}

std::vector<std::vector<Label>> member_labels(const Dataset& ds, std::span<const ScoreTable> tables,
                                              std::span<const ThresholdConfig> thresholds,
                                              std::span<const std::string> members) {
  const auto resolved = resolve_members(ds, tables, thresholds, members);
  std::vector<std::vector<Label>> rows(ds.samples.size(), std::vector<Label>(members.size()));
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    const Sample& s = ds.samples[i];
    for (std::size_t m = 0; m < resolved.size(); ++m) {
      rows[i][m] = classify(resolved[m].table.at(s.id), resolved[m].threshold.at(s.task));
    }
  }
  return rows;
}

std::vector<Prediction> run_ensemble(const Dataset& ds, std::span<const ScoreTable> tables,
                                     std::span<const ThresholdConfig> thresholds, const EnsembleSpec& spec) {
  spec.validate();
  if (spec.strategy == Strategy::Voting && !spec.min_votes) throw UsageError("ensemble spec: voting needs min_votes");
  const auto resolved = resolve_members(ds, tables, thresholds, spec.members);

  std::map<Task, std::vector<std::size_t>> by_task;
  for (std::size_t i = 0; i < ds.samples.size(); ++i) by_task[ds.samples[i].task].push_back(i);

  const std::size_t n = ds.samples.size();
  const double member_count = static_cast<double>(resolved.size());
  std::vector<Prediction> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i].sample_id = ds.samples[i].id;

  std::vector<double> gathered;
  std::vector<double> normalized;
  for (const auto& [task, indices] : by_task) {
    const std::size_t g = indices.size();
    gathered.resize(g);
    normalized.resize(g);

    if (spec.strategy == Strategy::Voting) {
      std::vector<std::int32_t> votes(g, 0);
      for (const auto& member : resolved) {
        for (std::size_t k = 0; k < g; ++k) gathered[k] = member.table.at(ds.samples[indices[k]].id);
        kernels::accumulate_votes(gathered, member.threshold.at(task), votes);
      }
      for (std::size_t k = 0; k < g; ++k) {
        Prediction& p = out[indices[k]];
        p.label = votes[k] >= *spec.min_votes ? Label::NotHallucination : Label::Hallucination;
        p.aggregate = static_cast<double>(votes[k]) / member_count;
      }
      continue;
    }

    std::vector<double> sum(g, 0.0);
    for (const auto& member : resolved) {
      const ScoreRange range = spec.range_of(*member.id);
      for (std::size_t k = 0; k < g; ++k) {
        const auto& id = ds.samples[indices[k]].id;
        const double raw = member.table.at(id);
        if (!(raw >= range.lo && raw <= range.hi)) {
          throw DataError("ensemble: score of member '" + *member.id + "' for sample '" + id +
                          "' lies outside its declared range");
        }
        gathered[k] = range.to_unit(raw);
      }
      const double thr = std::clamp(range.to_unit(member.threshold.at(task)), kThresholdMargin, 1.0 - kThresholdMargin);
      kernels::normalize_scores(gathered, thr, normalized);
      kernels::accumulate_sum(normalized, sum);
    }
    for (std::size_t k = 0; k < g; ++k) {
      Prediction& p = out[indices[k]];
      p.aggregate = std::clamp(sum[k] / member_count, 0.0, 1.0);
      p.label = p.aggregate >= 0.5 ? Label::NotHallucination : Label::Hallucination;
    }
  }
  return out;
}

std::string predictions_to_jsonl(std::span<const Prediction> predictions) {
  std::string out;
  for (const auto& p : predictions) {
    nlohmann::ordered_json j;
    j["id"] = p.sample_id;
    j["label"] = std::string(to_string(p.label));
    j["aggregate"] = p.aggregate;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<Prediction> predictions_from_jsonl(std::string_view text) {
  std::vector<Prediction> out;
  std::size_t pos = 0, line_no = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Prediction p;
      p.sample_id = j.at("id").get<std::string>();
      auto label = parse_label(j.at("label").get<std::string>());
      if (!label) throw DataError("unknown label at line " + std::to_string(line_no));
      p.label = *label;
      p.aggregate = j.value("aggregate", 0.0);
      out.push_back(std::move(p));
    } catch (const nlohmann::json::exception&) {
      throw DataError("malformed prediction at line " + std::to_string(line_no));
    }
  }
  return out;
}

void write_predictions(std::span<const Prediction> predictions, const std::filesystem::path& path) {
  write_text_file(path, predictions_to_jsonl(predictions));
}

std::vector<Prediction> read_predictions(const std::filesystem::path& path) {
  try {
    return predictions_from_jsonl(read_text_file(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace hallens
