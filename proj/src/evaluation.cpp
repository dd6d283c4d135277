#include "hallens/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <unordered_map>

#include "hallens/error.hpp"
#include "json.hpp"

namespace hallens {

namespace {

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::vector<double> average_ranks(const std::vector<double>& values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j - 1)) / 2.0 + 1.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
    i = j;
  }
  return ranks;
}

}  // namespace

EvalReport accuracy(std::span<const Prediction> predictions, const Dataset& ds) {
  std::unordered_map<std::string, const Prediction*> by_id;
  std::vector<std::string> extra;
  for (const auto& p : predictions) {
    if (!by_id.emplace(p.sample_id, &p).second) throw DataError("evaluation: duplicate prediction '" + p.sample_id + "'");
  }
  std::set<std::string> dataset_ids;
  std::vector<std::string> missing;
  for (const auto& s : ds.samples) {
    dataset_ids.insert(s.id);
    if (!by_id.count(s.id)) missing.push_back(s.id);
  }
  for (const auto& p : predictions) {
    if (!dataset_ids.count(p.sample_id)) extra.push_back(p.sample_id);
  }
  if (!missing.empty() || !extra.empty()) {
    std::sort(extra.begin(), extra.end());
    std::string msg = "evaluation: prediction ids do not match dataset ids;";
    if (!missing.empty()) {
      msg += " missing predictions:";
      for (const auto& id : missing) msg += " " + id;
      msg += ";";
    }
    if (!extra.empty()) {
      msg += " unknown ids:";
      for (const auto& id : extra) msg += " " + id;
    }
    throw DataError(msg);
  }

  EvalReport report;
  report.track = ds.track;
  for (const auto& s : ds.samples) {
    if (!s.gold) throw DataError("evaluation requires labels; sample '" + s.id + "' is unlabeled");
    const bool ok = by_id.at(s.id)->label == *s.gold;
    auto& cell = report.per_task[s.task];
    ++cell.n;
    ++report.overall.n;
    if (ok) {
      ++cell.correct;
      ++report.overall.correct;
    }
  }
  return report;
}

std::optional<double> rank_correlation(std::span<const Prediction> predictions, const Dataset& ds) {
  std::unordered_map<std::string, double> aggregate;
  for (const auto& p : predictions) aggregate[p.sample_id] = p.aggregate;
  std::vector<double> predicted, gold;
  for (const auto& s : ds.samples) {
    auto it = aggregate.find(s.id);
    if (!s.p_hallucination || it == aggregate.end()) continue;
    predicted.push_back(1.0 - it->second);
    gold.push_back(*s.p_hallucination);
  }
  if (predicted.size() < 2) return std::nullopt;
  const auto a = average_ranks(predicted);
  const auto b = average_ranks(gold);
  const double n = static_cast<double>(a.size());
  const double mean = (n + 1.0) / 2.0;
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cov += (a[i] - mean) * (b[i] - mean);
    va += (a[i] - mean) * (a[i] - mean);
    vb += (b[i] - mean) * (b[i] - mean);
  }
  if (va == 0.0 || vb == 0.0) return std::nullopt;
  return cov / std::sqrt(va * vb);
}

std::vector<RankingRow> compare_methods(std::span<const NamedReport> reports) {
  std::vector<RankingRow> rows;
  for (const auto& r : reports) {
    auto it = std::find_if(rows.begin(), rows.end(), [&](const RankingRow& row) { return row.method == r.method; });
    if (it == rows.end()) {
      rows.push_back({r.method, std::nullopt, std::nullopt});
      it = rows.end() - 1;
    }
    (r.report.track == Track::ModelAgnostic ? it->agnostic : it->aware) = r.report.overall_accuracy();
  }
  // Missing cells sort below any present accuracy.
  auto key = [](const std::optional<double>& v) { return v.value_or(-1.0); };
  std::sort(rows.begin(), rows.end(), [&](const RankingRow& a, const RankingRow& b) {
    if (key(a.agnostic) != key(b.agnostic)) return key(a.agnostic) > key(b.agnostic);
    if (key(a.aware) != key(b.aware)) return key(a.aware) > key(b.aware);
    return a.method < b.method;
  });
  return rows;
}

std::string eval_report_to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["track"] = std::string(to_string(report.track));
  j["n"] = report.overall.n;
  j["correct"] = report.overall.correct;
  j["overall_accuracy"] = report.overall_accuracy();
  nlohmann::ordered_json tasks = nlohmann::ordered_json::object();
  for (const auto& [task, cell] : report.per_task) {
    tasks[std::string(to_string(task))] = {{"n", cell.n}, {"correct", cell.correct}, {"accuracy", cell.accuracy()}};
  }
  j["per_task"] = tasks;
  return j.dump(2) + "\n";
}

std::string ranking_to_json(std::span<const RankingRow> rows) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json j;
    j["method"] = r.method;
    j["agnostic"] = r.agnostic ? nlohmann::ordered_json(*r.agnostic) : nlohmann::ordered_json(nullptr);
    j["aware"] = r.aware ? nlohmann::ordered_json(*r.aware) : nlohmann::ordered_json(nullptr);
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

std::string ranking_to_text(std::span<const RankingRow> rows) {
  std::size_t width = 6;
  for (const auto& r : rows) width = std::max(width, r.method.size());
  auto pad = [&](std::string s) {
    s.resize(width, ' ');
    return s;
  };
  std::string out = pad("method") + "  agnostic  aware\n";
  for (const auto& r : rows) {
    out += pad(r.method) + "  " + (r.agnostic ? fixed2(*r.agnostic) : std::string("     -")) + "    " +
           (r.aware ? fixed2(*r.aware) : std::string("     -")) + "\n";
  }
  return out;
}

std::string ranking_to_csv(std::span<const RankingRow> rows) {
  std::string out = "method,agnostic,aware\n";
  for (const auto& r : rows) {
    out += r.method + "," + (r.agnostic ? fixed2(*r.agnostic) : "") + "," + (r.aware ? fixed2(*r.aware) : "") + "\n";
  }
  return out;
}

std::string eval_report_to_text(const EvalReport& report) {
  std::string out = "track " + std::string(to_string(report.track)) + "\n";
  out += "task   n       correct  accuracy\n";
  auto row = [&](std::string name, const CellCount& c) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%-6s %-7zu %-8zu %s\n", name.c_str(), c.n, c.correct, fixed2(c.accuracy()).c_str());
    out += buf;
  };
  for (const auto& [task, cell] : report.per_task) row(std::string(to_string(task)), cell);
  row("all", report.overall);
  return out;
}

}  // namespace hallens
