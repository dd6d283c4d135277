#include "hallens/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hallens/error.hpp"
#include "hallens/io.hpp"
#include "json.hpp"

namespace hallens {

namespace {

// Strictly between lo and hi whenever lo < hi, even for adjacent doubles.
double midpoint_above(double lo, double hi) {
  double mid = lo + (hi - lo) / 2.0;
  if (!(mid > lo)) mid = std::nextafter(lo, hi);
  return mid;
}

double below(double v) {
  double t = v - 1.0;
  return t < v ? t : std::nextafter(v, -std::numeric_limits<double>::infinity());
}

double above(double v) {
  double t = v + 1.0;
  return t > v ? t : std::nextafter(v, std::numeric_limits<double>::infinity());
}

std::vector<double> sorted_distinct(std::span<const double> scores) {
  std::vector<double> v(scores.begin(), scores.end());
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

std::vector<double> candidate_thresholds(std::span<const double> scores) {
  const auto distinct = sorted_distinct(scores);
  std::vector<double> out;
  if (distinct.empty()) return out;
  out.reserve(distinct.size() + 1);
  out.push_back(below(distinct.front()));
  for (std::size_t i = 1; i < distinct.size(); ++i) out.push_back(midpoint_above(distinct[i - 1], distinct[i]));
  out.push_back(above(distinct.back()));
  return out;
}

SweepResult sweep_threshold(std::span<const double> scores, std::span<const Label> golds) {
  if (scores.size() != golds.size()) throw UsageError("sweep_threshold: scores and golds differ in length");
  if (scores.empty()) throw UsageError("sweep_threshold: empty input");
  for (double s : scores) {
    if (!std::isfinite(s)) throw DataError("sweep_threshold: non-finite score");
  }

  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  std::size_t faithful = 0;
  for (Label g : golds) faithful += g == Label::NotHallucination ? 1 : 0;

  // Lowest candidate: everything reads as faithful.
  std::size_t correct = faithful;
  SweepResult best{below(scores[order.front()]), 0.0, correct, faithful == 0 || faithful == n};

  // Raising the threshold past a group of equal scores flips that group to
  // Hallucination: gain its hallucinated samples, lose its faithful ones.
  std::size_t i = 0;
  while (i < n) {
    const double value = scores[order[i]];
    std::size_t j = i;
    long delta = 0;
    for (; j < n && scores[order[j]] == value; ++j) delta += golds[order[j]] == Label::Hallucination ? 1 : -1;
    correct = static_cast<std::size_t>(static_cast<long>(correct) + delta);
    if (correct > best.correct) {
      best.correct = correct;
      best.threshold = j < n ? midpoint_above(value, scores[order[j]]) : above(value);
    }
    i = j;
  }
  best.accuracy = static_cast<double>(best.correct) / static_cast<double>(n);
  return best;
}

std::vector<ThresholdConfig> calibrate_all(std::span<const ScoreTable> tables, const Dataset& ds,
                                           const CalibrationOptions& options) {
  for (const auto& s : ds.samples) {
    if (!s.gold) throw DataError("calibration requires labels; sample '" + s.id + "' is unlabeled");
  }
  std::vector<ThresholdConfig> configs;

  for (const auto& raw : tables) {
    const ScoreTable table = align(raw, ds);
    const auto fixed = options.fixed_thresholds.find(table.scorer_id);

    std::optional<SweepResult> pooled;
    if (options.pool_tasks && fixed == options.fixed_thresholds.end() && !ds.samples.empty()) {
      std::vector<double> scores;
      std::vector<Label> golds;
      for (const auto& s : ds.samples) {
        scores.push_back(table.at(s.id));
        golds.push_back(*s.gold);
      }
      pooled = sweep_threshold(scores, golds);
    }

    for (Task task : kAllTasks) {
      std::vector<double> scores;
      std::vector<Label> golds;
      for (const auto& s : ds.samples) {
        if (s.task != task) continue;
        scores.push_back(table.at(s.id));
        golds.push_back(*s.gold);
      }
      if (scores.empty()) continue;

      ThresholdConfig cfg;
      cfg.scorer_id = table.scorer_id;
      cfg.task = task;
      cfg.track = ds.track;
      const bool single_class =
          std::all_of(golds.begin(), golds.end(), [&](Label g) { return g == golds.front(); });

      if (fixed != options.fixed_thresholds.end() || pooled) {
        cfg.fixed = fixed != options.fixed_thresholds.end();
        cfg.threshold = cfg.fixed ? fixed->second : pooled->threshold;
        std::size_t correct = 0;
        for (std::size_t i = 0; i < scores.size(); ++i) correct += classify(scores[i], cfg.threshold) == golds[i];
        cfg.val_accuracy = static_cast<double>(correct) / static_cast<double>(scores.size());
        cfg.single_class = single_class;
      } else {
        const SweepResult r = sweep_threshold(scores, golds);
        cfg.threshold = r.threshold;
        cfg.val_accuracy = r.accuracy;
        cfg.single_class = r.single_class;
      }
      configs.push_back(std::move(cfg));
    }
  }
  return configs;
}

std::string thresholds_to_json(std::span<const ThresholdConfig> configs) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& c : configs) {
    nlohmann::ordered_json obj;
    obj["scorer_id"] = c.scorer_id;
    obj["task"] = std::string(to_string(c.task));
    obj["track"] = std::string(to_string(c.track));
    obj["threshold"] = c.threshold;
    obj["val_accuracy"] = c.val_accuracy;
    obj["fixed"] = c.fixed;
    obj["single_class"] = c.single_class;
    arr.push_back(std::move(obj));
  }
  return arr.dump(2) + "\n";
}

std::vector<ThresholdConfig> thresholds_from_json(std::string_view text) {
  std::vector<ThresholdConfig> out;
  try {
    const auto arr = nlohmann::json::parse(text);
    if (!arr.is_array()) throw DataError("thresholds: expected a JSON array");
    for (const auto& obj : arr) {
      ThresholdConfig c;
      c.scorer_id = obj.at("scorer_id").get<std::string>();
      auto task = parse_task(obj.at("task").get<std::string>());
      auto track = parse_track(obj.at("track").get<std::string>());
      if (!task || !track) throw DataError("thresholds: unknown task or track for '" + c.scorer_id + "'");
      c.task = *task;
      c.track = *track;
      c.threshold = obj.at("threshold").get<double>();
      c.val_accuracy = obj.at("val_accuracy").get<double>();
      c.fixed = obj.value("fixed", false);
      c.single_class = obj.value("single_class", false);
      if (!std::isfinite(c.threshold) || !(c.val_accuracy >= 0.0 && c.val_accuracy <= 1.0)) {
        throw DataError("thresholds: invalid values for '" + c.scorer_id + "'");
      }
      out.push_back(std::move(c));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("thresholds: ") + e.what());
  }
  return out;
}

void write_thresholds(std::span<const ThresholdConfig> configs, const std::filesystem::path& path) {
  write_text_file(path, thresholds_to_json(configs));
}

std::vector<ThresholdConfig> read_thresholds(const std::filesystem::path& path) {
  try {
    return thresholds_from_json(read_text_file(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace hallens
