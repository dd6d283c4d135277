#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hallens/dataset.hpp"
#include "hallens/score_table.hpp"

namespace hallens {

struct ThresholdConfig {
  std::string scorer_id;
  Task task = Task::DefinitionModeling;
  Track track = Track::ModelAgnostic;
  double threshold = 0.0;
  double val_accuracy = 0.0;
  bool fixed = false;         // threshold was declared, not swept
  bool single_class = false;  // validation labels contained one class only

  friend bool operator==(const ThresholdConfig&, const ThresholdConfig&) = default;
};

// Inclusive boundary: score >= threshold reads as faithful.
inline Label classify(double score, double threshold) {
  return score >= threshold ? Label::NotHallucination : Label::Hallucination;
}

struct SweepResult {
  double threshold = 0.0;
  double accuracy = 0.0;
  std::size_t correct = 0;
  bool single_class = false;
};

/// Candidate thresholds for a score list: one below the minimum, the
/// midpoint of each pair of consecutive distinct sorted scores, and one above
/// the maximum, in ascending order.
std::vector<double> candidate_thresholds(std::span<const double> scores);

/// Picks the candidate threshold with the highest accuracy of classify();
/// ties go to the smallest threshold. O(n log n).
SweepResult sweep_threshold(std::span<const double> scores, std::span<const Label> golds);

struct CalibrationOptions {
  // Scorers whose threshold is declared rather than swept.
  std::map<std::string, double> fixed_thresholds;
  // Sweep once over the whole track instead of per task.
  bool pool_tasks = false;
};

/// One config per (table, task present in ds), in table order then task
/// order. Tables are aligned to ds first. Requires a fully labeled dataset.
std::vector<ThresholdConfig> calibrate_all(std::span<const ScoreTable> tables, const Dataset& ds,
                                           const CalibrationOptions& options = {});

std::string thresholds_to_json(std::span<const ThresholdConfig> configs);
std::vector<ThresholdConfig> thresholds_from_json(std::string_view text);
void write_thresholds(std::span<const ThresholdConfig> configs, const std::filesystem::path& path);
std::vector<ThresholdConfig> read_thresholds(const std::filesystem::path& path);

}  // namespace hallens
