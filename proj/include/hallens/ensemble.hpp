#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hallens/calibration.hpp"
#include "hallens/dataset.hpp"
#include "hallens/score_table.hpp"

namespace hallens {

enum class Strategy { Voting, NormalizedAveraging };

// Affine range of a scorer's canonical (HigherIsFaithful) scores.
struct ScoreRange {
  double lo = 0.0;
  double hi = 1.0;
  double to_unit(double x) const { return (x - lo) / (hi - lo); }
  friend bool operator==(const ScoreRange&, const ScoreRange&) = default;
};

struct EnsembleSpec {
  std::vector<std::string> members;
  Strategy strategy = Strategy::Voting;
  // Required by run_ensemble for voting; the pipeline selects it on
  // validation data when absent.
  std::optional<int> min_votes;
  // Members missing here are assumed to score in [0,1].
  std::map<std::string, ScoreRange> ranges;

  void validate() const;
  ScoreRange range_of(const std::string& member) const;
  friend bool operator==(const EnsembleSpec&, const EnsembleSpec&) = default;
};

EnsembleSpec parse_ensemble_spec(std::string_view json_text);
std::string ensemble_spec_to_json(const EnsembleSpec& spec);
EnsembleSpec load_ensemble_spec(const std::filesystem::path& path);

struct Prediction {
  std::string sample_id;
  Label label = Label::Hallucination;
  double aggregate = 0.0;

  friend bool operator==(const Prediction&, const Prediction&) = default;
};

/// Piecewise-linear map of [0,1] onto [0,1] sending thr to 0.5:
/// k*p + b above the threshold, p/(2 thr) below it.
double normalize_score(double p, double thr);

struct AveragedDecision {
  double aggregate;
  Label label;
};
AveragedDecision averaged_decision(std::span<const double> normalized);

// NotHallucination iff at least min_votes members read the sample as faithful.
Label vote(std::span<const Label> member_labels, int min_votes);

struct MinVotesResult {
  int min_votes = 1;
  double accuracy = 0.0;
};
/// rows[i] holds every member's label for sample i.
MinVotesResult select_min_votes(const std::vector<std::vector<Label>>& rows, std::span<const Label> golds);

/// Per-sample member labels under each member's task-specific threshold,
/// in dataset order.
std::vector<std::vector<Label>> member_labels(const Dataset& ds, std::span<const ScoreTable> tables,
                                              std::span<const ThresholdConfig> thresholds,
                                              std::span<const std::string> members);

std::vector<Prediction> run_ensemble(const Dataset& ds, std::span<const ScoreTable> tables,
                                     std::span<const ThresholdConfig> thresholds, const EnsembleSpec& spec);

std::string predictions_to_jsonl(std::span<const Prediction> predictions);
std::vector<Prediction> predictions_from_jsonl(std::string_view text);
void write_predictions(std::span<const Prediction> predictions, const std::filesystem::path& path);
std::vector<Prediction> read_predictions(const std::filesystem::path& path);

}  // namespace hallens
