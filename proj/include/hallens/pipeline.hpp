#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "hallens/dataset.hpp"
#include "hallens/ensemble.hpp"
#include "hallens/lexical_metrics.hpp"

namespace hallens {

struct ExternalScores {
  std::string scorer_id;
  std::filesystem::path val;
  std::filesystem::path test;
};

/// score -> calibrate -> ensemble -> evaluate, driven by one JSON file:
///
///   {
///     "track": "agnostic",
///     "val": "val.jsonl", "test": "test.jsonl",
///     "metrics": ["bleu", "chrf", "meteor"],
///     "metric_params": { ... },                       (optional)
///     "external_scores": [{"scorer_id": "mis", "val": "...", "test": "..."}],
///     "fixed_thresholds": {"vectara": 0.5},           (optional)
///     "pool_tasks": false,                            (optional)
///     "ensemble": {"members": [...], "strategy": "voting"},
///     "out_dir": "out"
///   }
///
/// Relative paths resolve against the config file's directory. A voting
/// ensemble without min_votes gets one selected on the validation split.
struct PipelineConfig {
  Track track = Track::ModelAgnostic;
  std::filesystem::path val;
  std::filesystem::path test;
  std::vector<Metric> metrics;
  MetricParams metric_params;
  std::vector<ExternalScores> external;
  std::map<std::string, double> fixed_thresholds;
  bool pool_tasks = false;
  EnsembleSpec ensemble;
  std::filesystem::path out_dir;
};

PipelineConfig parse_pipeline_config(std::string_view json_text, const std::filesystem::path& base_dir);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

struct PipelineArtifacts {
  std::vector<std::filesystem::path> score_files;
  std::filesystem::path thresholds;
  std::filesystem::path spec;
  std::filesystem::path predictions;
  std::filesystem::path report;
};

PipelineArtifacts run_pipeline(const PipelineConfig& config, unsigned jobs);

}  // namespace hallens
