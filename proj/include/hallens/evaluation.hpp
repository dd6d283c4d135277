#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hallens/dataset.hpp"
#include "hallens/ensemble.hpp"

namespace hallens {

struct CellCount {
  std::size_t n = 0;
  std::size_t correct = 0;
  double accuracy() const { return n == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(n); }
};

struct EvalReport {
  Track track = Track::ModelAgnostic;
  CellCount overall;
  std::map<Task, CellCount> per_task;  // only tasks present in the data

  double overall_accuracy() const { return overall.accuracy(); }
};

/// Prediction ids must equal the dataset ids exactly; every sample labeled.
EvalReport accuracy(std::span<const Prediction> predictions, const Dataset& ds);

/// Spearman correlation between predicted hallucination strength
/// (1 - aggregate) and the gold p(Hallucination). Diagnostic only; nullopt
/// when fewer than two samples carry p(Hallucination) or either side is
/// constant.
std::optional<double> rank_correlation(std::span<const Prediction> predictions, const Dataset& ds);

struct NamedReport {
  std::string method;
  EvalReport report;
};

struct RankingRow {
  std::string method;
  std::optional<double> agnostic;
  std::optional<double> aware;
};

/// One row per method, sorted by accuracy descending (model-agnostic first,
/// then model-aware), ties broken by method name.
std::vector<RankingRow> compare_methods(std::span<const NamedReport> reports);

std::string eval_report_to_json(const EvalReport& report);
std::string ranking_to_json(std::span<const RankingRow> rows);
std::string ranking_to_text(std::span<const RankingRow> rows);
std::string ranking_to_csv(std::span<const RankingRow> rows);
std::string eval_report_to_text(const EvalReport& report);

}  // namespace hallens
