#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hallens/dataset.hpp"
#include "hallens/parallel.hpp"
#include "hallens/score_table.hpp"

namespace hallens {

using TokenSequence = std::vector<std::string>;

struct MetricParams {
  int bleu_max_order = 4;
  double bleu_smoothing_epsilon = 0.1;
  int chrf_max_order = 6;
  double chrf_beta = 2.0;
  double meteor_alpha = 0.9;
  double meteor_beta = 3.0;
  double meteor_gamma = 0.5;

  // Throws UsageError when a field is out of its domain.
  void validate() const;
  friend bool operator==(const MetricParams&, const MetricParams&) = default;
};

// Missing keys keep their defaults; unknown keys are rejected.
MetricParams parse_metric_params(std::string_view json_text);
MetricParams load_metric_params(const std::filesystem::path& path);

enum class Metric { Bleu, Chrf, Meteor };
std::string_view to_string(Metric metric);
std::optional<Metric> parse_metric(std::string_view name);

/// Lowercases ASCII letters, splits on whitespace and peels leading and
/// trailing ASCII punctuation off each word as single-character tokens.
/// Non-ASCII bytes are left untouched.
TokenSequence tokenize(std::string_view text);

// Sentence-level BLEU with epsilon smoothing of zero-count orders.
double bleu(const TokenSequence& hyp, const TokenSequence& ref, const MetricParams& params = {});

// Character n-gram F-score averaged over orders; operates on code points.
double chrf(std::string_view hyp, std::string_view ref, const MetricParams& params = {});

// Exact-match METEOR: greedy alignment, harmonic mean, fragmentation penalty.
double meteor(const TokenSequence& hyp, const TokenSequence& ref, const MetricParams& params = {});

double score_pair(Metric metric, std::string_view hyp, std::string_view ref, const MetricParams& params);

/// Scores every sample's hypothesis against its reference text. The result
/// is HigherIsFaithful and its scorer_id is the metric name.
ScoreTable score_dataset(const Dataset& ds, Metric metric, const MetricParams& params = {},
                         unsigned jobs = 1);

}  // namespace hallens
