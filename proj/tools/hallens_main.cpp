// hallens: score, calibrate, ensemble, filter and evaluate hallucination
// detectors from the command line.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hallens/calibration.hpp"
#include "hallens/dataset.hpp"
#include "hallens/ensemble.hpp"
#include "hallens/error.hpp"
#include "hallens/evaluation.hpp"
#include "hallens/filtration.hpp"
#include "hallens/kernels.hpp"
#include "hallens/lexical_metrics.hpp"
#include "hallens/pipeline.hpp"
#include "hallens/score_table.hpp"
#include "hallens/io.hpp"

namespace {

using namespace hallens;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

constexpr const char* kConfigEnv = "HALLENS_CONFIG";

Track track_of(const std::string& name) { return *parse_track(name); }

void add_track(CLI::App* cmd, std::string& track) {
  cmd->add_option("--track", track, "Evaluation track")->check(CLI::IsMember({"aware", "agnostic"}));
}

std::vector<ScoreTable> read_tables(const std::vector<std::string>& paths) {
  std::vector<ScoreTable> tables;
  for (const auto& p : paths) tables.push_back(read_score_file(p));
  return tables;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hallucination detection via lexical metrics, calibrated thresholds and ensembles"};
  app.require_subcommand(1);

  unsigned jobs = default_jobs();
  app.add_option("-j,--jobs", jobs, "Worker threads")->check(CLI::Range(1u, 1024u));
  std::string simd;
  app.add_option("--simd", simd, "Force a kernel variant")->check(CLI::IsMember({"scalar", "avx2", "neon"}));

  // score
  auto* score = app.add_subcommand("score", "Score a dataset with a lexical metric");
  std::string metric_name, params_path, data_path, out_path, track = "agnostic";
  score->add_option("--metric", metric_name)->required()->check(CLI::IsMember({"bleu", "chrf", "meteor"}));
  score->add_option("--params", params_path, "Metric parameter JSON");
  score->add_option("--data", data_path)->required();
  score->add_option("--out", out_path)->required();
  add_track(score, track);

  // validate
  auto* validate_cmd = app.add_subcommand("validate", "Check a score file, optionally against a dataset");
  std::string validate_scores;
  validate_cmd->add_option("--scores", validate_scores)->required();
  validate_cmd->add_option("--data", data_path);
  add_track(validate_cmd, track);

  // calibrate
  auto* calibrate = app.add_subcommand("calibrate", "Select per-task thresholds on validation data");
  std::vector<std::string> score_paths;
  std::string val_path;
  std::vector<std::string> fixed;
  bool pool_tasks = false;
  calibrate->add_option("--scores", score_paths)->required();
  calibrate->add_option("--val", val_path)->required();
  calibrate->add_option("--out", out_path)->required();
  calibrate->add_option("--fixed", fixed, "scorer=threshold, skips the sweep for that scorer");
  calibrate->add_flag("--pool-tasks", pool_tasks, "Sweep once per track instead of per task");
  add_track(calibrate, track);

  // ensemble
  auto* ensemble = app.add_subcommand("ensemble", "Combine scorers by voting or normalized averaging");
  std::string spec_path, thresholds_path;
  ensemble->add_option("--spec", spec_path)->required();
  ensemble->add_option("--scores", score_paths)->required();
  ensemble->add_option("--thresholds", thresholds_path)->required();
  ensemble->add_option("--data", data_path)->required();
  ensemble->add_option("--out", out_path)->required();
  add_track(ensemble, track);

  // filter
  auto* filter = app.add_subcommand("filter", "Apply rule-based filtration to synthetic data");
  std::string mis_path, rules_path, removed_path, report_path;
  filter->add_option("--data", data_path)->required();
  filter->add_option("--mis", mis_path, "Score file used by score-window rules");
  filter->add_option("--rules", rules_path, "Rule JSON; defaults to the built-in rule set");
  filter->add_option("--out", out_path)->required();
  filter->add_option("--removed", removed_path);
  filter->add_option("--report", report_path);
  add_track(filter, track);

  auto* default_rules_cmd = app.add_subcommand("default-rules", "Print the built-in filtration rules as JSON");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Accuracy of predictions against gold labels");
  std::string pred_path, gold_path, csv_path;
  bool rank_corr = false;
  evaluate->add_option("--pred", pred_path)->required();
  evaluate->add_option("--gold", gold_path)->required();
  evaluate->add_option("--out", out_path);
  evaluate->add_option("--csv", csv_path);
  evaluate->add_flag("--rank-corr", rank_corr, "Also report Spearman correlation with p(Hallucination)");
  add_track(evaluate, track);

  // pipeline
  auto* pipeline = app.add_subcommand("pipeline", "Run score, calibrate, ensemble and evaluate from one config");
  std::string config_path;
  pipeline->add_option("--config", config_path, std::string("Pipeline JSON (default: $") + kConfigEnv + ")");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (!simd.empty()) {
      kernels::force_isa(simd == "avx2" ? kernels::Isa::Avx2 : simd == "neon" ? kernels::Isa::Neon : kernels::Isa::Scalar);
    }

    if (score->parsed()) {
      const MetricParams params = params_path.empty() ? MetricParams{} : load_metric_params(params_path);
      const Dataset ds = load_dataset(data_path, track_of(track));
      write_score_file(score_dataset(ds, *parse_metric(metric_name), params, jobs), out_path);
    } else if (validate_cmd->parsed()) {
      ScoreTable table = read_score_file(validate_scores);
      validate(table);
      std::cout << table.scorer_id << ": " << table.scores.size() << " scores, " << to_string(table.orientation)
                << "\n";
      if (!data_path.empty()) {
        align(table, load_dataset(data_path, track_of(track)));
        std::cout << "covers every sample of " << data_path << "\n";
      }
    } else if (calibrate->parsed()) {
      CalibrationOptions options;
      options.pool_tasks = pool_tasks;
      for (const auto& f : fixed) {
        const auto eq = f.find('=');
        double thr = 0.0;
        try {
          if (eq == std::string::npos || eq == 0) throw std::invalid_argument(f);
          std::size_t used = 0;
          thr = std::stod(f.substr(eq + 1), &used);
          if (used != f.size() - eq - 1) throw std::invalid_argument(f);
        } catch (const std::exception&) {
          std::cerr << "error: --fixed expects scorer=threshold, got '" << f << "'\n";
          return kExitUsage;
        }
        options.fixed_thresholds[f.substr(0, eq)] = thr;
      }
      const Dataset val = load_dataset(val_path, track_of(track));
      write_thresholds(calibrate_all(read_tables(score_paths), val, options), out_path);
    } else if (ensemble->parsed()) {
      const EnsembleSpec spec = load_ensemble_spec(spec_path);
      if (spec.strategy == Strategy::Voting && !spec.min_votes) {
        throw DataError(spec_path + ": voting spec needs min_votes");
      }
      const Dataset ds = load_dataset(data_path, track_of(track));
      const auto preds = run_ensemble(ds, read_tables(score_paths), read_thresholds(thresholds_path), spec);
      write_predictions(preds, out_path);
    } else if (filter->parsed()) {
      const auto rules = rules_path.empty() ? default_rules() : load_rules(rules_path);
      const Dataset ds = load_dataset(data_path, track_of(track));
      std::optional<ScoreTable> mis;
      if (!mis_path.empty()) mis = read_score_file(mis_path);
      const FilterOutcome outcome = apply_filters(ds, mis ? &*mis : nullptr, rules);
      write_dataset(outcome.kept, out_path);
      if (!removed_path.empty()) write_text_file(removed_path, removed_to_jsonl(outcome.removed));
      const std::string report = report_to_json(filtration_report(outcome, rules));
      if (!report_path.empty()) {
        write_text_file(report_path, report);
      } else {
        std::cout << report;
      }
    } else if (default_rules_cmd->parsed()) {
      std::cout << rules_to_json(default_rules());
    } else if (evaluate->parsed()) {
      const Dataset gold = load_dataset(gold_path, track_of(track));
      const auto preds = read_predictions(pred_path);
      const EvalReport report = accuracy(preds, gold);
      std::cout << eval_report_to_text(report);
      std::optional<double> rho;
      if (rank_corr) {
        rho = rank_correlation(preds, gold);
        std::cout << "spearman " << (rho ? std::to_string(*rho) : std::string("n/a")) << "\n";
      }
      if (!out_path.empty()) write_text_file(out_path, eval_report_to_json(report));
      if (!csv_path.empty()) {
        std::string csv = "task,n,correct,accuracy\n";
        for (const auto& [task, cell] : report.per_task) {
          csv += std::string(to_string(task)) + "," + std::to_string(cell.n) + "," + std::to_string(cell.correct) +
                 "," + std::to_string(cell.accuracy()) + "\n";
        }
        csv += "all," + std::to_string(report.overall.n) + "," + std::to_string(report.overall.correct) + "," +
               std::to_string(report.overall_accuracy()) + "\n";
        write_text_file(csv_path, csv);
      }
    } else if (pipeline->parsed()) {
      if (config_path.empty()) {
        if (const char* env = std::getenv(kConfigEnv)) config_path = env;
      }
      if (config_path.empty()) {
        std::cerr << "error: pipeline needs --config or $" << kConfigEnv << "\n";
        return kExitUsage;
      }
      if (!std::filesystem::is_regular_file(config_path)) throw DataError("file not found: " + config_path);
      const auto artifacts = run_pipeline(load_pipeline_config(config_path), jobs);
      std::cout << "wrote " << artifacts.predictions.string() << " and " << artifacts.report.string() << "\n";
    }
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return 0;
}
