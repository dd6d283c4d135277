#include "hallens/pipeline.hpp"

#include <set>

#include "hallens/calibration.hpp"
#include "hallens/error.hpp"
#include "hallens/evaluation.hpp"
#include "hallens/score_table.hpp"
#include "hallens/io.hpp"
#include "json.hpp"

namespace hallens {

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

void require_file(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) throw DataError("file not found: " + path.string());
}

// Prefixes data errors with the stage that raised them.
template <typename Fn>
auto stage(const char* name, Fn&& fn) {
  try {
    return fn();
  } catch (const DataError& e) {
    throw DataError(std::string(name) + ": " + e.what());
  }
}

std::vector<ScoreTable> build_tables(const PipelineConfig& config, const Dataset& ds, bool is_val,
                                     const std::filesystem::path& score_dir, unsigned jobs,
                                     std::vector<std::filesystem::path>& written) {
  std::vector<ScoreTable> tables;
  for (Metric m : config.metrics) {
    auto table = stage("score", [&] { return score_dataset(ds, m, config.metric_params, jobs); });
    const auto path = score_dir / (table.scorer_id + ".tsv");
    write_score_file(table, path);
    written.push_back(path);
    tables.push_back(std::move(table));
  }
  for (const auto& ext : config.external) {
    auto table = stage("ingest", [&] {
      auto t = read_score_file(is_val ? ext.val : ext.test);
      t.scorer_id = ext.scorer_id;
      return align(t, ds);
    });
    tables.push_back(std::move(table));
  }
  return tables;
}

}  // namespace

PipelineConfig parse_pipeline_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  PipelineConfig c;
  try {
    const auto j = nlohmann::json::parse(json_text);
    auto track = parse_track(j.value("track", std::string("agnostic")));
    if (!track) throw DataError("config: track must be 'aware' or 'agnostic'");
    c.track = *track;
    c.val = resolve(base_dir, j.at("val").get<std::string>());
    c.test = resolve(base_dir, j.at("test").get<std::string>());
    for (const auto& name : j.value("metrics", std::vector<std::string>{})) {
      auto m = parse_metric(name);
      if (!m) throw DataError("config: unknown metric '" + name + "'");
      c.metrics.push_back(*m);
    }
    if (auto it = j.find("metric_params"); it != j.end()) c.metric_params = parse_metric_params(it->dump());
    if (auto it = j.find("external_scores"); it != j.end()) {
      for (const auto& e : *it) {
        c.external.push_back({e.at("scorer_id").get<std::string>(), resolve(base_dir, e.at("val").get<std::string>()),
                              resolve(base_dir, e.at("test").get<std::string>())});
      }
    }
    if (auto it = j.find("fixed_thresholds"); it != j.end()) {
      c.fixed_thresholds = it->get<std::map<std::string, double>>();
    }
    c.pool_tasks = j.value("pool_tasks", false);
    c.ensemble = parse_ensemble_spec(j.at("ensemble").dump());
    c.out_dir = resolve(base_dir, j.at("out_dir").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("config: ") + e.what());
  }

  std::set<std::string> known;
  for (Metric m : c.metrics) {
    if (!known.insert(std::string(to_string(m))).second) throw DataError("config: metric listed twice");
  }
  for (const auto& e : c.external) {
    if (!known.insert(e.scorer_id).second) throw DataError("config: duplicate scorer id '" + e.scorer_id + "'");
  }
  for (const auto& member : c.ensemble.members) {
    if (!known.count(member)) throw DataError("config: ensemble member '" + member + "' is neither a metric nor a score file");
  }
  return c;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  return parse_pipeline_config(text, path.has_parent_path() ? path.parent_path() : std::filesystem::path("."));
}

PipelineArtifacts run_pipeline(const PipelineConfig& config, unsigned jobs) {
  require_file(config.val);
  require_file(config.test);
  for (const auto& e : config.external) {
    require_file(e.val);
    require_file(e.test);
  }

  const Dataset val = stage("dataset", [&] { return load_dataset(config.val, config.track); });
  const Dataset test = stage("dataset", [&] { return load_dataset(config.test, config.track); });

  PipelineArtifacts out;
  const auto val_tables = build_tables(config, val, true, config.out_dir / "scores" / "val", jobs, out.score_files);
  const auto test_tables = build_tables(config, test, false, config.out_dir / "scores" / "test", jobs, out.score_files);

  CalibrationOptions options{config.fixed_thresholds, config.pool_tasks};
  const auto thresholds = stage("calibrate", [&] { return calibrate_all(val_tables, val, options); });
  out.thresholds = config.out_dir / "thresholds.json";
  write_thresholds(thresholds, out.thresholds);

  EnsembleSpec spec = config.ensemble;
  std::optional<MinVotesResult> selection;
  if (spec.strategy == Strategy::Voting && !spec.min_votes) {
    selection = stage("ensemble", [&] {
      std::vector<Label> golds;
      for (const auto& s : val.samples) golds.push_back(*s.gold);
      return select_min_votes(member_labels(val, val_tables, thresholds, spec.members), golds);
    });
    spec.min_votes = selection->min_votes;
  }
  out.spec = config.out_dir / "ensemble_spec.json";
  write_text_file(out.spec, ensemble_spec_to_json(spec));

  const auto predictions = stage("ensemble", [&] { return run_ensemble(test, test_tables, thresholds, spec); });
  out.predictions = config.out_dir / "predictions.jsonl";
  write_predictions(predictions, out.predictions);

  nlohmann::ordered_json report;
  report["track"] = std::string(to_string(config.track));
  report["strategy"] = spec.strategy == Strategy::Voting ? "voting" : "normalized_averaging";
  if (spec.min_votes) report["min_votes"] = *spec.min_votes;
  if (selection) report["min_votes_val_accuracy"] = selection->accuracy;

  if (test.fully_labeled()) {
    stage("evaluate", [&] {
      const std::string ensemble_name =
          spec.strategy == Strategy::Voting ? "Voting" : "Normalized averaging";
      std::vector<NamedReport> reports;
      const EvalReport ensemble_report = accuracy(predictions, test);
      reports.push_back({ensemble_name, ensemble_report});
      for (const auto& table : test_tables) {
        EnsembleSpec single{{table.scorer_id}, Strategy::Voting, 1, {}};
        reports.push_back({table.scorer_id, accuracy(run_ensemble(test, test_tables, thresholds, single), test)});
      }
      report["evaluated"] = true;
      report["ensemble"] = nlohmann::ordered_json::parse(eval_report_to_json(ensemble_report));
      report["methods"] = nlohmann::ordered_json::parse(ranking_to_json(compare_methods(reports)));
      return 0;
    });
  } else {
    report["evaluated"] = false;
    report["n"] = test.samples.size();
  }
  out.report = config.out_dir / "report.json";
  write_text_file(out.report, report.dump(2) + "\n");
  return out;
}

}  // namespace hallens
