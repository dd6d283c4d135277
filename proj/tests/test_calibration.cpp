#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hallens/calibration.hpp"
#include "hallens/error.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace hallens {
namespace {

constexpr Label H = Label::Hallucination;
constexpr Label NH = Label::NotHallucination;

TEST(Classify, InclusiveBoundary) {
  EXPECT_EQ(classify(0.9, 0.5), NH);
  EXPECT_EQ(classify(0.5, 0.5), NH);
  EXPECT_EQ(classify(0.49, 0.5), H);
}

TEST(Classify, MonotoneInScore) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  for (int i = 0; i < 2000; ++i) {
    const double a = d(rng), b = d(rng), t = d(rng);
    const double lo = std::min(a, b), hi = std::max(a, b);
    if (classify(lo, t) == NH) {
      ASSERT_EQ(classify(hi, t), NH);
    }
  }
}

TEST(Sweep, SeparablePair) {
  const std::vector<double> s{0.1, 0.9};
  const std::vector<Label> g{H, NH};
  const auto r = sweep_threshold(s, g);
  EXPECT_DOUBLE_EQ(r.threshold, 0.5);
  EXPECT_DOUBLE_EQ(r.accuracy, 1.0);
  EXPECT_FALSE(r.single_class);
}

TEST(Sweep, IndistinguishableScores) {
  const std::vector<double> s{0.3, 0.3};
  const std::vector<Label> g{H, NH};
  const auto r = sweep_threshold(s, g);
  EXPECT_DOUBLE_EQ(r.accuracy, 0.5);
  // Ties go to the smallest candidate.
  EXPECT_DOUBLE_EQ(r.threshold, 0.3 - 1.0);
}

TEST(Sweep, SingleClassIsFlagged) {
  const std::vector<double> s{0.2, 0.4, 0.6};
  const auto all_h = sweep_threshold(s, std::vector<Label>{H, H, H});
  EXPECT_TRUE(all_h.single_class);
  EXPECT_DOUBLE_EQ(all_h.accuracy, 1.0);
  EXPECT_GT(all_h.threshold, 0.6);
  const auto all_nh = sweep_threshold(s, std::vector<Label>{NH, NH, NH});
  EXPECT_TRUE(all_nh.single_class);
  EXPECT_DOUBLE_EQ(all_nh.accuracy, 1.0);
  EXPECT_LT(all_nh.threshold, 0.2);
}

TEST(Sweep, Errors) {
  EXPECT_THROW(sweep_threshold(std::vector<double>{}, std::vector<Label>{}), UsageError);
  EXPECT_THROW(sweep_threshold(std::vector<double>{0.1}, std::vector<Label>{H, NH}), UsageError);
  EXPECT_THROW(sweep_threshold(std::vector<double>{NAN}, std::vector<Label>{H}), DataError);
}

TEST(Sweep, MatchesBruteForceOracle) {
  std::mt19937 rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng() % 50;
    std::vector<double> s(n);
    std::vector<Label> g(n);
    for (std::size_t i = 0; i < n; ++i) {
      // Coarse grid so that ties occur.
      s[i] = static_cast<double>(rng() % 20) / 20.0;
      g[i] = rng() % 2 ? H : NH;
    }
    const auto r = sweep_threshold(s, g);
    const auto o = oracle::brute_force_sweep(s, g);
    ASSERT_EQ(r.correct, o.correct) << "trial " << trial;
    ASSERT_DOUBLE_EQ(r.threshold, o.threshold) << "trial " << trial;
  }
}

TEST(Sweep, BeatsRandomThresholds) {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> s(200);
  std::vector<Label> g(200);
  for (std::size_t i = 0; i < s.size(); ++i) {
    g[i] = u(rng) < 0.5 ? H : NH;
    s[i] = std::clamp(u(rng) * 0.6 + (g[i] == NH ? 0.3 : 0.0), 0.0, 1.0);
  }
  const auto r = sweep_threshold(s, g);
  for (int k = 0; k < 1000; ++k) {
    const double t = u(rng) * 1.4 - 0.2;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < s.size(); ++i) correct += classify(s[i], t) == g[i];
    ASSERT_LE(correct, r.correct);
  }
}

TEST(Sweep, InvariantUnderIncreasingTransform) {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng() % 60;
    std::vector<double> s(n), t(n);
    std::vector<Label> g(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = std::round(u(rng) * 30.0) / 30.0;
      t[i] = std::exp(3.0 * s[i]) + s[i] * s[i] * s[i];
      g[i] = u(rng) < 0.5 ? H : NH;
    }
    const auto a = sweep_threshold(s, g);
    const auto b = sweep_threshold(t, g);
    ASSERT_EQ(a.correct, b.correct);
    // Same partition of samples on both scales.
    for (std::size_t i = 0; i < n; ++i) ASSERT_EQ(classify(s[i], a.threshold), classify(t[i], b.threshold));
  }
}

TEST(Sweep, AdjacentDoublesStillSeparate) {
  const double a = 0.5;
  const double b = std::nextafter(a, 1.0);
  const auto r = sweep_threshold(std::vector<double>{a, b}, std::vector<Label>{H, NH});
  EXPECT_EQ(r.correct, 2u);
  EXPECT_EQ(classify(a, r.threshold), H);
  EXPECT_EQ(classify(b, r.threshold), NH);
}

TEST(CandidateThresholds, Grid) {
  const auto c = candidate_thresholds(std::vector<double>{0.4, 0.2, 0.4, 0.8});
  ASSERT_EQ(c.size(), 4u);
  EXPECT_DOUBLE_EQ(c[0], -0.8);
  EXPECT_DOUBLE_EQ(c[1], 0.30000000000000004);
  EXPECT_DOUBLE_EQ(c[2], 0.6000000000000001);
  EXPECT_DOUBLE_EQ(c[3], 1.8);
}

class CalibrateAll : public ::testing::Test {
 protected:
  void SetUp() override {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ds.track = Track::ModelAware;
    for (int i = 0; i < 60; ++i) {
      const Label gold = u(rng) < 0.5 ? H : NH;
      ds.samples.push_back(testing::make_sample("s" + std::to_string(i), kAllTasks[i % 3], "src", "tgt", "hyp", gold));
      a.scores[ds.samples.back().id] = u(rng) + (gold == NH ? 0.3 : 0.0);
      b.scores[ds.samples.back().id] = u(rng);
    }
    a.scorer_id = "a";
    b.scorer_id = "vectara";
  }
  Dataset ds;
  ScoreTable a, b;
};

TEST_F(CalibrateAll, OneConfigPerScorerAndTask) {
  const std::vector<ScoreTable> tables{a, b};
  const auto configs = calibrate_all(tables, ds);
  ASSERT_EQ(configs.size(), 6u);
  EXPECT_EQ(configs[0].scorer_id, "a");
  EXPECT_EQ(configs[0].task, Task::DefinitionModeling);
  EXPECT_EQ(configs[5].scorer_id, "vectara");
  EXPECT_EQ(configs[5].task, Task::ParaphraseGeneration);
  for (const auto& c : configs) EXPECT_EQ(c.track, Track::ModelAware);
}

TEST_F(CalibrateAll, PerTaskConfigsEqualSubsetSweeps) {
  const std::vector<ScoreTable> tables{a};
  const auto configs = calibrate_all(tables, ds);
  for (const auto& cfg : configs) {
    std::vector<double> s;
    std::vector<Label> g;
    for (const auto& sample : ds.samples) {
      if (sample.task != cfg.task) continue;
      s.push_back(a.scores.at(sample.id));
      g.push_back(*sample.gold);
    }
    const auto o = oracle::brute_force_sweep(s, g);
    EXPECT_DOUBLE_EQ(cfg.threshold, o.threshold);
    EXPECT_DOUBLE_EQ(cfg.val_accuracy, static_cast<double>(o.correct) / static_cast<double>(s.size()));
  }
}

TEST_F(CalibrateAll, FixedThresholdBypassesSweep) {
  const std::vector<ScoreTable> tables{b};
  CalibrationOptions opt;
  opt.fixed_thresholds["vectara"] = 0.5;
  for (const auto& c : calibrate_all(tables, ds, opt)) {
    EXPECT_EQ(c.threshold, 0.5);
    EXPECT_TRUE(c.fixed);
  }
}

TEST_F(CalibrateAll, PooledSharesOneThreshold) {
  const std::vector<ScoreTable> tables{a};
  const auto configs = calibrate_all(tables, ds, CalibrationOptions{{}, true});
  ASSERT_EQ(configs.size(), 3u);
  EXPECT_EQ(configs[0].threshold, configs[1].threshold);
  EXPECT_EQ(configs[1].threshold, configs[2].threshold);
}

TEST_F(CalibrateAll, RejectsUnlabeled) {
  ds.samples[4].gold.reset();
  const std::vector<ScoreTable> tables{a};
  EXPECT_THROW(calibrate_all(tables, ds), DataError);
}

TEST(ThresholdJson, RoundTrip) {
  const std::vector<ThresholdConfig> cfgs{{"mis", Task::MachineTranslation, Track::ModelAware, 0.625, 0.8, false, false},
                                          {"vectara", Task::DefinitionModeling, Track::ModelAgnostic, 0.5, 0.7, true, true}};
  EXPECT_EQ(thresholds_from_json(thresholds_to_json(cfgs)), cfgs);
  EXPECT_THROW(thresholds_from_json(R"([{"scorer_id":"x","task":"ZZ","track":"aware","threshold":0,"val_accuracy":1}])"),
               DataError);
}

}  // namespace
}  // namespace hallens
