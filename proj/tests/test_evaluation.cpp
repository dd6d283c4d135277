#include <gtest/gtest.h>

#include <random>

#include "hallens/error.hpp"
#include "hallens/evaluation.hpp"
#include "test_util.hpp"

namespace hallens {
namespace {

constexpr Label H = Label::Hallucination;
constexpr Label NH = Label::NotHallucination;

Label flip(Label l) { return l == H ? NH : H; }

Dataset labeled(int n, std::mt19937& rng) {
  Dataset ds;
  for (int i = 0; i < n; ++i) {
    ds.samples.push_back(testing::make_sample("s" + std::to_string(i), kAllTasks[rng() % 3], "s", "t", "h",
                                              rng() % 2 ? H : NH));
  }
  return ds;
}

std::vector<Prediction> gold_predictions(const Dataset& ds) {
  std::vector<Prediction> out;
  for (const auto& s : ds.samples) out.push_back({s.id, *s.gold, *s.gold == NH ? 1.0 : 0.0});
  return out;
}

TEST(Accuracy, PerfectFlippedAndCounted) {
  std::mt19937 rng(1);
  const Dataset ds = labeled(10, rng);
  auto preds = gold_predictions(ds);
  const auto perfect = accuracy(preds, ds);
  EXPECT_EQ(perfect.overall_accuracy(), 1.0);
  for (const auto& [task, cell] : perfect.per_task) EXPECT_EQ(cell.accuracy(), 1.0);

  for (auto& p : preds) p.label = flip(p.label);
  EXPECT_EQ(accuracy(preds, ds).overall_accuracy(), 0.0);

  for (int i = 0; i < 7; ++i) preds[i].label = flip(preds[i].label);
  const auto seven = accuracy(preds, ds);
  EXPECT_EQ(seven.overall.correct, 7u);
  EXPECT_DOUBLE_EQ(seven.overall_accuracy(), 0.7);
}

TEST(Accuracy, WeightedTaskMeanEqualsOverallAndOrderInvariant) {
  std::mt19937 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const Dataset ds = labeled(1 + static_cast<int>(rng() % 40), rng);
    auto preds = gold_predictions(ds);
    for (auto& p : preds) {
      if (rng() % 3 == 0) p.label = flip(p.label);
    }
    const auto report = accuracy(preds, ds);
    std::size_t n = 0, correct = 0;
    for (const auto& [task, cell] : report.per_task) {
      n += cell.n;
      correct += cell.correct;
    }
    ASSERT_EQ(n, report.overall.n);
    ASSERT_EQ(correct, report.overall.correct);
    std::shuffle(preds.begin(), preds.end(), rng);
    const auto again = accuracy(preds, ds);
    ASSERT_EQ(again.overall.correct, report.overall.correct);
  }
}

TEST(Accuracy, IdMismatchListsSymmetricDifference) {
  std::mt19937 rng(3);
  const Dataset ds = labeled(3, rng);
  auto preds = gold_predictions(ds);
  preds[1].sample_id = "ghost";
  try {
    accuracy(preds, ds);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("s1"), std::string::npos);
    EXPECT_NE(msg.find("ghost"), std::string::npos);
  }
  Dataset unlabeled = ds;
  unlabeled.samples[0].gold.reset();
  EXPECT_THROW(accuracy(gold_predictions(ds), unlabeled), DataError);
}

EvalReport report_with(double acc, Track track) {
  EvalReport r;
  r.track = track;
  r.overall.n = 100;
  r.overall.correct = static_cast<std::size_t>(acc * 100 + 0.5);
  return r;
}

TEST(CompareMethods, OrderingAndTies) {
  std::vector<NamedReport> two{{"B", report_with(0.80, Track::ModelAgnostic)},
                               {"A", report_with(0.82, Track::ModelAgnostic)}};
  auto rows = compare_methods(two);
  EXPECT_EQ(rows[0].method, "A");
  EXPECT_EQ(rows[1].method, "B");

  std::vector<NamedReport> tie{{"zeta", report_with(0.80, Track::ModelAgnostic)},
                               {"alpha", report_with(0.80, Track::ModelAgnostic)}};
  rows = compare_methods(tie);
  EXPECT_EQ(rows[0].method, "alpha");
}

TEST(CompareMethods, BothTracksShareOneRow) {
  const std::vector<NamedReport> reports{
      {"MIS + PAWS", report_with(0.81, Track::ModelAgnostic)}, {"Voting", report_with(0.82, Track::ModelAgnostic)},
      {"Voting", report_with(0.78, Track::ModelAware)},        {"MIS + PAWS", report_with(0.79, Track::ModelAware)},
      {"BLEU", report_with(0.64, Track::ModelAgnostic)},       {"BLEU", report_with(0.65, Track::ModelAware)}};
  const auto rows = compare_methods(reports);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].method, "Voting");
  EXPECT_DOUBLE_EQ(*rows[0].agnostic, 0.82);
  EXPECT_DOUBLE_EQ(*rows[0].aware, 0.78);
  EXPECT_EQ(rows[1].method, "MIS + PAWS");
  EXPECT_EQ(rows[2].method, "BLEU");
  const std::string text = ranking_to_text(rows);
  EXPECT_LT(text.find("Voting"), text.find("MIS + PAWS"));
  EXPECT_EQ(ranking_to_csv(rows).substr(0, 21), "method,agnostic,aware");
}

TEST(RankCorrelation, MonotoneAndDegenerate) {
  Dataset ds;
  std::vector<Prediction> preds;
  for (int i = 0; i < 5; ++i) {
    auto s = testing::make_sample("s" + std::to_string(i), Task::MachineTranslation, "s", "t", "h");
    s.p_hallucination = 0.1 * i;
    ds.samples.push_back(s);
    preds.push_back({s.id, H, 1.0 - 0.2 * i});
  }
  EXPECT_NEAR(*rank_correlation(preds, ds), 1.0, 1e-12);
  for (auto& p : preds) p.aggregate = 0.5;
  EXPECT_FALSE(rank_correlation(preds, ds).has_value());
}

}  // namespace
}  // namespace hallens
