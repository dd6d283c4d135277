#pragma once

// Reference computations used only by tests. They follow the definitions
// directly and share no code path with the library implementations.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <vector>

#include "hallens/dataset.hpp"

namespace hallens::oracle {

struct BruteSweep {
  double threshold;
  std::size_t correct;
};

// Enumerates the full candidate grid and scores each candidate by direct
// classification of every sample.
inline BruteSweep brute_force_sweep(const std::vector<double>& scores, const std::vector<Label>& golds) {
  std::vector<double> v = scores;
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  std::vector<double> grid{v.front() - 1.0};
  for (std::size_t i = 0; i + 1 < v.size(); ++i) grid.push_back((v[i] + v[i + 1]) / 2.0);
  grid.push_back(v.back() + 1.0);

  BruteSweep best{grid.front(), 0};
  bool first = true;
  for (double t : grid) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      const Label predicted = scores[i] >= t ? Label::NotHallucination : Label::Hallucination;
      if (predicted == golds[i]) ++correct;
    }
    if (first || correct > best.correct) best = {t, correct};
    first = false;
  }
  return best;
}

// Truth-table vote: bit m of `faithful_mask` set means member m voted faithful.
inline Label truth_table_vote(std::uint32_t faithful_mask, int min_votes) {
  return std::popcount(faithful_mask) >= min_votes ? Label::NotHallucination : Label::Hallucination;
}

inline double normalize_closed_form(double p, double thr) {
  if (p >= thr) {
    const double k = 1.0 / (2.0 * (1.0 - thr));
    return k * p + (1.0 - k);
  }
  return p / (2.0 * thr);
}

}  // namespace hallens::oracle
