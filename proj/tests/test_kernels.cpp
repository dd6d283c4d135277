#include <gtest/gtest.h>

#include <cstring>
#include <random>

#include "hallens/error.hpp"
#include "hallens/kernels.hpp"
#include "oracles.hpp"

namespace hallens::kernels {
namespace {

bool bit_equal(double a, double b) { return std::memcmp(&a, &b, sizeof(double)) == 0; }

std::vector<double> random_unit(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

TEST(Kernels, ScalarAlwaysAvailable) {
  const auto isas = available_isas();
  ASSERT_FALSE(isas.empty());
  EXPECT_EQ(isas.front(), Isa::Scalar);
}

TEST(Kernels, ScalarNormalizeMatchesClosedForm) {
  std::mt19937_64 rng(1);
  const auto p = random_unit(rng, 257);
  std::vector<double> out(p.size());
  for (double thr : {0.01, 0.3, 0.5, 0.75, 0.99}) {
    normalize_scores(Isa::Scalar, p, thr, out);
    for (std::size_t i = 0; i < p.size(); ++i) ASSERT_NEAR(out[i], oracle::normalize_closed_form(p[i], thr), 1e-15);
  }
}

// Every available vector variant must agree bit-for-bit with scalar,
// including on lengths that leave a scalar tail.
TEST(Kernels, VariantsMatchScalarExactly) {
  std::mt19937_64 rng(42);
  for (Isa isa : available_isas()) {
    if (isa == Isa::Scalar) continue;
    for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 7u, 8u, 31u, 64u, 1001u}) {
      auto p = random_unit(rng, n);
      if (n > 2) p[1] = 0.5;  // exactly on the boundary
      for (double thr : {0.5, 0.123, 0.9}) {
        std::vector<double> ref(n), got(n);
        normalize_scores(Isa::Scalar, p, thr, ref);
        normalize_scores(isa, p, thr, got);
        for (std::size_t i = 0; i < n; ++i) ASSERT_TRUE(bit_equal(ref[i], got[i])) << to_string(isa) << " n=" << n;

        std::vector<std::int32_t> vref(n, 2), vgot(n, 2);
        accumulate_votes(Isa::Scalar, p, thr, vref);
        accumulate_votes(isa, p, thr, vgot);
        ASSERT_EQ(vref, vgot) << to_string(isa) << " n=" << n;

        std::vector<double> sref = random_unit(rng, n), sgot = sref;
        accumulate_sum(Isa::Scalar, p, sref);
        accumulate_sum(isa, p, sgot);
        for (std::size_t i = 0; i < n; ++i) ASSERT_TRUE(bit_equal(sref[i], sgot[i]));
      }
    }
  }
}

TEST(Kernels, VotesCountInclusiveBoundary) {
  const std::vector<double> s{0.1, 0.5, 0.7, 0.5, 0.49, 0.51, 1.0, -3.0, 0.5};
  for (Isa isa : available_isas()) {
    std::vector<std::int32_t> votes(s.size(), 0);
    accumulate_votes(isa, s, 0.5, votes);
    EXPECT_EQ(votes, (std::vector<std::int32_t>{0, 1, 1, 1, 0, 1, 1, 0, 1})) << to_string(isa);
  }
}

TEST(Kernels, ArgumentChecks) {
  std::vector<double> p(4, 0.5), out(3);
  EXPECT_THROW(normalize_scores(Isa::Scalar, p, 0.5, out), UsageError);
  out.resize(4);
  EXPECT_THROW(normalize_scores(Isa::Scalar, p, 0.0, out), UsageError);
  EXPECT_THROW(normalize_scores(Isa::Scalar, p, 1.0, out), UsageError);
}

TEST(Kernels, ForceScalar) {
  const Isa before = active_isa();
  force_isa(Isa::Scalar);
  EXPECT_EQ(active_isa(), Isa::Scalar);
  force_isa(before);
  EXPECT_EQ(active_isa(), before);
}

}  // namespace
}  // namespace hallens::kernels
