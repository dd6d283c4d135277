#pragma once

// Batch arithmetic used by the ensemble path. Each kernel has a scalar
// reference implementation and, where the target supports it, an AVX2 or
// NEON variant. Variants produce bit-identical results: they perform the
// same IEEE operations in the same order per element (no FMA contraction).

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace hallens::kernels {

enum class Isa { Scalar, Avx2, Neon };

std::string_view to_string(Isa isa);

// Variants compiled into this binary and supported by the running CPU.
std::vector<Isa> available_isas();

// Best available variant, unless HALLENS_SIMD=scalar is set in the
// environment or force_isa() was called.
Isa active_isa();
void force_isa(Isa isa);

/// out[i] = p[i] >= thr ? k*p[i] + b : p[i] / (2*thr),
/// with k = 1/(2(1-thr)) and b = 1-k. Requires 0 < thr < 1.
void normalize_scores(std::span<const double> p, double thr, std::span<double> out);

// votes[i] += (scores[i] >= thr)
void accumulate_votes(std::span<const double> scores, double thr, std::span<std::int32_t> votes);

// acc[i] += x[i]
void accumulate_sum(std::span<const double> x, std::span<double> acc);

// Explicit-variant entry points, used by equivalence tests.
void normalize_scores(Isa isa, std::span<const double> p, double thr, std::span<double> out);
void accumulate_votes(Isa isa, std::span<const double> scores, double thr, std::span<std::int32_t> votes);
void accumulate_sum(Isa isa, std::span<const double> x, std::span<double> acc);

}  // namespace hallens::kernels
