#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "hallens/error.hpp"
#include "hallens/kernels.hpp"
#include "kernels_impl.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define HALLENS_HAVE_AVX2_KERNELS 1
#endif
#if defined(__aarch64__)
#define HALLENS_HAVE_NEON_KERNELS 1
#endif

namespace hallens::kernels {

namespace {

bool cpu_has(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2:
#ifdef HALLENS_HAVE_AVX2_KERNELS
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Isa::Neon:
#ifdef HALLENS_HAVE_NEON_KERNELS
      return true;
#else
      return false;
#endif
  }
  return false;
}

Isa detect() {
  if (const char* env = std::getenv("HALLENS_SIMD"); env && std::string(env) == "scalar") return Isa::Scalar;
  if (cpu_has(Isa::Avx2)) return Isa::Avx2;
  if (cpu_has(Isa::Neon)) return Isa::Neon;
  return Isa::Scalar;
}

std::atomic<int> g_forced{-1};

void require(Isa isa) {
  if (!cpu_has(isa)) throw UsageError("kernel variant '" + std::string(to_string(isa)) + "' unavailable");
}

template <typename Span>
void require_same_size(std::size_t a, const Span& b) {
  if (a != b.size()) throw UsageError("kernel span size mismatch");
}

}  // namespace

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "?";
}

std::vector<Isa> available_isas() {
  std::vector<Isa> out;
  for (Isa isa : {Isa::Scalar, Isa::Avx2, Isa::Neon}) {
    if (cpu_has(isa)) out.push_back(isa);
  }
  return out;
}

Isa active_isa() {
  const int forced = g_forced.load(std::memory_order_relaxed);
  if (forced >= 0) return static_cast<Isa>(forced);
  static const Isa detected = detect();
  return detected;
}

void force_isa(Isa isa) {
  require(isa);
  g_forced.store(static_cast<int>(isa), std::memory_order_relaxed);
}

void normalize_scores(Isa isa, std::span<const double> p, double thr, std::span<double> out) {
  require_same_size(p.size(), out);
  if (!(thr > 0.0 && thr < 1.0)) throw UsageError("normalization threshold must lie in (0,1)");
  switch (isa) {
#ifdef HALLENS_HAVE_AVX2_KERNELS
    case Isa::Avx2: require(isa); return impl::avx2::normalize(p.data(), p.size(), thr, out.data());
#endif
#ifdef HALLENS_HAVE_NEON_KERNELS
    case Isa::Neon: return impl::neon::normalize(p.data(), p.size(), thr, out.data());
#endif
    case Isa::Scalar: return impl::scalar::normalize(p.data(), p.size(), thr, out.data());
    default: require(isa);
  }
}

void accumulate_votes(Isa isa, std::span<const double> scores, double thr, std::span<std::int32_t> votes) {
  require_same_size(scores.size(), votes);
  switch (isa) {
#ifdef HALLENS_HAVE_AVX2_KERNELS
    case Isa::Avx2: require(isa); return impl::avx2::votes(scores.data(), scores.size(), thr, votes.data());
#endif
#ifdef HALLENS_HAVE_NEON_KERNELS
    case Isa::Neon: return impl::neon::votes(scores.data(), scores.size(), thr, votes.data());
#endif
    case Isa::Scalar: return impl::scalar::votes(scores.data(), scores.size(), thr, votes.data());
    default: require(isa);
  }
}

void accumulate_sum(Isa isa, std::span<const double> x, std::span<double> acc) {
  require_same_size(x.size(), acc);
  switch (isa) {
#ifdef HALLENS_HAVE_AVX2_KERNELS
    case Isa::Avx2: require(isa); return impl::avx2::sum(x.data(), x.size(), acc.data());
#endif
#ifdef HALLENS_HAVE_NEON_KERNELS
    case Isa::Neon: return impl::neon::sum(x.data(), x.size(), acc.data());
#endif
    case Isa::Scalar: return impl::scalar::sum(x.data(), x.size(), acc.data());
    default: require(isa);
  }
}

void normalize_scores(std::span<const double> p, double thr, std::span<double> out) {
  normalize_scores(active_isa(), p, thr, out);
}

void accumulate_votes(std::span<const double> scores, double thr, std::span<std::int32_t> votes) {
  accumulate_votes(active_isa(), scores, thr, votes);
}

void accumulate_sum(std::span<const double> x, std::span<double> acc) {
  accumulate_sum(active_isa(), x, acc);
}

}  // namespace hallens::kernels
