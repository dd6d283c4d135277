#include <immintrin.h>

#include "kernels_impl.hpp"

namespace hallens::kernels::impl::avx2 {

void normalize(const double* p, std::size_t n, double thr, double* out) {
  const auto c = normalize_coeffs(thr);
  const __m256d vk = _mm256_set1_pd(c.k);
  const __m256d vb = _mm256_set1_pd(c.b);
  const __m256d vtwice = _mm256_set1_pd(c.twice_thr);
  const __m256d vthr = _mm256_set1_pd(thr);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x = _mm256_loadu_pd(p + i);
    const __m256d hi = _mm256_add_pd(_mm256_mul_pd(vk, x), vb);
    const __m256d lo = _mm256_div_pd(x, vtwice);
    const __m256d ge = _mm256_cmp_pd(x, vthr, _CMP_GE_OQ);
    _mm256_storeu_pd(out + i, _mm256_blendv_pd(lo, hi, ge));
  }
  scalar::normalize(p + i, n - i, thr, out + i);
}

void votes(const double* s, std::size_t n, double thr, std::int32_t* votes) {
  const __m256d vthr = _mm256_set1_pd(thr);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d ge = _mm256_cmp_pd(_mm256_loadu_pd(s + i), vthr, _CMP_GE_OQ);
    // Each 64-bit lane is all-ones or zero; keep the low 32 bits of each lane.
    const __m256i lanes = _mm256_castpd_si256(ge);
    const __m256i packed = _mm256_permutevar8x32_epi32(lanes, _mm256_setr_epi32(0, 2, 4, 6, 0, 2, 4, 6));
    const __m128i mask = _mm256_castsi256_si128(packed);
    __m128i acc = _mm_loadu_si128(reinterpret_cast<const __m128i*>(votes + i));
    acc = _mm_sub_epi32(acc, mask);  // mask lanes are -1 where score >= thr
    _mm_storeu_si128(reinterpret_cast<__m128i*>(votes + i), acc);
  }
  scalar::votes(s + i, n - i, thr, votes + i);
}

void sum(const double* x, std::size_t n, double* acc) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(acc + i, _mm256_add_pd(_mm256_loadu_pd(acc + i), _mm256_loadu_pd(x + i)));
  }
  scalar::sum(x + i, n - i, acc + i);
}

}  // namespace hallens::kernels::impl::avx2
