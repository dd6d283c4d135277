#include <arm_neon.h>

#include "kernels_impl.hpp"

namespace hallens::kernels::impl::neon {

void normalize(const double* p, std::size_t n, double thr, double* out) {
  const auto c = normalize_coeffs(thr);
  const float64x2_t vk = vdupq_n_f64(c.k);
  const float64x2_t vb = vdupq_n_f64(c.b);
  const float64x2_t vtwice = vdupq_n_f64(c.twice_thr);
  const float64x2_t vthr = vdupq_n_f64(thr);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t x = vld1q_f64(p + i);
    const float64x2_t hi = vaddq_f64(vmulq_f64(vk, x), vb);
    const float64x2_t lo = vdivq_f64(x, vtwice);
    const uint64x2_t ge = vcgeq_f64(x, vthr);
    vst1q_f64(out + i, vbslq_f64(ge, hi, lo));
  }
  scalar::normalize(p + i, n - i, thr, out + i);
}

void votes(const double* s, std::size_t n, double thr, std::int32_t* votes) {
  const float64x2_t vthr = vdupq_n_f64(thr);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const uint64x2_t ge = vcgeq_f64(vld1q_f64(s + i), vthr);
    const int32x2_t mask = vmovn_s64(vreinterpretq_s64_u64(ge));
    vst1_s32(votes + i, vsub_s32(vld1_s32(votes + i), mask));
  }
  scalar::votes(s + i, n - i, thr, votes + i);
}

void sum(const double* x, std::size_t n, double* acc) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(acc + i, vaddq_f64(vld1q_f64(acc + i), vld1q_f64(x + i)));
  scalar::sum(x + i, n - i, acc + i);
}

}  // namespace hallens::kernels::impl::neon
