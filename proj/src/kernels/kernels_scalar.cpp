#include "kernels_impl.hpp"

namespace hallens::kernels::impl::scalar {

void normalize(const double* p, std::size_t n, double thr, double* out) {
  const auto c = normalize_coeffs(thr);
  for (std::size_t i = 0; i < n; ++i) {
    const double hi = c.k * p[i];
    out[i] = p[i] >= thr ? hi + c.b : p[i] / c.twice_thr;
  }
}

void votes(const double* s, std::size_t n, double thr, std::int32_t* votes) {
  for (std::size_t i = 0; i < n; ++i) votes[i] += s[i] >= thr ? 1 : 0;
}

void sum(const double* x, std::size_t n, double* acc) {
  for (std::size_t i = 0; i < n; ++i) acc[i] += x[i];
}

}  // namespace hallens::kernels::impl::scalar
