#pragma once

#include <cstddef>
#include <cstdint>

namespace hallens::kernels::impl {

struct NormalizeCoeffs {
  double k;
  double b;
  double twice_thr;
};

inline NormalizeCoeffs normalize_coeffs(double thr) {
  const double k = 1.0 / (2.0 * (1.0 - thr));
  return {k, 1.0 - k, 2.0 * thr};
}

namespace scalar {
void normalize(const double* p, std::size_t n, double thr, double* out);
void votes(const double* s, std::size_t n, double thr, std::int32_t* votes);
void sum(const double* x, std::size_t n, double* acc);
}  // namespace scalar

namespace avx2 {
void normalize(const double* p, std::size_t n, double thr, double* out);
void votes(const double* s, std::size_t n, double thr, std::int32_t* votes);
void sum(const double* x, std::size_t n, double* acc);
}  // namespace avx2

namespace neon {
void normalize(const double* p, std::size_t n, double thr, double* out);
void votes(const double* s, std::size_t n, double thr, std::int32_t* votes);
void sum(const double* x, std::size_t n, double* acc);
}  // namespace neon

}  // namespace hallens::kernels::impl
