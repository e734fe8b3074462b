// Compiled with -mavx2 only; reached through the runtime dispatch in
// dispatch.cpp after a CPU feature check.

#include <immintrin.h>

#include "kernels_impl.hpp"

namespace gllab::kernels::avx2 {

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d a = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d prod = _mm256_mul_pd(a, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

void scale(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d a = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(y + i, _mm256_mul_pd(a, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) y[i] = alpha * x[i];
}

double dot(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double total = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) total = total + x[i] * y[i];
  return total;
}

void flux_increments(const double* force, const double* noise, const double* control,
                     double drift, double noise_coef, double control_coef, double* dz,
                     std::size_t n) {
  if (n == 0) return;
  auto one = [&](std::size_t i) {
    const double prev = force[i == 0 ? n - 1 : i - 1];
    double v = drift * (prev - force[i]) + noise_coef * noise[i];
    if (control) v = v + control_coef * control[i];
    dz[i] = v;
  };
  one(0);
  const __m256d d = _mm256_set1_pd(drift);
  const __m256d nc = _mm256_set1_pd(noise_coef);
  const __m256d cc = _mm256_set1_pd(control_coef);
  std::size_t i = 1;
  for (; i + 4 <= n; i += 4) {
    const __m256d grad = _mm256_sub_pd(_mm256_loadu_pd(force + i - 1), _mm256_loadu_pd(force + i));
    __m256d v = _mm256_add_pd(_mm256_mul_pd(d, grad), _mm256_mul_pd(nc, _mm256_loadu_pd(noise + i)));
    if (control) v = _mm256_add_pd(v, _mm256_mul_pd(cc, _mm256_loadu_pd(control + i)));
    _mm256_storeu_pd(dz + i, v);
  }
  for (; i < n; ++i) one(i);
}

void apply_flux_difference(const double* dz, double* x, std::size_t n) {
  if (n == 0) return;
  std::size_t i = 0;
  for (; i + 4 < n; i += 4) {
    const __m256d diff = _mm256_sub_pd(_mm256_loadu_pd(dz + i), _mm256_loadu_pd(dz + i + 1));
    _mm256_storeu_pd(x + i, _mm256_add_pd(_mm256_loadu_pd(x + i), diff));
  }
  for (; i < n; ++i) {
    const double next = dz[i + 1 == n ? 0 : i + 1];
    x[i] = x[i] + (dz[i] - next);
  }
}

void conservative_update(const double* m, const double* hprime, const double* u, double diffusion,
                         double advection, FaceRule rule, double* out, std::size_t n) {
  if (n == 0) return;
  auto one = [&](std::size_t j) {
    const std::size_t jm = j == 0 ? n - 1 : j - 1;
    const std::size_t jp = j + 1 == n ? 0 : j + 1;
    const double lap = (hprime[jp] - 2.0 * hprime[j]) + hprime[jm];
    double v = m[j] + diffusion * lap;
    if (u) v = v - advection * detail::face_difference(u, jm, j, jp, rule);
    out[j] = v;
  };
  one(0);
  const __m256d two = _mm256_set1_pd(2.0);
  const __m256d half = _mm256_set1_pd(0.5);
  const __m256d diff = _mm256_set1_pd(diffusion);
  const __m256d adv = _mm256_set1_pd(advection);
  std::size_t j = 1;
  for (; j + 4 < n; j += 4) {
    const __m256d hm = _mm256_loadu_pd(hprime + j - 1);
    const __m256d h0 = _mm256_loadu_pd(hprime + j);
    const __m256d hp = _mm256_loadu_pd(hprime + j + 1);
    const __m256d lap = _mm256_add_pd(_mm256_sub_pd(hp, _mm256_mul_pd(two, h0)), hm);
    __m256d v = _mm256_add_pd(_mm256_loadu_pd(m + j), _mm256_mul_pd(diff, lap));
    if (u) {
      const __m256d um = _mm256_loadu_pd(u + j - 1);
      const __m256d u0 = _mm256_loadu_pd(u + j);
      __m256d fd;
      if (rule == FaceRule::left) {
        fd = _mm256_sub_pd(u0, um);
      } else {
        const __m256d up = _mm256_loadu_pd(u + j + 1);
        fd = _mm256_sub_pd(_mm256_mul_pd(half, _mm256_add_pd(u0, up)),
                           _mm256_mul_pd(half, _mm256_add_pd(um, u0)));
      }
      v = _mm256_sub_pd(v, _mm256_mul_pd(adv, fd));
    }
    _mm256_storeu_pd(out + j, v);
  }
  for (; j < n; ++j) one(j);
}

}  // namespace gllab::kernels::avx2
