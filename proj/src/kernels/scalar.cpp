#include "kernels_impl.hpp"

namespace gllab::kernels::scalar {

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

void scale(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = alpha * x[i];
}

double dot(const double* x, const double* y, std::size_t n) {
  // Four interleaved partial sums, combined as (s0 + s1) + (s2 + s3), which
  // matches the lane layout of the AVX2 variant.
  double s[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s[0] = s[0] + x[i] * y[i];
    s[1] = s[1] + x[i + 1] * y[i + 1];
    s[2] = s[2] + x[i + 2] * y[i + 2];
    s[3] = s[3] + x[i + 3] * y[i + 3];
  }
  double total = (s[0] + s[1]) + (s[2] + s[3]);
  for (; i < n; ++i) total = total + x[i] * y[i];
  return total;
}

void flux_increments(const double* force, const double* noise, const double* control,
                     double drift, double noise_coef, double control_coef, double* dz,
                     std::size_t n) {
  if (n == 0) return;
  for (std::size_t i = 0; i < n; ++i) {
    const double prev = force[i == 0 ? n - 1 : i - 1];
    double v = drift * (prev - force[i]) + noise_coef * noise[i];
    if (control) v = v + control_coef * control[i];
    dz[i] = v;
  }
}

void apply_flux_difference(const double* dz, double* x, std::size_t n) {
  if (n == 0) return;
  for (std::size_t i = 0; i < n; ++i) {
    const double next = dz[i + 1 == n ? 0 : i + 1];
    x[i] = x[i] + (dz[i] - next);
  }
}

void conservative_update(const double* m, const double* hprime, const double* u, double diffusion,
                         double advection, FaceRule rule, double* out, std::size_t n) {
  if (n == 0) return;
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t jm = j == 0 ? n - 1 : j - 1;
    const std::size_t jp = j + 1 == n ? 0 : j + 1;
    const double lap = (hprime[jp] - 2.0 * hprime[j]) + hprime[jm];
    double v = m[j] + diffusion * lap;
    if (u) v = v - advection * detail::face_difference(u, jm, j, jp, rule);
    out[j] = v;
  }
}

}  // namespace gllab::kernels::scalar
