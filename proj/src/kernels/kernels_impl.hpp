#pragma once

#include <cstddef>

#include "gllab/kernels.hpp"

namespace gllab::kernels {

namespace detail {
// U_{j+1/2} - U_{j-1/2} evaluated in a fixed order shared by all variants.
inline double face_difference(const double* u, std::size_t jm, std::size_t j, std::size_t jp,
                              FaceRule rule) {
  if (rule == FaceRule::left) return u[j] - u[jm];
  return 0.5 * (u[j] + u[jp]) - 0.5 * (u[jm] + u[j]);
}
}  // namespace detail

namespace scalar {
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double alpha, const double* x, double* y, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
void flux_increments(const double* force, const double* noise, const double* control,
                     double drift, double noise_coef, double control_coef, double* dz,
                     std::size_t n);
void apply_flux_difference(const double* dz, double* x, std::size_t n);
void conservative_update(const double* m, const double* hprime, const double* u, double diffusion,
                         double advection, FaceRule rule, double* out, std::size_t n);
}  // namespace scalar

#ifdef GLLAB_HAVE_AVX2
namespace avx2 {
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double alpha, const double* x, double* y, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
void flux_increments(const double* force, const double* noise, const double* control,
                     double drift, double noise_coef, double control_coef, double* dz,
                     std::size_t n);
void apply_flux_difference(const double* dz, double* x, std::size_t n);
void conservative_update(const double* m, const double* hprime, const double* u, double diffusion,
                         double advection, FaceRule rule, double* out, std::size_t n);
}  // namespace avx2
#endif

}  // namespace gllab::kernels
