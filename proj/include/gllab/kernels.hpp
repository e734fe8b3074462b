#pragma once

// Data-parallel inner loops. Every kernel has a scalar reference
// implementation; SIMD variants are selected once at runtime and must
// produce bit-identical results for the element-wise kernels. Reductions
// (dot) may differ from the scalar order by rounding only.

#include <cstddef>
#include <string_view>

namespace gllab::kernels {

enum class Isa { scalar, avx2 };

/// How the control flux at face j+1/2 is formed from node values.
enum class FaceRule {
  average,  ///< (u_j + u_{j+1}) / 2
  left,     ///< u_j, for piecewise-constant cell embeddings
};

struct KernelTable {
  Isa isa;

  /// y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  /// y = alpha * x
  void (*scale)(double alpha, const double* x, double* y, std::size_t n);
  double (*dot)(const double* x, const double* y, std::size_t n);

  /// Per-site Z increments on the periodic lattice:
  ///   dz_i = drift * (force_{i-1} - force_i) + noise_coef * noise_i + control_coef * control_i
  /// `control` may be null (uncontrolled dynamics).
  void (*flux_increments)(const double* force, const double* noise, const double* control,
                          double drift, double noise_coef, double control_coef, double* dz,
                          std::size_t n);

  /// x_i += dz_i - dz_{i+1} (periodic). The update telescopes, so the sum of x
  /// is unchanged up to rounding.
  void (*apply_flux_difference)(const double* dz, double* x, std::size_t n);

  /// One explicit conservative step of m_t = 1/2 [H(m)]_xx - u_x on a periodic grid:
  ///   out_j = m_j + diffusion * (H_{j+1} - 2 H_j + H_{j-1}) - advection * (U_{j+1/2} - U_{j-1/2})
  /// with face values U from `rule`. `u` may be null (no control).
  void (*conservative_update)(const double* m, const double* hprime, const double* u,
                              double diffusion, double advection, FaceRule rule, double* out,
                              std::size_t n);
};

const KernelTable& scalar_table();

/// Null when the AVX2 variant was not compiled in or the CPU lacks AVX2.
const KernelTable* avx2_table();

/// The table used by the library: the widest supported ISA unless
/// overridden by `force_isa` or the GLLAB_FORCE_SCALAR environment variable.
const KernelTable& active();

/// Returns false when `isa` is unavailable on this machine.
bool force_isa(Isa isa);

std::string_view isa_name(Isa isa);

}  // namespace gllab::kernels
