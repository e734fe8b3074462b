#include <atomic>
#include <cstdlib>

#include "kernels_impl.hpp"

namespace gllab::kernels {

namespace {

const KernelTable kScalar{Isa::scalar,           scalar::axpy,
                          scalar::scale,         scalar::dot,
                          scalar::flux_increments, scalar::apply_flux_difference,
                          scalar::conservative_update};

#ifdef GLLAB_HAVE_AVX2
const KernelTable kAvx2{Isa::avx2,           avx2::axpy,
                        avx2::scale,         avx2::dot,
                        avx2::flux_increments, avx2::apply_flux_difference,
                        avx2::conservative_update};
#endif

bool cpu_has_avx2() {
#if defined(GLLAB_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const KernelTable* select_default() {
  if (std::getenv("GLLAB_FORCE_SCALAR") == nullptr) {
    if (const KernelTable* t = avx2_table()) return t;
  }
  return &kScalar;
}

std::atomic<const KernelTable*>& active_slot() {
  static std::atomic<const KernelTable*> slot{select_default()};
  return slot;
}

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

const KernelTable* avx2_table() {
#ifdef GLLAB_HAVE_AVX2
  static const bool supported = cpu_has_avx2();
  return supported ? &kAvx2 : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() { return *active_slot().load(std::memory_order_acquire); }

bool force_isa(Isa isa) {
  const KernelTable* t = isa == Isa::scalar ? &kScalar : avx2_table();
  if (!t) return false;
  active_slot().store(t, std::memory_order_release);
  return true;
}

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

}  // namespace gllab::kernels
