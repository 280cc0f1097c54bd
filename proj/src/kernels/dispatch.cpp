#include <atomic>

#include "qnlab/kernels.hpp"

namespace qnlab::kernels {

namespace {

Isa probe() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return Isa::avx2;
#endif
  return Isa::scalar;
}

std::atomic<Isa>& selected() {
  static std::atomic<Isa> isa{probe()};
  return isa;
}

}  // namespace

Isa detect_isa() {
  static const Isa isa = probe();
  return isa;
}

Isa active_isa() { return selected().load(std::memory_order_relaxed); }

Isa set_isa(Isa isa) {
  if (isa == Isa::avx2 && detect_isa() != Isa::avx2) isa = Isa::scalar;
  selected().store(isa, std::memory_order_relaxed);
  return isa;
}

const char* isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

double dot(const double* a, const double* b, std::size_t n) {
  return active_isa() == Isa::avx2 ? avx2::dot(a, b, n) : scalar::dot(a, b, n);
}

void symv(const double* m, const double* x, double* y, std::size_t n) {
  if (active_isa() == Isa::avx2)
    avx2::symv(m, x, y, n);
  else
    scalar::symv(m, x, y, n);
}

void sym_rank2(double* m, const double* u, const double* v, double a, double b,
               double c, std::size_t n) {
  if (active_isa() == Isa::avx2)
    avx2::sym_rank2(m, u, v, a, b, c, n);
  else
    scalar::sym_rank2(m, u, v, a, b, c, n);
}

}  // namespace qnlab::kernels
