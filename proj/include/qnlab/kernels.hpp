#pragma once

#include <cstddef>

namespace qnlab::kernels {

enum class Isa { scalar, avx2 };

// Best instruction set supported by the running CPU.
Isa detect_isa();

// Instruction set used by the dispatching entry points below.
Isa active_isa();

// Force a particular instruction set. Requesting avx2 on a CPU without it
// falls back to scalar. Returns the instruction set actually selected.
Isa set_isa(Isa isa);

const char* isa_name(Isa isa);

// sum_i a[i] * b[i]
double dot(const double* a, const double* b, std::size_t n);

// y = M x for a symmetric column-major n x n matrix M.
void symv(const double* m, const double* x, double* y, std::size_t n);

// Symmetric rank-2 update of a column-major n x n matrix:
//   M += a (u v' + v u') + b u u' + c v v'
// The upper triangle is computed and mirrored, so M stays exactly symmetric.
void sym_rank2(double* m, const double* u, const double* v, double a, double b,
               double c, std::size_t n);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void symv(const double* m, const double* x, double* y, std::size_t n);
void sym_rank2(double* m, const double* u, const double* v, double a, double b,
               double c, std::size_t n);
}  // namespace scalar

namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void symv(const double* m, const double* x, double* y, std::size_t n);
void sym_rank2(double* m, const double* u, const double* v, double a, double b,
               double c, std::size_t n);
}  // namespace avx2

}  // namespace qnlab::kernels
