// <cmath> is deliberately not included: the declarations below carry the
// simd attribute that lets the compiler call libmvec's vector variants.
#include "vector_math.hpp"

extern "C" {
__attribute__((simd("notinbranch"))) double sin(double) noexcept;
__attribute__((simd("notinbranch"))) double cos(double) noexcept;
}

namespace holonet::vmath {

void sine(const double* x, double* y, std::size_t n, double scale, double offset) {
#pragma omp simd
    for (std::size_t i = 0; i < n; ++i) y[i] = scale * sin(x[i]) + offset;
}

void sine_backward(const double* x, const double* up, double* g, std::size_t n, double scale) {
#pragma omp simd
    for (std::size_t i = 0; i < n; ++i) g[i] += up[i] * scale * cos(x[i]);
}

}  // namespace holonet::vmath
