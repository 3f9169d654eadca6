#pragma once

#include <cstddef>

// Sine-family loops vectorized through glibc's libmvec. The results can
// differ from scalar std::sin in the last few ulps.
namespace holonet::vmath {

/// y = scale·sin(x) + offset
void sine(const double* x, double* y, std::size_t n, double scale, double offset);
/// g += up·scale·cos(x)
void sine_backward(const double* x, const double* up, double* g, std::size_t n, double scale);

}  // namespace holonet::vmath
