#pragma once

// Data-parallel kernels used by the autodiff engine. Every kernel has two
// implementations with the same contract:
//
//   kernels::parallel  OpenMP-parallel fast path used in training;
//   kernels::serial    plain loops kept as the reference for tests and the
//                      benchmark.
//
// The unqualified kernels::gemm etc. dispatch to the parallel path.

#include "holonet/activation.hpp"
#include "holonet/matrix.hpp"

#include <span>

namespace holonet::kernels {

enum class Transpose { No, Yes };

namespace serial {

/// c = op(a)·op(b), or c += op(a)·op(b) when accumulate is set.
void gemm(Transpose ta, Transpose tb, const Matrix& a, const Matrix& b, Matrix& c,
          bool accumulate);
void activation_forward(ActivationKind kind, std::span<const double> x, std::span<double> y);
/// grad_x += upstream ⊙ f'(x)
void activation_backward(ActivationKind kind, std::span<const double> x,
                         std::span<const double> upstream, std::span<double> grad_x);
/// y += alpha·x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

}  // namespace serial

namespace parallel {

void gemm(Transpose ta, Transpose tb, const Matrix& a, const Matrix& b, Matrix& c,
          bool accumulate);
void activation_forward(ActivationKind kind, std::span<const double> x, std::span<double> y);
void activation_backward(ActivationKind kind, std::span<const double> x,
                         std::span<const double> upstream, std::span<double> grad_x);
void axpy(double alpha, std::span<const double> x, std::span<double> y);

}  // namespace parallel

using parallel::activation_backward;
using parallel::activation_forward;
using parallel::axpy;
using parallel::gemm;

/// Shape of op(a)·op(b); throws ShapeError when the inner dimensions differ.
std::pair<std::size_t, std::size_t> gemm_shape(Transpose ta, Transpose tb, const Matrix& a,
                                               const Matrix& b);

/// Number of OpenMP threads the parallel kernels may use (1 without OpenMP).
int max_threads();
void set_max_threads(int n);

}  // namespace holonet::kernels
