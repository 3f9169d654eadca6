#include "holonet/kernels.hpp"

#include "holonet/error.hpp"
#include "vector_math.hpp"

#include <Eigen/Core>

#include <algorithm>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace holonet::kernels {

namespace {

// Elementwise loops below this length stay on one thread.
constexpr std::ptrdiff_t kParallelThreshold = 1 << 14;

struct SineForm {
    double scale;
    double offset;
};

// Kinds of the form scale·sin(x) + offset take the vectorized path.
bool sine_form(ActivationKind kind, SineForm& form) {
    switch (kind) {
        case ActivationKind::Sine: form = {1.0, 0.0}; return true;
        case ActivationKind::SineNorm01: form = {0.5, 0.5}; return true;
        case ActivationKind::Sine10: form = {10.0, 0.0}; return true;
        default: return false;
    }
}

constexpr std::ptrdiff_t kBlock = 4096;

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMajor>;
using MutMap = Eigen::Map<RowMajor>;

void check_output(std::pair<std::size_t, std::size_t> shape, const Matrix& c) {
    if (c.rows() != shape.first || c.cols() != shape.second) {
        throw ShapeError("gemm output is " + shape_string(c) + ", expected " +
                         shape_string(shape.first, shape.second));
    }
}

}  // namespace

std::pair<std::size_t, std::size_t> gemm_shape(Transpose ta, Transpose tb, const Matrix& a,
                                               const Matrix& b) {
    const std::size_t m = ta == Transpose::No ? a.rows() : a.cols();
    const std::size_t ka = ta == Transpose::No ? a.cols() : a.rows();
    const std::size_t kb = tb == Transpose::No ? b.rows() : b.cols();
    const std::size_t n = tb == Transpose::No ? b.cols() : b.rows();
    if (ka != kb) {
        throw ShapeError("gemm inner dimensions differ: " + shape_string(a) +
                         (ta == Transpose::Yes ? "^T" : "") + " · " + shape_string(b) +
                         (tb == Transpose::Yes ? "^T" : ""));
    }
    return {m, n};
}

namespace serial {

void gemm(Transpose ta, Transpose tb, const Matrix& a, const Matrix& b, Matrix& c,
          bool accumulate) {
    const auto shape = gemm_shape(ta, tb, a, b);
    check_output(shape, c);
    const auto [m, n] = shape;
    const std::size_t k = ta == Transpose::No ? a.cols() : a.rows();
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double sum = 0.0;
            for (std::size_t p = 0; p < k; ++p) {
                const double av = ta == Transpose::No ? a(i, p) : a(p, i);
                const double bv = tb == Transpose::No ? b(p, j) : b(j, p);
                sum += av * bv;
            }
            c(i, j) = accumulate ? c(i, j) + sum : sum;
        }
    }
}

void activation_forward(ActivationKind kind, std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = activate(kind, x[i]);
}

void activation_backward(ActivationKind kind, std::span<const double> x,
                         std::span<const double> upstream, std::span<double> grad_x) {
    for (std::size_t i = 0; i < x.size(); ++i) {
        grad_x[i] += upstream[i] * activate_derivative(kind, x[i]);
    }
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace serial

namespace parallel {

// GEMM goes through Eigen's blocked kernel, which splits the output across
// OpenMP threads when built with -fopenmp. The reduction order per output
// element does not depend on the thread count.
void gemm(Transpose ta, Transpose tb, const Matrix& a, const Matrix& b, Matrix& c,
          bool accumulate) {
    const auto shape = gemm_shape(ta, tb, a, b);
    check_output(shape, c);
    if (c.size() == 0) return;
    const ConstMap am(a.data(), static_cast<Eigen::Index>(a.rows()),
                      static_cast<Eigen::Index>(a.cols()));
    const ConstMap bm(b.data(), static_cast<Eigen::Index>(b.rows()),
                      static_cast<Eigen::Index>(b.cols()));
    MutMap cm(c.data(), static_cast<Eigen::Index>(c.rows()), static_cast<Eigen::Index>(c.cols()));
    if (a.size() == 0 || b.size() == 0) {
        if (!accumulate) cm.setZero();
        return;
    }
    const bool at = ta == Transpose::Yes;
    const bool bt = tb == Transpose::Yes;
    if (!accumulate) {
        if (!at && !bt) cm.noalias() = am * bm;
        else if (!at && bt) cm.noalias() = am * bm.transpose();
        else if (at && !bt) cm.noalias() = am.transpose() * bm;
        else cm.noalias() = am.transpose() * bm.transpose();
    } else {
        if (!at && !bt) cm.noalias() += am * bm;
        else if (!at && bt) cm.noalias() += am * bm.transpose();
        else if (at && !bt) cm.noalias() += am.transpose() * bm;
        else cm.noalias() += am.transpose() * bm.transpose();
    }
}

void activation_forward(ActivationKind kind, std::span<const double> x, std::span<double> y) {
    const auto n = static_cast<std::ptrdiff_t>(x.size());
    if (SineForm f{}; sine_form(kind, f)) {
        const std::ptrdiff_t blocks = (n + kBlock - 1) / kBlock;
#pragma omp parallel for schedule(static) if (n > kParallelThreshold)
        for (std::ptrdiff_t b = 0; b < blocks; ++b) {
            const std::ptrdiff_t lo = b * kBlock;
            const auto len = static_cast<std::size_t>(std::min(kBlock, n - lo));
            vmath::sine(x.data() + lo, y.data() + lo, len, f.scale, f.offset);
        }
        return;
    }
#pragma omp parallel for schedule(static) if (n > kParallelThreshold)
    for (std::ptrdiff_t i = 0; i < n; ++i) y[i] = activate(kind, x[i]);
}

void activation_backward(ActivationKind kind, std::span<const double> x,
                         std::span<const double> upstream, std::span<double> grad_x) {
    const auto n = static_cast<std::ptrdiff_t>(x.size());
    if (SineForm f{}; sine_form(kind, f)) {
        const std::ptrdiff_t blocks = (n + kBlock - 1) / kBlock;
#pragma omp parallel for schedule(static) if (n > kParallelThreshold)
        for (std::ptrdiff_t b = 0; b < blocks; ++b) {
            const std::ptrdiff_t lo = b * kBlock;
            const auto len = static_cast<std::size_t>(std::min(kBlock, n - lo));
            vmath::sine_backward(x.data() + lo, upstream.data() + lo, grad_x.data() + lo, len, f.scale);
        }
        return;
    }
#pragma omp parallel for schedule(static) if (n > kParallelThreshold)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        grad_x[i] += upstream[i] * activate_derivative(kind, x[i]);
    }
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    const auto n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for simd schedule(static) if (n > kParallelThreshold)
    for (std::ptrdiff_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace parallel

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void set_max_threads(int n) {
#ifdef _OPENMP
    omp_set_num_threads(n < 1 ? 1 : n);
#else
    (void)n;
#endif
}

}  // namespace holonet::kernels
