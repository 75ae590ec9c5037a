#pragma once

#include <cmath>

#include "radar/types.hpp"

namespace radar::numeric {

inline Scalar sigmoid(Scalar x) { return Scalar(1) / (Scalar(1) + std::exp(-x)); }

// Exact (erf-based) GELU and its derivative.
inline Scalar gelu(Scalar x) {
    return Scalar(0.5) * x * (Scalar(1) + std::erf(x * Scalar(M_SQRT1_2)));
}

inline Scalar gelu_grad(Scalar x) {
    const Scalar cdf = Scalar(0.5) * (Scalar(1) + std::erf(x * Scalar(M_SQRT1_2)));
    const Scalar pdf = std::exp(Scalar(-0.5) * x * x) / std::sqrt(Scalar(2) * Scalar(M_PI));
    return cdf + x * pdf;
}

template <typename Derived>
auto gelu(const Eigen::MatrixBase<Derived>& x) {
    return x.unaryExpr([](Scalar v) { return gelu(v); }).eval();
}

template <typename Derived>
auto gelu_grad(const Eigen::MatrixBase<Derived>& x) {
    return x.unaryExpr([](Scalar v) { return gelu_grad(v); }).eval();
}

// Row-wise stabilised softmax.
template <typename Derived>
Matrix softmax_rows(const Eigen::MatrixBase<Derived>& x) {
    Matrix out(x.rows(), x.cols());
    for (Index i = 0; i < x.rows(); ++i) {
        const Scalar m = x.row(i).maxCoeff();
        out.row(i) = (x.row(i).array() - m).exp();
        out.row(i) /= out.row(i).sum();
    }
    return out;
}

// Backward of row-wise softmax: given y = softmax(x) and dL/dy, returns dL/dx.
inline Matrix softmax_rows_backward(const Matrix& y, const Matrix& dy) {
    Matrix dx(y.rows(), y.cols());
    for (Index i = 0; i < y.rows(); ++i) {
        const Scalar dot = y.row(i).dot(dy.row(i));
        dx.row(i) = (y.row(i).array() * (dy.row(i).array() - dot)).matrix();
    }
    return dx;
}

}  // namespace radar::numeric
