#pragma once

// Dense types and log-space primitives shared by the encoder, CTC and model.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>

#include "upm/errors.hpp"

namespace upm {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXd = Matrix<double>;
using VectorXd = Vector<double>;

template <typename Scalar>
constexpr Scalar kLogZero = -std::numeric_limits<Scalar>::infinity();

inline std::string ShapeString(Eigen::Index rows, Eigen::Index cols) {
  return std::to_string(rows) + "x" + std::to_string(cols);
}

/// Checked matrix product.
template <typename DerivedA, typename DerivedB>
auto matmul(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  if (a.cols() != b.rows()) {
    throw ShapeMismatch("matmul: " + ShapeString(a.rows(), a.cols()) + " times " +
                        ShapeString(b.rows(), b.cols()));
  }
  Matrix<Scalar> out = a * b;
  return out;
}

/// log(a + b) for log-space values; -inf is the additive identity.
template <typename Scalar>
Scalar log_add(Scalar a, Scalar b) {
  if (a == kLogZero<Scalar>) return b;
  if (b == kLogZero<Scalar>) return a;
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

template <typename Scalar>
Scalar log_sum_exp(std::span<const Scalar> xs) {
  if (xs.empty()) throw std::invalid_argument("log_sum_exp of an empty list");
  const Scalar hi = *std::max_element(xs.begin(), xs.end());
  if (hi == kLogZero<Scalar>) return hi;
  Scalar sum = 0;
  for (Scalar x : xs) sum += std::exp(x - hi);
  return hi + std::log(sum);
}

template <typename Derived>
typename Derived::Scalar log_sum_exp(const Eigen::DenseBase<Derived>& xs) {
  using Scalar = typename Derived::Scalar;
  if (xs.size() == 0) throw std::invalid_argument("log_sum_exp of an empty list");
  const Scalar hi = xs.maxCoeff();
  if (hi == kLogZero<Scalar>) return hi;
  return hi + std::log((xs.derived().array() - hi).exp().sum());
}

template <typename Derived>
Vector<typename Derived::Scalar> log_softmax(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  const Scalar norm = log_sum_exp(v);
  return (v.derived().array() - norm).matrix();
}

template <typename Derived>
Vector<typename Derived::Scalar> softmax(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  const Scalar hi = v.maxCoeff();
  Vector<Scalar> e = (v.derived().array() - hi).exp().matrix();
  return e / e.sum();
}

/// Row-wise softmax of a T x K logit matrix.
template <typename Derived>
Matrix<typename Derived::Scalar> softmax_rows(const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  Matrix<Scalar> out(logits.rows(), logits.cols());
  for (Eigen::Index t = 0; t < logits.rows(); ++t) {
    out.row(t) = softmax(logits.row(t).transpose()).transpose();
  }
  return out;
}

/// Maximum relative error between central differences of `f` and `analytic`:
/// max_i |fd_i - g_i| / max(1, |g_i|, |fd_i|).
template <typename Scalar>
Scalar grad_check(const std::function<Scalar(const Vector<Scalar>&)>& f,
                  const Vector<Scalar>& theta, const Vector<Scalar>& analytic,
                  Scalar eps) {
  if (theta.size() != analytic.size()) {
    throw ShapeMismatch("grad_check: parameter and gradient sizes differ");
  }
  Scalar worst = 0;
  Vector<Scalar> probe = theta;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    probe[i] = theta[i] + eps;
    const Scalar up = f(probe);
    probe[i] = theta[i] - eps;
    const Scalar down = f(probe);
    probe[i] = theta[i];
    const Scalar fd = (up - down) / (2 * eps);
    const Scalar scale = std::max({Scalar(1), std::abs(analytic[i]), std::abs(fd)});
    worst = std::max(worst, std::abs(fd - analytic[i]) / scale);
  }
  return worst;
}

}  // namespace upm
