#pragma once

// Connectionist temporal classification over a T x (z+1) logit matrix whose
// last column is the blank.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "upm/errors.hpp"
#include "upm/numerics.hpp"

namespace upm {

/// Phoneme row indices into a signature; never the blank row.
using LabelSeq = std::vector<std::size_t>;

template <typename Scalar>
struct CtcResult {
  Scalar loss;
  Matrix<Scalar> grad_logits;
};

/// Minimum frame count that can emit `labels`: one frame per label plus a
/// separating blank between equal neighbours.
inline std::size_t ctc_min_frames(const LabelSeq& labels) {
  std::size_t n = labels.size();
  for (std::size_t i = 1; i < labels.size(); ++i) n += labels[i] == labels[i - 1];
  return n;
}

/// Removes repeats, then blanks.
inline LabelSeq collapse_path(const std::vector<std::size_t>& path, std::size_t blank) {
  LabelSeq out;
  for (std::size_t t = 0; t < path.size(); ++t) {
    if (path[t] == blank) continue;
    if (t > 0 && path[t] == path[t - 1]) continue;
    out.push_back(path[t]);
  }
  return out;
}

namespace detail {

template <typename Derived>
void check_ctc_inputs(const Eigen::MatrixBase<Derived>& logits, const LabelSeq& labels) {
  if (logits.rows() < 1 || logits.cols() < 1) throw ShapeMismatch("ctc: empty logit matrix");
  const auto blank = static_cast<std::size_t>(logits.cols() - 1);
  for (std::size_t l : labels) {
    if (l >= blank) {
      throw std::out_of_range("ctc: label " + std::to_string(l) + " is not a phoneme row");
    }
  }
  if (static_cast<std::size_t>(logits.rows()) < ctc_min_frames(labels)) {
    throw ImpossibleAlignment("ctc: " + std::to_string(logits.rows()) + " frames cannot emit " +
                              std::to_string(labels.size()) + " labels");
  }
}

}  // namespace detail

/// Negative log-likelihood of `labels` and its gradient with respect to the
/// raw logits, by log-space forward-backward over the blank-augmented labels.
template <typename Derived>
CtcResult<typename Derived::Scalar> ctc_loss(const Eigen::MatrixBase<Derived>& logits,
                                             const LabelSeq& labels) {
  using Scalar = typename Derived::Scalar;
  detail::check_ctc_inputs(logits, labels);
  const Eigen::Index frames = logits.rows();
  const Eigen::Index classes = logits.cols();
  const std::size_t blank = static_cast<std::size_t>(classes - 1);
  constexpr Scalar kZero = kLogZero<Scalar>;

  Matrix<Scalar> logp(frames, classes);
  for (Eigen::Index t = 0; t < frames; ++t) {
    logp.row(t) = log_softmax(logits.row(t).transpose()).transpose();
  }

  const auto states = static_cast<Eigen::Index>(2 * labels.size() + 1);
  std::vector<std::size_t> ext(static_cast<std::size_t>(states), blank);
  for (std::size_t u = 0; u < labels.size(); ++u) ext[2 * u + 1] = labels[u];
  // Skip transition s-2 -> s is allowed for labels differing from s-2.
  auto can_skip = [&](Eigen::Index s) {
    return s >= 2 && ext[s] != blank && ext[s] != ext[s - 2];
  };

  Matrix<Scalar> alpha = Matrix<Scalar>::Constant(frames, states, kZero);
  alpha(0, 0) = logp(0, blank);
  if (states > 1) alpha(0, 1) = logp(0, ext[1]);
  for (Eigen::Index t = 1; t < frames; ++t) {
    for (Eigen::Index s = 0; s < states; ++s) {
      Scalar acc = alpha(t - 1, s);
      if (s >= 1) acc = log_add(acc, alpha(t - 1, s - 1));
      if (can_skip(s)) acc = log_add(acc, alpha(t - 1, s - 2));
      alpha(t, s) = acc == kZero ? kZero : acc + logp(t, ext[s]);
    }
  }

  // beta(t, s): log-probability of emitting the rest after frame t from s.
  Matrix<Scalar> beta = Matrix<Scalar>::Constant(frames, states, kZero);
  beta(frames - 1, states - 1) = 0;
  if (states > 1) beta(frames - 1, states - 2) = 0;
  for (Eigen::Index t = frames - 2; t >= 0; --t) {
    for (Eigen::Index s = 0; s < states; ++s) {
      Scalar acc = beta(t + 1, s) + logp(t + 1, ext[s]);
      if (s + 1 < states) acc = log_add(acc, beta(t + 1, s + 1) + logp(t + 1, ext[s + 1]));
      if (s + 2 < states && can_skip(s + 2)) {
        acc = log_add(acc, beta(t + 1, s + 2) + logp(t + 1, ext[s + 2]));
      }
      beta(t, s) = acc;
    }
  }

  Scalar log_likelihood = alpha(frames - 1, states - 1);
  if (states > 1) log_likelihood = log_add(log_likelihood, alpha(frames - 1, states - 2));
  if (log_likelihood == kZero) throw ImpossibleAlignment("ctc: no path emits the labels");

  CtcResult<Scalar> out{-log_likelihood, Matrix<Scalar>(frames, classes)};
  Vector<Scalar> occupancy(classes);
  for (Eigen::Index t = 0; t < frames; ++t) {
    occupancy.setConstant(kZero);
    for (Eigen::Index s = 0; s < states; ++s) {
      occupancy[ext[s]] = log_add(occupancy[ext[s]], alpha(t, s) + beta(t, s));
    }
    for (Eigen::Index k = 0; k < classes; ++k) {
      out.grad_logits(t, k) = std::exp(logp(t, k)) - std::exp(occupancy[k] - log_likelihood);
    }
  }
  return out;
}

/// Exhaustive reference: sums every (z+1)^T frame path that collapses to
/// `labels`. Refuses more than 10^7 paths.
template <typename Derived>
typename Derived::Scalar brute_force_ctc(const Eigen::MatrixBase<Derived>& logits,
                                         const LabelSeq& labels) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index frames = logits.rows();
  const Eigen::Index classes = logits.cols();
  if (frames < 1 || classes < 1) throw ShapeMismatch("brute_force_ctc: empty logit matrix");
  double paths = 1;
  for (Eigen::Index t = 0; t < frames; ++t) paths *= static_cast<double>(classes);
  if (paths > 1e7) throw TooLarge("brute_force_ctc: too many paths");

  Matrix<Scalar> logp(frames, classes);
  for (Eigen::Index t = 0; t < frames; ++t) {
    logp.row(t) = log_softmax(logits.row(t).transpose()).transpose();
  }
  const auto blank = static_cast<std::size_t>(classes - 1);
  std::vector<std::size_t> path(static_cast<std::size_t>(frames), 0);
  Scalar total = kLogZero<Scalar>;
  while (true) {
    if (collapse_path(path, blank) == labels) {
      Scalar lp = 0;
      for (Eigen::Index t = 0; t < frames; ++t) lp += logp(t, static_cast<Eigen::Index>(path[t]));
      total = log_add(total, lp);
    }
    Eigen::Index t = 0;
    while (t < frames && ++path[t] == static_cast<std::size_t>(classes)) path[t++] = 0;
    if (t == frames) break;
  }
  if (total == kLogZero<Scalar>) throw ImpossibleAlignment("brute_force_ctc: no path emits the labels");
  return -total;
}

/// Best-path decoding: per-frame argmax (lowest index wins ties), then collapse.
template <typename Derived>
LabelSeq greedy_decode(const Eigen::MatrixBase<Derived>& logits) {
  std::vector<std::size_t> path(static_cast<std::size_t>(logits.rows()));
  for (Eigen::Index t = 0; t < logits.rows(); ++t) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < logits.cols(); ++k) {
      if (logits(t, k) > logits(t, best)) best = k;
    }
    path[t] = static_cast<std::size_t>(best);
  }
  return collapse_path(path, static_cast<std::size_t>(logits.cols() - 1));
}

}  // namespace upm
