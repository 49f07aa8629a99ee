#pragma once

// Stacked bidirectional LSTM encoder with exact backpropagation through time.
//
// Gates use the order (input, forget, cell, output); no peepholes. Each layer
// emits [h_forward | h_backward], so the hidden width is twice the cell count.

#include <cmath>
#include <cstddef>
#include <random>
#include <utility>
#include <vector>

#include "upm/errors.hpp"
#include "upm/numerics.hpp"

namespace upm {

struct EncoderConfig {
  std::size_t input_dim = 40;
  std::size_t layers = 2;
  std::size_t cells = 32;

  std::size_t hidden_dim() const { return 2 * cells; }
  std::size_t layer_input_dim(std::size_t layer) const {
    return layer == 0 ? input_dim : hidden_dim();
  }
  void validate() const {
    if (input_dim == 0 || layers == 0 || cells == 0) {
      throw ConfigError("encoder dimensions must be positive");
    }
  }
  /// 40-dimensional MFCC input, five layers of 320 cells.
  static EncoderConfig full_scale() { return {40, 5, 320}; }

  bool operator==(const EncoderConfig&) const = default;
};

template <typename Scalar>
struct LstmDirection {
  Matrix<Scalar> w_input;      // 4c x in
  Matrix<Scalar> w_recurrent;  // 4c x c
  Vector<Scalar> bias;         // 4c
};

template <typename Scalar>
struct LstmLayer {
  LstmDirection<Scalar> forward;
  LstmDirection<Scalar> backward;
};

template <typename Scalar>
class EncoderParams {
 public:
  EncoderParams() = default;

  static EncoderParams zeros(const EncoderConfig& config) {
    config.validate();
    EncoderParams p;
    p.config_ = config;
    const auto c = static_cast<Eigen::Index>(config.cells);
    for (std::size_t l = 0; l < config.layers; ++l) {
      const auto in = static_cast<Eigen::Index>(config.layer_input_dim(l));
      LstmDirection<Scalar> dir{Matrix<Scalar>::Zero(4 * c, in), Matrix<Scalar>::Zero(4 * c, c),
                                Vector<Scalar>::Zero(4 * c)};
      p.layers_.push_back({dir, dir});
    }
    return p;
  }

  /// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] with fan_in = in + c;
  /// forget-gate biases start at 1.
  template <typename Rng>
  static EncoderParams random(const EncoderConfig& config, Rng& rng) {
    EncoderParams p = zeros(config);
    const auto c = static_cast<Eigen::Index>(config.cells);
    for (std::size_t l = 0; l < config.layers; ++l) {
      const Scalar scale =
          Scalar(1) / std::sqrt(static_cast<Scalar>(config.layer_input_dim(l) + config.cells));
      std::uniform_real_distribution<Scalar> dist(-scale, scale);
      for (auto* dir : {&p.layers_[l].forward, &p.layers_[l].backward}) {
        for (auto& v : dir->w_input.reshaped()) v = dist(rng);
        for (auto& v : dir->w_recurrent.reshaped()) v = dist(rng);
        dir->bias.setZero();
        dir->bias.segment(c, c).setOnes();
      }
    }
    return p;
  }

  const EncoderConfig& config() const { return config_; }
  std::vector<LstmLayer<Scalar>>& layers() { return layers_; }
  const std::vector<LstmLayer<Scalar>>& layers() const { return layers_; }

  /// Calls f(Eigen::Map<Vector>) on every parameter block in a fixed order.
  template <typename F>
  void visit(F&& f) {
    visit_impl(*this, f);
  }
  template <typename F>
  void visit(F&& f) const {
    visit_impl(*this, f);
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    visit([&](auto block) { n += static_cast<std::size_t>(block.size()); });
    return n;
  }

  Vector<Scalar> flatten() const {
    Vector<Scalar> out(static_cast<Eigen::Index>(parameter_count()));
    Eigen::Index at = 0;
    visit([&](auto block) {
      out.segment(at, block.size()) = block;
      at += block.size();
    });
    return out;
  }

  void assign(const Vector<Scalar>& flat) {
    if (static_cast<std::size_t>(flat.size()) != parameter_count()) {
      throw ShapeMismatch("encoder parameter vector has the wrong length");
    }
    Eigen::Index at = 0;
    visit([&](auto block) {
      block = flat.segment(at, block.size());
      at += block.size();
    });
  }

  /// Swaps the forward and backward blocks of every layer.
  EncoderParams direction_swapped() const {
    EncoderParams p = *this;
    for (auto& layer : p.layers_) std::swap(layer.forward, layer.backward);
    return p;
  }

  bool operator==(const EncoderParams& o) const {
    if (!(config_ == o.config_)) return false;
    return flatten() == o.flatten();
  }

 private:
  template <typename Self, typename F>
  static void visit_impl(Self& self, F& f) {
    using MapT = std::conditional_t<std::is_const_v<Self>, Eigen::Map<const Vector<Scalar>>,
                                    Eigen::Map<Vector<Scalar>>>;
    for (auto& layer : self.layers_) {
      for (auto* dir : {&layer.forward, &layer.backward}) {
        f(MapT(dir->w_input.data(), dir->w_input.size()));
        f(MapT(dir->w_recurrent.data(), dir->w_recurrent.size()));
        f(MapT(dir->bias.data(), dir->bias.size()));
      }
    }
  }

  EncoderConfig config_;
  std::vector<LstmLayer<Scalar>> layers_;
};

template <typename Scalar>
struct DirectionTrace {
  Matrix<Scalar> gates;      // T x 4c, post-activation
  Matrix<Scalar> cell;       // T x c
  Matrix<Scalar> cell_tanh;  // T x c
  Matrix<Scalar> hidden;     // T x c
};

template <typename Scalar>
struct LayerTrace {
  Matrix<Scalar> input;
  DirectionTrace<Scalar> forward;
  DirectionTrace<Scalar> backward;
};

template <typename Scalar>
struct HiddenSequence {
  Matrix<Scalar> values;  // T x 2c, last layer output
  std::vector<LayerTrace<Scalar>> trace;
};

namespace detail {

template <typename Scalar>
Scalar sigmoid(Scalar x) {
  return x >= 0 ? Scalar(1) / (Scalar(1) + std::exp(-x)) : std::exp(x) / (Scalar(1) + std::exp(x));
}

template <typename Scalar>
DirectionTrace<Scalar> run_direction(const LstmDirection<Scalar>& p, const Matrix<Scalar>& x,
                                     bool reversed) {
  const Eigen::Index steps = x.rows();
  const Eigen::Index c = p.w_recurrent.cols();
  DirectionTrace<Scalar> tr{Matrix<Scalar>(steps, 4 * c), Matrix<Scalar>(steps, c),
                            Matrix<Scalar>(steps, c), Matrix<Scalar>(steps, c)};
  Matrix<Scalar> pre = x * p.w_input.transpose();
  pre.rowwise() += p.bias.transpose();

  Vector<Scalar> h = Vector<Scalar>::Zero(c);
  Vector<Scalar> cell = Vector<Scalar>::Zero(c);
  Vector<Scalar> z(4 * c);
  for (Eigen::Index k = 0; k < steps; ++k) {
    const Eigen::Index t = reversed ? steps - 1 - k : k;
    z = pre.row(t).transpose() + p.w_recurrent * h;
    for (Eigen::Index j = 0; j < c; ++j) {
      z[j] = sigmoid(z[j]);
      z[c + j] = sigmoid(z[c + j]);
      z[2 * c + j] = std::tanh(z[2 * c + j]);
      z[3 * c + j] = sigmoid(z[3 * c + j]);
    }
    cell = z.segment(c, c).cwiseProduct(cell) + z.head(c).cwiseProduct(z.segment(2 * c, c));
    Vector<Scalar> squashed = cell.array().tanh().matrix();
    h = z.tail(c).cwiseProduct(squashed);
    tr.gates.row(t) = z.transpose();
    tr.cell.row(t) = cell.transpose();
    tr.cell_tanh.row(t) = squashed.transpose();
    tr.hidden.row(t) = h.transpose();
  }
  return tr;
}

// Accumulates parameter gradients into `grad` and returns d(loss)/d(input).
template <typename Scalar>
Matrix<Scalar> backprop_direction(const LstmDirection<Scalar>& p, const Matrix<Scalar>& x,
                                  const DirectionTrace<Scalar>& tr, const Matrix<Scalar>& grad_h,
                                  bool reversed, LstmDirection<Scalar>& grad) {
  const Eigen::Index steps = x.rows();
  const Eigen::Index c = p.w_recurrent.cols();
  Matrix<Scalar> grad_pre(steps, 4 * c);
  Matrix<Scalar> prev_hidden = Matrix<Scalar>::Zero(steps, c);

  Vector<Scalar> dh_next = Vector<Scalar>::Zero(c);
  Vector<Scalar> dc_next = Vector<Scalar>::Zero(c);
  Vector<Scalar> dz(4 * c);
  for (Eigen::Index k = steps - 1; k >= 0; --k) {
    const Eigen::Index t = reversed ? steps - 1 - k : k;
    const bool first = k == 0;
    const Eigen::Index prev = reversed ? t + 1 : t - 1;

    const auto gates = tr.gates.row(t);
    Vector<Scalar> dh = grad_h.row(t).transpose() + dh_next;
    for (Eigen::Index j = 0; j < c; ++j) {
      const Scalar i = gates[j], f = gates[c + j], g = gates[2 * c + j], o = gates[3 * c + j];
      const Scalar tc = tr.cell_tanh(t, j);
      const Scalar c_prev = first ? Scalar(0) : tr.cell(prev, j);
      const Scalar dc = dh[j] * o * (Scalar(1) - tc * tc) + dc_next[j];
      dz[j] = dc * g * i * (Scalar(1) - i);
      dz[c + j] = dc * c_prev * f * (Scalar(1) - f);
      dz[2 * c + j] = dc * i * (Scalar(1) - g * g);
      dz[3 * c + j] = dh[j] * tc * o * (Scalar(1) - o);
      dc_next[j] = dc * f;
    }
    dh_next = p.w_recurrent.transpose() * dz;
    grad_pre.row(t) = dz.transpose();
    if (!first) prev_hidden.row(t) = tr.hidden.row(prev);
  }
  grad.w_input.noalias() += grad_pre.transpose() * x;
  grad.w_recurrent.noalias() += grad_pre.transpose() * prev_hidden;
  grad.bias += grad_pre.colwise().sum().transpose();
  return grad_pre * p.w_input;
}

}  // namespace detail

/// Runs every layer over the T x d_in input. The result keeps the traces
/// needed by encoder_backward.
template <typename Scalar>
HiddenSequence<Scalar> encoder_forward(const EncoderParams<Scalar>& params, const Matrix<Scalar>& x) {
  const auto& cfg = params.config();
  if (x.rows() < 1) throw ShapeMismatch("encoder input has no frames");
  if (static_cast<std::size_t>(x.cols()) != cfg.input_dim) {
    throw ShapeMismatch("encoder input has " + std::to_string(x.cols()) + " columns, expected " +
                        std::to_string(cfg.input_dim));
  }
  HiddenSequence<Scalar> out;
  const auto c = static_cast<Eigen::Index>(cfg.cells);
  Matrix<Scalar> input = x;
  for (const auto& layer : params.layers()) {
    LayerTrace<Scalar> tr;
    tr.forward = detail::run_direction(layer.forward, input, false);
    tr.backward = detail::run_direction(layer.backward, input, true);
    Matrix<Scalar> output(input.rows(), 2 * c);
    output << tr.forward.hidden, tr.backward.hidden;
    tr.input = std::move(input);
    out.trace.push_back(std::move(tr));
    input = std::move(output);
  }
  out.values = std::move(input);
  return out;
}

template <typename Scalar>
struct EncoderGradients {
  EncoderParams<Scalar> params;
  Matrix<Scalar> input;
};

/// Gradients of sum_t <grad_h[t], h[t]> with respect to parameters and input.
template <typename Scalar>
EncoderGradients<Scalar> encoder_backward(const EncoderParams<Scalar>& params,
                                          const HiddenSequence<Scalar>& hidden,
                                          const Matrix<Scalar>& grad_h) {
  const auto& cfg = params.config();
  if (hidden.trace.size() != cfg.layers) throw MissingCache("encoder_backward needs a forward trace");
  if (grad_h.rows() != hidden.values.rows() || grad_h.cols() != hidden.values.cols()) {
    throw ShapeMismatch("encoder_backward: upstream gradient shape differs from the output");
  }
  const auto c = static_cast<Eigen::Index>(cfg.cells);
  EncoderGradients<Scalar> out{EncoderParams<Scalar>::zeros(cfg), {}};
  Matrix<Scalar> upstream = grad_h;
  for (std::size_t l = cfg.layers; l-- > 0;) {
    const auto& layer = params.layers()[l];
    const auto& tr = hidden.trace[l];
    auto& g = out.params.layers()[l];
    Matrix<Scalar> fwd_h = upstream.leftCols(c);
    Matrix<Scalar> bwd_h = upstream.rightCols(c);
    Matrix<Scalar> down =
        detail::backprop_direction(layer.forward, tr.input, tr.forward, fwd_h, false, g.forward);
    down += detail::backprop_direction(layer.backward, tr.input, tr.backward, bwd_h, true, g.backward);
    upstream = std::move(down);
  }
  out.input = std::move(upstream);
  return out;
}

}  // namespace upm
