#pragma once

// Network topologies written once against the primitive vocabulary
// (affine, sigmoid, ...). N is the activation type: Matrix, tape Var, or a
// Dual of either. W is the weight type: Matrix or Var.

#include <span>
#include <vector>

#include "coolflex/errors.hpp"
#include "coolflex/models/model_spec.hpp"
#include "coolflex/numcore/dual.hpp"

namespace coolflex::models {

template <class W>
struct DenseNet {
  std::vector<W> weights;
  std::vector<W> biases;
  W head_w;
  W head_b;
};

template <class W>
struct LstmLayer {
  W wx;
  W wfb;  ///< only meaningful when has_feedback
  W wh;
  W b;
  bool has_feedback = false;
};

template <class W>
struct LstmNet {
  std::vector<LstmLayer<W>> layers;
  W head_w;
  W head_b;
  Eigen::Index hidden = 0;
};

/// Assembles a dense net from blocks in WeightLayout order.
template <class W>
DenseNet<W> make_dense(const ModelSpec& spec, std::vector<W> blocks) {
  DenseNet<W> net;
  std::size_t i = 0;
  for (int l = 0; l < spec.hidden_layers; ++l) {
    net.weights.push_back(std::move(blocks[i++]));
    net.biases.push_back(std::move(blocks[i++]));
  }
  net.head_w = std::move(blocks[i++]);
  net.head_b = std::move(blocks[i++]);
  return net;
}

/// Assembles an LSTM net from blocks in WeightLayout order.
template <class W>
LstmNet<W> make_lstm(const ModelSpec& spec, std::vector<W> blocks) {
  LstmNet<W> net;
  net.hidden = spec.hidden_width;
  std::size_t i = 0;
  for (int l = 0; l < spec.hidden_layers; ++l) {
    LstmLayer<W> layer;
    layer.wx = std::move(blocks[i++]);
    if (l == 0 && has_feedback(spec.kind)) {
      layer.wfb = std::move(blocks[i++]);
      layer.has_feedback = true;
    }
    layer.wh = std::move(blocks[i++]);
    layer.b = std::move(blocks[i++]);
    net.layers.push_back(std::move(layer));
  }
  net.head_w = std::move(blocks[i++]);
  net.head_b = std::move(blocks[i++]);
  return net;
}

/// Sigmoid hidden layers and a linear output unit. x is (3 x batch).
template <class N, class W>
N dense_forward(const DenseNet<W>& net, const N& x) {
  using namespace numcore;
  N h = x;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    h = sigmoid(affine(net.weights[l], h, net.biases[l]));
  }
  return affine(net.head_w, h, net.head_b);
}

enum class Feedback {
  None,         ///< no feedback input
  Teacher,      ///< feedback[k] is the true previous temperature for step k
  FreeRunning,  ///< feedback[0] seeds step 0; later steps use the model's own output
};

/// Runs the stacked LSTM over a window from zero initial state and returns
/// the (normalized) output at every step. xs[k] is (3 x batch).
template <class N, class W>
std::vector<N> lstm_sequence(const LstmNet<W>& net, std::span<const N> xs, Feedback mode,
                             std::span<const N> feedback = {}) {
  using namespace numcore;
  const bool wants_feedback = !net.layers.empty() && net.layers.front().has_feedback;
  if (wants_feedback) {
    if (mode == Feedback::None) throw ContractError("lstm: feedback model needs a feedback channel");
    if (mode == Feedback::Teacher && feedback.size() != xs.size()) {
      throw ContractError("lstm: teacher forcing needs one feedback value per step");
    }
    if (mode == Feedback::FreeRunning && feedback.empty()) {
      throw ContractError("lstm: free-running mode needs an initial feedback value");
    }
  }

  const Eigen::Index hsz = net.hidden;
  std::vector<N> h(net.layers.size());
  std::vector<N> c(net.layers.size());
  std::vector<N> outputs;
  outputs.reserve(xs.size());
  for (std::size_t k = 0; k < xs.size(); ++k) {
    N in = xs[k];
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      const LstmLayer<W>& layer = net.layers[l];
      N z = affine(layer.wx, in, layer.b);
      if (layer.has_feedback) {
        const N& fb = mode == Feedback::Teacher ? feedback[k] : (k == 0 ? feedback[0] : outputs[k - 1]);
        z = add(z, matmul(layer.wfb, fb));
      }
      if (k > 0) z = add(z, matmul(layer.wh, h[l]));
      N i = sigmoid(slice_rows(z, 0, hsz));
      N g = tanh(slice_rows(z, 2 * hsz, hsz));
      N o = sigmoid(slice_rows(z, 3 * hsz, hsz));
      if (k > 0) {
        N f = sigmoid(slice_rows(z, hsz, hsz));
        c[l] = add(mul(f, c[l]), mul(i, g));
      } else {
        c[l] = mul(i, g);
      }
      h[l] = mul(o, tanh(c[l]));
      in = h[l];
    }
    outputs.push_back(affine(net.head_w, in, net.head_b));
  }
  return outputs;
}

}  // namespace coolflex::models
