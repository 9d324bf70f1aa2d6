#pragma once

#include <span>
#include <vector>

#include "edgemig/rng.hpp"
#include "edgemig/tensor.hpp"

namespace edgemig::nn {

enum class Activation { Identity, Tanh };

/// y = act(x * W^T + b) with W of shape (out, in); one sample per row.
Mat dense_forward(const Mat& x, const Tensor& w, const Tensor& b, Activation act);
/// Accumulates dW, db and returns dx. `y` is the activated forward output.
Mat dense_backward(const Mat& x, const Mat& y, const Mat& dy, Param& w, Param& b, Activation act);

// LSTM with gate order (input, forget, candidate, output):
//   z = x Wx^T + h Wh^T + b,  c' = f*c + i*g,  h' = o*tanh(c')
struct LstmState {
  Mat h;
  Mat c;
};

LstmState lstm_zero_state(std::size_t batch, std::size_t hidden);
LstmState lstm_step(const Mat& x, const LstmState& prev, const Tensor& wx, const Tensor& wh,
                    const Tensor& b);

/// Everything backprop-through-time needs from one forward pass. Rows of the
/// stacked matrices are ordered (t, batch).
struct LstmSequence {
  std::size_t steps = 0;
  std::size_t batch = 0;
  std::size_t hidden = 0;
  Mat x;       // (T*B, I)
  Mat gates;   // (T*B, 4H), post-activation
  Mat c;       // (T*B, H)
  Mat tanh_c;  // (T*B, H)
  Mat h;       // (T*B, H)
  Mat h_prev;  // (T*B, H), h_{t-1}
  Mat c_prev;  // (T*B, H), c_{t-1}
};

LstmSequence lstm_forward(const Mat& x, std::size_t batch, const Tensor& wx, const Tensor& wh,
                          const Tensor& b);
/// Takes dLoss/dh for every step, accumulates weight gradients, returns dx.
Mat lstm_backward(const LstmSequence& seq, const Mat& dh, Param& wx, Param& wh, Param& b);

std::vector<double> embed(int index, const Tensor& table);
Mat embed_rows(const Tensor& table, std::span<const int> indices);
void embed_backward(Param& table, std::span<const int> indices, const Mat& dy);

struct Categorical {
  std::vector<double> probs;
  int sample = -1;
  double log_prob = 0.0;
  double entropy = 0.0;
};

/// Stable softmax over one row of logits. Draws a sample when `rng` is given.
Categorical softmax_categorical(std::span<const double> logits, Rng* rng = nullptr);
/// Row-wise log-softmax.
Mat log_softmax_rows(const Mat& logits);
/// First index of the maximum.
int argmax(std::span<const double> v);

double sigmoid(double x) noexcept;

}  // namespace edgemig::nn
