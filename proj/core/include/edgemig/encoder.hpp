#pragma once

#include <span>
#include <string>
#include <vector>

#include "edgemig/env.hpp"
#include "edgemig/layers.hpp"
#include "edgemig/tensor.hpp"

namespace edgemig::dracm {

using nn::Mat;

struct NetShape {
  int servers = 64;
  int embed_dim = 2;
  int lstm_hidden = 256;
  int head_hidden = 128;

  int input_width() const noexcept { return 2 * embed_dim + 3; }
};

// Scales that map the largest per-task values in the default ranges near 1.
inline constexpr double kRhoScale = 6e7;
inline constexpr double kCyclesScale = 4e11;
inline constexpr double kDataScale = 4e7;

/// Encoder inputs for one slot before the embedding lookup.
struct StepFeatures {
  int u = 0;
  int prev_action = 0;
  double rho = 0.0;
  double cycles = 0.0;
  double data = 0.0;
};

StepFeatures step_features(const Observation& obs, ServerId prev_action);
/// e_t = [embed(u), embed(prev), rho, c, data] with the scalar scaling applied.
std::vector<double> featurize(const Observation& obs, ServerId prev_action, const nn::Tensor& table);

struct EncoderIds {
  std::size_t embed = 0;
  std::size_t wx = 0;
  std::size_t wh = 0;
  std::size_t b = 0;
};

EncoderIds add_encoder(nn::ParamStore& ps, const NetShape& shape, const std::string& prefix);
void init_encoder(nn::ParamStore& ps, const EncoderIds& ids, Rng& rng);

/// Two dense layers: tanh hidden, identity output.
struct HeadIds {
  std::size_t w1 = 0;
  std::size_t b1 = 0;
  std::size_t w2 = 0;
  std::size_t b2 = 0;
};

HeadIds add_head(nn::ParamStore& ps, const std::string& prefix, int in, int hidden, int out);
void init_head(nn::ParamStore& ps, const HeadIds& ids, Rng& rng);

struct HeadPass {
  Mat hidden;
  Mat out;
};

HeadPass head_forward(const nn::ParamStore& ps, const HeadIds& ids, const Mat& x);
/// Accumulates head gradients and returns dLoss/dx.
Mat head_backward(nn::ParamStore& ps, const HeadIds& ids, const Mat& x, const HeadPass& pass,
                  const Mat& dout);

/// Forward state of a batch of equal-length sequences. Rows are (t, b).
struct EncoderPass {
  std::vector<int> u_idx;
  std::vector<int> prev_idx;
  nn::LstmSequence lstm;

  const Mat& h() const noexcept { return lstm.h; }
};

EncoderPass encode_batch(const nn::ParamStore& ps, const EncoderIds& ids,
                         std::span<const std::vector<StepFeatures>* const> seqs);
void encoder_backward(nn::ParamStore& ps, const EncoderIds& ids, const EncoderPass& pass,
                      const Mat& dh);

/// Step-by-step encoding for online decisions; starts from h = c = 0.
class EncoderCursor {
 public:
  EncoderCursor() = default;
  explicit EncoderCursor(int hidden) { reset(hidden); }

  void reset(int hidden);
  const Mat& step(const nn::ParamStore& ps, const EncoderIds& ids, const StepFeatures& x);
  const Mat& h() const noexcept { return state_.h; }

 private:
  nn::LstmState state_;
};

}  // namespace edgemig::dracm
