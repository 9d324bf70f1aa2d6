#include "edgemig/encoder.hpp"

#include <cmath>

#include "edgemig/error.hpp"

namespace edgemig::dracm {

using nn::ParamStore;

StepFeatures step_features(const Observation& obs, ServerId prev_action) {
  return {obs.u.index, prev_action.index, obs.rho / kRhoScale, obs.c / kCyclesScale,
          obs.data / kDataScale};
}

std::vector<double> featurize(const Observation& obs, ServerId prev_action, const nn::Tensor& table) {
  const StepFeatures f = step_features(obs, prev_action);
  std::vector<double> e = nn::embed(f.u, table);
  const auto prev = nn::embed(f.prev_action, table);
  e.insert(e.end(), prev.begin(), prev.end());
  e.push_back(f.rho);
  e.push_back(f.cycles);
  e.push_back(f.data);
  return e;
}

EncoderIds add_encoder(ParamStore& ps, const NetShape& shape, const std::string& prefix) {
  const auto M = static_cast<std::size_t>(shape.servers);
  const auto D = static_cast<std::size_t>(shape.embed_dim);
  const auto H = static_cast<std::size_t>(shape.lstm_hidden);
  const auto I = static_cast<std::size_t>(shape.input_width());
  EncoderIds ids;
  ids.embed = ps.add(prefix + ".embed", {M, D});
  ids.wx = ps.add(prefix + ".lstm.wx", {4 * H, I});
  ids.wh = ps.add(prefix + ".lstm.wh", {4 * H, H});
  ids.b = ps.add(prefix + ".lstm.b", {4 * H});
  return ids;
}

void init_encoder(ParamStore& ps, const EncoderIds& ids, Rng& rng) {
  ps.init_uniform(ids.embed, 0.1, rng);
  ps.init_uniform(ids.wx, 1.0 / std::sqrt(static_cast<double>(ps[ids.wx].value.cols())), rng);
  ps.init_uniform(ids.wh, 1.0 / std::sqrt(static_cast<double>(ps[ids.wh].value.cols())), rng);
  auto& b = ps[ids.b].value;
  b.fill(0.0);
  const std::size_t H = b.size() / 4;
  for (std::size_t k = H; k < 2 * H; ++k) b[k] = 1.0;
}

HeadIds add_head(ParamStore& ps, const std::string& prefix, int in, int hidden, int out) {
  HeadIds ids;
  ids.w1 = ps.add(prefix + ".l1.w", {static_cast<std::size_t>(hidden), static_cast<std::size_t>(in)});
  ids.b1 = ps.add(prefix + ".l1.b", {static_cast<std::size_t>(hidden)});
  ids.w2 = ps.add(prefix + ".out.w", {static_cast<std::size_t>(out), static_cast<std::size_t>(hidden)});
  ids.b2 = ps.add(prefix + ".out.b", {static_cast<std::size_t>(out)});
  return ids;
}

void init_head(ParamStore& ps, const HeadIds& ids, Rng& rng) {
  ps.init_uniform(ids.w1, 1.0 / std::sqrt(static_cast<double>(ps[ids.w1].value.cols())), rng);
  ps.init_uniform(ids.w2, 1.0 / std::sqrt(static_cast<double>(ps[ids.w2].value.cols())), rng);
  ps[ids.b1].value.fill(0.0);
  ps[ids.b2].value.fill(0.0);
}

HeadPass head_forward(const ParamStore& ps, const HeadIds& ids, const Mat& x) {
  HeadPass p;
  p.hidden = nn::dense_forward(x, ps[ids.w1].value, ps[ids.b1].value, nn::Activation::Tanh);
  p.out = nn::dense_forward(p.hidden, ps[ids.w2].value, ps[ids.b2].value, nn::Activation::Identity);
  return p;
}

Mat head_backward(ParamStore& ps, const HeadIds& ids, const Mat& x, const HeadPass& pass,
                  const Mat& dout) {
  const Mat dhidden = nn::dense_backward(pass.hidden, pass.out, dout, ps[ids.w2], ps[ids.b2],
                                         nn::Activation::Identity);
  return nn::dense_backward(x, pass.hidden, dhidden, ps[ids.w1], ps[ids.b1], nn::Activation::Tanh);
}

EncoderPass encode_batch(const ParamStore& ps, const EncoderIds& ids,
                         std::span<const std::vector<StepFeatures>* const> seqs) {
  if (seqs.empty()) throw Error(Errc::EmptyBatch, "no sequences to encode");
  const std::size_t B = seqs.size();
  const std::size_t T = seqs.front()->size();
  for (const auto* s : seqs)
    if (s->size() != T) throw Error(Errc::LengthMismatch, "sequences in a batch differ in length");

  const auto& table = ps[ids.embed].value;
  const auto D = static_cast<Eigen::Index>(table.cols());
  const auto I = static_cast<Eigen::Index>(ps[ids.wx].value.cols());
  if (I != 2 * D + 3) throw Error(Errc::ShapeMismatch, "encoder input width");

  EncoderPass pass;
  pass.u_idx.resize(T * B);
  pass.prev_idx.resize(T * B);
  Mat x(static_cast<Eigen::Index>(T * B), I);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t b = 0; b < B; ++b) {
      const StepFeatures& f = (*seqs[b])[t];
      const std::size_t r = t * B + b;
      pass.u_idx[r] = f.u;
      pass.prev_idx[r] = f.prev_action;
      auto row = x.row(static_cast<Eigen::Index>(r));
      row(2 * D) = f.rho;
      row(2 * D + 1) = f.cycles;
      row(2 * D + 2) = f.data;
    }
  }
  x.leftCols(D) = nn::embed_rows(table, pass.u_idx);
  x.middleCols(D, D) = nn::embed_rows(table, pass.prev_idx);
  pass.lstm = nn::lstm_forward(x, B, ps[ids.wx].value, ps[ids.wh].value, ps[ids.b].value);
  return pass;
}

void encoder_backward(ParamStore& ps, const EncoderIds& ids, const EncoderPass& pass,
                      const Mat& dh) {
  const Mat dx = nn::lstm_backward(pass.lstm, dh, ps[ids.wx], ps[ids.wh], ps[ids.b]);
  const auto D = static_cast<Eigen::Index>(ps[ids.embed].value.cols());
  nn::embed_backward(ps[ids.embed], pass.u_idx, dx.leftCols(D));
  nn::embed_backward(ps[ids.embed], pass.prev_idx, dx.middleCols(D, D));
}

void EncoderCursor::reset(int hidden) {
  state_ = nn::lstm_zero_state(1, static_cast<std::size_t>(hidden));
}

const Mat& EncoderCursor::step(const ParamStore& ps, const EncoderIds& ids, const StepFeatures& f) {
  const auto& table = ps[ids.embed].value;
  const auto D = static_cast<Eigen::Index>(table.cols());
  Mat x(1, 2 * D + 3);
  const int u[1] = {f.u};
  const int p[1] = {f.prev_action};
  x.leftCols(D) = nn::embed_rows(table, u);
  x.middleCols(D, D) = nn::embed_rows(table, p);
  x(0, 2 * D) = f.rho;
  x(0, 2 * D + 1) = f.cycles;
  x(0, 2 * D + 2) = f.data;
  state_ = nn::lstm_step(x, state_, ps[ids.wx].value, ps[ids.wh].value, ps[ids.b].value);
  return state_.h;
}

}  // namespace edgemig::dracm
