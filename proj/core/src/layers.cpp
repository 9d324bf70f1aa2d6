#include "edgemig/layers.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "edgemig/error.hpp"

namespace edgemig::nn {
namespace {

using Index = Eigen::Index;

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(Errc::ShapeMismatch, what);
}

}  // namespace

double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Mat dense_forward(const Mat& x, const Tensor& w, const Tensor& b, Activation act) {
  require(w.shape().size() == 2 && static_cast<Index>(w.cols()) == x.cols(),
          "dense: input width " + std::to_string(x.cols()) + " vs weight cols " +
              std::to_string(w.cols()));
  require(b.size() == w.rows(), "dense: bias size");
  Mat y = x * w.matrix().transpose();
  y.rowwise() += b.matrix().row(0);
  if (act == Activation::Tanh) y = y.array().tanh().matrix();
  return y;
}

Mat dense_backward(const Mat& x, const Mat& y, const Mat& dy, Param& w, Param& b, Activation act) {
  require(dy.rows() == x.rows() && dy.cols() == static_cast<Index>(w.value.rows()),
          "dense backward: upstream gradient shape");
  Mat dz = dy;
  if (act == Activation::Tanh) dz = (dy.array() * (1.0 - y.array().square())).matrix();
  w.grad.matrix().noalias() += dz.transpose() * x;
  b.grad.matrix().row(0) += dz.colwise().sum();
  return dz * w.value.matrix();
}

LstmState lstm_zero_state(std::size_t batch, std::size_t hidden) {
  return {Mat::Zero(static_cast<Index>(batch), static_cast<Index>(hidden)),
          Mat::Zero(static_cast<Index>(batch), static_cast<Index>(hidden))};
}

LstmState lstm_step(const Mat& x, const LstmState& prev, const Tensor& wx, const Tensor& wh,
                    const Tensor& b) {
  const auto H = static_cast<Index>(wh.cols());
  require(static_cast<Index>(wx.rows()) == 4 * H && static_cast<Index>(wh.rows()) == 4 * H,
          "lstm: gate rows must be 4*hidden");
  require(x.cols() == static_cast<Index>(wx.cols()), "lstm: input width");
  require(prev.h.cols() == H && prev.c.cols() == H && prev.h.rows() == x.rows(),
          "lstm: state shape");
  Mat z = x * wx.matrix().transpose() + prev.h * wh.matrix().transpose();
  z.rowwise() += b.matrix().row(0);
  const auto sig = [](double v) { return sigmoid(v); };
  const Mat i = z.middleCols(0, H).unaryExpr(sig);
  const Mat f = z.middleCols(H, H).unaryExpr(sig);
  const Mat g = z.middleCols(2 * H, H).array().tanh().matrix();
  const Mat o = z.middleCols(3 * H, H).unaryExpr(sig);
  LstmState next;
  next.c = (f.array() * prev.c.array() + i.array() * g.array()).matrix();
  next.h = (o.array() * next.c.array().tanh()).matrix();
  return next;
}

LstmSequence lstm_forward(const Mat& x, std::size_t batch, const Tensor& wx, const Tensor& wh,
                          const Tensor& b) {
  const auto H = static_cast<Index>(wh.cols());
  const auto B = static_cast<Index>(batch);
  require(B > 0 && x.rows() % B == 0, "lstm: rows must be a multiple of the batch");
  require(static_cast<Index>(wx.rows()) == 4 * H && static_cast<Index>(wh.rows()) == 4 * H,
          "lstm: gate rows must be 4*hidden");
  require(x.cols() == static_cast<Index>(wx.cols()), "lstm: input width");
  const Index T = x.rows() / B;

  LstmSequence s;
  s.steps = static_cast<std::size_t>(T);
  s.batch = batch;
  s.hidden = static_cast<std::size_t>(H);
  s.x = x;
  s.gates = x * wx.matrix().transpose();
  s.gates.rowwise() += b.matrix().row(0);
  s.c.resize(T * B, H);
  s.tanh_c.resize(T * B, H);
  s.h.resize(T * B, H);
  s.h_prev.resize(T * B, H);
  s.c_prev.resize(T * B, H);

  Mat h = Mat::Zero(B, H);
  Mat c = Mat::Zero(B, H);
  const auto sig = [](double v) { return sigmoid(v); };
  const auto whT = wh.matrix().transpose();
  for (Index t = 0; t < T; ++t) {
    auto z = s.gates.middleRows(t * B, B);
    z.noalias() += h * whT;
    z.middleCols(0, H) = z.middleCols(0, H).unaryExpr(sig);
    z.middleCols(H, H) = z.middleCols(H, H).unaryExpr(sig);
    z.middleCols(2 * H, H) = z.middleCols(2 * H, H).array().tanh().matrix();
    z.middleCols(3 * H, H) = z.middleCols(3 * H, H).unaryExpr(sig);
    s.h_prev.middleRows(t * B, B) = h;
    s.c_prev.middleRows(t * B, B) = c;
    c = (z.middleCols(H, H).array() * c.array() +
         z.middleCols(0, H).array() * z.middleCols(2 * H, H).array())
            .matrix();
    s.c.middleRows(t * B, B) = c;
    s.tanh_c.middleRows(t * B, B) = c.array().tanh().matrix();
    h = (z.middleCols(3 * H, H).array() * s.tanh_c.middleRows(t * B, B).array()).matrix();
    s.h.middleRows(t * B, B) = h;
  }
  return s;
}

Mat lstm_backward(const LstmSequence& s, const Mat& dh_in, Param& wx, Param& wh, Param& b) {
  const auto H = static_cast<Index>(s.hidden);
  const auto B = static_cast<Index>(s.batch);
  const auto T = static_cast<Index>(s.steps);
  require(dh_in.rows() == T * B && dh_in.cols() == H, "lstm backward: dh shape");

  Mat dz(T * B, 4 * H);
  Mat dh_next = Mat::Zero(B, H);
  Mat dc_next = Mat::Zero(B, H);
  const auto wh_v = wh.value.matrix();
  for (Index t = T - 1; t >= 0; --t) {
    const auto rows = [&](const Mat& m) { return m.middleRows(t * B, B).array(); };
    const auto gates = s.gates.middleRows(t * B, B);
    const auto i = gates.middleCols(0, H).array();
    const auto f = gates.middleCols(H, H).array();
    const auto g = gates.middleCols(2 * H, H).array();
    const auto o = gates.middleCols(3 * H, H).array();
    const auto tc = rows(s.tanh_c);

    const Eigen::ArrayXXd dh = dh_in.middleRows(t * B, B).array() + dh_next.array();
    const Eigen::ArrayXXd dc = dc_next.array() + dh * o * (1.0 - tc.square());
    auto dzt = dz.middleRows(t * B, B);
    dzt.middleCols(0, H) = (dc * g * i * (1.0 - i)).matrix();
    dzt.middleCols(H, H) = (dc * rows(s.c_prev) * f * (1.0 - f)).matrix();
    dzt.middleCols(2 * H, H) = (dc * i * (1.0 - g.square())).matrix();
    dzt.middleCols(3 * H, H) = (dh * tc * o * (1.0 - o)).matrix();
    dc_next = (dc * f).matrix();
    dh_next.noalias() = dzt * wh_v;
  }
  wx.grad.matrix().noalias() += dz.transpose() * s.x;
  wh.grad.matrix().noalias() += dz.transpose() * s.h_prev;
  b.grad.matrix().row(0) += dz.colwise().sum();
  return dz * wx.value.matrix();
}

std::vector<double> embed(int index, const Tensor& table) {
  if (index < 0 || static_cast<std::size_t>(index) >= table.rows())
    throw Error(Errc::IndexOutOfRange,
                "embedding row " + std::to_string(index) + " of " + std::to_string(table.rows()));
  const auto row = table.matrix().row(index);
  return std::vector<double>(row.data(), row.data() + row.size());
}

Mat embed_rows(const Tensor& table, std::span<const int> indices) {
  Mat out(static_cast<Index>(indices.size()), static_cast<Index>(table.cols()));
  const auto m = table.matrix();
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const int k = indices[r];
    if (k < 0 || static_cast<std::size_t>(k) >= table.rows())
      throw Error(Errc::IndexOutOfRange, "embedding row " + std::to_string(k));
    out.row(static_cast<Index>(r)) = m.row(k);
  }
  return out;
}

void embed_backward(Param& table, std::span<const int> indices, const Mat& dy) {
  require(dy.rows() == static_cast<Index>(indices.size()), "embedding backward: rows");
  auto g = table.grad.matrix();
  for (std::size_t r = 0; r < indices.size(); ++r)
    g.row(indices[r]) += dy.row(static_cast<Index>(r));
}

Categorical softmax_categorical(std::span<const double> logits, Rng* rng) {
  if (logits.empty()) throw Error(Errc::ShapeMismatch, "softmax over zero actions");
  double mx = -std::numeric_limits<double>::infinity();
  for (double z : logits) {
    if (!std::isfinite(z)) throw Error(Errc::NonFiniteLogits, "logit " + std::to_string(z));
    mx = std::max(mx, z);
  }
  Categorical out;
  out.probs.resize(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) sum += std::exp(logits[i] - mx);
  const double log_sum = std::log(sum);
  std::vector<double> logp(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    logp[i] = logits[i] - mx - log_sum;
    out.probs[i] = std::exp(logp[i]);
    out.entropy -= out.probs[i] * logp[i];
  }
  if (rng) {
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(*rng);
    double cum = 0.0;
    out.sample = static_cast<int>(logits.size()) - 1;
    for (std::size_t i = 0; i < logits.size(); ++i) {
      cum += out.probs[i];
      if (u < cum) {
        out.sample = static_cast<int>(i);
        break;
      }
    }
    // Guard the rounding tail: never return a zero-probability action.
    while (out.sample > 0 && out.probs[static_cast<std::size_t>(out.sample)] == 0.0) --out.sample;
    out.log_prob = logp[static_cast<std::size_t>(out.sample)];
  }
  return out;
}

Mat log_softmax_rows(const Mat& logits) {
  Mat out = logits;
  for (Index r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    const double mx = row.maxCoeff();
    row.array() -= mx;
    row.array() -= std::log(row.array().exp().sum());
  }
  return out;
}

int argmax(std::span<const double> v) {
  int best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  return best;
}

}  // namespace edgemig::nn
