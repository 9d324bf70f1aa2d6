#include "edgemig/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "edgemig/error.hpp"

namespace edgemig::nn {

Tensor::Tensor(std::vector<std::size_t> shape, double fill) : shape_(std::move(shape)) {
  const std::size_t n = std::accumulate(shape_.begin(), shape_.end(), std::size_t{1},
                                        std::multiplies<>());
  data_.assign(n, fill);
}

std::size_t Tensor::rows() const noexcept {
  if (shape_.size() < 2) return 1;
  return data_.size() / shape_.back();
}

std::size_t Tensor::cols() const noexcept { return shape_.empty() ? 1 : shape_.back(); }

MatMap Tensor::matrix() {
  return MatMap(data_.data(), static_cast<Eigen::Index>(rows()), static_cast<Eigen::Index>(cols()));
}

ConstMatMap Tensor::matrix() const {
  return ConstMatMap(data_.data(), static_cast<Eigen::Index>(rows()),
                     static_cast<Eigen::Index>(cols()));
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

std::size_t ParamStore::add(const std::string& name, std::vector<std::size_t> shape) {
  for (const auto& p : params_)
    if (p.name == name) throw Error(Errc::ConfigInvalid, "duplicate parameter " + name);
  Param p{name, Tensor(shape), Tensor(shape)};
  params_.push_back(std::move(p));
  return params_.size() - 1;
}

std::size_t ParamStore::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < params_.size(); ++i)
    if (params_[i].name == name) return i;
  throw Error(Errc::IndexOutOfRange, "no parameter named " + name);
}

std::size_t ParamStore::total_values() const noexcept {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

void ParamStore::zero_grad() {
  for (auto& p : params_) p.grad.fill(0.0);
}

void ParamStore::copy_values_from(const ParamStore& other) {
  if (other.params_.size() != params_.size())
    throw Error(Errc::ShapeMismatch, "parameter stores differ in layout");
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_[i].value.shape() != other.params_[i].value.shape())
      throw Error(Errc::ShapeMismatch, "parameter " + params_[i].name + " differs in shape");
    params_[i].value = other.params_[i].value;
  }
}

bool ParamStore::same_values(const ParamStore& other) const {
  if (other.params_.size() != params_.size()) return false;
  for (std::size_t i = 0; i < params_.size(); ++i)
    if (!(params_[i].value == other.params_[i].value)) return false;
  return true;
}

void ParamStore::init_uniform(std::size_t i, double scale, Rng& rng) {
  for (double& v : params_.at(i).value.values()) v = uniform(rng, -scale, scale);
}

void adam_update(ParamStore& params, AdamState& opt) {
  if (opt.m.size() != params.size()) {
    opt.m.clear();
    opt.v.clear();
    for (const auto& p : params) {
      opt.m.emplace_back(p.value.shape());
      opt.v.emplace_back(p.value.shape());
    }
  }
  ++opt.step;
  const double c1 = 1.0 - std::pow(opt.beta1, static_cast<double>(opt.step));
  const double c2 = 1.0 - std::pow(opt.beta2, static_cast<double>(opt.step));
  std::size_t k = 0;
  for (auto& p : params) {
    auto value = p.value.values();
    auto grad = p.grad.values();
    auto m = opt.m[k].values();
    auto v = opt.v[k].values();
    for (std::size_t i = 0; i < value.size(); ++i) {
      m[i] = opt.beta1 * m[i] + (1.0 - opt.beta1) * grad[i];
      v[i] = opt.beta2 * v[i] + (1.0 - opt.beta2) * grad[i] * grad[i];
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      value[i] -= opt.lr * mhat / (std::sqrt(vhat) + opt.eps);
      grad[i] = 0.0;
    }
    ++k;
  }
}

double relative_error(double a, double b) noexcept {
  const double denom = std::max({std::abs(a), std::abs(b), 1e-8});
  return std::abs(a - b) / denom;
}

FdResult finite_diff_check(const LossFn& loss, ParamStore& params, const FdOptions& opts) {
  params.zero_grad();
  loss(params, true);

  struct Coord {
    std::size_t param;
    std::size_t index;
  };
  std::vector<Coord> coords;
  for (std::size_t p = 0; p < params.size(); ++p)
    for (std::size_t i = 0; i < params[p].value.size(); ++i) coords.push_back({p, i});

  if (opts.max_coords != 0 && coords.size() > std::max<std::size_t>(opts.max_coords, 50)) {
    const std::size_t keep = std::max<std::size_t>(opts.max_coords, 50);
    Rng rng = make_stream(opts.seed, StreamPurpose::Check);
    for (std::size_t i = 0; i < keep; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, coords.size() - 1);
      std::swap(coords[i], coords[pick(rng)]);
    }
    coords.resize(keep);
  }

  FdResult res;
  for (const Coord& c : coords) {
    double& v = params[c.param].value[c.index];
    const double orig = v;
    v = orig + opts.h;
    const double up = loss(params, false);
    v = orig - opts.h;
    const double down = loss(params, false);
    v = orig;
    const double numeric = (up - down) / (2.0 * opts.h);
    const double analytic = params[c.param].grad[c.index];
    const double err = relative_error(analytic, numeric);
    if (err > res.max_rel_error || res.coords_checked == 0) {
      res.max_rel_error = std::max(res.max_rel_error, err);
      res.worst_param = params[c.param].name + "[" + std::to_string(c.index) + "]";
      res.worst_analytic = analytic;
      res.worst_numeric = numeric;
    }
    ++res.coords_checked;
  }
  return res;
}

}  // namespace edgemig::nn
