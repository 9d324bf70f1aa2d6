#pragma once

#include <Eigen/Core>
#include <Eigen/StdVector>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "edgemig/rng.hpp"

namespace edgemig::nn {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<Mat>;
using ConstMatMap = Eigen::Map<const Mat>;

/// Dense row-major array of doubles. One- and two-dimensional tensors can be
/// viewed as Eigen matrices (a 1-D tensor is a single row).
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);

  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  std::size_t size() const noexcept { return data_.size(); }
  std::size_t rows() const noexcept;
  std::size_t cols() const noexcept;

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  MatMap matrix();
  ConstMatMap matrix() const;

  void fill(double v);
  bool all_finite() const noexcept;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::vector<std::size_t> shape_;
  // Fixed alignment: Eigen picks its vectorised reduction split from the
  // address, so unaligned storage makes sums depend on where the heap put us.
  std::vector<double, Eigen::aligned_allocator<double>> data_;
};

struct Param {
  std::string name;
  Tensor value;
  Tensor grad;
};

/// Named trainable parameters. Parameters are addressed by the index
/// returned from add(), which stays valid for the life of the store and
/// across copies, so a copied store is an independent network snapshot.
class ParamStore {
 public:
  std::size_t add(const std::string& name, std::vector<std::size_t> shape);

  Param& operator[](std::size_t i) { return params_.at(i); }
  const Param& operator[](std::size_t i) const { return params_.at(i); }
  std::size_t index_of(const std::string& name) const;
  std::size_t size() const noexcept { return params_.size(); }
  std::size_t total_values() const noexcept;

  auto begin() noexcept { return params_.begin(); }
  auto end() noexcept { return params_.end(); }
  auto begin() const noexcept { return params_.begin(); }
  auto end() const noexcept { return params_.end(); }

  void zero_grad();
  /// Copies values (not gradients) from a store with the same layout.
  void copy_values_from(const ParamStore& other);
  bool same_values(const ParamStore& other) const;

  void init_uniform(std::size_t i, double scale, Rng& rng);

 private:
  std::vector<Param> params_;
};

struct AdamState {
  double lr = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step = 0;
  std::vector<Tensor> m;
  std::vector<Tensor> v;
};

/// Bias-corrected Adam step over every parameter, then zeroes the gradients.
void adam_update(ParamStore& params, AdamState& opt);

struct FdOptions {
  double h = 1e-5;
  /// 0 checks every coordinate; otherwise a seeded random subset of this
  /// many coordinates (at least 50) when the store is larger.
  std::size_t max_coords = 0;
  std::uint64_t seed = 0;
};

struct FdResult {
  double max_rel_error = 0.0;
  std::size_t coords_checked = 0;
  std::string worst_param;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

/// Loss callback: returns the loss at the store's current values and, when
/// `with_grad` is set, accumulates the analytic gradient into the store.
using LossFn = std::function<double(ParamStore&, bool with_grad)>;

/// Central differences against the analytic gradient. Relative error uses
/// max(|analytic|, |numeric|, 1e-8) as the denominator.
FdResult finite_diff_check(const LossFn& loss, ParamStore& params, const FdOptions& opts = {});

double relative_error(double a, double b) noexcept;

}  // namespace edgemig::nn
