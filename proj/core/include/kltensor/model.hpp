#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "kltensor/tensor.hpp"

namespace kltensor {

/// Rank-K nonnegative CPD model with stochastic factors.
///
/// Factor n is a shape[n] x K matrix whose k-th column is the distribution
/// of mode n under component k; every column sums to one. Column sums that
/// drift by more than kColumnSumTolerance but less than kRenormTolerance
/// are renormalized on construction. Anything further off is rejected.
class CpdModel {
 public:
  static constexpr double kColumnSumTolerance = 1e-10;
  static constexpr double kRenormTolerance = 1e-6;

  CpdModel(std::vector<std::size_t> shape, Eigen::VectorXd weights,
           std::vector<Eigen::MatrixXd> factors);

  std::size_t order() const { return shape_.size(); }
  std::size_t rank() const { return static_cast<std::size_t>(weights_.size()); }
  const std::vector<std::size_t>& shape() const { return shape_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  const Eigen::MatrixXd& factor(std::size_t mode) const { return factors_.at(mode); }
  const std::vector<Eigen::MatrixXd>& factors() const { return factors_; }

  /// Column k of factor `mode` as a contiguous span.
  std::span<const double> column(std::size_t mode, std::size_t k) const;

 private:
  std::vector<std::size_t> shape_;
  Eigen::VectorXd weights_;
  std::vector<Eigen::MatrixXd> factors_;
};

/// CpdModel whose weights form a probability vector (the naive-Bayes prior).
class NormalizedModel {
 public:
  static constexpr double kWeightSumTolerance = 1e-10;

  /// Throws std::invalid_argument unless the weights sum to one.
  explicit NormalizedModel(CpdModel model);

  const CpdModel& model() const { return model_; }
  const Eigen::VectorXd& weights() const { return model_.weights(); }
  std::size_t rank() const { return model_.rank(); }
  const std::vector<std::size_t>& shape() const { return model_.shape(); }

 private:
  CpdModel model_;
};

/// sum_k lambda_k prod_n P_n[i_n, k]
double reconstruct_at(const CpdModel& model, std::span<const Index> index);

/// Reconstruction at every support entry of `t`, in entry order.
std::vector<double> reconstruct_support(const CpdModel& model, const SparseTensor& t);

/// sum_k lambda_k, which equals the grid sum of the reconstruction.
double total_model_mass(const CpdModel& model);

NormalizedModel normalize(const CpdModel& model);

/// Component k of the result is component `perm[k]` of `model`.
CpdModel permute_components(const CpdModel& model, std::span<const std::size_t> perm);

/// Half the L1 distance between two equal-length vectors.
double tv_distance(std::span<const double> a, std::span<const double> b);

struct Alignment {
  /// a's component k is matched with b's component permutation[k].
  std::vector<std::size_t> permutation;
  /// Mean over components and modes of the matched TV distances.
  double distance = 0.0;
};

/// Matches b's components to a's. Exhaustive for K <= 8 (ties go to the
/// lexicographically smallest permutation), greedy on the cost matrix above.
Alignment align_components(const CpdModel& a, const CpdModel& b);

/// K x K matrix of mean-over-modes TV distance between a's component k
/// and b's component l.
Eigen::MatrixXd component_distances(const CpdModel& a, const CpdModel& b);

}  // namespace kltensor
