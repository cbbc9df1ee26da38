#include "kltensor/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace kltensor {

CpdModel::CpdModel(std::vector<std::size_t> shape, Eigen::VectorXd weights,
                   std::vector<Eigen::MatrixXd> factors)
    : shape_(std::move(shape)), weights_(std::move(weights)), factors_(std::move(factors)) {
  if (shape_.empty()) throw std::invalid_argument("model must have at least one mode");
  if (weights_.size() == 0) throw std::invalid_argument("model rank must be at least 1");
  if (factors_.size() != shape_.size()) {
    throw std::invalid_argument("model needs one factor per mode");
  }
  for (Eigen::Index k = 0; k < weights_.size(); ++k) {
    if (!std::isfinite(weights_[k]) || weights_[k] < 0.0) {
      throw std::invalid_argument("weights must be finite and nonnegative");
    }
  }
  const Eigen::Index rank = weights_.size();
  for (std::size_t n = 0; n < shape_.size(); ++n) {
    auto& f = factors_[n];
    if (shape_[n] == 0 || static_cast<std::size_t>(f.rows()) != shape_[n] || f.cols() != rank) {
      throw std::invalid_argument("factor " + std::to_string(n) + " must be " +
                                  std::to_string(shape_[n]) + " x " + std::to_string(rank));
    }
    if (!f.allFinite() || (f.array() < 0.0).any()) {
      throw std::invalid_argument("factor " + std::to_string(n) +
                                  " has negative or non-finite entries");
    }
    for (Eigen::Index k = 0; k < rank; ++k) {
      const double s = f.col(k).sum();
      const double drift = std::abs(s - 1.0);
      if (drift <= kColumnSumTolerance) continue;
      if (drift > kRenormTolerance) {
        throw std::invalid_argument("factor " + std::to_string(n) + " column " +
                                    std::to_string(k) + " sums to " + std::to_string(s) +
                                    ", expected 1");
      }
      f.col(k) /= s;
    }
  }
}

std::span<const double> CpdModel::column(std::size_t mode, std::size_t k) const {
  const auto& f = factors_.at(mode);
  return {f.data() + k * static_cast<std::size_t>(f.rows()), static_cast<std::size_t>(f.rows())};
}

NormalizedModel::NormalizedModel(CpdModel model) : model_(std::move(model)) {
  const double s = model_.weights().sum();
  if (std::abs(s - 1.0) > kWeightSumTolerance) {
    throw std::invalid_argument("weights sum to " + std::to_string(s) +
                                "; a normalized model needs weights summing to 1");
  }
}

double reconstruct_at(const CpdModel& model, std::span<const Index> index) {
  if (index.size() != model.order()) {
    throw std::invalid_argument("index arity does not match model order");
  }
  for (std::size_t n = 0; n < index.size(); ++n) {
    if (index[n] >= model.shape()[n]) {
      throw std::out_of_range("index " + std::to_string(index[n]) + " out of range for mode " +
                              std::to_string(n));
    }
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < model.rank(); ++k) {
    double prod = model.weights()[static_cast<Eigen::Index>(k)];
    for (std::size_t n = 0; n < index.size(); ++n) {
      prod *= model.factor(n)(index[n], static_cast<Eigen::Index>(k));
    }
    sum += prod;
  }
  return sum;
}

std::vector<double> reconstruct_support(const CpdModel& model, const SparseTensor& t) {
  if (model.shape() != t.shape()) throw std::invalid_argument("model and tensor shapes differ");
  const std::size_t order = t.order();
  const auto rank = static_cast<Eigen::Index>(model.rank());
  std::vector<double> out(t.nnz());
  Eigen::VectorXd prod(rank);
  for (std::size_t e = 0; e < t.nnz(); ++e) {
    const auto idx = t.index(e);
    prod = model.weights();
    for (std::size_t n = 0; n < order; ++n) {
      prod.array() *= model.factor(n).row(idx[n]).transpose().array();
    }
    double sum = 0.0;
    for (Eigen::Index k = 0; k < rank; ++k) sum += prod[k];
    out[e] = sum;
  }
  return out;
}

double total_model_mass(const CpdModel& model) {
  double sum = 0.0;
  for (Eigen::Index k = 0; k < model.weights().size(); ++k) sum += model.weights()[k];
  return sum;
}

NormalizedModel normalize(const CpdModel& model) {
  const double mass = total_model_mass(model);
  if (!(mass > 0.0)) throw std::invalid_argument("cannot normalize a model with zero weights");
  Eigen::VectorXd w = model.weights() / mass;
  return NormalizedModel(CpdModel(model.shape(), std::move(w), model.factors()));
}

CpdModel permute_components(const CpdModel& model, std::span<const std::size_t> perm) {
  const std::size_t rank = model.rank();
  if (perm.size() != rank) throw std::invalid_argument("permutation length must equal rank");
  std::vector<bool> seen(rank, false);
  for (std::size_t p : perm) {
    if (p >= rank || seen[p]) throw std::invalid_argument("not a permutation");
    seen[p] = true;
  }
  Eigen::VectorXd w(static_cast<Eigen::Index>(rank));
  std::vector<Eigen::MatrixXd> factors;
  for (const auto& f : model.factors()) factors.emplace_back(f.rows(), f.cols());
  for (std::size_t k = 0; k < rank; ++k) {
    const auto dst = static_cast<Eigen::Index>(k);
    const auto src = static_cast<Eigen::Index>(perm[k]);
    w[dst] = model.weights()[src];
    for (std::size_t n = 0; n < factors.size(); ++n) {
      factors[n].col(dst) = model.factor(n).col(src);
    }
  }
  return CpdModel(model.shape(), std::move(w), std::move(factors));
}

double tv_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("tv_distance: length mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
  return 0.5 * sum;
}

Eigen::MatrixXd component_distances(const CpdModel& a, const CpdModel& b) {
  if (a.shape() != b.shape()) throw std::invalid_argument("models have different shapes");
  if (a.rank() != b.rank()) throw std::invalid_argument("models have different ranks");
  const std::size_t rank = a.rank();
  const auto order = static_cast<double>(a.order());
  Eigen::MatrixXd cost(static_cast<Eigen::Index>(rank), static_cast<Eigen::Index>(rank));
  for (std::size_t k = 0; k < rank; ++k) {
    for (std::size_t l = 0; l < rank; ++l) {
      double sum = 0.0;
      for (std::size_t n = 0; n < a.order(); ++n) sum += tv_distance(a.column(n, k), b.column(n, l));
      cost(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) = sum / order;
    }
  }
  return cost;
}

namespace {

constexpr std::size_t kExhaustiveAlignLimit = 8;

double permutation_cost(const Eigen::MatrixXd& cost, const std::vector<std::size_t>& perm) {
  double sum = 0.0;
  for (std::size_t k = 0; k < perm.size(); ++k) {
    sum += cost(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(perm[k]));
  }
  return sum;
}

std::vector<std::size_t> greedy_match(const Eigen::MatrixXd& cost) {
  const auto rank = static_cast<std::size_t>(cost.rows());
  std::vector<std::size_t> perm(rank);
  std::vector<bool> row_used(rank, false), col_used(rank, false);
  for (std::size_t step = 0; step < rank; ++step) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bk = 0, bl = 0;
    for (std::size_t k = 0; k < rank; ++k) {
      if (row_used[k]) continue;
      for (std::size_t l = 0; l < rank; ++l) {
        if (col_used[l]) continue;
        const double c = cost(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l));
        if (c < best) {
          best = c;
          bk = k;
          bl = l;
        }
      }
    }
    perm[bk] = bl;
    row_used[bk] = col_used[bl] = true;
  }
  return perm;
}

}  // namespace

Alignment align_components(const CpdModel& a, const CpdModel& b) {
  const Eigen::MatrixXd cost = component_distances(a, b);
  const std::size_t rank = a.rank();
  Alignment result;
  if (rank <= kExhaustiveAlignLimit) {
    std::vector<std::size_t> perm(rank);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    double best = std::numeric_limits<double>::infinity();
    do {
      const double c = permutation_cost(cost, perm);
      if (c < best) {
        best = c;
        result.permutation = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    result.permutation = greedy_match(cost);
  }
  result.distance = permutation_cost(cost, result.permutation) / static_cast<double>(rank);
  return result;
}

}  // namespace kltensor
