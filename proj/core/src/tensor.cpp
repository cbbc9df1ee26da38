#include "kltensor/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "kltensor/model.hpp"

namespace kltensor {

namespace {

void check_shape(const std::vector<std::size_t>& shape) {
  if (shape.empty()) throw std::invalid_argument("tensor must have at least one mode");
  for (std::size_t n = 0; n < shape.size(); ++n) {
    if (shape[n] == 0) {
      throw std::invalid_argument("mode " + std::to_string(n) + " has size 0");
    }
  }
}

std::vector<Index> flatten_indices(const std::vector<Entry>& entries, std::size_t order) {
  std::vector<Index> flat;
  flat.reserve(entries.size() * order);
  for (const auto& e : entries) {
    if (e.index.size() != order) {
      throw std::invalid_argument("entry index arity does not match tensor order");
    }
    flat.insert(flat.end(), e.index.begin(), e.index.end());
  }
  return flat;
}

std::vector<double> entry_values(const std::vector<Entry>& entries) {
  std::vector<double> v;
  v.reserve(entries.size());
  for (const auto& e : entries) v.push_back(e.value);
  return v;
}

}  // namespace

SparseTensor::SparseTensor(std::vector<std::size_t> shape, std::vector<Index> indices,
                           std::vector<double> values)
    : shape_(std::move(shape)) {
  check_shape(shape_);
  const std::size_t order = shape_.size();
  if (indices.size() != values.size() * order) {
    throw std::invalid_argument("index list length does not match values x order");
  }
  for (std::size_t e = 0; e < values.size(); ++e) {
    const double v = values[e];
    if (!std::isfinite(v) || v < 0.0) {
      throw std::invalid_argument("entry " + std::to_string(e) +
                                  " has a negative or non-finite value");
    }
    for (std::size_t n = 0; n < order; ++n) {
      if (indices[e * order + n] >= shape_[n]) {
        throw std::out_of_range("entry " + std::to_string(e) + " index " +
                                std::to_string(indices[e * order + n]) + " out of range for mode " +
                                std::to_string(n));
      }
    }
  }

  std::vector<std::size_t> perm(values.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  auto key = [&](std::size_t e) {
    return std::span<const Index>(indices.data() + e * order, order);
  };
  std::stable_sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) {
    return std::ranges::lexicographical_compare(key(a), key(b));
  });

  indices_.reserve(indices.size());
  values_.reserve(values.size());
  for (std::size_t p = 0; p < perm.size();) {
    const auto idx = key(perm[p]);
    double sum = 0.0;
    std::size_t q = p;
    for (; q < perm.size() && std::ranges::equal(key(perm[q]), idx); ++q) sum += values[perm[q]];
    if (sum > 0.0) {
      indices_.insert(indices_.end(), idx.begin(), idx.end());
      values_.push_back(sum);
    }
    p = q;
  }
}

SparseTensor::SparseTensor(std::vector<std::size_t> shape, const std::vector<Entry>& entries)
    : SparseTensor(shape, flatten_indices(entries, shape.size()), entry_values(entries)) {}

SparseTensor::SparseTensor(Presorted, std::vector<std::size_t> shape, std::vector<Index> indices,
                           std::vector<double> values)
    : shape_(std::move(shape)), indices_(std::move(indices)), values_(std::move(values)) {}

std::optional<std::size_t> SparseTensor::find(std::span<const Index> index) const {
  if (index.size() != order()) return std::nullopt;
  std::size_t lo = 0, hi = nnz();
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (std::ranges::lexicographical_compare(this->index(mid), index)) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  if (lo < nnz() && std::ranges::equal(this->index(lo), index)) return lo;
  return std::nullopt;
}

SparseTensor SparseTensor::with_values(std::vector<double> values) const {
  if (values.size() != nnz()) {
    throw std::invalid_argument("with_values: length does not match nnz");
  }
  for (double v : values) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("with_values: values must be positive and finite");
    }
  }
  return SparseTensor(Presorted{}, shape_, indices_, std::move(values));
}

double total_mass(const SparseTensor& t) {
  double sum = 0.0;
  for (double v : t.values()) sum += v;
  return sum;
}

std::vector<double> marginal(const SparseTensor& t, std::size_t mode) {
  if (mode >= t.order()) {
    throw std::out_of_range("mode " + std::to_string(mode) + " out of range for order " +
                            std::to_string(t.order()));
  }
  std::vector<double> out(t.dim(mode), 0.0);
  for (std::size_t e = 0; e < t.nnz(); ++e) out[t.index(e)[mode]] += t.value(e);
  return out;
}

double ttv_all(const SparseTensor& t, std::span<const std::span<const double>> vecs) {
  if (vecs.size() != t.order()) {
    throw std::invalid_argument("ttv_all: need one vector per mode");
  }
  for (std::size_t n = 0; n < t.order(); ++n) {
    if (vecs[n].size() != t.dim(n)) {
      throw std::invalid_argument("ttv_all: vector " + std::to_string(n) + " has length " +
                                  std::to_string(vecs[n].size()) + ", expected " +
                                  std::to_string(t.dim(n)));
    }
  }
  double sum = 0.0;
  for (std::size_t e = 0; e < t.nnz(); ++e) {
    const auto idx = t.index(e);
    double prod = t.value(e);
    for (std::size_t n = 0; n < idx.size(); ++n) prod *= vecs[n][idx[n]];
    sum += prod;
  }
  return sum;
}

double ttv_all(const SparseTensor& t, const std::vector<std::vector<double>>& vecs) {
  std::vector<std::span<const double>> spans(vecs.begin(), vecs.end());
  return ttv_all(t, spans);
}

Eigen::MatrixXd mttkrp(const SparseTensor& t, const std::vector<Eigen::MatrixXd>& factors,
                       std::size_t mode) {
  const std::size_t order = t.order();
  if (mode >= order) throw std::out_of_range("mttkrp: mode out of range");
  if (factors.size() != order) throw std::invalid_argument("mttkrp: need one factor per mode");
  const Eigen::Index rank = factors[0].cols();
  for (std::size_t n = 0; n < order; ++n) {
    if (static_cast<std::size_t>(factors[n].rows()) != t.dim(n) || factors[n].cols() != rank) {
      throw std::invalid_argument("mttkrp: factor " + std::to_string(n) +
                                  " has the wrong dimensions");
    }
  }

  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(t.dim(mode)), rank);
  Eigen::VectorXd row(rank);
  for (std::size_t e = 0; e < t.nnz(); ++e) {
    const auto idx = t.index(e);
    row.setConstant(t.value(e));
    for (std::size_t n = 0; n < order; ++n) {
      if (n == mode) continue;
      row.array() *= factors[n].row(idx[n]).transpose().array();
    }
    out.row(idx[mode]) += row.transpose();
  }
  return out;
}

SparseTensor scaled_tensor(const SparseTensor& t, const CpdModel& model) {
  std::vector<double> recon = reconstruct_support(model, t);
  for (std::size_t e = 0; e < t.nnz(); ++e) {
    recon[e] = t.value(e) / std::max(recon[e], kDenomFloor);
  }
  return t.with_values(std::move(recon));
}

}  // namespace kltensor
