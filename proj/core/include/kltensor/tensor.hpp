#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace kltensor {

using Index = std::uint32_t;

/// Lower clamp applied to model reconstructions before they are used as
/// denominators or inside a logarithm.
inline constexpr double kDenomFloor = 1e-300;

class CpdModel;

/// One nonzero of a sparse tensor, used for convenient construction.
struct Entry {
  std::vector<Index> index;
  double value = 0.0;
};

/// N-way nonnegative tensor in coordinate (COO) form.
///
/// Entries are kept sorted lexicographically by index tuple. Construction
/// sums duplicate coordinates and drops explicit zeros, so every stored
/// value is strictly positive. The object is immutable afterwards.
class SparseTensor {
 public:
  /// `indices` is row-major with `order()` coordinates per entry.
  SparseTensor(std::vector<std::size_t> shape, std::vector<Index> indices,
               std::vector<double> values);
  SparseTensor(std::vector<std::size_t> shape, const std::vector<Entry>& entries);

  std::size_t order() const { return shape_.size(); }
  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t dim(std::size_t mode) const { return shape_.at(mode); }
  std::size_t nnz() const { return values_.size(); }

  std::span<const Index> index(std::size_t entry) const {
    return {indices_.data() + entry * order(), order()};
  }
  double value(std::size_t entry) const { return values_[entry]; }
  std::span<const double> values() const { return values_; }
  std::span<const Index> indices() const { return indices_; }

  /// Position of `index` in the entry list, if it is part of the support.
  std::optional<std::size_t> find(std::span<const Index> index) const;

  /// Same support, new values. Values must be positive and finite and
  /// match `nnz()` in length; no re-sorting happens.
  SparseTensor with_values(std::vector<double> values) const;

  friend bool operator==(const SparseTensor&, const SparseTensor&) = default;

 private:
  struct Presorted {};
  SparseTensor(Presorted, std::vector<std::size_t> shape, std::vector<Index> indices,
               std::vector<double> values);

  std::vector<std::size_t> shape_;
  std::vector<Index> indices_;
  std::vector<double> values_;
};

/// Sum of all values, accumulated in entry order.
double total_mass(const SparseTensor& t);

/// Mode-`mode` sums: component j adds every entry whose mode index is j.
std::vector<double> marginal(const SparseTensor& t, std::size_t mode);

/// Contracts every mode with one vector: sum over entries of
/// value * prod_n vecs[n][i_n].
double ttv_all(const SparseTensor& t, std::span<const std::span<const double>> vecs);
double ttv_all(const SparseTensor& t, const std::vector<std::vector<double>>& vecs);

/// Matricized tensor times Khatri-Rao product of all factors except `mode`.
/// Result has `t.dim(mode)` rows and one column per factor column.
Eigen::MatrixXd mttkrp(const SparseTensor& t, const std::vector<Eigen::MatrixXd>& factors,
                       std::size_t mode);

/// Data divided entrywise by the model reconstruction (floored at
/// kDenomFloor). The support is unchanged.
SparseTensor scaled_tensor(const SparseTensor& t, const CpdModel& model);

}  // namespace kltensor
