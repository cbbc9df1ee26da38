#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kltensor/tensor.hpp"

namespace kltensor {

/// Fixed-width bins [min + j*width, ...) for j in [0, count), addressed by
/// nearest bin center.
struct FeatureBins {
  std::string name;
  double min = 0.0;
  double width = 1.0;
  std::size_t count = 1;

  friend bool operator==(const FeatureBins&, const FeatureBins&) = default;
};

struct BinSpec {
  std::vector<FeatureBins> features;

  std::vector<std::size_t> shape() const;
  void validate() const;
  friend bool operator==(const BinSpec&, const BinSpec&) = default;
};

struct LabeledDataset {
  std::vector<std::string> feature_names;
  std::vector<std::vector<double>> rows;
  /// Empty when the data carries no label column.
  std::vector<std::string> labels;

  bool has_labels() const { return !labels.empty(); }
};

/// Comma-separated, header row first. `label_column` may be empty for
/// unlabeled data; otherwise it must name a header column.
LabeledDataset read_csv(std::istream& in, std::string_view label_column);
LabeledDataset read_csv_file(const std::filesystem::path& path, std::string_view label_column);

/// Sepal length/width, petal length/width at 0.1 cm resolution:
/// 37 x 25 x 60 x 25 bins.
BinSpec iris_binspec();

/// Bin of `x`. Values and the bin origin are first snapped to multiples of
/// width/10, then the offset is rounded half-up to a whole bin. Throws
/// std::out_of_range outside [0, count).
Index bin_index(const FeatureBins& bins, double x);
std::vector<Index> bin_sample(const BinSpec& spec, std::span<const double> sample);

/// One count tensor per label (or a single "all" tensor), each sample
/// adding one to its cell.
std::map<std::string, SparseTensor> discretize(const LabeledDataset& data, const BinSpec& spec,
                                               bool group_by_label);

/// Sidecar text: one "name min width count" line per feature, '#' comments.
BinSpec read_binspec(std::istream& in);
BinSpec read_binspec_file(const std::filesystem::path& path);
void write_binspec(std::ostream& out, const BinSpec& spec);

}  // namespace kltensor
