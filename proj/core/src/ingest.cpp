#include "kltensor/ingest.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "kltensor/coo_io.hpp"

namespace kltensor {

std::vector<std::size_t> BinSpec::shape() const {
  std::vector<std::size_t> out;
  out.reserve(features.size());
  for (const auto& f : features) out.push_back(f.count);
  return out;
}

void BinSpec::validate() const {
  if (features.empty()) throw std::invalid_argument("bin spec has no features");
  for (const auto& f : features) {
    if (!(f.width > 0.0) || !std::isfinite(f.width) || !std::isfinite(f.min)) {
      throw std::invalid_argument("feature '" + f.name + "' needs a finite min and width > 0");
    }
    if (f.count == 0) throw std::invalid_argument("feature '" + f.name + "' has zero bins");
  }
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

// Floor division for a positive divisor.
long long floor_div(long long a, long long b) {
  long long q = a / b;
  if ((a % b != 0) && (a < 0)) --q;
  return q;
}

}  // namespace

LabeledDataset read_csv(std::istream& in, std::string_view label_column) {
  LabeledDataset data;
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (!trim(line).empty()) {
      header = split_commas(line);
      break;
    }
  }
  if (header.empty()) throw ParseError(lineno, "missing CSV header");

  std::optional<std::size_t> label_idx;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (!label_column.empty() && header[c] == label_column) {
      label_idx = c;
    } else {
      data.feature_names.push_back(header[c]);
    }
  }
  if (!label_column.empty() && !label_idx) {
    throw ParseError(lineno, "label column '" + std::string(label_column) + "' not in header");
  }

  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() != header.size()) {
      throw ParseError(lineno, "expected " + std::to_string(header.size()) + " columns, got " +
                                   std::to_string(cells.size()));
    }
    std::vector<double> row;
    row.reserve(data.feature_names.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (label_idx && c == *label_idx) {
        if (cells[c].empty()) throw ParseError(lineno, "empty label");
        data.labels.push_back(cells[c]);
        continue;
      }
      const double v = parse_double(cells[c], lineno);
      if (!std::isfinite(v)) throw ParseError(lineno, "non-finite feature value");
      row.push_back(v);
    }
    data.rows.push_back(std::move(row));
  }
  return data;
}

LabeledDataset read_csv_file(const std::filesystem::path& path, std::string_view label_column) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_csv(in, label_column);
}

BinSpec iris_binspec() {
  return BinSpec{{
      {"sepal_length", 4.3, 0.1, 37},
      {"sepal_width", 2.0, 0.1, 25},
      {"petal_length", 1.0, 0.1, 60},
      {"petal_width", 0.1, 0.1, 25},
  }};
}

Index bin_index(const FeatureBins& bins, double x) {
  const double quantum = bins.width / 10.0;
  const long long xi = std::llround(x / quantum);
  const long long mi = std::llround(bins.min / quantum);
  const long long wi = std::llround(bins.width / quantum);
  const long long j = floor_div(2 * (xi - mi) + wi, 2 * wi);
  if (j < 0 || j >= static_cast<long long>(bins.count)) {
    throw std::out_of_range("value " + format_double(x) + " outside the bins of '" + bins.name +
                            "'");
  }
  return static_cast<Index>(j);
}

std::vector<Index> bin_sample(const BinSpec& spec, std::span<const double> sample) {
  if (sample.size() != spec.features.size()) {
    throw std::invalid_argument("sample has " + std::to_string(sample.size()) +
                                " features, bin spec has " +
                                std::to_string(spec.features.size()));
  }
  std::vector<Index> idx(sample.size());
  for (std::size_t f = 0; f < sample.size(); ++f) idx[f] = bin_index(spec.features[f], sample[f]);
  return idx;
}

std::map<std::string, SparseTensor> discretize(const LabeledDataset& data, const BinSpec& spec,
                                               bool group_by_label) {
  spec.validate();
  if (group_by_label && !data.has_labels()) {
    throw std::invalid_argument("grouping by label requires a label column");
  }
  std::map<std::string, std::vector<Index>> cells;
  for (std::size_t r = 0; r < data.rows.size(); ++r) {
    const auto& row = data.rows[r];
    if (row.size() != spec.features.size()) {
      throw std::invalid_argument("row " + std::to_string(r + 1) + " has " +
                                  std::to_string(row.size()) + " features, expected " +
                                  std::to_string(spec.features.size()));
    }
    auto& dst = cells[group_by_label ? data.labels[r] : std::string("all")];
    for (std::size_t f = 0; f < row.size(); ++f) {
      try {
        dst.push_back(bin_index(spec.features[f], row[f]));
      } catch (const std::out_of_range& e) {
        throw std::out_of_range("row " + std::to_string(r + 1) + ", feature '" +
                                spec.features[f].name + "': " + e.what());
      }
    }
  }
  std::map<std::string, SparseTensor> out;
  const std::size_t order = spec.features.size();
  if (cells.empty()) cells["all"];
  for (auto& [label, idx] : cells) {
    std::vector<double> ones(idx.size() / order, 1.0);
    out.emplace(label, SparseTensor(spec.shape(), std::move(idx), std::move(ones)));
  }
  return out;
}

BinSpec read_binspec(std::istream& in) {
  BinSpec spec;
  std::size_t lineno = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::istringstream ss(t);
    std::string name, min_tok, width_tok, count_tok, extra;
    if (!(ss >> name >> min_tok >> width_tok >> count_tok) || (ss >> extra)) {
      throw ParseError(lineno, "expected 'name min width count'");
    }
    FeatureBins f;
    f.name = name;
    f.min = parse_double(min_tok, lineno);
    f.width = parse_double(width_tok, lineno);
    const double count = parse_double(count_tok, lineno);
    if (count < 1 || count != std::floor(count)) throw ParseError(lineno, "bad bin count");
    f.count = static_cast<std::size_t>(count);
    spec.features.push_back(std::move(f));
  }
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(lineno, e.what());
  }
  return spec;
}

BinSpec read_binspec_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_binspec(in);
}

void write_binspec(std::ostream& out, const BinSpec& spec) {
  out << "# name min width count\n";
  for (const auto& f : spec.features) {
    out << f.name << ' ' << format_double(f.min) << ' ' << format_double(f.width) << ' '
        << f.count << '\n';
  }
}

}  // namespace kltensor
