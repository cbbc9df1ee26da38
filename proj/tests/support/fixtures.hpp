#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "kltensor/ingest.hpp"
#include "kltensor/tensor.hpp"

namespace kltensor::testing {

inline std::filesystem::path data_dir() { return KLTENSOR_DATA_DIR; }
inline std::filesystem::path iris_csv() { return data_dir() / "iris.csv"; }

inline LabeledDataset load_iris() { return read_csv_file(iris_csv(), "class"); }

inline SparseTensor example_2x2() {
  return SparseTensor({2, 2}, std::vector<Entry>{{{0, 0}, 1.0}, {{0, 1}, 2.0}, {{1, 0}, 3.0}, {{1, 1}, 4.0}});
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& tag) {
  std::random_device rd;
  auto dir = std::filesystem::temp_directory_path() /
             ("kltensor-" + tag + "-" + std::to_string(rd()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace kltensor::testing
