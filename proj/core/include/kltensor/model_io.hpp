#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "kltensor/classify.hpp"
#include "kltensor/ingest.hpp"
#include "kltensor/model.hpp"

namespace kltensor {

/// Serialized model: a CPD plus optional component labels and bin spec.
///
///   kltensor-model 1
///   shape J_1 ... J_N
///   rank K
///   weights w_1 ... w_K
///   labels l_1 ... l_K          (optional)
///   factor n                    (then K lines, one column each)
///   binspec F                   (optional; then F "name min width count" lines)
///   end
struct ModelFile {
  CpdModel model;
  std::optional<std::vector<std::string>> labels;
  std::optional<BinSpec> binspec;
};

inline constexpr int kModelFormatVersion = 1;

void write_model(std::ostream& out, const ModelFile& file);
void write_model_file(const std::filesystem::path& path, const ModelFile& file);
ModelFile read_model(std::istream& in);
ModelFile read_model_file(const std::filesystem::path& path);

ModelFile to_model_file(const ClassConditionalModel& model);
/// Requires a bin spec matching the model; throws std::invalid_argument
/// otherwise. Missing labels default to component ids.
ClassConditionalModel to_classifier(const ModelFile& file);

}  // namespace kltensor
