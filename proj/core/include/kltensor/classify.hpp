#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "kltensor/ingest.hpp"
#include "kltensor/model.hpp"
#include "kltensor/tensor.hpp"

namespace kltensor {

/// Added inside the log so an unseen bin does not veto a class.
inline constexpr double kSmoothEps = 1e-9;

/// Naive-Bayes model: P[class] and P[feature bin | class].
struct ClassConditionalModel {
  std::vector<std::string> labels;
  std::vector<double> prior;
  /// conditionals[label][feature][bin]
  std::vector<std::vector<std::vector<double>>> conditionals;
  BinSpec binspec;

  void validate() const;
};

/// Per-class KL principal components; prior is class mass over total mass.
ClassConditionalModel train_supervised(const std::map<std::string, SparseTensor>& per_class,
                                       const BinSpec& spec);

/// Reads a fitted CPD as a naive-Bayes model. Labels are component ids.
ClassConditionalModel from_unsupervised(const CpdModel& model, const BinSpec& spec);

/// The inverse view: weights are the prior, factor columns the conditionals.
CpdModel to_cpd_model(const ClassConditionalModel& model);

struct Prediction {
  std::size_t index = 0;
  std::string label;
  std::vector<double> posterior;
};

Prediction predict(const ClassConditionalModel& model, std::span<const double> sample);

}  // namespace kltensor
