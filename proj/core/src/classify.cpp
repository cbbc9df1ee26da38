#include "kltensor/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "kltensor/klpc.hpp"

namespace kltensor {

void ClassConditionalModel::validate() const {
  binspec.validate();
  const std::size_t classes = labels.size();
  if (classes == 0) throw std::invalid_argument("model has no classes");
  if (prior.size() != classes || conditionals.size() != classes) {
    throw std::invalid_argument("prior/conditionals do not match the number of labels");
  }
  double prior_sum = 0.0;
  for (double p : prior) {
    if (!(p >= 0.0)) throw std::invalid_argument("prior entries must be nonnegative");
    prior_sum += p;
  }
  if (std::abs(prior_sum - 1.0) > 1e-10) throw std::invalid_argument("prior does not sum to 1");
  for (std::size_t c = 0; c < classes; ++c) {
    if (conditionals[c].size() != binspec.features.size()) {
      throw std::invalid_argument("class '" + labels[c] + "' has the wrong number of features");
    }
    for (std::size_t f = 0; f < binspec.features.size(); ++f) {
      const auto& dist = conditionals[c][f];
      if (dist.size() != binspec.features[f].count) {
        throw std::invalid_argument("conditional size does not match bin count for '" +
                                    binspec.features[f].name + "'");
      }
      double s = 0.0;
      for (double p : dist) {
        if (!(p >= 0.0)) throw std::invalid_argument("conditionals must be nonnegative");
        s += p;
      }
      if (std::abs(s - 1.0) > 1e-10) throw std::invalid_argument("conditional does not sum to 1");
    }
  }
}

ClassConditionalModel train_supervised(const std::map<std::string, SparseTensor>& per_class,
                                       const BinSpec& spec) {
  spec.validate();
  if (per_class.empty()) throw std::invalid_argument("no classes to train on");
  ClassConditionalModel out;
  out.binspec = spec;
  double total = 0.0;
  for (const auto& [label, t] : per_class) {
    if (t.shape() != spec.shape()) {
      throw std::invalid_argument("class '" + label + "' tensor does not match the bin spec");
    }
    const double mass = total_mass(t);
    if (!(mass > 0.0)) throw std::invalid_argument("class '" + label + "' is empty");
    const CpdModel pc = kl_principal_component(t);
    std::vector<std::vector<double>> conds;
    for (std::size_t n = 0; n < t.order(); ++n) {
      const auto col = pc.column(n, 0);
      conds.emplace_back(col.begin(), col.end());
    }
    out.labels.push_back(label);
    out.prior.push_back(mass);
    out.conditionals.push_back(std::move(conds));
    total += mass;
  }
  for (double& p : out.prior) p /= total;
  return out;
}

ClassConditionalModel from_unsupervised(const CpdModel& model, const BinSpec& spec) {
  spec.validate();
  if (model.shape() != spec.shape()) {
    throw std::invalid_argument("model shape does not match the bin spec");
  }
  const NormalizedModel normalized = normalize(model);
  ClassConditionalModel out;
  out.binspec = spec;
  for (std::size_t k = 0; k < model.rank(); ++k) {
    out.labels.push_back(std::to_string(k));
    out.prior.push_back(normalized.weights()[static_cast<Eigen::Index>(k)]);
    std::vector<std::vector<double>> conds;
    for (std::size_t n = 0; n < model.order(); ++n) {
      const auto col = model.column(n, k);
      conds.emplace_back(col.begin(), col.end());
    }
    out.conditionals.push_back(std::move(conds));
  }
  return out;
}

CpdModel to_cpd_model(const ClassConditionalModel& model) {
  model.validate();
  const auto classes = static_cast<Eigen::Index>(model.labels.size());
  Eigen::VectorXd weights(classes);
  for (Eigen::Index c = 0; c < classes; ++c) weights[c] = model.prior[static_cast<std::size_t>(c)];
  std::vector<Eigen::MatrixXd> factors;
  for (std::size_t f = 0; f < model.binspec.features.size(); ++f) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(model.binspec.features[f].count), classes);
    for (Eigen::Index c = 0; c < classes; ++c) {
      const auto& dist = model.conditionals[static_cast<std::size_t>(c)][f];
      for (std::size_t j = 0; j < dist.size(); ++j) m(static_cast<Eigen::Index>(j), c) = dist[j];
    }
    factors.push_back(std::move(m));
  }
  return CpdModel(model.binspec.shape(), std::move(weights), std::move(factors));
}

Prediction predict(const ClassConditionalModel& model, std::span<const double> sample) {
  const std::vector<Index> bins = bin_sample(model.binspec, sample);
  const std::size_t classes = model.labels.size();
  std::vector<double> scores(classes);
  for (std::size_t c = 0; c < classes; ++c) {
    double s = std::log(model.prior[c]);
    for (std::size_t f = 0; f < bins.size(); ++f) {
      s += std::log(model.conditionals[c][f][bins[f]] + kSmoothEps);
    }
    scores[c] = s;
  }

  Prediction out;
  // First maximum wins, so ties go to the earlier label.
  out.index = static_cast<std::size_t>(std::max_element(scores.begin(), scores.end()) -
                                       scores.begin());
  out.label = model.labels[out.index];
  const double top = scores[out.index];
  out.posterior.resize(classes);
  double z = 0.0;
  for (std::size_t c = 0; c < classes; ++c) z += (out.posterior[c] = std::exp(scores[c] - top));
  for (double& p : out.posterior) p /= z;
  return out;
}

}  // namespace kltensor
