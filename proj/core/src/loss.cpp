#include "kltensor/loss.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "kltensor/coo_io.hpp"

namespace kltensor {

namespace {

// -sum_support Y log yhat
LossValue data_term(const SparseTensor& t, const CpdModel& model, LossMode mode) {
  const std::vector<double> recon = reconstruct_support(model, t);
  double sum = 0.0;
  for (std::size_t e = 0; e < t.nnz(); ++e) {
    double r = recon[e];
    if (r < kDenomFloor) {
      if (mode == LossMode::Reporting) {
        return {std::numeric_limits<double>::infinity(), false};
      }
      r = kDenomFloor;
    }
    sum += t.value(e) * std::log(r);
  }
  return {-sum, true};
}

}  // namespace

LossValue gkl_full(const SparseTensor& t, const CpdModel& model, LossMode mode) {
  LossValue loss = data_term(t, model, mode);
  if (!loss.finite) return loss;
  double grid_sum = 0.0;
  for (std::size_t k = 0; k < model.rank(); ++k) {
    double prod = model.weights()[static_cast<Eigen::Index>(k)];
    for (std::size_t n = 0; n < model.order(); ++n) {
      prod *= model.factor(n).col(static_cast<Eigen::Index>(k)).sum();
    }
    grid_sum += prod;
  }
  loss.value += grid_sum;
  return loss;
}

LossValue gkl_simplified(const SparseTensor& t, const CpdModel& model, LossMode mode) {
  LossValue loss = data_term(t, model, mode);
  if (loss.finite) loss.value += total_model_mass(model);
  return loss;
}

LossValue mle_nll(const SparseTensor& t, const NormalizedModel& model, LossMode mode) {
  return data_term(t, model.model(), mode);
}

double equivalence_offset_check(const SparseTensor& t, const CpdModel& model) {
  const double model_mass = total_model_mass(model);
  const double data_mass = total_mass(t);
  const double gap = std::abs(model_mass - data_mass);
  if (gap > 1e-6 * model_mass || !(model_mass > 0.0)) {
    throw std::invalid_argument("model mass " + format_double(model_mass) +
                                " differs from data mass " + format_double(data_mass) +
                                " (gap " + format_double(gap) + "); not a stationary point");
  }
  const LossValue simplified = gkl_simplified(t, model);
  const LossValue nll = mle_nll(t, normalize(model));
  if (!simplified.finite || !nll.finite) {
    throw std::invalid_argument("loss is infinite; offset identity is undefined");
  }
  return simplified.value - (nll.value - model_mass * std::log(model_mass) + model_mass);
}

}  // namespace kltensor
