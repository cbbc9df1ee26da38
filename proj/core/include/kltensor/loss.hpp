#pragma once

#include "kltensor/model.hpp"
#include "kltensor/tensor.hpp"

namespace kltensor {

/// Reporting mode returns +infinity when a supported entry reconstructs
/// below kDenomFloor. Internal mode clamps there and stays finite.
enum class LossMode { Reporting, Internal };

struct LossValue {
  double value = 0.0;
  bool finite = true;
};

/// Generalized KL divergence sum over the grid of (-Y log yhat + yhat).
/// The yhat grid sum is taken as sum_k lambda_k prod_n colsum(P_n[:, k]),
/// which does not rely on the sum-to-one constraint.
LossValue gkl_full(const SparseTensor& t, const CpdModel& model,
                   LossMode mode = LossMode::Reporting);

/// -sum_support Y log yhat + sum_k lambda_k
LossValue gkl_simplified(const SparseTensor& t, const CpdModel& model,
                         LossMode mode = LossMode::Reporting);

/// Multinomial negative log-likelihood -sum_support Y log pi.
LossValue mle_nll(const SparseTensor& t, const NormalizedModel& model,
                  LossMode mode = LossMode::Reporting);

/// gkl_simplified(model) - (mle_nll(normalize(model)) - M log M + M) with
/// M = total_model_mass(model). Requires |M - total_mass(t)| <= 1e-6 M.
double equivalence_offset_check(const SparseTensor& t, const CpdModel& model);

}  // namespace kltensor
