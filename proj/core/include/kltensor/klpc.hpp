#pragma once

#include "kltensor/model.hpp"
#include "kltensor/tensor.hpp"

namespace kltensor {

/// Globally optimal rank-1 generalized-KL approximation of a nonnegative
/// tensor: lambda = total mass M, factor n = marginal(t, n) / M.
/// Throws std::invalid_argument on a zero-mass tensor.
CpdModel kl_principal_component(const SparseTensor& t);

}  // namespace kltensor
