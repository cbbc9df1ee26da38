#include "kltensor/klpc.hpp"

#include <stdexcept>

namespace kltensor {

CpdModel kl_principal_component(const SparseTensor& t) {
  const double mass = total_mass(t);
  if (!(mass > 0.0)) throw std::invalid_argument("zero total mass");

  std::vector<Eigen::MatrixXd> factors;
  factors.reserve(t.order());
  for (std::size_t n = 0; n < t.order(); ++n) {
    const std::vector<double> y = marginal(t, n);
    Eigen::MatrixXd p(static_cast<Eigen::Index>(y.size()), 1);
    for (std::size_t j = 0; j < y.size(); ++j) p(static_cast<Eigen::Index>(j), 0) = y[j] / mass;
    factors.push_back(std::move(p));
  }
  Eigen::VectorXd weights(1);
  weights[0] = mass;
  return CpdModel(t.shape(), std::move(weights), std::move(factors));
}

}  // namespace kltensor
