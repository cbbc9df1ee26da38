#include <doctest.h>

#include "kltensor/klpc.hpp"
#include "kltensor/model.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace kltensor;

namespace {

CpdModel rank1(double lambda, std::vector<std::vector<double>> cols) {
  std::vector<Eigen::MatrixXd> factors;
  std::vector<std::size_t> shape;
  for (const auto& c : cols) {
    shape.push_back(c.size());
    factors.push_back(Eigen::Map<const Eigen::MatrixXd>(c.data(), static_cast<Eigen::Index>(c.size()), 1));
  }
  Eigen::VectorXd w(1);
  w << lambda;
  return CpdModel(shape, w, factors);
}

CpdModel with_weights(const CpdModel& m, std::vector<double> w) {
  return CpdModel(m.shape(), Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size())),
                  m.factors());
}

}  // namespace

TEST_CASE("constructor validates and renormalizes") {
  Eigen::MatrixXd f(2, 1);
  f << 0.5, 0.5 + 1e-8;
  const CpdModel drift({2}, Eigen::VectorXd::Ones(1), {f});
  CHECK(drift.factor(0).col(0).sum() == doctest::Approx(1.0).epsilon(1e-15));

  Eigen::MatrixXd exact(2, 1);
  exact << 0.25, 0.75;
  CHECK(CpdModel({2}, Eigen::VectorXd::Ones(1), {exact}).factor(0) == exact);

  Eigen::MatrixXd bad(2, 1);
  bad << 0.5, 0.6;
  CHECK_THROWS_AS(CpdModel({2}, Eigen::VectorXd::Ones(1), {bad}), std::invalid_argument);
  Eigen::MatrixXd negative(2, 1);
  negative << 1.5, -0.5;
  CHECK_THROWS_AS(CpdModel({2}, Eigen::VectorXd::Ones(1), {negative}), std::invalid_argument);
  CHECK_THROWS_AS(CpdModel({2}, -Eigen::VectorXd::Ones(1), {exact}), std::invalid_argument);
  CHECK_THROWS_AS(CpdModel({3}, Eigen::VectorXd::Ones(1), {exact}), std::invalid_argument);
  CHECK_THROWS_AS(CpdModel({2}, Eigen::VectorXd::Ones(2), {exact}), std::invalid_argument);
  CHECK_THROWS_AS(CpdModel({2}, Eigen::VectorXd(0), {Eigen::MatrixXd(2, 0)}), std::invalid_argument);
  CHECK_THROWS_AS(CpdModel({2, 2}, Eigen::VectorXd::Ones(1), {exact}), std::invalid_argument);
}

TEST_CASE("reconstruct_at examples") {
  const auto m = rank1(4.0, {{0.5, 0.5}, {0.5, 0.5}});
  CHECK(reconstruct_at(m, std::vector<Index>{0, 1}) == 1.0);
  CHECK_THROWS_AS(reconstruct_at(m, std::vector<Index>{2, 0}), std::out_of_range);
  CHECK_THROWS_AS(reconstruct_at(m, std::vector<Index>{0}), std::invalid_argument);

  const std::vector<double> p{0.2, 0.8}, q{0.1, 0.3, 0.6};
  Eigen::MatrixXd f0(2, 2), f1(3, 2);
  f0 << p[0], p[0], p[1], p[1];
  f1 << q[0], q[0], q[1], q[1], q[2], q[2];
  const CpdModel dup({2, 3}, Eigen::VectorXd::Ones(2), {f0, f1});
  CHECK(reconstruct_at(dup, std::vector<Index>{1, 2}) == doctest::Approx(2.0 * p[1] * q[2]).epsilon(1e-15));
}

TEST_CASE("reconstruct_at matches the dense CPD oracle") {
  oracle::Rng rng(2);
  const auto m = oracle::random_model(rng, {3, 3, 3}, 3);
  const auto dense = oracle::dense_reconstruction(m);
  std::size_t c = 0;
  oracle::for_each_cell(m.shape(), [&](const std::vector<Index>& idx) {
    CHECK(oracle::rel_diff(reconstruct_at(m, idx), dense[c++]) <= 1e-12);
  });
}

TEST_CASE("total_model_mass") {
  oracle::Rng rng(4);
  const auto m = oracle::random_model(rng, {2, 2}, 2);
  CHECK(total_model_mass(with_weights(m, {2.0, 3.0})) == 5.0);

  const auto pc = kl_principal_component(testing::example_2x2());
  CHECK(total_model_mass(pc) == total_mass(testing::example_2x2()));
}

TEST_CASE("grid sum of the reconstruction equals the total model mass") {
  oracle::Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    auto shape = oracle::random_shape(rng, 1, 4, 4);
    if (oracle::cell_count(shape) > 100) continue;
    const auto m = oracle::random_model(rng, shape, 1 + trial % 4, 5.0);
    double grid = 0.0;
    for (double v : oracle::dense_reconstruction(m)) grid += v;
    CHECK(oracle::rel_diff(grid, total_model_mass(m)) <= 1e-12);
  }
  const auto m = oracle::random_model(rng, {2, 2, 2}, 2);
  double grid = 0.0;
  for (double v : oracle::dense_reconstruction(m)) grid += v;
  CHECK(oracle::rel_diff(grid, total_model_mass(m)) <= 1e-12);
}

TEST_CASE("normalize") {
  oracle::Rng rng(6);
  const auto base = oracle::random_model(rng, {3, 2}, 2);
  CHECK(normalize(with_weights(base, {2, 2})).weights() == Eigen::Vector2d(0.5, 0.5));
  CHECK(normalize(with_weights(base, {1, 3})).weights() == Eigen::Vector2d(0.25, 0.75));
  CHECK(normalize(rank1(150.0, {{1.0}})).weights()[0] == 1.0);
  CHECK_THROWS_AS(normalize(with_weights(base, {0, 0})), std::invalid_argument);
  CHECK_THROWS_AS(NormalizedModel(with_weights(base, {0.5, 0.6})), std::invalid_argument);
}

TEST_CASE("normalize is idempotent and keeps factors and the argmax") {
  oracle::Rng rng(10);
  for (int trial = 0; trial < 50; ++trial) {
    const auto m = oracle::random_model(rng, oracle::random_shape(rng, 1, 4, 5), 1 + trial % 5, 30.0);
    const auto once = normalize(m);
    const auto twice = normalize(once.model());
    CHECK(oracle::max_rel_diff(once.weights(), twice.weights()) <= 1e-15);
    Eigen::Index a = 0, b = 0;
    m.weights().maxCoeff(&a);
    once.weights().maxCoeff(&b);
    CHECK(a == b);
    for (std::size_t n = 0; n < m.order(); ++n) CHECK(once.model().factor(n) == m.factor(n));
  }
}

TEST_CASE("permute_components") {
  oracle::Rng rng(12);
  const auto m = oracle::random_model(rng, {3, 4}, 3);
  const std::vector<std::size_t> perm{2, 0, 1};
  const auto p = permute_components(m, perm);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(p.weights()[static_cast<Eigen::Index>(k)] == m.weights()[static_cast<Eigen::Index>(perm[k])]);
    CHECK(p.factor(1).col(static_cast<Eigen::Index>(k)) == m.factor(1).col(static_cast<Eigen::Index>(perm[k])));
  }
  CHECK_THROWS_AS(permute_components(m, std::vector<std::size_t>{0, 0, 1}), std::invalid_argument);
  CHECK_THROWS_AS(permute_components(m, std::vector<std::size_t>{0, 1}), std::invalid_argument);
}

TEST_CASE("align_components examples") {
  oracle::Rng rng(14);
  const auto a = oracle::random_model(rng, {4, 3, 5}, 2);

  const auto self = align_components(a, a);
  CHECK(self.permutation == std::vector<std::size_t>{0, 1});
  CHECK(self.distance == 0.0);

  const auto swapped = align_components(a, permute_components(a, std::vector<std::size_t>{1, 0}));
  CHECK(swapped.permutation == std::vector<std::size_t>{1, 0});
  CHECK(swapped.distance == 0.0);

  CHECK_THROWS_AS(align_components(a, oracle::random_model(rng, {4, 3, 5}, 3)), std::invalid_argument);
  CHECK_THROWS_AS(align_components(a, oracle::random_model(rng, {4, 3, 4}, 2)), std::invalid_argument);
}

TEST_CASE("align_components agrees with the exhaustive oracle") {
  oracle::Rng rng(15);
  for (int trial = 0; trial < 30; ++trial) {
    const auto shape = oracle::random_shape(rng, 1, 3, 5);
    const auto a = oracle::random_model(rng, shape, 3);
    const auto b = oracle::random_model(rng, shape, 3);
    const auto got = align_components(a, b);
    const auto want = oracle::brute_force_align(a, b);
    CHECK(got.permutation == want.permutation);
    CHECK(oracle::rel_diff(got.distance, want.distance) <= 1e-12);
  }
}

TEST_CASE("greedy alignment above eight components recovers a noisy permutation") {
  oracle::Rng rng(16);
  const std::vector<std::size_t> shape{12, 10, 8};
  const auto a = oracle::random_model(rng, shape, 9);
  std::vector<std::size_t> perm{4, 7, 1, 8, 0, 2, 6, 3, 5};
  // Blend each column slightly toward another random distribution.
  std::vector<Eigen::MatrixXd> noisy = a.factors();
  for (auto& f : noisy) {
    for (Eigen::Index k = 0; k < f.cols(); ++k) {
      const auto r = oracle::random_simplex(rng, static_cast<std::size_t>(f.rows()));
      for (Eigen::Index j = 0; j < f.rows(); ++j) f(j, k) = 0.95 * f(j, k) + 0.05 * r[static_cast<std::size_t>(j)];
    }
  }
  const CpdModel blurred(shape, a.weights(), noisy);
  std::vector<std::size_t> inverse(9);
  for (std::size_t k = 0; k < 9; ++k) inverse[perm[k]] = k;
  const auto b = permute_components(blurred, inverse);

  const auto got = align_components(a, b);
  const auto want = oracle::brute_force_align(a, b);
  CHECK(got.permutation == want.permutation);
  CHECK(oracle::rel_diff(got.distance, want.distance) <= 1e-12);
  for (std::size_t k = 0; k < 9; ++k) CHECK(got.permutation[k] == perm[k]);
}
