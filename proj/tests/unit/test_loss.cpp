#include <doctest.h>

#include <cmath>

#include "kltensor/em.hpp"
#include "kltensor/klpc.hpp"
#include "kltensor/loss.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace kltensor;

namespace {

CpdModel scalar_model(double lambda) {
  Eigen::VectorXd w(1);
  w << lambda;
  return CpdModel({1}, w, {Eigen::MatrixXd::Ones(1, 1)});
}

}  // namespace

TEST_CASE("gkl_full examples") {
  const SparseTensor t({1}, std::vector<Entry>{{{0}, 1.0}});
  CHECK(gkl_full(t, scalar_model(1.0)).value == 1.0);
  CHECK(gkl_full(t, scalar_model(2.0)).value == doctest::Approx(2.0 - std::log(2.0)).epsilon(1e-15));
  CHECK(gkl_full(t, scalar_model(2.0)).value == doctest::Approx(1.306853).epsilon(1e-6));
  oracle::Rng rng(1);
  CHECK_THROWS_AS(gkl_full(t, oracle::random_model(rng, {2}, 1)), std::invalid_argument);
}

TEST_CASE("gkl_full matches the dense grid oracle and equals gkl_simplified") {
  oracle::Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const auto shape = oracle::random_shape(rng, 1, 4, 4);
    const auto t = oracle::random_tensor(rng, shape, 10, trial % 2 == 0);
    const auto m = oracle::random_model(rng, shape, 1 + trial % 3, 7.0);
    const double full = gkl_full(t, m).value;
    CHECK(oracle::rel_diff(full, oracle::dense_gkl(t, m)) <= 1e-12);
    CHECK(oracle::rel_diff(gkl_simplified(t, m).value, full) <= 1e-12);
  }
}

TEST_CASE("gkl_simplified examples") {
  const SparseTensor t({1}, std::vector<Entry>{{{0}, 1.0}});
  CHECK(gkl_simplified(t, scalar_model(1.0)).value == 1.0);
  const SparseTensor empty({1}, std::vector<Entry>{});
  CHECK(gkl_simplified(empty, scalar_model(3.0)).value == 3.0);
}

TEST_CASE("gkl_simplified is invariant under component permutation") {
  oracle::Rng rng(32);
  for (int trial = 0; trial < 30; ++trial) {
    const auto shape = oracle::random_shape(rng, 2, 4, 4);
    const auto t = oracle::random_tensor(rng, shape, 10);
    const auto m = oracle::random_model(rng, shape, 3);
    const auto p = permute_components(m, std::vector<std::size_t>{2, 0, 1});
    CHECK(oracle::rel_diff(gkl_simplified(t, m).value, gkl_simplified(t, p).value) <= 1e-13);
  }
}

TEST_CASE("reporting mode is infinite on zero reconstruction; internal mode clamps") {
  const SparseTensor t({2}, std::vector<Entry>{{{1}, 2.0}});
  Eigen::MatrixXd onehot(2, 1);
  onehot << 1.0, 0.0;
  const CpdModel m({2}, Eigen::VectorXd::Ones(1), {onehot});

  const auto reported = gkl_simplified(t, m);
  CHECK_FALSE(reported.finite);
  CHECK(std::isinf(reported.value));
  CHECK_FALSE(gkl_full(t, m).finite);

  const auto internal = gkl_simplified(t, m, LossMode::Internal);
  CHECK(internal.finite);
  CHECK(internal.value == doctest::Approx(-2.0 * std::log(kDenomFloor) + 1.0));

  // Positive but tiny reconstructions are reported as finite.
  Eigen::MatrixXd tiny(2, 1);
  tiny << 1.0 - 1e-200, 1e-200;
  const CpdModel m2({2}, Eigen::VectorXd::Ones(1), {tiny});
  CHECK(gkl_simplified(t, m2).finite);
}

TEST_CASE("mle_nll examples") {
  const SparseTensor uniform({2, 2}, std::vector<Entry>{{{0, 0}, 1}, {{0, 1}, 1}, {{1, 0}, 1}, {{1, 1}, 1}});
  const CpdModel half({2, 2}, Eigen::VectorXd::Ones(1),
                      {Eigen::MatrixXd::Constant(2, 1, 0.5), Eigen::MatrixXd::Constant(2, 1, 0.5)});
  CHECK(mle_nll(uniform, NormalizedModel(half)).value == doctest::Approx(4.0 * std::log(4.0)).epsilon(1e-15));
  CHECK(mle_nll(uniform, NormalizedModel(half)).value == doctest::Approx(5.545177).epsilon(1e-6));

  const SparseTensor onehot_data({2, 2}, std::vector<Entry>{{{0, 0}, 5.0}});
  Eigen::MatrixXd e0(2, 1);
  e0 << 1.0, 0.0;
  CHECK(mle_nll(onehot_data, NormalizedModel(CpdModel({2, 2}, Eigen::VectorXd::Ones(1), {e0, e0}))).value == 0.0);

  oracle::Rng rng(33);
  for (int trial = 0; trial < 50; ++trial) {
    const auto shape = oracle::random_shape(rng, 1, 4, 4);
    const auto t = oracle::random_tensor(rng, shape, 8);
    const auto m = normalize(oracle::random_model(rng, shape, 1 + trial % 3));
    CHECK(oracle::rel_diff(mle_nll(t, m).value, oracle::dense_nll(t, m.model())) <= 1e-12);
  }
}

TEST_CASE("equivalence_offset_check") {
  oracle::Rng rng(34);
  SUBCASE("closed-form principal component") {
    for (int trial = 0; trial < 30; ++trial) {
      const auto shape = oracle::random_shape(rng, 1, 4, 4);
      const auto t = oracle::random_tensor(rng, shape, 10, trial % 2 == 0);
      const double mass = total_mass(t);
      CHECK(std::abs(equivalence_offset_check(t, kl_principal_component(t))) <= 1e-10 * mass);
    }
  }
  SUBCASE("converged EM fit") {
    for (int trial = 0; trial < 10; ++trial) {
      const auto shape = oracle::random_shape(rng, 2, 3, 4);
      const auto t = oracle::random_tensor(rng, shape, 20, true);
      FitOptions opts;
      opts.rank = 2;
      opts.restarts = 2;
      opts.seed = static_cast<std::uint64_t>(trial);
      opts.max_iters = 5000;
      const auto result = fit(t, opts);
      REQUIRE(result.report.converged);
      CHECK(std::abs(equivalence_offset_check(t, result.model)) <= 1e-8 * total_mass(t));
    }
  }
  SUBCASE("unit mass") {
    const SparseTensor t({3}, std::vector<Entry>{{{0}, 0.25}, {{2}, 0.75}});
    const auto m = normalize(oracle::random_model(rng, {3}, 2));
    CHECK(std::abs(equivalence_offset_check(t, m.model())) <= 1e-15);
  }
  SUBCASE("mass gap is rejected") {
    const auto t = testing::example_2x2();
    const auto m = oracle::random_model(rng, {2, 2}, 2);
    CHECK_THROWS_WITH_AS(equivalence_offset_check(t, m), doctest::Contains("gap"), std::invalid_argument);
  }
}
