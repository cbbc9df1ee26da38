#include <doctest.h>

#include <sstream>

#include "kltensor/coo_io.hpp"
#include "kltensor/em.hpp"
#include "kltensor/model_io.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace kltensor;

namespace {

ModelFile round_trip(const ModelFile& in) {
  std::stringstream ss;
  write_model(ss, in);
  return read_model(ss);
}

void check_bitwise(const CpdModel& a, const CpdModel& b) {
  CHECK(a.shape() == b.shape());
  CHECK(a.weights() == b.weights());
  for (std::size_t n = 0; n < a.order(); ++n) CHECK(a.factor(n) == b.factor(n));
}

const char* kSmall =
    "kltensor-model 1\n"
    "shape 2 2\n"
    "rank 1\n"
    "weights 3\n"
    "factor 0\n"
    "0.25 0.75\n"
    "factor 1\n"
    "0.5 0.5\n"
    "end\n";

}  // namespace

TEST_CASE("round trip is bitwise") {
  oracle::Rng rng(101);
  for (int trial = 0; trial < 200; ++trial) {
    const auto shape = oracle::random_shape(rng, 1, 5, 6);
    const auto m = oracle::random_model(rng, shape, 1 + trial % 5, 1e3);
    check_bitwise(round_trip({m, std::nullopt, std::nullopt}).model, m);
  }
}

TEST_CASE("labels and bin spec survive a round trip") {
  const auto classes = discretize(testing::load_iris(), iris_binspec(), true);
  const auto clf = train_supervised(classes, iris_binspec());
  const auto back = round_trip(to_model_file(clf));
  REQUIRE(back.labels);
  REQUIRE(back.binspec);
  CHECK(*back.labels == clf.labels);
  CHECK(*back.binspec == clf.binspec);
  const auto restored = to_classifier(back);
  CHECK(restored.prior == clf.prior);
  CHECK(restored.conditionals == clf.conditionals);
}

TEST_CASE("file round trip") {
  oracle::Rng rng(102);
  const auto m = oracle::random_model(rng, {3, 4}, 2);
  const auto path = testing::scratch_dir("model_io") / "m.txt";
  write_model_file(path, {m, std::vector<std::string>{"x", "y"}, std::nullopt});
  const auto back = read_model_file(path);
  check_bitwise(back.model, m);
  CHECK(*back.labels == std::vector<std::string>{"x", "y"});
  CHECK_FALSE(back.binspec);
  CHECK_THROWS_AS(read_model_file(path.parent_path() / "missing.txt"), std::runtime_error);
}

TEST_CASE("a hand-written model parses") {
  std::istringstream in(kSmall);
  const auto f = read_model(in);
  CHECK(f.model.rank() == 1);
  CHECK(f.model.weights()[0] == 3.0);
  CHECK(f.model.factor(0)(1, 0) == 0.75);
}

TEST_CASE("to_classifier needs a matching bin spec") {
  std::istringstream in(kSmall);
  auto f = read_model(in);
  CHECK_THROWS_AS(to_classifier(f), std::invalid_argument);
  f.binspec = BinSpec{{{"a", 0.0, 1.0, 2}, {"b", 0.0, 1.0, 3}}};
  CHECK_THROWS_AS(to_classifier(f), std::invalid_argument);
  f.binspec = BinSpec{{{"a", 0.0, 1.0, 2}, {"b", 0.0, 1.0, 2}}};
  const auto clf = to_classifier(f);
  CHECK(clf.labels == std::vector<std::string>{"0"});
  CHECK(clf.prior == std::vector<double>{1.0});
}

TEST_CASE("malformed model files report the line") {
  const std::vector<std::pair<std::string, std::string>> cases{
      {"kltensor-model 2\n", "line 1"},
      {"kltensor-model 1\nshape 2 x\n", "line 2"},
      {"kltensor-model 1\nshape 2 2\nrank 1\nweights 1 2\n", "line 4"},
      {"kltensor-model 1\nshape 2 2\nrank 1\nweights 1\nfactor 0\n0.5\n", "line 6"},
      {"kltensor-model 1\nshape 2 2\nrank 1\nweights 1\nfactor 1\n", "line 5"},
      {"kltensor-model 1\nshape 2 2\nrank 1\nweights 1\nfactor 0\n0.5 0.5\nfactor 1\n0.9 0.9\nend\n",
       "invalid model"},
      {"kltensor-model 1\nshape 2 2\nrank 1\nweights 1\nfactor 0\n0.5 0.5\nfactor 1\n0.5 0.5\n", "end"},
      {"kltensor-model 1\nshape 2\nrank 1\nweights 1\nfactor 0\n0.5 0.5\nbinspec 1\na 0 -1 2\nend\n",
       "line 8: feature 'a'"},
  };
  for (const auto& [text, needle] : cases) {
    CAPTURE(text);
    std::istringstream in(text);
    CHECK_THROWS_WITH_AS(read_model(in), doctest::Contains(needle.c_str()), ParseError);
  }
}
