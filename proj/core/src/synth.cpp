#include "kltensor/synth.hpp"

#include <algorithm>
#include <stdexcept>

#include "kltensor/parallel.hpp"
#include "kltensor/random.hpp"

namespace kltensor {

namespace {

struct CumulativeTable {
  std::vector<double> cum;

  explicit CumulativeTable(std::span<const double> probs) : cum(probs.size()) {
    double run = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) cum[i] = (run += probs[i]);
  }

  std::size_t draw(double u) const {
    const double target = u * cum.back();
    const auto it = std::upper_bound(cum.begin(), cum.end(), target);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cum.begin()), cum.size() - 1);
  }
};

}  // namespace

SparseTensor sample_tensor(const NormalizedModel& truth, std::uint64_t draws, std::uint64_t seed,
                           unsigned threads, const DrawTrace& trace) {
  if (draws == 0) throw std::invalid_argument("number of draws must be positive");
  const CpdModel& model = truth.model();
  const std::size_t order = model.order();
  const std::size_t rank = model.rank();

  const CumulativeTable prior(std::span<const double>(model.weights().data(), rank));
  std::vector<std::vector<CumulativeTable>> columns(order);
  for (std::size_t n = 0; n < order; ++n) {
    for (std::size_t k = 0; k < rank; ++k) columns[n].emplace_back(model.column(n, k));
  }

  std::vector<Index> indices(draws * order);
  auto sample_one = [&](std::uint64_t d) {
    const std::size_t k = prior.draw(to_open_unit(counter_hash(seed, d, 0)));
    Index* idx = indices.data() + d * order;
    for (std::size_t n = 0; n < order; ++n) {
      idx[n] = static_cast<Index>(columns[n][k].draw(to_open_unit(counter_hash(seed, d, n + 1))));
    }
    return k;
  };

  if (trace) {
    for (std::uint64_t d = 0; d < draws; ++d) {
      const std::size_t k = sample_one(d);
      trace(d, k, std::span<const Index>(indices.data() + d * order, order));
    }
  } else {
    constexpr std::uint64_t kBlock = 1 << 14;
    const std::uint64_t blocks = (draws + kBlock - 1) / kBlock;
    parallel_for(blocks, threads, [&](std::size_t b) {
      const std::uint64_t end = std::min<std::uint64_t>(draws, (b + 1) * kBlock);
      for (std::uint64_t d = b * kBlock; d < end; ++d) sample_one(d);
    });
  }

  // Counts are small integers, so duplicate summation is exact in any order.
  return SparseTensor(model.shape(), std::move(indices), std::vector<double>(draws, 1.0));
}

PlantedInstance plant(NormalizedModel truth, std::uint64_t draws, std::uint64_t seed,
                      unsigned threads) {
  SparseTensor data = sample_tensor(truth, draws, seed, threads);
  return {std::move(truth), draws, std::move(data), seed};
}

}  // namespace kltensor
