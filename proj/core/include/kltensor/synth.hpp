#pragma once

#include <cstdint>
#include <functional>
#include <span>

#include "kltensor/model.hpp"
#include "kltensor/tensor.hpp"

namespace kltensor {

/// Called once per draw with the latent component and the observed index.
using DrawTrace =
    std::function<void(std::uint64_t draw, std::size_t component, std::span<const Index> index)>;

/// `draws` independent samples from the naive-Bayes model: a component
/// from the prior, then one index per mode from that component's columns.
/// Every random number is keyed by (seed, draw), so the result does not
/// depend on `threads`. A trace forces sequential execution.
SparseTensor sample_tensor(const NormalizedModel& truth, std::uint64_t draws, std::uint64_t seed,
                           unsigned threads = 1, const DrawTrace& trace = {});

struct PlantedInstance {
  NormalizedModel truth;
  std::uint64_t draws;
  SparseTensor data;
  std::uint64_t seed;
};

PlantedInstance plant(NormalizedModel truth, std::uint64_t draws, std::uint64_t seed,
                      unsigned threads = 1);

}  // namespace kltensor
