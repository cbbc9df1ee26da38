#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "kltensor/model.hpp"
#include "kltensor/tensor.hpp"

namespace kltensor {

/// Components whose weight falls to or below kDeadEps * M are retired:
/// weight 0, uniform factor columns, no further posterior mass.
inline constexpr double kDeadEps = 1e-12;

enum class InitMethod { Dirichlet, Provided };

struct FitOptions {
  std::size_t rank = 1;
  std::size_t max_iters = 500;
  /// Stop once (previous - current) / |previous| drops below this.
  double rel_tol = 1e-9;
  std::size_t restarts = 10;
  std::uint64_t seed = 0;
  InitMethod init = InitMethod::Dirichlet;
  /// Starting point when init == Provided. Restarts are ignored then.
  std::optional<CpdModel> initial;
  /// Worker threads for restarts and per-step kernels; 0 = all available.
  unsigned threads = 1;

  void validate() const;
};

/// Loss trajectory of a single restart.
struct RestartTrace {
  /// losses[0] is the initial model; losses[t] follows step t.
  std::vector<double> losses;
  std::vector<double> mass_residuals;
  bool converged = false;
};

struct FitReport {
  std::vector<double> losses;
  std::size_t iterations = 0;
  bool converged = false;
  /// |sum(lambda) - M| / M of the returned model.
  double mass_residual = 0.0;
  std::size_t restart_index = 0;
  std::size_t dead_components = 0;
  std::vector<RestartTrace> restarts;
};

struct FitResult {
  CpdModel model;
  FitReport report;
};

/// Weights uniform on (0.5, 1.5); factor columns symmetric Dirichlet(1).
/// Deterministic in `seed`.
CpdModel init_model(std::span<const std::size_t> shape, std::size_t rank, std::uint64_t seed);

/// Posterior over components for the support entry at `index`.
std::vector<double> posterior_psi(const SparseTensor& t, const CpdModel& model,
                                  std::span<const Index> index);

/// One simultaneous majorization-minimization update. All modes and weights
/// are computed from the previous iterate only, so the result does not
/// depend on `threads`.
CpdModel em_step(const SparseTensor& t, const CpdModel& model, unsigned threads = 1);

/// Best-of-restarts fit. The winner is the smallest final loss, ties to
/// the lowest restart index.
FitResult fit(const SparseTensor& t, const FitOptions& opts);

/// Seed used by restart `restart` of a fit seeded with `seed`.
std::uint64_t restart_seed(std::uint64_t seed, std::size_t restart);

}  // namespace kltensor
