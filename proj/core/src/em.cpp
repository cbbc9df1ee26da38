#include "kltensor/em.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "kltensor/loss.hpp"
#include "kltensor/parallel.hpp"
#include "kltensor/random.hpp"

namespace kltensor {

void FitOptions::validate() const {
  if (rank == 0) throw std::invalid_argument("rank must be at least 1");
  if (max_iters == 0) throw std::invalid_argument("max_iters must be positive");
  if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw std::invalid_argument("rel_tol must be in (0, 1)");
  if (restarts == 0) throw std::invalid_argument("restarts must be positive");
  if (init == InitMethod::Provided) {
    if (!initial) throw std::invalid_argument("provided init requested without a model");
    if (initial->rank() != rank) throw std::invalid_argument("initial model has the wrong rank");
  }
}

std::uint64_t restart_seed(std::uint64_t seed, std::size_t restart) {
  return counter_hash(seed, restart, 0x5eedULL);
}

CpdModel init_model(std::span<const std::size_t> shape, std::size_t rank, std::uint64_t seed) {
  if (rank == 0) throw std::invalid_argument("rank must be at least 1");
  const auto k_rank = static_cast<Eigen::Index>(rank);
  std::uint64_t counter = 0;
  auto uniform = [&] { return to_open_unit(counter_hash(seed, counter++)); };

  Eigen::VectorXd weights(k_rank);
  for (Eigen::Index k = 0; k < k_rank; ++k) weights[k] = 0.5 + uniform();

  std::vector<Eigen::MatrixXd> factors;
  factors.reserve(shape.size());
  for (std::size_t dim : shape) {
    Eigen::MatrixXd f(static_cast<Eigen::Index>(dim), k_rank);
    for (Eigen::Index k = 0; k < k_rank; ++k) {
      // Dirichlet(1, ..., 1) as normalized unit exponentials.
      for (Eigen::Index j = 0; j < f.rows(); ++j) f(j, k) = -std::log(uniform());
      f.col(k) /= f.col(k).sum();
    }
    factors.push_back(std::move(f));
  }
  return CpdModel(std::vector<std::size_t>(shape.begin(), shape.end()), std::move(weights),
                  std::move(factors));
}

std::vector<double> posterior_psi(const SparseTensor& t, const CpdModel& model,
                                  std::span<const Index> index) {
  if (model.shape() != t.shape()) throw std::invalid_argument("model and tensor shapes differ");
  if (!t.find(index)) throw std::invalid_argument("index is not in the tensor's support");
  std::vector<double> psi(model.rank());
  double denom = 0.0;
  for (std::size_t k = 0; k < model.rank(); ++k) {
    double prod = model.weights()[static_cast<Eigen::Index>(k)];
    for (std::size_t n = 0; n < index.size(); ++n) {
      prod *= model.factor(n)(index[n], static_cast<Eigen::Index>(k));
    }
    psi[k] = prod;
    denom += prod;
  }
  denom = std::max(denom, kDenomFloor);
  for (double& p : psi) p /= denom;
  return psi;
}

CpdModel em_step(const SparseTensor& t, const CpdModel& model, unsigned threads) {
  if (model.shape() != t.shape()) throw std::invalid_argument("model and tensor shapes differ");
  const std::size_t order = t.order();
  const std::size_t rank = model.rank();
  const SparseTensor scaled = scaled_tensor(t, model);

  // Tasks 0..N-1 are the per-mode MTTKRPs, task N the K contractions.
  std::vector<Eigen::MatrixXd> gradients(order);
  std::vector<double> contractions(rank, 0.0);
  parallel_for(order + 1, threads, [&](std::size_t task) {
    if (task < order) {
      gradients[task] = mttkrp(scaled, model.factors(), task);
      return;
    }
    std::vector<std::span<const double>> cols(order);
    for (std::size_t k = 0; k < rank; ++k) {
      for (std::size_t n = 0; n < order; ++n) cols[n] = model.column(n, k);
      contractions[k] = ttv_all(scaled, cols);
    }
  });

  const double mass = total_mass(t);
  Eigen::VectorXd weights(static_cast<Eigen::Index>(rank));
  std::vector<Eigen::MatrixXd> factors(order);
  for (std::size_t n = 0; n < order; ++n) {
    factors[n] = model.factor(n).cwiseProduct(gradients[n]);
  }
  for (std::size_t k = 0; k < rank; ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    double w = model.weights()[kk] * contractions[k];
    bool dead = !(w > kDeadEps * mass) || !std::isfinite(w);
    for (std::size_t n = 0; n < order && !dead; ++n) {
      const double s = factors[n].col(kk).sum();
      if (!(s > 0.0) || !std::isfinite(s)) {
        dead = true;
      } else {
        factors[n].col(kk) /= s;
      }
    }
    if (dead) {
      w = 0.0;
      for (std::size_t n = 0; n < order; ++n) {
        factors[n].col(kk).setConstant(1.0 / static_cast<double>(t.dim(n)));
      }
    }
    weights[kk] = w;
  }
  return CpdModel(t.shape(), std::move(weights), std::move(factors));
}

namespace {

struct RestartRun {
  std::optional<CpdModel> model;
  RestartTrace trace;
};

RestartRun run_restart(const SparseTensor& t, CpdModel model, const FitOptions& opts,
                       unsigned step_threads, double mass) {
  RestartRun run;
  auto record = [&](const CpdModel& m) {
    run.trace.losses.push_back(gkl_simplified(t, m, LossMode::Internal).value);
    run.trace.mass_residuals.push_back(std::abs(total_model_mass(m) - mass) / mass);
  };
  record(model);
  for (std::size_t it = 0; it < opts.max_iters; ++it) {
    model = em_step(t, model, step_threads);
    record(model);
    const double prev = run.trace.losses[run.trace.losses.size() - 2];
    const double cur = run.trace.losses.back();
    const double scale = std::max(std::abs(prev), std::numeric_limits<double>::min());
    if ((prev - cur) / scale < opts.rel_tol) {
      run.trace.converged = true;
      break;
    }
  }
  run.model = std::move(model);
  return run;
}

}  // namespace

FitResult fit(const SparseTensor& t, const FitOptions& opts) {
  opts.validate();
  const double mass = total_mass(t);
  if (!(mass > 0.0)) throw std::invalid_argument("zero total mass");

  const bool provided = opts.init == InitMethod::Provided;
  if (provided && opts.initial->shape() != t.shape()) {
    throw std::invalid_argument("initial model shape does not match the data");
  }
  const std::size_t restarts = provided ? 1 : opts.restarts;
  const unsigned threads = resolve_threads(opts.threads);
  const unsigned step_threads = restarts > 1 ? 1u : threads;

  std::vector<RestartRun> runs(restarts);
  parallel_for(restarts, restarts > 1 ? threads : 1u, [&](std::size_t r) {
    CpdModel init = provided ? *opts.initial
                             : init_model(t.shape(), opts.rank, restart_seed(opts.seed, r));
    runs[r] = run_restart(t, std::move(init), opts, step_threads, mass);
  });

  std::size_t best = 0;
  for (std::size_t r = 1; r < restarts; ++r) {
    if (runs[r].trace.losses.back() < runs[best].trace.losses.back()) best = r;
  }

  CpdModel model = std::move(*runs[best].model);
  FitReport report;
  report.losses = runs[best].trace.losses;
  report.iterations = report.losses.size() - 1;
  report.converged = runs[best].trace.converged;
  report.mass_residual = runs[best].trace.mass_residuals.back();
  report.restart_index = best;
  for (Eigen::Index k = 0; k < model.weights().size(); ++k) {
    if (model.weights()[k] == 0.0) ++report.dead_components;
  }
  report.restarts.reserve(restarts);
  for (auto& run : runs) report.restarts.push_back(std::move(run.trace));
  return {std::move(model), std::move(report)};
}

}  // namespace kltensor
