#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "mvpf/interaction.hpp"
#include "mvpf/lattice.hpp"
#include "mvpf/model.hpp"

namespace mvpf {

using TestFunction = std::function<double(std::span<const double>)>;
using LogLikelihoodFn =
    std::function<double(std::span<const double> x, std::span<const double> y)>;

/// Observations y_1..y_T at unit times with Gaussian noise of scale tau.
struct ObservationSeries {
  std::vector<std::vector<double>> y;
  double tau = 1.0;
  /// Replaces the Gaussian log-density when set.
  LogLikelihoodFn log_likelihood;

  std::size_t length() const { return y.size(); }
  double log_weight(std::span<const double> x, std::size_t t) const;
  void validate(std::size_t dim) const;

  static ObservationSeries scalar(std::span<const double> ys, double tau);
};

/// N(x, tau^2 I) density at y.
double likelihood(std::span<const double> x, std::span<const double> y, double tau);
double log_likelihood(std::span<const double> x, std::span<const double> y, double tau);

/// Stream labels used by one filter run.
struct StreamPlan {
  StreamId law;
  StreamId filter;
  StreamId resample;

  static StreamPlan standard(std::uint64_t replication, unsigned level);
};

struct RunOptions {
  std::uint64_t replication = 0;
  Backend backend = Backend::automatic;
  /// Overrides the standard labels; tests use this to alias streams.
  std::optional<StreamPlan> streams;
};

struct FilterRun {
  std::vector<double> estimates;
  unsigned level = 0;
  std::size_t n = 0;
  std::size_t m = 0;
  double cost = 0.0;
  std::uint64_t seed = 0;
};

struct CoupledRun {
  std::vector<double> increments;
  std::vector<double> fine_estimates;
  std::vector<double> coarse_estimates;
  double cost = 0.0;
};

/// T * 2^l * m * (m + n): kernel/drift evaluations at unit cost.
double filter_cost(LevelGrid grid, std::size_t n, std::size_t m, std::size_t steps);

/// Particle filter at one level. Each unit interval advances an independent
/// m-particle law lattice, moves the n filter particles with mean fields taken
/// against that lattice, weights by the likelihood, records sum_i V^i phi(X^i)
/// and resamples multinomially.
FilterRun run_pf(const ModelSpec& model, LevelGrid grid, std::size_t n, std::size_t m,
                 const ObservationSeries& obs, const TestFunction& phi, std::uint64_t seed,
                 const RunOptions& opts = {});

/// Coupled particle filter for the level-l minus level-(l-1) difference.
/// Fine and coarse filter particles share Brownian increments, their lattices
/// come from propagate_law_coupled, and pairs are resampled through the
/// maximal coupling of the two weight vectors.
CoupledRun run_cpf(const ModelSpec& model, LevelGrid fine, std::size_t n, std::size_t m,
                   const ObservationSeries& obs, const TestFunction& phi, std::uint64_t seed,
                   const RunOptions& opts = {});

}  // namespace mvpf
