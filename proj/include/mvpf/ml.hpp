#pragma once

#include <cstdint>
#include <vector>

#include "mvpf/filter.hpp"

namespace mvpf {

/// Proportionality constants of the level and particle-count allocation.
struct MlConstants {
  double n = 1.0;
  double m = 1.0;
  double l = 1.0;
};

/// Multilevel configuration: finest level L and counts N_l, M_l for l = 0..L.
struct MlConfig {
  unsigned max_level = 0;
  std::vector<std::size_t> n_per_level;
  std::vector<std::size_t> m_per_level;
  double eps = 0.0;
  MlConstants constants;

  /// Counts present and positive; N_l - N_{l+1} >= L - l.
  void validate() const;
};

/// Allocation for target accuracy eps in (0, 1), logs in base 2:
///   L   = ceil(c_l |log eps|)
///   N_l = max(2, ceil(c_n eps^-2 dt_l^(1/3)))
///   M_l = max(2, ceil(c_m eps^-2 |log eps| dt_l^(5/6)))
/// then N_l is raised, finest level first, until N_l - N_{l+1} >= L - l.
MlConfig select_params(double eps, const MlConstants& constants = {});

/// T * sum_l 2^l M_l (M_l + N_l).
double ml_cost(const MlConfig& cfg, std::size_t steps);

struct MlRun {
  std::vector<double> estimates;
  std::vector<std::vector<double>> level_terms;  // [0] = level-0 PF, [l] = CPF increments
  double cost = 0.0;
};

/// Level-0 particle filter plus one independent coupled filter per level,
/// summed in level order.
MlRun run_mlpf(const ModelSpec& model, const ObservationSeries& obs, const TestFunction& phi,
               const MlConfig& cfg, std::uint64_t seed, const RunOptions& opts = {});

}  // namespace mvpf
