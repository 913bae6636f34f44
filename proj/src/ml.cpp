#include "mvpf/ml.hpp"

#include <cmath>
#include <exception>
#include <stdexcept>
#include <string>

namespace mvpf {

void MlConfig::validate() const {
  const std::size_t levels = static_cast<std::size_t>(max_level) + 1;
  if (n_per_level.size() != levels || m_per_level.size() != levels)
    throw std::invalid_argument("MlConfig: need one (N, M) pair per level");
  for (std::size_t l = 0; l < levels; ++l)
    if (n_per_level[l] == 0 || m_per_level[l] == 0)
      throw std::invalid_argument("MlConfig: particle counts must be positive");
  for (std::size_t l = 0; l + 1 < levels; ++l) {
    const std::size_t gap = max_level - l;
    if (n_per_level[l] < n_per_level[l + 1] + gap)
      throw std::invalid_argument("MlConfig: N_l - N_{l+1} >= L - l violated at l = " +
                                  std::to_string(l));
  }
}

namespace {

// ceil that ignores round-off just above an exact integer, e.g. 64 * 2^(-1/3*3).
std::size_t ceil_count(double x) {
  const double r = std::round(x);
  if (std::abs(x - r) <= 1e-9 * std::max(1.0, std::abs(x))) return static_cast<std::size_t>(r);
  return static_cast<std::size_t>(std::ceil(x));
}

}  // namespace

MlConfig select_params(double eps, const MlConstants& c) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("select_params: eps must lie in (0, 1)");
  if (!(c.n > 0.0 && c.m > 0.0 && c.l > 0.0))
    throw std::invalid_argument("select_params: constants must be positive");
  const double log_eps = std::abs(std::log2(eps));
  MlConfig cfg;
  cfg.eps = eps;
  cfg.constants = c;
  cfg.max_level = static_cast<unsigned>(ceil_count(c.l * log_eps));
  const double base = 1.0 / (eps * eps);
  for (unsigned l = 0; l <= cfg.max_level; ++l) {
    const double ld = static_cast<double>(l);
    cfg.n_per_level.push_back(std::max<std::size_t>(2, ceil_count(c.n * base * std::exp2(-ld / 3.0))));
    cfg.m_per_level.push_back(
        std::max<std::size_t>(2, ceil_count(c.m * base * log_eps * std::exp2(-5.0 * ld / 6.0))));
  }
  for (unsigned l = cfg.max_level; l-- > 0;) {
    const std::size_t need = cfg.n_per_level[l + 1] + (cfg.max_level - l);
    cfg.n_per_level[l] = std::max(cfg.n_per_level[l], need);
  }
  return cfg;
}

double ml_cost(const MlConfig& cfg, std::size_t steps) {
  double total = 0.0;
  for (unsigned l = 0; l <= cfg.max_level; ++l)
    total += filter_cost(LevelGrid(l), cfg.n_per_level[l], cfg.m_per_level[l], steps);
  return total;
}

MlRun run_mlpf(const ModelSpec& model, const ObservationSeries& obs, const TestFunction& phi,
               const MlConfig& cfg, std::uint64_t seed, const RunOptions& opts) {
  cfg.validate();
  const std::size_t levels = static_cast<std::size_t>(cfg.max_level) + 1;
  MlRun out;
  out.level_terms.resize(levels);
  std::vector<double> costs(levels, 0.0);
  std::vector<std::exception_ptr> errors(levels);

  // Level runs are independent; each writes only its own slot.
#pragma omp parallel for schedule(dynamic, 1) if (levels > 1)
  for (std::ptrdiff_t li = 0; li < static_cast<std::ptrdiff_t>(levels); ++li) {
    const auto l = static_cast<unsigned>(li);
    RunOptions level_opts = opts;
    level_opts.streams.reset();
    try {
      if (l == 0) {
        auto pf = run_pf(model, LevelGrid(0), cfg.n_per_level[0], cfg.m_per_level[0], obs, phi, seed,
                         level_opts);
        out.level_terms[0] = std::move(pf.estimates);
        costs[0] = pf.cost;
      } else {
        auto cpf = run_cpf(model, LevelGrid(l), cfg.n_per_level[l], cfg.m_per_level[l], obs, phi,
                           seed, level_opts);
        out.level_terms[l] = std::move(cpf.increments);
        costs[l] = cpf.cost;
      }
    } catch (...) {
      errors[l] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  out.estimates = out.level_terms[0];
  for (std::size_t l = 1; l < levels; ++l)
    for (std::size_t t = 0; t < out.estimates.size(); ++t) out.estimates[t] += out.level_terms[l][t];
  for (double c : costs) out.cost += c;
  return out;
}

}  // namespace mvpf
