#include "mvpf/filter.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "mvpf/law.hpp"
#include "mvpf/resample.hpp"

namespace mvpf {

double ObservationSeries::log_weight(std::span<const double> x, std::size_t t) const {
  if (log_likelihood) return log_likelihood(x, y[t]);
  return mvpf::log_likelihood(x, y[t], tau);
}

void ObservationSeries::validate(std::size_t dim) const {
  if (y.empty()) throw std::invalid_argument("ObservationSeries: no observations");
  if (!log_likelihood && !(tau > 0.0))
    throw std::invalid_argument("ObservationSeries: tau must be positive");
  for (const auto& v : y) {
    if (v.size() != dim) throw std::invalid_argument("ObservationSeries: dimension mismatch");
    for (double c : v)
      if (!std::isfinite(c)) throw std::invalid_argument("ObservationSeries: non-finite value");
  }
}

ObservationSeries ObservationSeries::scalar(std::span<const double> ys, double tau) {
  ObservationSeries obs;
  obs.tau = tau;
  for (double v : ys) obs.y.push_back({v});
  return obs;
}

double log_likelihood(std::span<const double> x, std::span<const double> y, double tau) {
  double sq = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double r = (y[k] - x[k]) / tau;
    sq += r * r;
  }
  const double d = static_cast<double>(x.size());
  return -0.5 * sq - d * std::log(tau) - 0.5 * d * std::log(2.0 * std::numbers::pi);
}

double likelihood(std::span<const double> x, std::span<const double> y, double tau) {
  return std::exp(log_likelihood(x, y, tau));
}

StreamPlan StreamPlan::standard(std::uint64_t replication, unsigned level) {
  return {StreamId{replication, Role::law, level, 0},
          StreamId{replication, Role::filter, level, 0},
          StreamId{replication, Role::resample, level, 0}};
}

double filter_cost(LevelGrid grid, std::size_t n, std::size_t m, std::size_t steps) {
  const double mm = static_cast<double>(m);
  return static_cast<double>(steps) * static_cast<double>(grid.steps_per_unit()) * mm *
         (mm + static_cast<double>(n));
}

namespace {

void check_common(const ModelSpec& model, std::size_t n, std::size_t m,
                  const ObservationSeries& obs) {
  model.validate();
  if (n == 0 || m == 0) throw std::invalid_argument("filter: particle counts must be positive");
  obs.validate(model.dim);
}

// Moves filter particles over one unit interval along `lattice`.
void advance_filter(const ModelSpec& model, const LawLattice& lattice, ParticleCloud& x,
                    RngStream& stream, Backend backend, detail::StepScratch& scratch) {
  const double dt = lattice.grid.dt();
  const std::size_t n = x.size(), d = model.dim;
  Matrix d1, d2;
  if (lattice.grid.level == 0) {
    auto dW = gaussian_increments(stream, n, d, dt);
    detail::step_displacement(model, x, lattice.clouds[0], dt, dW, d1, backend, scratch);
    x = detail::shifted(x, d1);
    return;
  }
  for (std::size_t c = 0; c < lattice.grid.steps_per_unit() / 2; ++c) {
    auto dW1 = gaussian_increments(stream, n, d, dt);
    detail::step_displacement(model, x, lattice.clouds[2 * c], dt, dW1, d1, backend, scratch);
    ParticleCloud mid = detail::shifted(x, d1);
    auto dW2 = gaussian_increments(stream, n, d, dt);
    detail::step_displacement(model, mid, lattice.clouds[2 * c + 1], dt, dW2, d2, backend, scratch);
    x = detail::shifted(x, d1, d2);
  }
}

WeightVector weigh(const ParticleCloud& x, const ObservationSeries& obs, std::size_t t) {
  std::vector<double> lw(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) lw[i] = obs.log_weight(x[i], t);
  return normalize_log_weights(lw);
}

double weighted_mean(const WeightVector& w, const ParticleCloud& x, const TestFunction& phi) {
  double est = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) est += w[i] * phi(x[i]);
  return est;
}

ParticleCloud gather(const ParticleCloud& x, std::span<const std::size_t> idx) {
  ParticleCloud out(idx.size(), x.dim());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    auto src = x[idx[i]];
    std::copy(src.begin(), src.end(), out[i].begin());
  }
  return out;
}

}  // namespace

FilterRun run_pf(const ModelSpec& model, LevelGrid grid, std::size_t n, std::size_t m,
                 const ObservationSeries& obs, const TestFunction& phi, std::uint64_t seed,
                 const RunOptions& opts) {
  check_common(model, n, m, obs);
  const auto plan = opts.streams.value_or(StreamPlan::standard(opts.replication, grid.level));
  RngStream law_stream(seed, plan.law);
  RngStream filter_stream(seed, plan.filter);
  RngStream resample_stream(seed, plan.resample);

  FilterRun run;
  run.level = grid.level;
  run.n = n;
  run.m = m;
  run.seed = seed;
  run.cost = filter_cost(grid, n, m, obs.length());
  run.estimates.reserve(obs.length());

  ParticleCloud law = ParticleCloud::dirac(m, model.x0);
  ParticleCloud x = ParticleCloud::dirac(n, model.x0);
  detail::StepScratch scratch;
  for (std::size_t t = 0; t < obs.length(); ++t) {
    LawLattice lattice = propagate_law(model, grid, m, law, law_stream, opts.backend);
    advance_filter(model, lattice, x, filter_stream, opts.backend, scratch);
    const auto w = weigh(x, obs, t);
    run.estimates.push_back(weighted_mean(w, x, phi));
    x = gather(x, multinomial_indices(w, n, resample_stream));
    law = lattice.terminal();
  }
  return run;
}

CoupledRun run_cpf(const ModelSpec& model, LevelGrid fine, std::size_t n, std::size_t m,
                   const ObservationSeries& obs, const TestFunction& phi, std::uint64_t seed,
                   const RunOptions& opts) {
  if (fine.level == 0) throw std::invalid_argument("run_cpf: level 0 has no coarser level");
  check_common(model, n, m, obs);
  const LevelGrid coarse = fine.coarser();
  const std::size_t d = model.dim;
  const auto plan = opts.streams.value_or(StreamPlan::standard(opts.replication, fine.level));
  RngStream law_stream(seed, plan.law);
  RngStream filter_stream(seed, plan.filter);
  RngStream resample_stream(seed, plan.resample);

  CoupledRun run;
  run.cost = filter_cost(fine, n, m, obs.length());

  ParticleCloud law_f = ParticleCloud::dirac(m, model.x0);
  ParticleCloud law_c = law_f;
  ParticleCloud xf = ParticleCloud::dirac(n, model.x0);
  ParticleCloud xc = xf;
  detail::StepScratch scratch;
  Matrix d1, d2, dc;
  for (std::size_t t = 0; t < obs.length(); ++t) {
    auto [lf, lc] = propagate_law_coupled(model, fine, m, law_f, law_c, law_stream, opts.backend);

    for (std::size_t c = 0; c < coarse.steps_per_unit(); ++c) {
      auto inc = coupled_increments(filter_stream, fine, n, d);
      detail::step_displacement(model, xf, lf.clouds[2 * c], fine.dt(), inc.first, d1,
                                opts.backend, scratch);
      ParticleCloud mid = detail::shifted(xf, d1);
      detail::step_displacement(model, mid, lf.clouds[2 * c + 1], fine.dt(), inc.second, d2,
                                opts.backend, scratch);
      xf = detail::shifted(xf, d1, d2);
      detail::step_displacement(model, xc, lc.clouds[c], coarse.dt(), inc.coarse, dc,
                                opts.backend, scratch);
      xc = detail::shifted(xc, dc);
    }

    const auto wf = weigh(xf, obs, t);
    const auto wc = weigh(xc, obs, t);
    double inc = 0.0, ef = 0.0, ec = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double a = wf[i] * phi(xf[i]);
      const double b = wc[i] * phi(xc[i]);
      inc += a - b;
      ef += a;
      ec += b;
    }
    run.increments.push_back(inc);
    run.fine_estimates.push_back(ef);
    run.coarse_estimates.push_back(ec);

    const MaximalCoupling coupling(wf, wc);
    std::vector<std::size_t> jf(n), jc(n);
    for (std::size_t i = 0; i < n; ++i) std::tie(jf[i], jc[i]) = coupling.sample(resample_stream);
    xf = gather(xf, jf);
    xc = gather(xc, jc);
    law_f = lf.terminal();
    law_c = lc.terminal();
  }
  return run;
}

}  // namespace mvpf
