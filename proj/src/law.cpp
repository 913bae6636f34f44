#include "mvpf/law.hpp"

#include <stdexcept>

namespace mvpf {

namespace detail {

void step_displacement(const ModelSpec& model, const ParticleCloud& x, const ParticleCloud& source,
                       double dt, const Matrix& dW, Matrix& out, Backend backend,
                       StepScratch& scratch) {
  scratch.s1.resize(x.size());
  scratch.s2.resize(x.size());
  batch_mean_field(model.kernel1, x, source, scratch.s1, backend);
  batch_mean_field(model.kernel2, x, source, scratch.s2, backend);
  batch_euler_displacement(model, x, scratch.s1, scratch.s2, dt, dW, out, backend);
}

ParticleCloud shifted(const ParticleCloud& x, const Matrix& d) {
  ParticleCloud out = x;
  auto& v = out.positions().data();
  const auto& dv = d.data();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += dv[i];
  return out;
}

ParticleCloud shifted(const ParticleCloud& x, const Matrix& d1, const Matrix& d2) {
  ParticleCloud out = x;
  auto& v = out.positions().data();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += d1.data()[i] + d2.data()[i];
  return out;
}

}  // namespace detail

namespace {

void check_input(const ModelSpec& model, std::size_t m, const ParticleCloud& input) {
  if (m == 0) throw std::invalid_argument("propagate_law: m must be positive");
  if (input.size() != m) throw std::invalid_argument("propagate_law: input cloud must hold m particles");
  if (input.dim() != model.dim) throw std::invalid_argument("propagate_law: dimension mismatch");
}

}  // namespace

LawLattice propagate_law(const ModelSpec& model, LevelGrid grid, std::size_t m,
                         const ParticleCloud& input, RngStream& stream, Backend backend) {
  check_input(model, m, input);
  const std::size_t d = model.dim;
  const double dt = grid.dt();
  LawLattice out{grid, m, {}};
  out.clouds.reserve(grid.steps_per_unit() + 1);
  out.clouds.push_back(input);

  detail::StepScratch scratch;
  Matrix d1, d2;
  if (grid.level == 0) {
    auto dW = gaussian_increments(stream, m, d, dt);
    detail::step_displacement(model, input, input, dt, dW, d1, backend, scratch);
    out.clouds.push_back(detail::shifted(input, d1));
    return out;
  }
  for (std::size_t c = 0; c < grid.steps_per_unit() / 2; ++c) {
    const ParticleCloud& start = out.clouds.back();
    auto dW1 = gaussian_increments(stream, m, d, dt);
    detail::step_displacement(model, start, start, dt, dW1, d1, backend, scratch);
    ParticleCloud mid = detail::shifted(start, d1);
    auto dW2 = gaussian_increments(stream, m, d, dt);
    detail::step_displacement(model, mid, mid, dt, dW2, d2, backend, scratch);
    ParticleCloud end = detail::shifted(start, d1, d2);
    out.clouds.push_back(std::move(mid));
    out.clouds.push_back(std::move(end));
  }
  return out;
}

std::pair<LawLattice, LawLattice> propagate_law_coupled(const ModelSpec& model, LevelGrid fine,
                                                        std::size_t m,
                                                        const ParticleCloud& input_fine,
                                                        const ParticleCloud& input_coarse,
                                                        RngStream& stream, Backend backend) {
  if (fine.level == 0)
    throw std::invalid_argument("propagate_law_coupled: level 0 has no coarser level");
  check_input(model, m, input_fine);
  check_input(model, m, input_coarse);
  const LevelGrid coarse = fine.coarser();
  const std::size_t d = model.dim;

  LawLattice f{fine, m, {}};
  LawLattice g{coarse, m, {}};
  f.clouds.reserve(fine.steps_per_unit() + 1);
  g.clouds.reserve(coarse.steps_per_unit() + 1);
  f.clouds.push_back(input_fine);
  g.clouds.push_back(input_coarse);

  detail::StepScratch scratch;
  Matrix d1, d2, dc;
  for (std::size_t c = 0; c < coarse.steps_per_unit(); ++c) {
    auto inc = coupled_increments(stream, fine, m, d);

    const ParticleCloud& start = f.clouds.back();
    detail::step_displacement(model, start, start, fine.dt(), inc.first, d1, backend, scratch);
    ParticleCloud mid = detail::shifted(start, d1);
    detail::step_displacement(model, mid, mid, fine.dt(), inc.second, d2, backend, scratch);
    ParticleCloud end = detail::shifted(start, d1, d2);
    f.clouds.push_back(std::move(mid));
    f.clouds.push_back(std::move(end));

    const ParticleCloud& cstart = g.clouds.back();
    detail::step_displacement(model, cstart, cstart, coarse.dt(), inc.coarse, dc, backend, scratch);
    g.clouds.push_back(detail::shifted(cstart, dc));
  }
  return {std::move(f), std::move(g)};
}

}  // namespace mvpf
