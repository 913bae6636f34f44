#include "mvpf/interaction.hpp"

#include <stdexcept>
#include <string>

namespace mvpf {

namespace {

// Below this many kernel evaluations the fork/join cost dominates.
constexpr std::size_t kParallelThreshold = 1 << 14;

bool use_openmp(Backend b) { return b != Backend::reference; }

// 1/(j+1) for j < n, the weights of the running mean used by mean_field.
std::vector<double> reciprocals(std::size_t n) {
  std::vector<double> r(n);
  for (std::size_t j = 0; j < n; ++j) r[j] = 1.0 / static_cast<double>(j + 1);
  return r;
}

void direct_mean_field(const Kernel& kernel, const ParticleCloud& targets,
                       const ParticleCloud& source, std::span<double> out, bool parallel) {
  const auto n = static_cast<std::ptrdiff_t>(targets.size());
  const auto recip = reciprocals(source.size());
  const bool big = targets.size() * source.size() >= kParallelThreshold;
#pragma omp parallel for schedule(static) if (parallel && big)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    auto x = targets[static_cast<std::size_t>(i)];
    double m = 0.0;
    for (std::size_t j = 0; j < source.size(); ++j) m += (kernel(x, source[j]) - m) * recip[j];
    out[static_cast<std::size_t>(i)] = m;
  }
}

}  // namespace

std::string_view to_string(Backend b) {
  switch (b) {
    case Backend::reference:
      return "reference";
    case Backend::openmp:
      return "openmp";
    case Backend::automatic:
      return "automatic";
  }
  return "automatic";
}

Backend backend_from_string(std::string_view s) {
  if (s == "reference") return Backend::reference;
  if (s == "openmp") return Backend::openmp;
  if (s == "automatic") return Backend::automatic;
  throw std::invalid_argument("unknown backend: " + std::string(s));
}

std::vector<double> separable_moments(const Kernel::Separable& sep, const ParticleCloud& source) {
  std::vector<double> moments(sep.terms, 0.0);
  if (sep.terms == 0) return moments;
  std::vector<double> buf(sep.terms);
  for (std::size_t j = 0; j < source.size(); ++j) {
    sep.right(source[j], buf);
    const double r = 1.0 / static_cast<double>(j + 1);
    for (std::size_t k = 0; k < sep.terms; ++k) moments[k] += (buf[k] - moments[k]) * r;
  }
  return moments;
}

void batch_mean_field(const Kernel& kernel, const ParticleCloud& targets,
                      const ParticleCloud& source, std::span<double> out, Backend backend) {
  if (out.size() != targets.size())
    throw std::invalid_argument("batch_mean_field: output size mismatch");
  if (backend != Backend::automatic || !kernel.separable) {
    direct_mean_field(kernel, targets, source, out, use_openmp(backend));
    return;
  }

  const auto& sep = *kernel.separable;
  if (sep.terms == 0) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  const auto moments = separable_moments(sep, source);
  const auto n = static_cast<std::ptrdiff_t>(targets.size());
  const bool big = targets.size() * sep.terms >= kParallelThreshold;
#pragma omp parallel if (big)
  {
    std::vector<double> buf(sep.terms);
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      sep.left(targets[static_cast<std::size_t>(i)], buf);
      double sum = 0.0;
      for (std::size_t k = 0; k < sep.terms; ++k) sum += buf[k] * moments[k];
      out[static_cast<std::size_t>(i)] = sum;
    }
  }
}

void batch_euler_displacement(const ModelSpec& model, const ParticleCloud& positions,
                              std::span<const double> s1, std::span<const double> s2, double dt,
                              const Matrix& increments, Matrix& out, Backend backend) {
  const auto n = static_cast<std::ptrdiff_t>(positions.size());
  if (increments.rows() != positions.size() || increments.cols() != model.dim)
    throw std::invalid_argument("batch_euler_displacement: increment shape mismatch");
  if (out.rows() != positions.size() || out.cols() != model.dim) out = Matrix(positions.size(), model.dim);
  const bool big = positions.size() * model.dim * model.dim >= kParallelThreshold;
#pragma omp parallel for schedule(static) if (use_openmp(backend) && big)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    euler_displacement(model, positions[u], s1[u], s2[u], dt, increments.row(u), out.row(u));
  }
}

}  // namespace mvpf
