#include "mvpf/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace mvpf {

ParticleCloud::ParticleCloud(std::size_t n, std::size_t dim) : positions_(n, dim) {
  if (n == 0 || dim == 0) throw std::invalid_argument("ParticleCloud: empty cloud");
}

ParticleCloud::ParticleCloud(Matrix positions) : positions_(std::move(positions)) {
  if (positions_.rows() == 0 || positions_.cols() == 0)
    throw std::invalid_argument("ParticleCloud: empty cloud");
}

ParticleCloud ParticleCloud::dirac(std::size_t n, std::span<const double> x) {
  ParticleCloud cloud(n, x.size());
  for (std::size_t i = 0; i < n; ++i) std::copy(x.begin(), x.end(), cloud[i].begin());
  return cloud;
}

ParticleCloud ParticleCloud::from_scalars(std::span<const double> xs) {
  ParticleCloud cloud(xs.size(), 1);
  std::copy(xs.begin(), xs.end(), cloud.positions().data().begin());
  return cloud;
}

std::vector<double> ParticleCloud::mean() const {
  std::vector<double> m(dim(), 0.0);
  for (std::size_t i = 0; i < size(); ++i) {
    auto p = (*this)[i];
    for (std::size_t k = 0; k < dim(); ++k) m[k] += p[k];
  }
  for (auto& v : m) v /= static_cast<double>(size());
  return m;
}

Kernel Kernel::zero() {
  Kernel k;
  k.eval = [](std::span<const double>, std::span<const double>) { return 0.0; };
  k.separable = Separable{0, [](auto, auto) {}, [](auto, auto) {}};
  return k;
}

Kernel Kernel::constant(double c) {
  Kernel k;
  k.eval = [c](std::span<const double>, std::span<const double>) { return c; };
  k.separable = Separable{
      1, [c](std::span<const double>, std::span<double> out) { out[0] = c; },
      [](std::span<const double>, std::span<double> out) { out[0] = 1.0; }};
  return k;
}

Kernel Kernel::sine_difference() {
  Kernel k;
  k.eval = [](std::span<const double> x, std::span<const double> y) {
    return std::sin(x[0] - y[0]);
  };
  k.separable = Separable{2,
                          [](std::span<const double> x, std::span<double> out) {
                            out[0] = std::sin(x[0]);
                            out[1] = -std::cos(x[0]);
                          },
                          [](std::span<const double> y, std::span<double> out) {
                            out[0] = std::cos(y[0]);
                            out[1] = std::sin(y[0]);
                          }};
  return k;
}

Kernel Kernel::general(
    std::function<double(std::span<const double>, std::span<const double>)> f) {
  Kernel k;
  k.eval = std::move(f);
  return k;
}

void ModelSpec::validate() const {
  if (dim == 0) throw std::invalid_argument("ModelSpec: dim must be positive");
  if (x0.size() != dim) throw std::invalid_argument("ModelSpec: x0 has wrong length");
  if (!drift || !diffusion || !kernel1.eval || !kernel2.eval)
    throw std::invalid_argument("ModelSpec: missing coefficient function");
}

namespace {

ModelSpec kuramoto_base(std::string name, double theta, double x0) {
  ModelSpec m;
  m.name = std::move(name);
  m.dim = 1;
  m.x0 = {x0};
  m.drift = [theta](std::span<const double>, double s, std::span<double> out) {
    out[0] = theta + s;
  };
  m.kernel1 = Kernel::sine_difference();
  m.kernel2 = Kernel::zero();
  return m;
}

}  // namespace

ModelSpec kuramoto(double theta, double sigma, double x0) {
  auto m = kuramoto_base("kuramoto", theta, x0);
  m.diffusion = [sigma](std::span<const double>, double, std::span<double> out) {
    out[0] = sigma;
  };
  return m;
}

ModelSpec modified_kuramoto(double theta, double sigma, double x0) {
  auto m = kuramoto_base("modified_kuramoto", theta, x0);
  m.diffusion = [sigma](std::span<const double> x, double, std::span<double> out) {
    out[0] = sigma / (1.0 + x[0] * x[0]);
  };
  return m;
}

ModelSpec scaled_brownian(double sigma, std::vector<double> x0) {
  ModelSpec m;
  m.name = "scaled_brownian";
  m.dim = x0.size();
  m.x0 = std::move(x0);
  m.drift = [](std::span<const double>, double, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
  };
  m.diffusion = [sigma, d = m.dim](std::span<const double>, double, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t k = 0; k < d; ++k) out[k * d + k] = sigma;
  };
  m.kernel1 = Kernel::zero();
  m.kernel2 = Kernel::zero();
  return m;
}

double mean_field(const Kernel& kernel, std::span<const double> x, const ParticleCloud& cloud) {
  // Running mean m_j = m_{j-1} + (v_j - m_{j-1}) / j: same value as the sum
  // over N up to rounding, and exact when every v_j is equal.
  double m = 0.0;
  for (std::size_t j = 0; j < cloud.size(); ++j)
    m += (kernel(x, cloud[j]) - m) * (1.0 / static_cast<double>(j + 1));
  return m;
}

void euler_displacement(const ModelSpec& model, std::span<const double> x, double s1, double s2,
                        double dt, std::span<const double> dW, std::span<double> out) {
  const std::size_t d = model.dim;
  if (d == 1) {
    double a = 0.0, b = 0.0;
    model.drift(x, s1, {&a, 1});
    model.diffusion(x, s2, {&b, 1});
    out[0] = a * dt + b * dW[0];
    return;
  }
  thread_local std::vector<double> a, b;
  a.assign(d, 0.0);
  b.assign(d * d, 0.0);
  model.drift(x, s1, a);
  model.diffusion(x, s2, b);
  for (std::size_t r = 0; r < d; ++r) {
    double noise = 0.0;
    for (std::size_t c = 0; c < d; ++c) noise += b[r * d + c] * dW[c];
    out[r] = a[r] * dt + noise;
  }
}

std::vector<double> euler_step(const ModelSpec& model, std::span<const double> x, double s1,
                               double s2, double dt, std::span<const double> dW) {
  std::vector<double> out(model.dim);
  euler_displacement(model, x, s1, s2, dt, dW, out);
  for (std::size_t k = 0; k < model.dim; ++k) out[k] = x[k] + out[k];
  return out;
}

}  // namespace mvpf
