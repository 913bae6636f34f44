#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "mvpf/model.hpp"

namespace mvpf {

/// How batched particle kernels execute.
///
/// `reference` is the plain serial double loop and is kept as the oracle for
/// the others. `openmp` parallelises the same loop over target particles, so
/// per-target summation order and therefore results are bit-identical to
/// `reference`. `automatic` uses a kernel's separable expansion when it has
/// one and falls back to `openmp` otherwise; it agrees with `reference` to
/// rounding.
enum class Backend { reference, openmp, automatic };

std::string_view to_string(Backend b);
Backend backend_from_string(std::string_view s);

/// Means of the right-hand factors of a separable kernel over a cloud.
std::vector<double> separable_moments(const Kernel::Separable& sep, const ParticleCloud& source);

/// out[i] = (1/N) sum_j kernel(targets[i], source[j]).
void batch_mean_field(const Kernel& kernel, const ParticleCloud& targets,
                      const ParticleCloud& source, std::span<double> out,
                      Backend backend = Backend::automatic);

/// out.row(i) = a(x_i, s1[i]) dt + b(x_i, s2[i]) dW_i for every particle.
void batch_euler_displacement(const ModelSpec& model, const ParticleCloud& positions,
                              std::span<const double> s1, std::span<const double> s2, double dt,
                              const Matrix& increments, Matrix& out,
                              Backend backend = Backend::automatic);

}  // namespace mvpf
