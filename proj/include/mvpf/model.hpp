#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mvpf {

/// Dense row-major matrix of doubles. Rows are particles or increments.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Empirical measure (1/N) sum_i delta_{X^i}: N particle positions in R^d.
class ParticleCloud {
 public:
  ParticleCloud() = default;
  ParticleCloud(std::size_t n, std::size_t dim);
  explicit ParticleCloud(Matrix positions);

  /// n copies of the point x.
  static ParticleCloud dirac(std::size_t n, std::span<const double> x);
  /// One-dimensional cloud from scalar positions.
  static ParticleCloud from_scalars(std::span<const double> xs);

  std::size_t size() const { return positions_.rows(); }
  std::size_t dim() const { return positions_.cols(); }

  std::span<double> operator[](std::size_t i) { return positions_.row(i); }
  std::span<const double> operator[](std::size_t i) const { return positions_.row(i); }

  Matrix& positions() { return positions_; }
  const Matrix& positions() const { return positions_; }

  /// Componentwise mean over particles, summed in index order.
  std::vector<double> mean() const;

  bool operator==(const ParticleCloud&) const = default;

 private:
  Matrix positions_;
};

using PointFn = std::function<double(std::span<const double>)>;

/// Interaction kernel xi(x, y) -> R.
///
/// A kernel may also carry a finite separable expansion
/// xi(x, y) = sum_k left_k(x) * right_k(y). When present, the mean field over a
/// cloud reduces to sum_k left_k(x) * mean_j right_k(Y^j), which is the same
/// quantity evaluated in O(N) instead of O(N^2) per cloud.
struct Kernel {
  struct Separable {
    std::size_t terms = 0;
    std::function<void(std::span<const double> x, std::span<double> out)> left;
    std::function<void(std::span<const double> y, std::span<double> out)> right;
  };

  std::function<double(std::span<const double> x, std::span<const double> y)> eval;
  std::optional<Separable> separable;

  double operator()(std::span<const double> x, std::span<const double> y) const {
    return eval(x, y);
  }

  static Kernel zero();
  static Kernel constant(double c);
  /// sin(x_0 - y_0), with the expansion sin x cos y - cos x sin y.
  static Kernel sine_difference();
  /// Wraps an arbitrary function; mean fields use the direct O(N^2) sum.
  static Kernel general(std::function<double(std::span<const double>, std::span<const double>)> f);
};

/// Coefficients of dX = a(X, xi1bar) dt + b(X, xi2bar) dW in R^d.
///
/// drift writes a(x, s) into a length-d span; diffusion writes b(x, s) into a
/// row-major d*d span. Instances are immutable after construction and may be
/// shared across threads.
struct ModelSpec {
  using DriftFn =
      std::function<void(std::span<const double> x, double s, std::span<double> out)>;
  using DiffusionFn =
      std::function<void(std::span<const double> x, double s, std::span<double> out)>;

  std::string name;
  std::size_t dim = 1;
  std::vector<double> x0;
  DriftFn drift;
  DiffusionFn diffusion;
  Kernel kernel1;
  Kernel kernel2;

  void validate() const;
};

/// dX = (theta + E[sin(X - Y)]) dt + sigma dW.
ModelSpec kuramoto(double theta, double sigma, double x0);
/// As kuramoto but with diffusion sigma / (1 + X^2).
ModelSpec modified_kuramoto(double theta, double sigma, double x0);

/// Non-interacting dX = sigma dW in R^d started at x0 (a = 0, b = sigma I).
ModelSpec scaled_brownian(double sigma, std::vector<double> x0);

/// (1/N) sum_j kernel(x, X^j), accumulated in index order as a running mean.
double mean_field(const Kernel& kernel, std::span<const double> x, const ParticleCloud& cloud);

/// a(x, s1) dt + b(x, s2) dW written into out.
void euler_displacement(const ModelSpec& model, std::span<const double> x, double s1, double s2,
                        double dt, std::span<const double> dW, std::span<double> out);

/// x + a(x, s1) dt + b(x, s2) dW.
std::vector<double> euler_step(const ModelSpec& model, std::span<const double> x, double s1,
                               double s2, double dt, std::span<const double> dW);

}  // namespace mvpf
