#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mvpf/lattice.hpp"

namespace mvpf {

/// Raised when every raw weight is zero.
class WeightUnderflow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Probability vector over particle indices.
class WeightVector {
 public:
  WeightVector() = default;

  std::size_t size() const { return w_.size(); }
  double operator[](std::size_t i) const { return w_[i]; }
  std::span<const double> values() const { return w_; }

  friend WeightVector normalize_weights(std::span<const double> raw);

 private:
  std::vector<double> w_;
};

/// w_i = raw_i / sum_j raw_j. Throws WeightUnderflow if the sum is zero.
WeightVector normalize_weights(std::span<const double> raw);

/// Normalised weights from log-weights, shifted by their maximum first.
WeightVector normalize_log_weights(std::span<const double> log_raw);

/// First index whose cumulative mass strictly exceeds u * total. `cumulative`
/// must be non-decreasing with a positive last entry.
std::size_t inverse_cdf(std::span<const double> cumulative, double u);

/// `count` i.i.d. categorical draws by inverse CDF in index order.
std::vector<std::size_t> multinomial_indices(const WeightVector& w, std::size_t count,
                                             RngStream& stream);

/// Sampler for the maximal coupling of two index distributions.
///
/// With probability rho = sum_i min(v1_i, v2_i) both indices equal one draw
/// from min(v1, v2) / rho; otherwise they are drawn independently from the
/// normalised residuals v1 - min and v2 - min. The marginals are exactly v1
/// and v2. Preparing costs O(M); each draw is O(log M).
class MaximalCoupling {
 public:
  MaximalCoupling(const WeightVector& v1, const WeightVector& v2);

  double overlap() const { return rho_; }
  std::pair<std::size_t, std::size_t> sample(RngStream& stream) const;

 private:
  double rho_ = 0.0;
  std::vector<double> common_cdf_;
  std::vector<double> residual1_cdf_;
  std::vector<double> residual2_cdf_;
};

/// One draw from the maximal coupling of v1 and v2.
std::pair<std::size_t, std::size_t> maximal_coupling_indices(const WeightVector& v1,
                                                             const WeightVector& v2,
                                                             RngStream& stream);

}  // namespace mvpf
