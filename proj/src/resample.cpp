#include "mvpf/resample.hpp"

#include <algorithm>
#include <cmath>

namespace mvpf {

WeightVector normalize_weights(std::span<const double> raw) {
  double total = 0.0;
  for (double r : raw) {
    if (!(r >= 0.0) || !std::isfinite(r))
      throw std::invalid_argument("normalize_weights: raw weights must be finite and non-negative");
    total += r;
  }
  if (!(total > 0.0)) throw WeightUnderflow("normalize_weights: all weights are zero");
  WeightVector w;
  w.w_.resize(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) w.w_[i] = raw[i] / total;
  return w;
}

WeightVector normalize_log_weights(std::span<const double> log_raw) {
  if (log_raw.empty()) throw std::invalid_argument("normalize_log_weights: empty input");
  double top = -INFINITY;
  for (double v : log_raw) {
    if (std::isnan(v)) throw std::invalid_argument("normalize_log_weights: NaN log-weight");
    top = std::max(top, v);
  }
  if (!std::isfinite(top)) throw WeightUnderflow("normalize_log_weights: no finite log-weight");
  std::vector<double> raw(log_raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = std::exp(log_raw[i] - top);
  return normalize_weights(raw);
}

std::size_t inverse_cdf(std::span<const double> cumulative, double u) {
  const double total = cumulative.back();
  const double target = u * total;
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
  if (it == cumulative.end()) it = std::lower_bound(cumulative.begin(), cumulative.end(), total);
  return static_cast<std::size_t>(it - cumulative.begin());
}

namespace {

std::vector<double> cumsum(std::span<const double> w) {
  std::vector<double> c(w.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) c[i] = acc += w[i];
  return c;
}

}  // namespace

std::vector<std::size_t> multinomial_indices(const WeightVector& w, std::size_t count,
                                             RngStream& stream) {
  if (count == 0) throw std::invalid_argument("multinomial_indices: count must be positive");
  if (w.size() == 0) throw std::invalid_argument("multinomial_indices: empty weights");
  const auto cdf = cumsum(w.values());
  std::vector<std::size_t> idx(count);
  for (auto& i : idx) i = inverse_cdf(cdf, stream.uniform());
  return idx;
}

MaximalCoupling::MaximalCoupling(const WeightVector& v1, const WeightVector& v2) {
  if (v1.size() != v2.size())
    throw std::invalid_argument("maximal coupling: weight vectors differ in length");
  if (v1.size() == 0) throw std::invalid_argument("maximal coupling: empty weights");
  const std::size_t n = v1.size();
  std::vector<double> common(n);
  for (std::size_t i = 0; i < n; ++i) common[i] = std::min(v1[i], v2[i]);
  common_cdf_ = cumsum(common);
  rho_ = common_cdf_.back();
  if (1.0 - rho_ <= 1e-14) {
    rho_ = 1.0;
    return;
  }
  std::vector<double> r1(n), r2(n);
  for (std::size_t i = 0; i < n; ++i) {
    r1[i] = v1[i] - common[i];
    r2[i] = v2[i] - common[i];
  }
  residual1_cdf_ = cumsum(r1);
  residual2_cdf_ = cumsum(r2);
}

std::pair<std::size_t, std::size_t> MaximalCoupling::sample(RngStream& stream) const {
  if (stream.uniform() < rho_) {
    const auto i = inverse_cdf(common_cdf_, stream.uniform());
    return {i, i};
  }
  const auto i1 = inverse_cdf(residual1_cdf_, stream.uniform());
  const auto i2 = inverse_cdf(residual2_cdf_, stream.uniform());
  return {i1, i2};
}

std::pair<std::size_t, std::size_t> maximal_coupling_indices(const WeightVector& v1,
                                                             const WeightVector& v2,
                                                             RngStream& stream) {
  return MaximalCoupling(v1, v2).sample(stream);
}

}  // namespace mvpf
