#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "mvpf/resample.hpp"
#include "support.hpp"

using namespace mvpf;

namespace {

WeightVector random_weights(std::mt19937_64& gen, std::size_t n, bool sparse) {
  std::gamma_distribution<double> g(0.5);
  std::bernoulli_distribution zero(0.3);
  std::vector<double> raw(n);
  for (auto& r : raw) r = (sparse && zero(gen)) ? 0.0 : g(gen);
  raw[0] += 1e-3;  // keep at least one entry positive
  return normalize_weights(raw);
}

std::vector<std::size_t> histogram(const std::vector<std::size_t>& idx, std::size_t n) {
  std::vector<std::size_t> h(n, 0);
  for (auto i : idx) ++h[i];
  return h;
}

}  // namespace

TEST_CASE("normalize weights") {
  const std::vector<double> equal(5, 3.0);
  const auto w = normalize_weights(equal);
  for (std::size_t i = 0; i < 5; ++i) CHECK(w[i] == 0.2);

  const auto w2 = normalize_weights(std::vector<double>{1.0, 3.0});
  CHECK(w2[0] == 0.25);
  CHECK(w2[1] == 0.75);

  CHECK_THROWS_AS(normalize_weights(std::vector<double>{0.0, 0.0}), WeightUnderflow);
  CHECK_THROWS_AS(normalize_weights(std::vector<double>{1.0, -1.0}), std::invalid_argument);
  CHECK_THROWS_AS(normalize_weights(std::vector<double>{1.0, std::numeric_limits<double>::infinity()}),
                  std::invalid_argument);
  CHECK_THROWS_AS(normalize_log_weights(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("normalized weights sum to one") {
  std::mt19937_64 gen(1);
  for (int k = 0; k < 50; ++k) {
    const auto w = random_weights(gen, 1 + k * 7, k % 2 == 0);
    double s = 0.0;
    for (double v : w.values()) {
      CHECK(v >= 0.0);
      s += v;
    }
    CHECK(std::abs(s - 1.0) <= 1e-12);
  }
}

TEST_CASE("log weights survive extreme magnitudes") {
  const auto w = normalize_log_weights(std::vector<double>{-1e5, -1e5 + std::log(3.0)});
  CHECK(w[0] == doctest::Approx(0.25));
  CHECK(w[1] == doctest::Approx(0.75));
  const auto u = normalize_log_weights(std::vector<double>{-2000.0, 0.0});
  CHECK(u[0] == 0.0);
  CHECK(u[1] == 1.0);
}

TEST_CASE("inverse cdf picks the first index strictly above u") {
  const std::vector<double> cdf{0.25, 0.25, 0.75, 1.0};
  CHECK(inverse_cdf(cdf, 0.0) == 0);
  CHECK(inverse_cdf(cdf, 0.25) == 2);
  CHECK(inverse_cdf(cdf, 0.74) == 2);
  CHECK(inverse_cdf(cdf, 0.75) == 3);
  CHECK(inverse_cdf(cdf, 0.999999) == 3);
}

TEST_CASE("multinomial: degenerate mass") {
  RngStream s(1, StreamId{0, Role::resample, 0, 0});
  const auto w = normalize_weights(std::vector<double>{1.0, 0.0, 0.0});
  for (auto i : multinomial_indices(w, 1000, s)) CHECK(i == 0);
}

TEST_CASE("multinomial: fair coin") {
  RngStream s(2, StreamId{0, Role::resample, 0, 0});
  const auto w = normalize_weights(std::vector<double>{0.5, 0.5});
  const auto idx = multinomial_indices(w, 100000, s);
  const double f = static_cast<double>(histogram(idx, 2)[0]) / 1e5;
  CHECK(std::abs(f - 0.5) <= 3.0 * 0.5 / std::sqrt(1e5));
}

TEST_CASE("multinomial: chi-square against random weights") {
  std::mt19937_64 gen(3);
  RngStream s(3, StreamId{0, Role::resample, 0, 0});
  for (int k = 0; k < 10; ++k) {
    const auto w = random_weights(gen, 12, true);
    const auto idx = multinomial_indices(w, 100000, s);
    const auto chi = testing::chi_square(histogram(idx, 12), w.values());
    CHECK(chi.passes(0.001));
  }
}

TEST_CASE("multinomial resampling is unbiased for the cloud mean") {
  const std::vector<double> cloud{-2.0, 0.5, 1.0, 4.0, 7.5};
  const double target = testing::mean(cloud);
  const auto w = normalize_weights(std::vector<double>(5, 1.0));
  RngStream s(4, StreamId{0, Role::resample, 0, 0});
  std::vector<double> means;
  for (int r = 0; r < 10000; ++r) {
    double acc = 0.0;
    for (auto i : multinomial_indices(w, 5, s)) acc += cloud[i];
    means.push_back(acc / 5.0);
  }
  const double sd = std::sqrt(testing::variance(cloud) * 4.0 / 5.0 / 5.0);
  CHECK(std::abs(testing::mean(means) - target) <= 3.0 * sd / 100.0);
}

TEST_CASE("maximal coupling: identical weights always agree") {
  std::mt19937_64 gen(5);
  const auto w = random_weights(gen, 8, false);
  RngStream s(5, StreamId{0, Role::resample, 0, 0});
  std::vector<std::size_t> first;
  for (int k = 0; k < 100000; ++k) {
    auto [a, b] = maximal_coupling_indices(w, w, s);
    CHECK(a == b);
    first.push_back(a);
  }
  CHECK(testing::chi_square(histogram(first, 8), w.values()).passes(0.001));
}

TEST_CASE("maximal coupling: disjoint point masses") {
  const auto v1 = normalize_weights(std::vector<double>{1.0, 0.0});
  const auto v2 = normalize_weights(std::vector<double>{0.0, 1.0});
  RngStream s(6, StreamId{0, Role::resample, 0, 0});
  CHECK(MaximalCoupling(v1, v2).overlap() == 0.0);
  for (int k = 0; k < 1000; ++k) {
    auto [a, b] = maximal_coupling_indices(v1, v2, s);
    CHECK(a == 0);
    CHECK(b == 1);
  }
}

TEST_CASE("maximal coupling: agreement frequency for a worked pair") {
  const auto v1 = normalize_weights(std::vector<double>{0.5, 0.5});
  const auto v2 = normalize_weights(std::vector<double>{0.25, 0.75});
  const MaximalCoupling mc(v1, v2);
  CHECK(mc.overlap() == doctest::Approx(0.75).epsilon(1e-15));
  RngStream s(7, StreamId{0, Role::resample, 0, 0});
  std::size_t same = 0;
  for (int k = 0; k < 100000; ++k) {
    auto [a, b] = mc.sample(s);
    same += a == b;
  }
  const double f = static_cast<double>(same) / 1e5;
  CHECK(std::abs(f - 0.75) <= 3.0 * std::sqrt(0.75 * 0.25 / 1e5));
}

TEST_CASE("maximal coupling: marginals and overlap on random pairs") {
  std::mt19937_64 gen(8);
  RngStream s(8, StreamId{0, Role::resample, 0, 0});
  for (int k = 0; k < 10; ++k) {
    const auto v1 = random_weights(gen, 10, k % 2 == 1);
    const auto v2 = random_weights(gen, 10, k % 3 == 1);
    double rho = 0.0;
    for (std::size_t i = 0; i < 10; ++i) rho += std::min(v1[i], v2[i]);
    const MaximalCoupling mc(v1, v2);
    CHECK(mc.overlap() == doctest::Approx(rho).epsilon(1e-12));
    std::vector<std::size_t> a, b;
    std::size_t same = 0;
    for (int d = 0; d < 100000; ++d) {
      auto [i, j] = mc.sample(s);
      a.push_back(i);
      b.push_back(j);
      same += i == j;
    }
    CHECK(testing::chi_square(histogram(a, 10), v1.values()).passes(0.001));
    CHECK(testing::chi_square(histogram(b, 10), v2.values()).passes(0.001));
    const double f = static_cast<double>(same) / 1e5;
    CHECK(std::abs(f - rho) <= 3.0 * std::sqrt(rho * (1.0 - rho) / 1e5) + 1e-12);
  }
}

TEST_CASE("maximal coupling on equal weights matches direct multinomial sampling") {
  std::mt19937_64 gen(9);
  const auto w = random_weights(gen, 6, false);
  RngStream s1(9, StreamId{0, Role::resample, 0, 0});
  RngStream s2(9, StreamId{0, Role::resample, 0, 1});
  std::vector<std::size_t> coupled;
  for (int k = 0; k < 100000; ++k) coupled.push_back(maximal_coupling_indices(w, w, s1).first);
  const auto direct = multinomial_indices(w, 100000, s2);
  // Two-sample chi-square homogeneity test.
  const auto h1 = histogram(coupled, 6), h2 = histogram(direct, 6);
  double stat = 0.0;
  for (std::size_t i = 0; i < 6; ++i) {
    const double tot = static_cast<double>(h1[i] + h2[i]);
    if (tot == 0.0) continue;
    const double e = tot / 2.0;
    stat += (h1[i] - e) * (h1[i] - e) / e + (h2[i] - e) * (h2[i] - e) / e;
  }
  testing::ChiSquare chi{stat, 5};
  CHECK(chi.passes(0.001));
}

TEST_CASE("maximal coupling rejects mismatched lengths") {
  const auto v1 = normalize_weights(std::vector<double>{1.0, 1.0});
  const auto v2 = normalize_weights(std::vector<double>{1.0, 1.0, 1.0});
  RngStream s(1, StreamId{});
  CHECK_THROWS_AS(maximal_coupling_indices(v1, v2, s), std::invalid_argument);
}
