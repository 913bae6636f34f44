#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mvpf/filter.hpp"
#include "mvpf/ml.hpp"

namespace mvpf {

enum class ModelKind { kuramoto, modified_kuramoto };

std::string to_string(ModelKind k);
ModelKind model_kind_from_string(std::string_view s);

struct LevelRange {
  unsigned first = 0;
  unsigned last = 0;

  static LevelRange parse(std::string_view text);  // "2..5" or "3"
  std::string str() const;
};

/// Everything that determines one experiment.
struct ExperimentConfig {
  ModelKind model = ModelKind::kuramoto;
  double theta = 0.0;
  double sigma = 0.2;
  double tau = 1.0;
  double x0 = 1.0;
  std::size_t T = 50;
  unsigned data_level = 9;
  std::size_t data_particles = 5000;
  unsigned ref_level = 6;
  /// Reference filter uses N = M = ceil(ref_const * 4^ref_level).
  double ref_const = 1.0;
  std::size_t replications = 32;
  LevelRange sl_levels{2, 5};
  LevelRange ml_levels{3, 5};
  std::uint64_t seed = 1;
  MlConstants constants;
  std::string output = "sweep.csv";
  std::string cache_dir = ".mvpf-cache";
  bool per_time_mse = false;
  bool record_wall_time = false;
  Backend backend = Backend::automatic;

  /// "desk" (default) or "full".
  static ExperimentConfig profile(std::string_view name);

  ModelSpec model_spec() const;
  void validate() const;
};

/// Applies the keys of `doc` on top of `base`. Unknown keys are errors.
ExperimentConfig apply_config(const ExperimentConfig& base, const nlohmann::json& doc);
nlohmann::json to_json(const ExperimentConfig& cfg);

/// Stable 64-bit FNV-1a digest, hex encoded.
std::string fnv1a_hex(std::string_view bytes);
/// Digest of every field that affects the data and the reference filter.
std::string config_hash(const ExperimentConfig& cfg);

struct SimulatedData {
  std::vector<double> path;
  ObservationSeries obs;
};

/// Runs the law approximation at data_level with data_particles, takes
/// particle 0 as the latent path and adds N(0, tau^2) noise from the data stream.
SimulatedData simulate_data(const ExperimentConfig& cfg, std::uint64_t seed);

/// Particle counts of the single-level estimator at level L: ceil(c 4^L).
std::size_t single_level_count(double constant, unsigned level);

/// High-resolution particle filter used as ground truth. When `cache_dir` is
/// set, results are stored as reference-<config hash>-<seed>.json and reused.
std::vector<double> reference_filter(const ExperimentConfig& cfg, const ObservationSeries& obs,
                                     const TestFunction& phi, std::uint64_t seed,
                                     const std::optional<std::filesystem::path>& cache_dir);

struct SweepRow {
  std::string estimator;  // "SL" or "ML"
  unsigned level = 0;
  double mse = 0.0;
  double cost = 0.0;
  double wall_time_s = 0.0;
  std::size_t replications = 0;
  std::size_t failures = 0;
};

struct SlopeFit {
  double slope = 0.0;
  double stderr_slope = 0.0;
  std::size_t points = 0;
};

/// Least-squares slope of ys on xs with its standard error.
SlopeFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys);
/// Slope of log(cost) against log(mse) over the rows of one estimator.
SlopeFit fit_cost_vs_mse(const std::vector<SweepRow>& rows, std::string_view estimator);

struct SweepResult {
  std::vector<SweepRow> rows;
  std::map<std::string, SlopeFit> slopes;
  std::vector<double> reference;
  SimulatedData data;
  /// estimator -> level -> per-time MSE; filled when per_time_mse is set.
  std::map<std::string, std::map<unsigned, std::vector<double>>> per_time;
  double total_wall_time_s = 0.0;
};

/// Theoretical cost of one estimate in the sweep.
double sweep_cost(const ExperimentConfig& cfg, std::string_view estimator, unsigned level);

/// For each estimator and level, `replications` independent estimates of
/// pi_T(phi) compared against the reference at T.
SweepResult mse_sweep(const ExperimentConfig& cfg, const TestFunction& phi);

inline constexpr std::string_view kCsvHeader = "estimator,level,mse,cost,wall_time_s,replications";

/// %.17g formatting.
std::string format_double(double v);
std::string sweep_csv(const std::vector<SweepRow>& rows);
std::vector<SweepRow> parse_sweep_csv(std::string_view text);
nlohmann::json sweep_manifest(const ExperimentConfig& cfg, const SweepResult& result);

}  // namespace mvpf
