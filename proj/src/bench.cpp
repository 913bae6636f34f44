#include "mvpf/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "mvpf/law.hpp"

namespace mvpf {

using nlohmann::json;

std::string to_string(ModelKind k) {
  return k == ModelKind::kuramoto ? "kuramoto" : "modified_kuramoto";
}

ModelKind model_kind_from_string(std::string_view s) {
  if (s == "kuramoto") return ModelKind::kuramoto;
  if (s == "modified_kuramoto") return ModelKind::modified_kuramoto;
  throw std::invalid_argument("unknown model: " + std::string(s));
}

LevelRange LevelRange::parse(std::string_view text) {
  auto to_uint = [&](std::string_view part) {
    if (part.empty() || part.find_first_not_of("0123456789") != std::string_view::npos)
      throw std::invalid_argument("bad level range: " + std::string(text));
    return static_cast<unsigned>(std::stoul(std::string(part)));
  };
  const auto dots = text.find("..");
  LevelRange r;
  if (dots == std::string_view::npos) {
    r.first = r.last = to_uint(text);
  } else {
    r.first = to_uint(text.substr(0, dots));
    r.last = to_uint(text.substr(dots + 2));
  }
  if (r.first > r.last) throw std::invalid_argument("bad level range: " + std::string(text));
  return r;
}

std::string LevelRange::str() const {
  return std::to_string(first) + ".." + std::to_string(last);
}

ExperimentConfig ExperimentConfig::profile(std::string_view name) {
  ExperimentConfig cfg;
  if (name == "desk") return cfg;
  if (name == "full") {
    cfg.ref_level = 7;
    cfg.replications = 128;
    cfg.sl_levels = {2, 6};
    cfg.ml_levels = {3, 6};
    return cfg;
  }
  throw std::invalid_argument("unknown profile: " + std::string(name));
}

ModelSpec ExperimentConfig::model_spec() const {
  return model == ModelKind::kuramoto ? kuramoto(theta, sigma, x0)
                                      : modified_kuramoto(theta, sigma, x0);
}

void ExperimentConfig::validate() const {
  if (!(sigma >= 0.0)) throw std::invalid_argument("config: sigma must be non-negative");
  if (!(tau >= 0.0)) throw std::invalid_argument("config: tau must be non-negative");
  if (T == 0) throw std::invalid_argument("config: T must be positive");
  if (data_particles == 0) throw std::invalid_argument("config: data_particles must be positive");
  if (replications == 0) throw std::invalid_argument("config: replications must be positive");
  if (!(ref_const > 0.0)) throw std::invalid_argument("config: ref_const must be positive");
  if (ml_levels.first == 0) throw std::invalid_argument("config: ML levels start at 1");
}

ExperimentConfig apply_config(const ExperimentConfig& base, const json& doc) {
  if (!doc.is_object()) throw std::invalid_argument("config: expected a JSON object");
  ExperimentConfig cfg = base;
  for (const auto& [key, value] : doc.items()) {
    if (key == "model") cfg.model = model_kind_from_string(value.get<std::string>());
    else if (key == "theta") cfg.theta = value.get<double>();
    else if (key == "sigma") cfg.sigma = value.get<double>();
    else if (key == "tau") cfg.tau = value.get<double>();
    else if (key == "x0") cfg.x0 = value.get<double>();
    else if (key == "T") cfg.T = value.get<std::size_t>();
    else if (key == "data_level") cfg.data_level = value.get<unsigned>();
    else if (key == "data_particles") cfg.data_particles = value.get<std::size_t>();
    else if (key == "ref_level") cfg.ref_level = value.get<unsigned>();
    else if (key == "ref_const") cfg.ref_const = value.get<double>();
    else if (key == "replications") cfg.replications = value.get<std::size_t>();
    else if (key == "sl_levels") cfg.sl_levels = LevelRange::parse(value.get<std::string>());
    else if (key == "ml_levels") cfg.ml_levels = LevelRange::parse(value.get<std::string>());
    else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
    else if (key == "const_n") cfg.constants.n = value.get<double>();
    else if (key == "const_m") cfg.constants.m = value.get<double>();
    else if (key == "const_l") cfg.constants.l = value.get<double>();
    else if (key == "output") cfg.output = value.get<std::string>();
    else if (key == "cache_dir") cfg.cache_dir = value.get<std::string>();
    else if (key == "per_time_mse") cfg.per_time_mse = value.get<bool>();
    else if (key == "record_wall_time") cfg.record_wall_time = value.get<bool>();
    else if (key == "backend") cfg.backend = backend_from_string(value.get<std::string>());
    else throw std::invalid_argument("config: unknown key '" + key + "'");
  }
  return cfg;
}

json to_json(const ExperimentConfig& cfg) {
  return json{{"model", to_string(cfg.model)},
              {"theta", cfg.theta},
              {"sigma", cfg.sigma},
              {"tau", cfg.tau},
              {"x0", cfg.x0},
              {"T", cfg.T},
              {"data_level", cfg.data_level},
              {"data_particles", cfg.data_particles},
              {"ref_level", cfg.ref_level},
              {"ref_const", cfg.ref_const},
              {"replications", cfg.replications},
              {"sl_levels", cfg.sl_levels.str()},
              {"ml_levels", cfg.ml_levels.str()},
              {"seed", cfg.seed},
              {"const_n", cfg.constants.n},
              {"const_m", cfg.constants.m},
              {"const_l", cfg.constants.l},
              {"output", cfg.output},
              {"cache_dir", cfg.cache_dir},
              {"per_time_mse", cfg.per_time_mse},
              {"record_wall_time", cfg.record_wall_time},
              {"backend", std::string(to_string(cfg.backend))}};
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string config_hash(const ExperimentConfig& cfg) {
  std::ostringstream key;
  key << to_string(cfg.model) << '|' << format_double(cfg.theta) << '|'
      << format_double(cfg.sigma) << '|' << format_double(cfg.tau) << '|'
      << format_double(cfg.x0) << '|' << cfg.T << '|' << cfg.data_level << '|'
      << cfg.data_particles << '|' << cfg.ref_level << '|' << format_double(cfg.ref_const)
      << '|' << to_string(cfg.backend);
  return fnv1a_hex(key.str());
}

namespace {

constexpr std::uint64_t kReferenceReplication = 0xFFFF000000000000ULL;

std::uint64_t cell_replication(std::string_view estimator, unsigned level, std::size_t r) {
  const std::uint64_t code = estimator == "SL" ? 1 : 2;
  return (code << 40) | (static_cast<std::uint64_t>(level) << 32) | static_cast<std::uint64_t>(r);
}

}  // namespace

SimulatedData simulate_data(const ExperimentConfig& cfg, std::uint64_t seed) {
  if (cfg.data_particles == 0) throw std::invalid_argument("simulate_data: data_particles must be positive");
  const ModelSpec model = cfg.model_spec();
  const LevelGrid grid(cfg.data_level);
  RngStream system_stream(seed, StreamId{0, Role::data, cfg.data_level, 0});
  RngStream noise_stream(seed, StreamId{0, Role::data, cfg.data_level, 1});

  SimulatedData out;
  std::vector<double> ys;
  ParticleCloud cloud = ParticleCloud::dirac(cfg.data_particles, model.x0);
  for (std::size_t t = 0; t < cfg.T; ++t) {
    auto lattice = propagate_law(model, grid, cfg.data_particles, cloud, system_stream, cfg.backend);
    cloud = lattice.terminal();
    const double x = cloud[0][0];
    out.path.push_back(x);
    ys.push_back(x + cfg.tau * noise_stream.normal());
  }
  out.obs = ObservationSeries::scalar(ys, cfg.tau);
  return out;
}

std::size_t single_level_count(double constant, unsigned level) {
  return static_cast<std::size_t>(std::ceil(constant * std::ldexp(1.0, 2 * static_cast<int>(level))));
}

std::vector<double> reference_filter(const ExperimentConfig& cfg, const ObservationSeries& obs,
                                     const TestFunction& phi, std::uint64_t seed,
                                     const std::optional<std::filesystem::path>& cache_dir) {
  const unsigned sweep_max = std::max(cfg.sl_levels.last, cfg.ml_levels.last);
  if (cfg.ref_level <= sweep_max)
    throw std::invalid_argument("reference_filter: ref_level must exceed every sweep level");

  std::filesystem::path file;
  const std::string hash = config_hash(cfg);
  if (cache_dir) {
    file = *cache_dir / ("reference-" + hash + "-" + std::to_string(seed) + ".json");
    std::ifstream in(file);
    if (in) {
      const json doc = json::parse(in);
      if (doc.at("hash") == hash && doc.at("seed") == seed)
        return doc.at("estimates").get<std::vector<double>>();
    }
  }

  const std::size_t count = single_level_count(cfg.ref_const, cfg.ref_level);
  RunOptions opts;
  opts.replication = kReferenceReplication;
  opts.backend = cfg.backend;
  auto run = run_pf(cfg.model_spec(), LevelGrid(cfg.ref_level), count, count, obs, phi, seed, opts);

  if (cache_dir) {
    std::filesystem::create_directories(*cache_dir);
    const json doc{{"hash", hash},
                   {"seed", seed},
                   {"level", cfg.ref_level},
                   {"particles", count},
                   {"estimates", run.estimates}};
    std::ofstream(file) << doc.dump() << '\n';
  }
  return run.estimates;
}

SlopeFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw std::invalid_argument("fit_line: need at least two paired points");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("fit_line: abscissae are all equal");
  SlopeFit fit;
  fit.points = xs.size();
  fit.slope = sxy / sxx;
  const double intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - intercept - fit.slope * xs[i];
    sse += r * r;
  }
  fit.stderr_slope = xs.size() > 2 ? std::sqrt(sse / (n - 2.0) / sxx) : 0.0;
  return fit;
}

SlopeFit fit_cost_vs_mse(const std::vector<SweepRow>& rows, std::string_view estimator) {
  std::vector<double> xs, ys;
  for (const auto& r : rows) {
    if (r.estimator != estimator || !(r.mse > 0.0)) continue;
    xs.push_back(std::log(r.mse));
    ys.push_back(std::log(r.cost));
  }
  return fit_line(xs, ys);
}

double sweep_cost(const ExperimentConfig& cfg, std::string_view estimator, unsigned level) {
  if (estimator == "SL") {
    return filter_cost(LevelGrid(level), single_level_count(cfg.constants.n, level),
                       single_level_count(cfg.constants.m, level), cfg.T);
  }
  return ml_cost(select_params(std::ldexp(1.0, -static_cast<int>(level)), cfg.constants), cfg.T);
}

SweepResult mse_sweep(const ExperimentConfig& cfg, const TestFunction& phi) {
  cfg.validate();
  if (cfg.replications < 2) throw std::invalid_argument("mse_sweep: need at least two replications");
  const auto wall_start = std::chrono::steady_clock::now();
  const ModelSpec model = cfg.model_spec();

  SweepResult result;
  result.data = simulate_data(cfg, cfg.seed);
  const std::optional<std::filesystem::path> cache =
      cfg.cache_dir.empty() ? std::nullopt : std::optional<std::filesystem::path>(cfg.cache_dir);
  result.reference = reference_filter(cfg, result.data.obs, phi, cfg.seed, cache);

  struct Task {
    std::string estimator;
    unsigned level;
    std::size_t rep;
    std::vector<double> estimates;
    double seconds = 0.0;
    bool failed = false;
  };
  std::vector<Task> tasks;
  for (unsigned l = cfg.ml_levels.first; l <= cfg.ml_levels.last; ++l)
    for (std::size_t r = 0; r < cfg.replications; ++r) tasks.push_back({"ML", l, r, {}});
  for (unsigned l = cfg.sl_levels.first; l <= cfg.sl_levels.last; ++l)
    for (std::size_t r = 0; r < cfg.replications; ++r) tasks.push_back({"SL", l, r, {}});

  const auto& obs = result.data.obs;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(tasks.size()); ++k) {
    Task& task = tasks[static_cast<std::size_t>(k)];
    const auto t0 = std::chrono::steady_clock::now();
    RunOptions opts;
    opts.replication = cell_replication(task.estimator, task.level, task.rep);
    opts.backend = cfg.backend;
    try {
      if (task.estimator == "SL") {
        const auto n = single_level_count(cfg.constants.n, task.level);
        const auto m = single_level_count(cfg.constants.m, task.level);
        task.estimates = run_pf(model, LevelGrid(task.level), n, m, obs, phi, cfg.seed, opts).estimates;
      } else {
        const auto ml = select_params(std::ldexp(1.0, -static_cast<int>(task.level)), cfg.constants);
        task.estimates = run_mlpf(model, obs, phi, ml, cfg.seed, opts).estimates;
      }
      for (double e : task.estimates)
        if (!std::isfinite(e)) task.failed = true;
    } catch (const std::exception&) {
      task.failed = true;
    }
    task.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }

  // Tasks are grouped by (estimator, level) in sorted order already.
  const std::size_t T = cfg.T;
  for (std::size_t begin = 0; begin < tasks.size(); begin += cfg.replications) {
    SweepRow row;
    row.estimator = tasks[begin].estimator;
    row.level = tasks[begin].level;
    row.cost = sweep_cost(cfg, row.estimator, row.level);
    std::vector<double> per_time(T, 0.0);
    double seconds = 0.0;
    for (std::size_t k = begin; k < begin + cfg.replications; ++k) {
      const Task& task = tasks[k];
      seconds += task.seconds;
      if (task.failed) {
        ++row.failures;
        continue;
      }
      ++row.replications;
      for (std::size_t t = 0; t < T; ++t) {
        const double e = task.estimates[t] - result.reference[t];
        per_time[t] += e * e;
      }
    }
    if (row.replications > 0)
      for (auto& v : per_time) v /= static_cast<double>(row.replications);
    row.mse = row.replications > 0 ? per_time[T - 1] : NAN;
    row.wall_time_s = cfg.record_wall_time ? seconds : 0.0;
    if (cfg.per_time_mse) result.per_time[row.estimator][row.level] = per_time;
    result.rows.push_back(std::move(row));
  }

  for (const char* est : {"ML", "SL"}) {
    std::size_t usable = 0;
    for (const auto& r : result.rows)
      if (r.estimator == est && r.mse > 0.0) ++usable;
    if (usable >= 2) result.slopes[est] = fit_cost_vs_mse(result.rows, est);
  }
  result.total_wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  return result;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& r : rows) {
    out += r.estimator + ',' + std::to_string(r.level) + ',' + format_double(r.mse) + ',' +
           format_double(r.cost) + ',' + format_double(r.wall_time_s) + ',' +
           std::to_string(r.replications) + '\n';
  }
  return out;
}

std::vector<SweepRow> parse_sweep_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader)
    throw std::invalid_argument("sweep csv: unexpected header");
  std::vector<SweepRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::istringstream ls(line);
    std::string f;
    while (std::getline(ls, f, ',')) fields.push_back(f);
    if (fields.size() != 6) throw std::invalid_argument("sweep csv: expected 6 fields: " + line);
    SweepRow r;
    r.estimator = fields[0];
    r.level = static_cast<unsigned>(std::stoul(fields[1]));
    r.mse = std::stod(fields[2]);
    r.cost = std::stod(fields[3]);
    r.wall_time_s = std::stod(fields[4]);
    r.replications = std::stoul(fields[5]);
    rows.push_back(std::move(r));
  }
  return rows;
}

json sweep_manifest(const ExperimentConfig& cfg, const SweepResult& result) {
  json slopes = json::object();
  for (const auto& [est, fit] : result.slopes)
    slopes[est] = {{"slope", fit.slope}, {"stderr", fit.stderr_slope}, {"points", fit.points}};
  json failures = json::array();
  for (const auto& r : result.rows)
    failures.push_back({{"estimator", r.estimator}, {"level", r.level}, {"failures", r.failures}});
  return json{{"config", to_json(cfg)},
              {"config_hash", config_hash(cfg)},
              {"seeds",
               {{"data", cfg.seed},
                {"reference", cfg.seed},
                {"replication_streams", "(estimator << 40) | (level << 32) | replication"}}},
              {"reference_particles", single_level_count(cfg.ref_const, cfg.ref_level)},
              {"reference_at_T", result.reference.back()},
              {"slopes", slopes},
              {"failures", failures},
              {"wall_time_s", result.total_wall_time_s}};
}

}  // namespace mvpf
