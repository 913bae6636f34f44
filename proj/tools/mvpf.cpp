// mvpf: simulate data, run filters, sweep MSE against cost, fit slopes.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "mvpf/bench.hpp"

using namespace mvpf;
namespace fs = std::filesystem;

namespace {

struct Overrides {
  std::optional<std::string> model, sl_levels, ml_levels, output, cache_dir, backend;
  std::optional<double> theta, sigma, tau, x0, ref_const, const_n, const_m, const_l;
  std::optional<std::size_t> T, data_particles, replications;
  std::optional<unsigned> data_level, ref_level;
  std::optional<std::uint64_t> seed;
  bool per_time_mse = false;
  bool record_wall_time = false;
};

void add_config_flags(CLI::App& app, Overrides& o) {
  app.add_option("--model", o.model, "kuramoto or modified_kuramoto");
  app.add_option("--theta", o.theta);
  app.add_option("--sigma", o.sigma);
  app.add_option("--tau", o.tau, "observation noise scale");
  app.add_option("--x0", o.x0);
  app.add_option("--T", o.T, "number of observation times");
  app.add_option("--data-level", o.data_level);
  app.add_option("--data-particles", o.data_particles);
  app.add_option("--ref-level", o.ref_level);
  app.add_option("--ref-const", o.ref_const, "reference uses N = M = ceil(c 4^ref_level)");
  app.add_option("--replications", o.replications);
  app.add_option("--sl-levels", o.sl_levels, "e.g. 2..5");
  app.add_option("--ml-levels", o.ml_levels, "e.g. 3..5");
  app.add_option("--seed", o.seed);
  app.add_option("--const-n", o.const_n);
  app.add_option("--const-m", o.const_m);
  app.add_option("--const-l", o.const_l);
  app.add_option("--out", o.output, "output path");
  app.add_option("--cache-dir", o.cache_dir, "reference cache; empty disables");
  app.add_option("--backend", o.backend, "reference, openmp or automatic");
  app.add_flag("--per-time-mse", o.per_time_mse, "also write MSE at every time");
  app.add_flag("--record-wall-time", o.record_wall_time, "fill wall_time_s (output is then not reproducible)");
}

ExperimentConfig resolve(const std::string& profile, const std::string& config_file, const Overrides& o) {
  ExperimentConfig cfg = ExperimentConfig::profile(profile);
  if (!config_file.empty()) {
    std::ifstream in(config_file);
    if (!in) throw std::runtime_error("cannot read config " + config_file);
    cfg = apply_config(cfg, nlohmann::json::parse(in));
  }
  if (o.model) cfg.model = model_kind_from_string(*o.model);
  if (o.theta) cfg.theta = *o.theta;
  if (o.sigma) cfg.sigma = *o.sigma;
  if (o.tau) cfg.tau = *o.tau;
  if (o.x0) cfg.x0 = *o.x0;
  if (o.T) cfg.T = *o.T;
  if (o.data_level) cfg.data_level = *o.data_level;
  if (o.data_particles) cfg.data_particles = *o.data_particles;
  if (o.ref_level) cfg.ref_level = *o.ref_level;
  if (o.ref_const) cfg.ref_const = *o.ref_const;
  if (o.replications) cfg.replications = *o.replications;
  if (o.sl_levels) cfg.sl_levels = LevelRange::parse(*o.sl_levels);
  if (o.ml_levels) cfg.ml_levels = LevelRange::parse(*o.ml_levels);
  if (o.seed) cfg.seed = *o.seed;
  if (o.const_n) cfg.constants.n = *o.const_n;
  if (o.const_m) cfg.constants.m = *o.const_m;
  if (o.const_l) cfg.constants.l = *o.const_l;
  if (o.output) cfg.output = *o.output;
  if (o.cache_dir) cfg.cache_dir = *o.cache_dir;
  if (o.backend) cfg.backend = backend_from_string(*o.backend);
  if (o.per_time_mse) cfg.per_time_mse = true;
  if (o.record_wall_time) cfg.record_wall_time = true;
  cfg.validate();
  return cfg;
}

// Writes to `path`, or stdout when no path was given.
void emit(const std::optional<std::string>& path, const std::string& text) {
  if (!path || *path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(*path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + *path);
  out << text;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Observation column of a `simulate` CSV.
ObservationSeries load_observations(const std::string& path, double tau) {
  std::istringstream in(read_file(path));
  std::string line;
  std::getline(in, line);
  if (line != "t,path,observation") throw std::runtime_error(path + ": not a simulate CSV");
  std::vector<double> ys;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ys.push_back(std::stod(line.substr(line.rfind(',') + 1)));
  }
  return ObservationSeries::scalar(ys, tau);
}

double identity(std::span<const double> x) { return x[0]; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Particle filters for McKean-Vlasov models: simulate, filter, sweep, fit"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string profile = "desk", config_file;
  Overrides o;
  app.add_option("--profile", profile, "desk or full")->check(CLI::IsMember({"desk", "full"}));
  app.add_option("--config", config_file, "JSON document of config keys");
  add_config_flags(app, o);

  auto* simulate = app.add_subcommand("simulate", "simulate a latent path and observations");

  auto* filter = app.add_subcommand("filter", "run one filter on simulated or given data");
  std::string method = "pf", data_file;
  unsigned level = 3;
  std::optional<std::size_t> n, m;
  std::optional<double> eps;
  std::uint64_t replication = 0;
  filter->add_option("--method", method, "pf, cpf or ml")->check(CLI::IsMember({"pf", "cpf", "ml"}));
  filter->add_option("--level", level, "level for pf and cpf");
  filter->add_option("--n", n, "filter particles (default ceil(const_n 4^level))");
  filter->add_option("--m", m, "law particles (default ceil(const_m 4^level))");
  filter->add_option("--eps", eps, "target accuracy for ml (default 2^-level)");
  filter->add_option("--replication", replication, "replication label of the random streams");
  filter->add_option("--data", data_file, "simulate CSV to filter instead of fresh data");

  auto* sweep = app.add_subcommand("sweep", "MSE against cost for single-level and multilevel filters");
  std::string manifest_path;
  sweep->add_option("--manifest", manifest_path, "manifest JSON (default: output with .json)");

  auto* fit = app.add_subcommand("fit", "fit log(cost) against log(mse) from a sweep CSV");
  std::string fit_input;
  fit->add_option("input", fit_input, "sweep CSV")->required();

  auto* show = app.add_subcommand("config", "print the resolved config as JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    const ExperimentConfig cfg = resolve(profile, config_file, o);

    if (*show) {
      emit(o.output, to_json(cfg).dump(2) + "\n");
      return 0;
    }

    if (*simulate) {
      const auto data = simulate_data(cfg, cfg.seed);
      std::string csv = "t,path,observation\n";
      for (std::size_t t = 0; t < data.path.size(); ++t)
        csv += std::to_string(t + 1) + ',' + format_double(data.path[t]) + ',' +
               format_double(data.obs.y[t][0]) + '\n';
      emit(o.output, csv);
      return 0;
    }

    if (*filter) {
      const ObservationSeries obs =
          data_file.empty() ? simulate_data(cfg, cfg.seed).obs : load_observations(data_file, cfg.tau);
      const ModelSpec model = cfg.model_spec();
      RunOptions opts;
      opts.replication = replication;
      opts.backend = cfg.backend;
      const std::size_t nn = n.value_or(single_level_count(cfg.constants.n, level));
      const std::size_t mm = m.value_or(single_level_count(cfg.constants.m, level));
      std::string csv;
      double cost = 0.0;
      if (method == "pf") {
        const auto run = run_pf(model, LevelGrid(level), nn, mm, obs, identity, cfg.seed, opts);
        csv = "t,estimate\n";
        for (std::size_t t = 0; t < run.estimates.size(); ++t)
          csv += std::to_string(t + 1) + ',' + format_double(run.estimates[t]) + '\n';
        cost = run.cost;
      } else if (method == "cpf") {
        const auto run = run_cpf(model, LevelGrid(level), nn, mm, obs, identity, cfg.seed, opts);
        csv = "t,increment,fine,coarse\n";
        for (std::size_t t = 0; t < run.increments.size(); ++t)
          csv += std::to_string(t + 1) + ',' + format_double(run.increments[t]) + ',' +
                 format_double(run.fine_estimates[t]) + ',' + format_double(run.coarse_estimates[t]) + '\n';
        cost = run.cost;
      } else {
        const auto ml = select_params(eps.value_or(std::ldexp(1.0, -static_cast<int>(level))), cfg.constants);
        const auto run = run_mlpf(model, obs, identity, ml, cfg.seed, opts);
        csv = "t,estimate\n";
        for (std::size_t t = 0; t < run.estimates.size(); ++t)
          csv += std::to_string(t + 1) + ',' + format_double(run.estimates[t]) + '\n';
        cost = run.cost;
      }
      emit(o.output, csv);
      std::cerr << "cost " << format_double(cost) << '\n';
      return 0;
    }

    if (*sweep) {
      const auto result = mse_sweep(cfg, identity);
      emit(cfg.output, sweep_csv(result.rows));
      fs::path mpath = manifest_path.empty() ? fs::path(cfg.output).replace_extension(".json")
                                             : fs::path(manifest_path);
      emit(mpath.string(), sweep_manifest(cfg, result).dump(2) + "\n");
      if (cfg.per_time_mse) {
        std::string csv = "estimator,level,t,mse\n";
        for (const auto& [est, levels] : result.per_time)
          for (const auto& [l, mse] : levels)
            for (std::size_t t = 0; t < mse.size(); ++t)
              csv += est + ',' + std::to_string(l) + ',' + std::to_string(t + 1) + ',' +
                     format_double(mse[t]) + '\n';
        emit(fs::path(cfg.output).replace_extension(".per_time.csv").string(), csv);
      }
      for (const auto& [est, f] : result.slopes)
        std::cerr << est << " slope " << f.slope << " +- " << f.stderr_slope << '\n';
      return 0;
    }

    if (*fit) {
      const auto rows = parse_sweep_csv(read_file(fit_input));
      std::string csv = "estimator,slope,stderr,points\n";
      for (const char* est : {"ML", "SL"}) {
        std::size_t count = 0;
        for (const auto& r : rows) count += r.estimator == est && r.mse > 0.0;
        if (count < 2) continue;
        const auto f = fit_cost_vs_mse(rows, est);
        csv += std::string(est) + ',' + format_double(f.slope) + ',' + format_double(f.stderr_slope) + ',' +
               std::to_string(f.points) + '\n';
      }
      emit(o.output, csv);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "mvpf: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
