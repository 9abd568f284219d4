#include "maxstorm/cli/commands.hpp"

#include <chrono>
#include <cmath>
#include <iostream>
#include <numeric>

#include "maxstorm/cli/field_io.hpp"
#include "maxstorm/errors.hpp"
#include "maxstorm/parallel.hpp"

namespace maxstorm::cli {

namespace {

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
}

MarkovSimulationOptions simulation_options(const RunConfig& config) {
  MarkovSimulationOptions opts;
  opts.first_date = config.first_date;
  opts.schlather.n_storms = config.schlather_storms;
  opts.schlather.envelope = config.schlather_envelope;
  return opts;
}

PlanarInnovation planar_innovation(const RunConfig& config) {
  if (config.spatial == SpatialKind::kSchlather) return config.schlather();
  return config.smith();
}

MarkovSimulation<PlanarSite> simulate_planar(const RunConfig& config, const PlanarSites& sites,
                                             SeededStream& stream) {
  return simulate_markov_planar(sites, config.dates, planar_innovation(config), config.markov(), stream,
                                simulation_options(config));
}

FitOptions fit_options(const RunConfig& config, std::size_t threads) {
  FitOptions opts;
  opts.optimizer.max_evaluations = config.max_evaluations;
  opts.optimizer.xtol = config.xtol;
  opts.optimizer.ftol = config.ftol;
  opts.optimizer.initial_step = config.initial_step;
  opts.threads = threads;
  return opts;
}

FitReport run_fit(const PlanarSpaceTimeField& field, const RunConfig& config, int scheme, std::size_t threads) {
  if (scheme == 1) return fit_scheme1(field, config.init, fit_options(config, threads));
  if (scheme == 2) return fit_scheme2(field, config.init, fit_options(config, threads));
  throw ValidationError("scheme must be 1 or 2, got " + std::to_string(scheme));
}

nlohmann::ordered_json theta_json(const ThetaVector& t) {
  return {{"sigma11", t.sigma11}, {"sigma12", t.sigma12}, {"sigma22", t.sigma22},
          {"a", t.a},             {"tau1", t.tau1},       {"tau2", t.tau2}};
}

std::string csv_row(std::initializer_list<std::string> cells) {
  std::string out;
  for (const auto& c : cells) {
    if (!out.empty()) out += ',';
    out += c;
  }
  return out + '\n';
}

constexpr std::array<const char*, 6> kParamNames{"sigma11", "sigma12", "sigma22", "a", "tau1", "tau2"};

}  // namespace

int cmd_simulate(const RunConfig& config, const std::filesystem::path& out_dir) {
  config.validate();
  ensure_dir(out_dir);
  SeededStream stream(config.seed, 0);
  nlohmann::ordered_json meta;
  meta["command"] = "simulate";
  meta["config"] = config.to_json();
  std::string csv;
  std::size_t storms = 0;
  std::vector<std::string> warnings;
  if (config.is_sphere()) {
    const SphereSites mesh = make_sphere_grid(config);
    auto sim = simulate_markov_sphere(mesh, config.dates, config.vmf(), config.sphere_markov(), stream,
                                      simulation_options(config));
    csv = field_to_csv(sim.field);
    storms = sim.storms;
    warnings = sim.warnings;
  } else {
    const PlanarSites sites = make_planar_grid(config);
    auto sim = simulate_planar(config, sites, stream);
    csv = field_to_csv(sim.field);
    storms = sim.storms;
    warnings = sim.warnings;
  }
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
  meta["storms"] = storms;
  meta["warnings"] = warnings;
  write_text_file(out_dir / "field.csv", csv);
  write_text_file(out_dir / "metadata.json", meta.dump(2) + "\n");
  return 0;
}

int cmd_dependence(const RunConfig& config, const std::optional<std::filesystem::path>& field_path,
                   const std::filesystem::path& out_csv) {
  config.validate();
  if (config.spatial != SpatialKind::kSmith) {
    throw ValidationError("analytic dependence measures require model.spatial = smith");
  }
  if (config.lags.empty()) throw ValidationError("dependence.lags must list at least one lag");
  std::optional<PlanarSpaceTimeField> field;
  if (field_path) {
    auto any = read_field_file(*field_path);
    if (!std::holds_alternative<PlanarSpaceTimeField>(any)) {
      throw ValidationError("dependence needs a planar field");
    }
    field = std::get<PlanarSpaceTimeField>(std::move(any));
  }
  std::string out = "l,h1,h2,theta_analytic,nu_analytic,theta_empirical,nu_empirical,n_pairs\n";
  for (const auto& lag : config.lags) {
    const double theta = extremal_coefficient(lag, config.smith(), config.markov());
    const double nu = madogram_from_theta(theta);
    std::string theta_emp, nu_emp, n_pairs = "0";
    if (field) {
      try {
        const auto est = empirical_madogram(*field, lag);
        nu_emp = format_double(est.nu_hat);
        n_pairs = std::to_string(est.n_pairs);
        if (est.nu_hat < 0.5) theta_emp = format_double(madogram_to_theta(est.nu_hat));
      } catch (const ValidationError& e) {
        std::cerr << "warning: " << e.what() << '\n';
      }
    }
    out += csv_row({format_double(lag.time_lag), format_double(lag.space_lag.x()), format_double(lag.space_lag.y()),
                    format_double(theta), format_double(nu), theta_emp, nu_emp, n_pairs});
  }
  if (out_csv.has_parent_path()) ensure_dir(out_csv.parent_path());
  write_text_file(out_csv, out);
  return 0;
}

int cmd_fit(const RunConfig& config, const std::filesystem::path& field_path, int scheme,
            const std::filesystem::path& out_json) {
  if (scheme != 1 && scheme != 2) throw ValidationError("--scheme must be 1 or 2, got " + std::to_string(scheme));
  config.validate();
  auto any = read_field_file(field_path);
  if (!std::holds_alternative<PlanarSpaceTimeField>(any)) {
    throw ValidationError("fitting is implemented for planar Smith fields only");
  }
  const auto& field = std::get<PlanarSpaceTimeField>(any);
  const auto start = std::chrono::steady_clock::now();
  const FitReport report = run_fit(field, config, scheme, config.effective_threads());
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  nlohmann::ordered_json j;
  j["command"] = "fit";
  j["scheme"] = report.scheme;
  j["theta_hat"] = theta_json(report.theta_hat);
  j["loglik"] = report.loglik;
  if (scheme == 1) j["spatial_loglik"] = report.spatial_loglik;
  j["n_pairs"] = report.n_pairs;
  j["iterations"] = report.iterations;
  j["evaluations"] = report.evaluations;
  j["converged"] = report.converged;
  j["wall_time_seconds"] = wall;
  j["config"] = config.to_json();
  if (out_json.has_parent_path()) ensure_dir(out_json.parent_path());
  write_text_file(out_json, j.dump(2) + "\n");
  return 0;
}

int cmd_mc_study(const RunConfig& config, std::size_t replicates, const std::filesystem::path& out_dir) {
  config.validate();
  if (replicates < 2) throw ValidationError("--replicates must be >= 2");
  if (config.spatial != SpatialKind::kSmith) throw ValidationError("mc-study requires model.spatial = smith");
  if (config.schemes.empty()) throw ValidationError("study.schemes must list at least one scheme");
  ensure_dir(out_dir);
  const PlanarSites sites = make_planar_grid(config);
  const ThetaVector truth = config.truth();

  struct Outcome {
    bool ok = false;
    std::string error;
    FitReport report;
  };
  const std::size_t n_schemes = config.schemes.size();
  std::vector<Outcome> outcomes(replicates * n_schemes);

  // Replicates are independent; each has its own stream, so results do not
  // depend on the thread count.
  parallel_for(replicates, config.effective_threads(), [&](std::size_t r) {
    SeededStream stream(config.seed, r);
    const auto sim = simulate_planar(config, sites, stream);
    for (std::size_t s = 0; s < n_schemes; ++s) {
      Outcome& o = outcomes[r * n_schemes + s];
      try {
        o.report = run_fit(sim.field, config, config.schemes[s], 1);
        o.ok = true;
      } catch (const Error& e) {
        o.error = e.what();
      }
    }
  });

  std::string est = "replicate,scheme,status,sigma11,sigma12,sigma22,a,tau1,tau2,loglik,converged,evaluations\n";
  for (std::size_t r = 0; r < replicates; ++r) {
    for (std::size_t s = 0; s < n_schemes; ++s) {
      const Outcome& o = outcomes[r * n_schemes + s];
      const std::string scheme = std::to_string(config.schemes[s]);
      if (!o.ok) {
        std::cerr << "warning: replicate " << r << " scheme " << scheme << " failed: " << o.error << '\n';
        est += csv_row({std::to_string(r), scheme, "failed", "", "", "", "", "", "", "", "", ""});
        continue;
      }
      const auto v = o.report.theta_hat.as_vector();
      est += csv_row({std::to_string(r), scheme, "ok", format_double(v[0]), format_double(v[1]), format_double(v[2]),
                      format_double(v[3]), format_double(v[4]), format_double(v[5]), format_double(o.report.loglik),
                      o.report.converged ? "true" : "false", std::to_string(o.report.evaluations)});
    }
  }

  std::string summary = "scheme,parameter,true,mean_estimate,mean_bias,stdev,n_used,n_excluded\n";
  const auto truth_vec = truth.as_vector();
  nlohmann::ordered_json exclusions = nlohmann::ordered_json::object();
  for (std::size_t s = 0; s < n_schemes; ++s) {
    std::vector<Eigen::VectorXd> used;
    for (std::size_t r = 0; r < replicates; ++r) {
      const Outcome& o = outcomes[r * n_schemes + s];
      if (o.ok) used.push_back(o.report.theta_hat.as_vector());
    }
    const std::size_t n_used = used.size();
    const std::size_t n_excluded = replicates - n_used;
    exclusions[std::to_string(config.schemes[s])] = n_excluded;
    for (std::size_t p = 0; p < kParamNames.size(); ++p) {
      std::string mean_s, bias_s, sd_s;
      if (n_used > 0) {
        double mean = 0.0;
        for (const auto& v : used) mean += v[static_cast<Eigen::Index>(p)];
        mean /= static_cast<double>(n_used);
        mean_s = format_double(mean);
        bias_s = format_double(mean - truth_vec[static_cast<Eigen::Index>(p)]);
        if (n_used > 1) {
          double ss = 0.0;
          for (const auto& v : used) ss += std::pow(v[static_cast<Eigen::Index>(p)] - mean, 2);
          sd_s = format_double(std::sqrt(ss / static_cast<double>(n_used - 1)));
        }
      }
      summary += csv_row({std::to_string(config.schemes[s]), kParamNames[p],
                          format_double(truth_vec[static_cast<Eigen::Index>(p)]), mean_s, bias_s, sd_s,
                          std::to_string(n_used), std::to_string(n_excluded)});
    }
  }

  nlohmann::ordered_json meta;
  meta["command"] = "mc-study";
  meta["replicates"] = replicates;
  meta["excluded"] = exclusions;
  meta["config"] = config.to_json();
  write_text_file(out_dir / "estimates.csv", est);
  write_text_file(out_dir / "summary.csv", summary);
  write_text_file(out_dir / "metadata.json", meta.dump(2) + "\n");
  return 0;
}

}  // namespace maxstorm::cli
