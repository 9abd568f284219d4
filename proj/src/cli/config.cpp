#include "maxstorm/cli/config.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "maxstorm/cli/field_io.hpp"
#include "maxstorm/errors.hpp"
#include "maxstorm/parallel.hpp"

namespace maxstorm::cli {

namespace {

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& expected) {
  throw ValidationError("config key '" + key + "': cannot parse '" + value + "' as " + expected);
}

double to_double(const std::string& key, const std::string& s) {
  const std::string t = boost::trim_copy(s);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v)) bad_value(key, s, "a finite number");
  return v;
}

template <class Int>
Int to_integer(const std::string& key, const std::string& s) {
  const std::string t = boost::trim_copy(s);
  Int v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size()) bad_value(key, s, "an integer");
  return v;
}

struct Entry {
  std::string section;
  std::string key;
  std::function<void(RunConfig&, const std::string&)> set;
};

#define MS_DOUBLE(sec, name, member) \
  Entry { sec, name, [](RunConfig& c, const std::string& v) { c.member = to_double(sec "." name, v); } }
#define MS_SIZE(sec, name, member) \
  Entry { sec, name, [](RunConfig& c, const std::string& v) { c.member = to_integer<std::size_t>(sec "." name, v); } }

const std::vector<Entry>& schema() {
  static const std::vector<Entry> entries = {
      Entry{"model", "spatial",
            [](RunConfig& c, const std::string& v) {
              const std::string t = boost::trim_copy(v);
              if (t == "smith") c.spatial = SpatialKind::kSmith;
              else if (t == "schlather") c.spatial = SpatialKind::kSchlather;
              else if (t == "vmf") c.spatial = SpatialKind::kVmf;
              else bad_value("model.spatial", v, "one of smith, schlather, vmf");
            }},
      MS_DOUBLE("model", "sigma11", sigma11),
      MS_DOUBLE("model", "sigma12", sigma12),
      MS_DOUBLE("model", "sigma22", sigma22),
      MS_DOUBLE("model", "c1", c1),
      MS_DOUBLE("model", "c2", c2),
      MS_SIZE("model", "schlather_storms", schlather_storms),
      MS_DOUBLE("model", "schlather_envelope", schlather_envelope),
      MS_DOUBLE("model", "kappa", kappa),
      MS_DOUBLE("model", "a", a),
      MS_DOUBLE("model", "tau1", tau1),
      MS_DOUBLE("model", "tau2", tau2),
      MS_DOUBLE("model", "rotation_angle", rotation_angle),
      MS_DOUBLE("model", "axis_x", axis_x),
      MS_DOUBLE("model", "axis_y", axis_y),
      MS_DOUBLE("model", "axis_z", axis_z),
      Entry{"grid", "kind",
            [](RunConfig& c, const std::string& v) {
              const std::string t = boost::trim_copy(v);
              if (t == "regular") c.grid = GridKind::kRegular;
              else if (t == "random") c.grid = GridKind::kRandom;
              else if (t == "sphere") c.grid = GridKind::kSphere;
              else bad_value("grid.kind", v, "one of regular, random, sphere");
            }},
      MS_SIZE("grid", "nx", nx),
      MS_SIZE("grid", "ny", ny),
      MS_DOUBLE("grid", "x0", x0),
      MS_DOUBLE("grid", "y0", y0),
      MS_DOUBLE("grid", "dx", dx),
      MS_DOUBLE("grid", "dy", dy),
      MS_SIZE("grid", "n_sites", n_sites),
      MS_DOUBLE("grid", "x_min", x_min),
      MS_DOUBLE("grid", "x_max", x_max),
      MS_DOUBLE("grid", "y_min", y_min),
      MS_DOUBLE("grid", "y_max", y_max),
      Entry{"grid", "seed",
            [](RunConfig& c, const std::string& v) { c.grid_seed = to_integer<std::uint64_t>("grid.seed", v); }},
      MS_SIZE("time", "dates", dates),
      Entry{"time", "first_date",
            [](RunConfig& c, const std::string& v) { c.first_date = to_integer<std::int64_t>("time.first_date", v); }},
      Entry{"run", "seed",
            [](RunConfig& c, const std::string& v) { c.seed = to_integer<std::uint64_t>("run.seed", v); }},
      MS_SIZE("run", "threads", threads),
      Entry{"dependence", "lags", [](RunConfig& c, const std::string& v) { c.lags = parse_lags(v); }},
      Entry{"fit", "scheme", [](RunConfig& c, const std::string& v) { c.scheme = to_integer<int>("fit.scheme", v); }},
      MS_DOUBLE("fit", "init_sigma11", init.sigma11),
      MS_DOUBLE("fit", "init_sigma12", init.sigma12),
      MS_DOUBLE("fit", "init_sigma22", init.sigma22),
      MS_DOUBLE("fit", "init_a", init.a),
      MS_DOUBLE("fit", "init_tau1", init.tau1),
      MS_DOUBLE("fit", "init_tau2", init.tau2),
      MS_SIZE("fit", "max_evaluations", max_evaluations),
      MS_DOUBLE("fit", "xtol", xtol),
      MS_DOUBLE("fit", "ftol", ftol),
      MS_DOUBLE("fit", "initial_step", initial_step),
      MS_SIZE("study", "replicates", replicates),
      Entry{"study", "schemes",
            [](RunConfig& c, const std::string& v) {
              c.schemes.clear();
              std::vector<std::string> parts;
              boost::split(parts, v, boost::is_any_of(","));
              for (const auto& p : parts) c.schemes.push_back(to_integer<int>("study.schemes", p));
            }},
  };
  return entries;
}

#undef MS_DOUBLE
#undef MS_SIZE

const char* spatial_name(SpatialKind k) {
  switch (k) {
    case SpatialKind::kSmith: return "smith";
    case SpatialKind::kSchlather: return "schlather";
    case SpatialKind::kVmf: return "vmf";
  }
  return "?";
}

const char* grid_name(GridKind k) {
  switch (k) {
    case GridKind::kRegular: return "regular";
    case GridKind::kRandom: return "random";
    case GridKind::kSphere: return "sphere";
  }
  return "?";
}

}  // namespace

std::vector<LagSpec> parse_lags(const std::string& text) {
  std::vector<LagSpec> lags;
  std::vector<std::string> items;
  boost::split(items, text, boost::is_any_of(";"));
  for (const auto& item : items) {
    if (boost::trim_copy(item).empty()) continue;
    std::vector<std::string> parts;
    boost::split(parts, item, boost::is_any_of(","));
    if (parts.size() != 3) bad_value("dependence.lags", item, "'l,h1,h2'");
    lags.push_back({to_double("dependence.lags", parts[0]),
                    Eigen::Vector2d(to_double("dependence.lags", parts[1]), to_double("dependence.lags", parts[2]))});
  }
  return lags;
}

SphereMarkovParams RunConfig::sphere_markov() const {
  return {a, RotationSpec(rotation_angle, Eigen::Vector3d(axis_x, axis_y, axis_z))};
}

std::size_t RunConfig::effective_threads() const { return threads > 0 ? threads : default_thread_count(); }

void RunConfig::validate() const {
  if (is_sphere()) {
    (void)vmf();
    (void)sphere_markov();
    if (grid != GridKind::kSphere) throw ValidationError("model.spatial = vmf requires grid.kind = sphere");
  } else {
    if (grid == GridKind::kSphere) throw ValidationError("grid.kind = sphere requires model.spatial = vmf");
    (void)markov();
    if (spatial == SpatialKind::kSmith) (void)smith();
    if (spatial == SpatialKind::kSchlather) {
      (void)schlather();
      if (schlather_storms < 1) throw ValidationError("model.schlather_storms must be >= 1");
      if (!(schlather_envelope > 0.0)) throw ValidationError("model.schlather_envelope must be positive");
    }
  }
  if (dates < 1) throw ValidationError("time.dates must be >= 1");
  if (grid == GridKind::kRegular && (nx < 1 || ny < 1)) throw ValidationError("grid.nx and grid.ny must be >= 1");
  if (grid != GridKind::kRegular && n_sites < 1) throw ValidationError("grid.n_sites must be >= 1");
  if (grid == GridKind::kRandom && !(x_max > x_min && y_max > y_min)) {
    throw ValidationError("grid window must have x_max > x_min and y_max > y_min");
  }
  init.validate();
  if (max_evaluations < 1) throw ValidationError("fit.max_evaluations must be >= 1");
  if (!(xtol > 0.0) || !(ftol > 0.0) || !(initial_step > 0.0)) {
    throw ValidationError("fit.xtol, fit.ftol and fit.initial_step must be positive");
  }
  for (int s : schemes) {
    if (s != 1 && s != 2) throw ValidationError("study.schemes entries must be 1 or 2");
  }
}

nlohmann::ordered_json RunConfig::to_json() const {
  nlohmann::ordered_json j;
  j["model"] = {{"spatial", spatial_name(spatial)},
                {"sigma11", sigma11}, {"sigma12", sigma12}, {"sigma22", sigma22},
                {"c1", c1}, {"c2", c2},
                {"schlather_storms", schlather_storms}, {"schlather_envelope", schlather_envelope},
                {"kappa", kappa}, {"a", a}, {"tau1", tau1}, {"tau2", tau2},
                {"rotation_angle", rotation_angle}, {"axis_x", axis_x}, {"axis_y", axis_y}, {"axis_z", axis_z}};
  j["grid"] = {{"kind", grid_name(grid)}, {"nx", nx}, {"ny", ny}, {"x0", x0}, {"y0", y0}, {"dx", dx}, {"dy", dy},
               {"n_sites", n_sites}, {"x_min", x_min}, {"x_max", x_max}, {"y_min", y_min}, {"y_max", y_max},
               {"seed", grid_seed}};
  j["time"] = {{"dates", dates}, {"first_date", first_date}};
  j["run"] = {{"seed", seed}, {"threads", threads}};
  std::string lag_text;
  for (const auto& l : lags) {
    if (!lag_text.empty()) lag_text += "; ";
    lag_text += format_double(l.time_lag) + "," + format_double(l.space_lag.x()) + "," + format_double(l.space_lag.y());
  }
  j["dependence"] = {{"lags", lag_text}};
  j["fit"] = {{"scheme", scheme},
              {"init_sigma11", init.sigma11}, {"init_sigma12", init.sigma12}, {"init_sigma22", init.sigma22},
              {"init_a", init.a}, {"init_tau1", init.tau1}, {"init_tau2", init.tau2},
              {"max_evaluations", max_evaluations}, {"xtol", xtol}, {"ftol", ftol}, {"initial_step", initial_step}};
  j["study"] = {{"replicates", replicates}, {"schemes", schemes}};
  return j;
}

RunConfig parse_config(const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    std::ostringstream os;
    os << "config parse error at line " << e.line() << ": " << e.message();
    throw ValidationError(os.str());
  }
  RunConfig config;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ValidationError("config key '" + section + "' must appear inside a [section]");
    for (const auto& [key, value] : body) {
      const auto& entries = schema();
      const auto it = std::find_if(entries.begin(), entries.end(),
                                   [&](const Entry& e) { return e.section == section && e.key == key; });
      if (it == entries.end()) throw ValidationError("unknown config key '" + section + "." + key + "'");
      it->set(config, value.data());
    }
  }
  config.validate();
  return config;
}

RunConfig load_config(const std::filesystem::path& path) { return parse_config(read_text_file(path)); }

PlanarSites make_planar_grid(const RunConfig& config) {
  PlanarSites sites;
  if (config.grid == GridKind::kRegular) {
    for (std::size_t j = 0; j < config.ny; ++j) {
      for (std::size_t i = 0; i < config.nx; ++i) {
        sites.emplace_back(config.x0 + static_cast<double>(i) * config.dx, config.y0 + static_cast<double>(j) * config.dy);
      }
    }
  } else if (config.grid == GridKind::kRandom) {
    SeededStream stream(config.grid_seed, 0);
    for (std::size_t k = 0; k < config.n_sites; ++k) {
      const double x = stream.uniform(config.x_min, config.x_max);
      const double y = stream.uniform(config.y_min, config.y_max);
      sites.emplace_back(x, y);
    }
  } else {
    throw ValidationError("planar grid requested for a sphere configuration");
  }
  return sites;
}

SphereSites make_sphere_grid(const RunConfig& config) {
  if (config.grid != GridKind::kSphere) throw ValidationError("sphere grid requested for a planar configuration");
  // Fibonacci lattice.
  SphereSites sites;
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  const auto n = static_cast<double>(config.n_sites);
  for (std::size_t k = 0; k < config.n_sites; ++k) {
    const double z = 1.0 - (2.0 * static_cast<double>(k) + 1.0) / n;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * static_cast<double>(k);
    sites.push_back(SphereSite::normalized(Eigen::Vector3d(r * std::cos(phi), r * std::sin(phi), z)));
  }
  return sites;
}

}  // namespace maxstorm::cli
