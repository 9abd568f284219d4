#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "maxstorm/cli/config.hpp"

namespace maxstorm::cli {

// Each command writes its outputs and returns the process exit code; domain
// errors propagate as exceptions (see exit_code()).

// Writes field.csv and metadata.json into out_dir.
int cmd_simulate(const RunConfig& config, const std::filesystem::path& out_dir);

// Writes l,h1,h2,theta_analytic,nu_analytic,theta_empirical,nu_empirical,n_pairs.
int cmd_dependence(const RunConfig& config, const std::optional<std::filesystem::path>& field,
                   const std::filesystem::path& out_csv);

// Writes the FitReport as JSON.
int cmd_fit(const RunConfig& config, const std::filesystem::path& field, int scheme,
            const std::filesystem::path& out_json);

// Writes summary.csv, estimates.csv and metadata.json into out_dir.
int cmd_mc_study(const RunConfig& config, std::size_t replicates, const std::filesystem::path& out_dir);

}  // namespace maxstorm::cli
