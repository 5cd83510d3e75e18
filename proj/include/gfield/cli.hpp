#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace gfield {

/// Settings shared by all subcommands. Each field has a config-file key (the
/// field name) and a command-line flag; see config_keys().
struct RunConfig {
  std::string kernel = "exp-alpha:0.5";
  int dim = 1;
  int k_max = 5;
  double alpha = 0.5;
  std::string alphas = "0.25,0.5,0.75";
  std::string gammas = "0.4,0.6";
  std::uint64_t seed = 42;
  std::size_t n_samples = 1000;
  int grid_resolution = -1;  // -1: subcommand default
  double pivot_tol = 0.0;
  std::string norm_mode = "auto";
  double energy_cutoff = 0.0;
  std::string points = "0,0.25,0.5";
  std::size_t n_triples = 10000;
  int nystrom_n = 512;
  std::size_t cap = 4096;
  std::string out;
  std::string decomp;
  std::string report_json;
  std::string density_out;
};

/// Config-file key -> command-line flag.
const std::map<std::string, std::string>& config_keys();

/// Reads `key = value` lines; `#` starts a comment, blank lines are ignored.
/// Throws std::runtime_error on unreadable files, malformed lines, duplicate
/// or unknown keys.
std::map<std::string, std::string> read_config_file(const std::string& path);

/// Runs `gfield <subcommand> [flags]`. Returns 0 on success, 1 when a
/// validation check fails, 2 on usage or configuration errors.
int run_command(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gfield
