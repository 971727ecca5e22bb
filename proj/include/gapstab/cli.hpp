#pragma once

// Command-line front end: run configuration and subcommand dispatch.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace gapstab {

struct RunConfig {
    std::string command;
    std::string model = "jacobi";  // jacobi | cauchy | gaussian | scaled | phi_perturbed
    double N = 3.0;
    double kappa = 1.0;
    double quartic = 0.0;
    double radius = 1.0;  // scaled: jacobi(N) on [−radius, radius]
    double delta = 0.0;   // phi_perturbed amplitude
    std::string bump = "quartic";
    int n = 2000;
    std::string mapping;  // empty: model default
    std::vector<double> deltas = {1e-3, 3e-3, 1e-2, 3e-2, 1e-1};
    std::uint64_t seed = 1;
    std::string out;  // empty: no files written
    std::string family = "beta_scaled";
    double p = 2.0;
    double c = 0.5;
    double r = 4.0;
    int samples = 100;
    int grid = 10000;

    bool operator==(const RunConfig&) const = default;
};

/// `key = value` lines, doubles at 17 significant digits.
std::string to_config_text(const RunConfig& cfg);
/// Inverse of to_config_text; `#` starts a comment, unknown keys throw
/// std::invalid_argument.
RunConfig parse_config_text(const std::string& text);

/// Exit status: 0 pass, 1 audit failure, 2 usage error.
enum ExitStatus : int { exit_pass = 0, exit_fail = 1, exit_usage = 2 };

/// Runs one subcommand. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gapstab
