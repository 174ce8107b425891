#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gwtails/asymptotics.hpp"

namespace gwtails {

inline constexpr const char* kVersion = "0.1.0";

enum class Subcommand { Simulate, Estimate, Approximate, Diagnose, Bound, Compare };

std::string to_string(Subcommand sub);
std::optional<Subcommand> parse_subcommand(const std::string& text);

struct GeometricGridSpec {
    double start = 1.0;
    double factor = 2.0;
    int count = 1;

    friend bool operator==(const GeometricGridSpec&, const GeometricGridSpec&) = default;
};

/*!
 * A fully resolved experiment. JSON files use the same field names as the
 * long flags (underscores instead of dashes); see README for the schema.
 */
struct ExperimentConfig {
    Subcommand subcommand = Subcommand::Estimate;
    std::string law;
    //! One or more horizons; nullopt entries mean infinity.
    std::vector<Horizon> n{Horizon{1}};
    //! Explicit grid; x_geo (when set) takes precedence at resolution time.
    std::vector<double> x;
    std::optional<GeometricGridSpec> x_geo;
    std::int64_t replicas = 10000;
    std::uint64_t seed = 0;
    //! 0 means one worker per logical core.
    int workers = 0;
    double eps = 0.0;
    //! estimate/compare: naive|bigjump|exact; bound: 22|23|chebyshev.
    std::string method = "naive";
    //! approximate/compare: approximation tag (series, weibull, index_one, ...).
    std::string approx = "series";
    std::string out = "out.csv";
    std::int64_t population_cap = 512;
    //! simulate: event threshold x (events tracked when set).
    std::optional<double> track_x;
    double track_eps = 0.0;
    //! bound: shift "m", "2m" or a real number.
    std::string shift = "m";
    std::optional<double> y;
    std::optional<double> lambda;
    double c = 8.0;
    //! diagnose: check name (dominated, irv, matuszewska, insensitive, sstar, rapid,
    //! hazard_increment, hazard_slope, regime, all).
    std::string check = "all";
    double grid_max = 1048576.0;
    double delta = 0.5;
    double mat_c = 10.0;
    double gamma = 0.5;
    double c1 = 10.0;
    double x0 = 8.0;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;

    //! x_geo expanded, or x.
    std::vector<double> resolved_x() const;
};

//! Parse a JSON config document. ParseError carries line/column; unknown keys raise UnknownField.
ExperimentConfig parse_config_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& config);

/*!
 * Parse `<subcommand> [flags]` (argv without the program name). A
 * `--config file.json` flag loads a base config that the other flags override.
 * Returns nullopt after printing help.
 */
std::optional<ExperimentConfig> parse_command_line(const std::vector<std::string>& args, std::ostream& out);

//! Semantic checks (grid ordering, replicas, law spec). Throws BadParam / ParseError.
void validate_config(const ExperimentConfig& config);

/*!
 * Execute the config: writes config.out and `<out>.manifest.json`. Returns
 * 0 on success, 2 for parameter errors, 3 for numeric failures.
 */
int run(const ExperimentConfig& config, std::ostream& log);

//! Full CLI entry: parse, run, map errors to exit codes.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

//! 17 significant digits, '.' decimal separator.
std::string format_real(double v);

}  // namespace gwtails
