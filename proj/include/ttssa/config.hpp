#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ttssa/solver.hpp"

namespace ttssa {

/// Configuration problem with the 1-based source line it was traced to (0 when unknown).
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::size_t line, const std::string& message);
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

struct SyntheticConstants {
    double c_slow = 1, c_fast = 1, d1 = 1, d2 = 1, d3 = 1;
};

struct StabilityOptions {
    std::vector<double> probe_epsilons{0.1, 1.0};
    double rk4_step_ratio = 0.1;  // h = ratio * eps
    double rk4_max_time = 50.0;
    double v_floor = 1e-12;
    std::optional<SyntheticConstants> synthetic;
};

struct ExperimentConfig {
    std::string name = "experiment";
    std::string output_dir = "out";
    RunConfig run;
    std::int64_t ensemble_size = 1;
    int workers = 0;
    double fit_t_lo = 1e3;
    std::optional<double> fit_t_hi;  // horizon when unset
    StabilityOptions stability;

    double fit_hi() const { return fit_t_hi.value_or(static_cast<double>(run.horizon)); }
};

/// Parses and validates a JSON config. Unknown keys, wrong types and out-of-range values
/// raise ConfigError carrying the offending line.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Every field, defaults resolved; parse_config(config_to_json(c).dump()) reproduces c.
nlohmann::ordered_json config_to_json(const ExperimentConfig& cfg);

}  // namespace ttssa
