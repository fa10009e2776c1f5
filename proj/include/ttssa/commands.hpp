#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>

#include <json.hpp>

#include "ttssa/analysis.hpp"
#include "ttssa/config.hpp"
#include "ttssa/solver.hpp"

namespace ttssa {

inline constexpr const char* kToolVersion = "1.0.0";

enum ExitCode : int { kExitOk = 0, kExitConfigError = 2, kExitDiverged = 3 };

inline constexpr const char* kCsvHeader = "t,theta_norm_sq,mismatch_norm_sq,V_S,V_F,V_d,alpha_t,beta_t";

/// Header plus one row per record, reals with 17 significant digits.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj);

/// Lyapunov constants, coupling constants, epsilon*(d_mix) and the optimal mixing weight.
nlohmann::ordered_json lyapunov_summary(const Experiment& ex);
nlohmann::ordered_json conditions_json(const ConditionReport& r);
nlohmann::ordered_json rate_json(std::span<const SeriesPoint> series, FitWindow window);

/// Stability report: epsilon*(d) over the d grid, d*, PD certificates at epsilon*(d*) x {0.5, 0.99, 1.01},
/// RK4 verification at epsilon*(d*)/3 and, for the linear family, joint-matrix Hurwitz checks.
nlohmann::ordered_json stability_report(const ExperimentConfig& cfg);

// Each command writes under out_dir and returns an ExitCode. Progress goes to log.
int cmd_simulate(const ExperimentConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log);
int cmd_ensemble(const ExperimentConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log);
int cmd_stability(const ExperimentConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log);

}  // namespace ttssa
