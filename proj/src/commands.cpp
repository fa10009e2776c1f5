#include "ttssa/commands.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <ostream>

#include "ttssa/ensemble.hpp"
#include "ttssa/schedule.hpp"

namespace ttssa {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

// Non-finite values become strings: JSON has no infinity.
ordered_json num(double x) {
    if (std::isfinite(x)) return x;
    if (std::isnan(x)) return "nan";
    return x > 0 ? "inf" : "-inf";
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::array<char, 32> buf{};
    std::strftime(buf.data(), buf.size(), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf.data();
}

void append_real(std::string& line, double x) {
    std::array<char, 40> buf{};
    std::snprintf(buf.data(), buf.size(), "%.17g", x);
    line += ',';
    line += buf.data();
}

void write_json(const fs::path& path, const ordered_json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

ordered_json diagnostics_json(const DiagnosticsReport& d) {
    return {{"sup_Vd", num(d.sup_vd)},
            {"sup_Vd_t_lt_100", num(d.sup_vd_early)},
            {"sup_Vd_t_ge_100", num(d.sup_vd_late)},
            {"pathwise_bounded", d.pathwise_bounded()},
            {"partial_sum_alpha_Vd", num(d.partial_sum_alpha_vd)},
            {"partial_sum_beta_mismatch", num(d.partial_sum_beta_mismatch)},
            {"tail_fraction_alpha_Vd", num(d.tail_fraction_alpha_vd)},
            {"tail_fraction_beta_mismatch", num(d.tail_fraction_beta_mismatch)},
            {"diverged", d.diverged}};
}

ordered_json rates_json(const Trajectory& traj, FitWindow window) {
    return {{"V_d", rate_json(series(traj, Field::VCombined), window)},
            {"theta_norm_sq", rate_json(series(traj, Field::ThetaNormSq), window)},
            {"mismatch_norm_sq", rate_json(series(traj, Field::MismatchNormSq), window)}};
}

ordered_json summary_header(const ExperimentConfig& cfg, const Experiment& ex, const char* command) {
    ordered_json j;
    j["tool"] = "ttssa";
    j["version"] = kToolVersion;
    j["command"] = command;
    j["generated_at"] = utc_timestamp();
    j["seed"] = cfg.run.seed;
    j["config"] = config_to_json(cfg);
    j["lyapunov"] = lyapunov_summary(ex);
    j["conditions"] = conditions_json(validate(cfg.run.alpha, cfg.run.beta, cfg.run.noise));
    j["conditions_note"] = "finite-horizon sums in diagnostics are heuristics; verdicts here use exponent rules";
    j["rate_guarantee"] = rate_guarantee(cfg.run.noise);
    return j;
}

ordered_json run_entry(std::size_t index, const Trajectory& t) {
    return {{"index", index},
            {"status", to_string(t.status)},
            {"steps_taken", t.steps_taken},
            {"final_t", t.records.back().t},
            {"final_V_d", num(t.records.back().v_combined)}};
}

Matrix joint_matrix(const LinearSPProblem& p, double eps) {
    const std::size_t d = p.slow_dim(), l = p.fast_dim();
    Matrix j(d + l, d + l);
    for (std::size_t r = 0; r < d; ++r) {
        for (std::size_t c = 0; c < d; ++c) j(r, c) = p.a11(r, c);
        for (std::size_t c = 0; c < l; ++c) j(r, d + c) = p.a12(r, c);
    }
    for (std::size_t r = 0; r < l; ++r) {
        for (std::size_t c = 0; c < d; ++c) j(d + r, c) = p.a21(r, c) / eps;
        for (std::size_t c = 0; c < l; ++c) j(d + r, d + c) = p.a22(r, c) / eps;
    }
    return j;
}

ordered_json rk4_verification(const Experiment& ex, const LyapunovData& ld, double eps,
                              const StabilityOptions& opt) {
    const double h = opt.rk4_step_ratio * eps;
    const auto samples = integrate_ode(ex.spec, ld, eps, ex.theta0, ex.phi0, h, opt.rk4_max_time);
    bool decreasing = true, reached = false;
    double reached_at = 0.0;
    std::size_t checked = 0;
    for (std::size_t k = 1; k < samples.size(); ++k) {
        if (samples[k - 1].v_combined < opt.v_floor) {
            reached = true;
            reached_at = samples[k - 1].time;
            break;
        }
        ++checked;
        if (!(samples[k].v_combined < samples[k - 1].v_combined)) {
            decreasing = false;
            break;
        }
    }
    if (!reached && decreasing && samples.back().v_combined < opt.v_floor) {
        reached = true;
        reached_at = samples.back().time;
    }
    return {{"epsilon", eps},
            {"step", h},
            {"max_time", opt.rk4_max_time},
            {"v_floor", opt.v_floor},
            {"initial_V_d", num(samples.front().v_combined)},
            {"final_V_d", num(samples.back().v_combined)},
            {"intervals_checked", checked},
            {"strictly_decreasing", decreasing},
            {"reached_floor", reached},
            {"time_to_floor", reached ? num(reached_at) : ordered_json(nullptr)},
            {"verified", decreasing && reached}};
}

}  // namespace

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    os << kCsvHeader << '\n';
    std::string line;
    for (const auto& r : traj.records) {
        line = std::to_string(r.t);
        for (double x : {r.theta_norm_sq, r.mismatch_norm_sq, r.v_slow, r.v_fast, r.v_combined, r.alpha, r.beta})
            append_real(line, x);
        os << line << '\n';
    }
}

void write_trajectory_csv(const fs::path& path, const Trajectory& traj) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write_trajectory_csv(out, traj);
}

ordered_json lyapunov_summary(const Experiment& ex) {
    const LyapunovData& ld = ex.lyapunov;
    const auto& lip = ex.spec.lipschitz();
    const CouplingConstants cc = coupling_constants(ld, lip);
    const MixingOptimum opt = optimize_d(cc, ld);
    return {{"P_slow", ld.p_slow.to_rows()},
            {"P_fast", ld.p_fast.to_rows()},
            {"a_slow", ld.a_slow},
            {"b_slow", ld.b_slow},
            {"c_slow", ld.c_slow},
            {"a_fast", ld.a_fast},
            {"b_fast", ld.b_fast},
            {"c_fast", ld.c_fast},
            {"L_S", ld.lip_slow},
            {"L_F", ld.lip_fast},
            {"L_f", lip.f},
            {"L_g", lip.g},
            {"L_lambda", lip.lambda},
            {"D1", cc.d1},
            {"D2", cc.d2},
            {"D3", cc.d3},
            {"d_mix", ld.d_mix},
            {"epsilon_star_d_mix", num(epsilon_star(cc, ld, ld.d_mix))},
            {"d_star", opt.d},
            {"epsilon_star_d_star", num(opt.epsilon_star)}};
}

ordered_json conditions_json(const ConditionReport& r) {
    return {{"sq_summable_alpha", r.sq_summable_alpha},
            {"sq_summable_beta", r.sq_summable_beta},
            {"bias_summable_slow", r.bias_summable_slow},
            {"bias_summable_fast", r.bias_summable_fast},
            {"var_summable_slow", r.var_summable_slow},
            {"var_summable_fast", r.var_summable_fast},
            {"alpha_divergent", r.alpha_divergent},
            {"beta_divergent", r.beta_divergent},
            {"timescale_separated", r.timescale_separated},
            {"boundedness_conditions", r.boundedness_conditions()},
            {"convergence_conditions", r.convergence_conditions()}};
}

ordered_json rate_json(std::span<const SeriesPoint> s, FitWindow window) {
    try {
        const RateEstimate e = fit_rate(s, window);
        return {{"eta_hat", num(e.eta_hat)},
                {"intercept", num(e.intercept)},
                {"r_squared", e.r_squared},
                {"t_lo", window.t_lo},
                {"t_hi", window.t_hi},
                {"points", e.points}};
    } catch (const InsufficientData& e) {
        return {{"error", e.what()}, {"t_lo", window.t_lo}, {"t_hi", window.t_hi}};
    }
}

ordered_json stability_report(const ExperimentConfig& cfg) {
    const StabilityOptions& opt = cfg.stability;
    std::optional<Experiment> ex;
    LyapunovData ld;
    CouplingConstants cc;
    if (opt.synthetic) {
        ld.c_slow = opt.synthetic->c_slow;
        ld.c_fast = opt.synthetic->c_fast;
        cc = {opt.synthetic->d1, opt.synthetic->d2, opt.synthetic->d3};
    } else {
        ex = prepare(cfg.run);
        ld = ex->lyapunov;
        cc = coupling_constants(ld, ex->spec.lipschitz());
    }

    ordered_json j;
    j["tool"] = "ttssa";
    j["version"] = kToolVersion;
    j["command"] = "stability";
    j["generated_at"] = utc_timestamp();
    j["config"] = config_to_json(cfg);
    j["synthetic_constants"] = opt.synthetic.has_value();
    j["constants"] = {{"c_slow", ld.c_slow}, {"c_fast", ld.c_fast}, {"D1", cc.d1}, {"D2", cc.d2}, {"D3", cc.d3}};
    if (ex) j["lyapunov"] = lyapunov_summary(*ex);

    ordered_json grid = ordered_json::array();
    for (int k = 1; k <= 99; ++k) {
        const double d = k / 100.0;
        grid.push_back({{"d", d}, {"epsilon_star", num(epsilon_star(cc, ld, d))}});
    }
    j["epsilon_star_grid"] = grid;

    const MixingOptimum best = optimize_d(cc, ld);
    j["d_star"] = best.d;
    j["epsilon_star_d_star"] = num(best.epsilon_star);

    LyapunovData ld_star = ld;
    ld_star.d_mix = best.d;
    ordered_json certs = ordered_json::array();
    if (std::isfinite(best.epsilon_star)) {
        for (double factor : {0.5, 0.99, 1.01}) {
            const double eps = factor * best.epsilon_star;
            const Matrix sym = symmetric_part(coupling_matrix(cc, ld_star, eps));
            certs.push_back({{"factor", factor},
                             {"epsilon", eps},
                             {"determinant", sym(0, 0) * sym(1, 1) - sym(0, 1) * sym(1, 0)},
                             {"positive_definite", is_positive_definite(sym)}});
        }
    }
    j["pd_certificates"] = certs;

    const double eps_verify = best.epsilon_star / 3.0;
    j["rk4"] = nullptr;
    j["joint_matrix"] = nullptr;
    if (ex && std::isfinite(best.epsilon_star)) {
        j["rk4"] = rk4_verification(*ex, ld_star, eps_verify, opt);
        const auto* lin = std::get_if<LinearSPProblem>(&ex->config.problem);
        if (lin && lin->slow_dim() + lin->fast_dim() <= kMaxDim) {
            ordered_json checks = ordered_json::array();
            std::vector<double> epsilons{eps_verify};
            epsilons.insert(epsilons.end(), opt.probe_epsilons.begin(), opt.probe_epsilons.end());
            for (double eps : epsilons)
                checks.push_back({{"epsilon", eps}, {"hurwitz", is_hurwitz(joint_matrix(*lin, eps))}});

            // Largest eps keeping the joint matrix Hurwitz, by bisection in log eps.
            ordered_json threshold = nullptr;
            double lo = 1e-6, hi = 1e3;
            if (is_hurwitz(joint_matrix(*lin, lo)) && !is_hurwitz(joint_matrix(*lin, hi))) {
                for (int it = 0; it < 100; ++it) {
                    const double mid = std::sqrt(lo * hi);
                    (is_hurwitz(joint_matrix(*lin, mid)) ? lo : hi) = mid;
                }
                threshold = lo;
            }
            j["joint_matrix"] = {{"checks", checks}, {"hurwitz_threshold_estimate", threshold}};
        }
    }
    return j;
}

int cmd_simulate(const ExperimentConfig& cfg, const fs::path& out_dir, std::ostream& log) {
    const Experiment ex = prepare(cfg.run);
    fs::create_directories(out_dir);
    const Trajectory traj = run(ex, RngState(cfg.run.seed));

    const fs::path csv = out_dir / (cfg.name + ".csv");
    write_trajectory_csv(csv, traj);

    ordered_json j = summary_header(cfg, ex, "simulate");
    j["runs"] = ordered_json::array({run_entry(0, traj)});
    const FitWindow window{cfg.fit_t_lo, cfg.fit_hi()};
    j["rates_scope"] = "single path";
    j["rates"] = rates_json(traj, window);
    j["eta_hat_Vd"] = j["rates"]["V_d"].value("eta_hat", ordered_json(nullptr));
    j["diagnostics"] = diagnostics_json(diagnostics(traj));
    write_json(out_dir / (cfg.name + "_summary.json"), j);

    log << "simulate: " << to_string(traj.status) << " after " << traj.steps_taken << " steps, final V_d "
        << traj.records.back().v_combined << "\n  wrote " << csv.string() << '\n';
    return traj.status == RunStatus::Diverged ? kExitDiverged : kExitOk;
}

int cmd_ensemble(const ExperimentConfig& cfg, const fs::path& out_dir, std::ostream& log) {
    if (cfg.ensemble_size < 2) throw ConfigError(0, "ensemble_size: the ensemble command needs >= 2 runs");
    const Experiment ex = prepare(cfg.run);
    fs::create_directories(out_dir);
    const auto runs = run_ensemble(ex, static_cast<std::size_t>(cfg.ensemble_size), cfg.workers);

    ordered_json j = summary_header(cfg, ex, "ensemble");
    ordered_json entries = ordered_json::array();
    std::vector<Trajectory> completed;
    std::size_t bounded = 0;
    double max_tail_beta = 0.0, max_tail_alpha = 0.0, max_sup = 0.0;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        std::array<char, 32> suffix{};
        std::snprintf(suffix.data(), suffix.size(), "_run_%04zu.csv", i);
        write_trajectory_csv(out_dir / (cfg.name + suffix.data()), runs[i]);
        entries.push_back(run_entry(i, runs[i]));
        const DiagnosticsReport d = diagnostics(runs[i]);
        if (d.pathwise_bounded()) ++bounded;
        max_tail_beta = std::max(max_tail_beta, d.tail_fraction_beta_mismatch);
        max_tail_alpha = std::max(max_tail_alpha, d.tail_fraction_alpha_vd);
        max_sup = std::max(max_sup, d.sup_vd);
        if (runs[i].status == RunStatus::Completed) completed.push_back(runs[i]);
    }
    j["runs"] = entries;
    j["runs_completed"] = completed.size();
    j["runs_diverged"] = runs.size() - completed.size();

    const FitWindow window{cfg.fit_t_lo, cfg.fit_hi()};
    j["rates_scope"] = "ensemble mean over completed runs";
    if (!completed.empty()) {
        const Trajectory mean = ensemble_mean(completed);
        write_trajectory_csv(out_dir / (cfg.name + "_mean.csv"), mean);
        j["rates"] = rates_json(mean, window);
        j["eta_hat_Vd"] = j["rates"]["V_d"].value("eta_hat", ordered_json(nullptr));
        j["diagnostics"] = {{"ensemble_mean", diagnostics_json(diagnostics(mean))},
                            {"max_tail_fraction_beta_mismatch", max_tail_beta},
                            {"max_tail_fraction_alpha_Vd", max_tail_alpha},
                            {"max_sup_Vd", num(max_sup)},
                            {"runs_pathwise_bounded", bounded}};
    } else {
        j["rates"] = nullptr;
        j["eta_hat_Vd"] = nullptr;
        j["diagnostics"] = nullptr;
    }
    j["rate_guarantee_vs_fit"] = {{"rate_guarantee", rate_guarantee(cfg.run.noise)}, {"eta_hat_Vd", j["eta_hat_Vd"]}};
    write_json(out_dir / (cfg.name + "_summary.json"), j);

    log << "ensemble: " << completed.size() << '/' << runs.size() << " runs completed, eta_hat(V_d) = "
        << j["eta_hat_Vd"].dump() << ", rate guarantee " << rate_guarantee(cfg.run.noise) << '\n';
    return completed.size() == runs.size() ? kExitOk : kExitDiverged;
}

int cmd_stability(const ExperimentConfig& cfg, const fs::path& out_dir, std::ostream& log) {
    const ordered_json report = stability_report(cfg);
    fs::create_directories(out_dir);
    const fs::path path = out_dir / (cfg.name + "_stability.json");
    write_json(path, report);
    log << "stability: d* = " << report["d_star"].dump() << ", epsilon*(d*) = "
        << report["epsilon_star_d_star"].dump() << "\n  wrote " << path.string() << '\n';
    return kExitOk;
}

}  // namespace ttssa
