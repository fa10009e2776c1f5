#include "ttssa/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>

namespace ttssa {

using nlohmann::json;
using nlohmann::ordered_json;

ConfigError::ConfigError(std::size_t line, const std::string& message)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}

namespace {

std::size_t line_of_offset(const std::string& text, std::size_t offset) {
    offset = std::min(offset, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

class Reader {
public:
    explicit Reader(const std::string& text) : text_(text) {}

    // Line of the last key in a dotted path, found by walking the keys in source order.
    std::size_t locate(const std::string& path) const {
        std::size_t pos = 0, found = std::string::npos;
        std::stringstream ss(path);
        std::string key;
        while (std::getline(ss, key, '.')) {
            const auto p = text_.find('"' + key + '"', pos);
            if (p == std::string::npos) break;
            found = pos = p;
        }
        return found == std::string::npos ? 0 : line_of_offset(text_, found);
    }

    [[noreturn]] void fail(const std::string& path, const std::string& msg) const {
        throw ConfigError(locate(path), path.empty() ? msg : path + ": " + msg);
    }

    void only_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) const {
        if (!obj.is_object()) fail(path, "expected an object");
        for (const auto& [k, v] : obj.items()) {
            const bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; });
            if (!ok) fail(join(path, k), "unknown key");
        }
    }

    static std::string join(const std::string& path, const std::string& key) {
        return path.empty() ? key : path + "." + key;
    }

    double number(const json& obj, const std::string& path, const char* key, double def) const {
        if (!obj.contains(key)) return def;
        const json& v = obj.at(key);
        if (!v.is_number()) fail(join(path, key), "expected a number");
        const double x = v.get<double>();
        if (!std::isfinite(x)) fail(join(path, key), "must be finite");
        return x;
    }

    std::int64_t integer(const json& obj, const std::string& path, const char* key, std::int64_t def) const {
        if (!obj.contains(key)) return def;
        const json& v = obj.at(key);
        if (!v.is_number_integer()) fail(join(path, key), "expected an integer");
        return v.get<std::int64_t>();
    }

    std::uint64_t unsigned_integer(const json& obj, const std::string& path, const char* key,
                                   std::uint64_t def) const {
        if (!obj.contains(key)) return def;
        const json& v = obj.at(key);
        if (!v.is_number_unsigned()) fail(join(path, key), "expected a non-negative integer");
        return v.get<std::uint64_t>();
    }

    bool boolean(const json& obj, const std::string& path, const char* key, bool def) const {
        if (!obj.contains(key)) return def;
        const json& v = obj.at(key);
        if (!v.is_boolean()) fail(join(path, key), "expected true or false");
        return v.get<bool>();
    }

    std::string string(const json& obj, const std::string& path, const char* key, const std::string& def) const {
        if (!obj.contains(key)) return def;
        const json& v = obj.at(key);
        if (!v.is_string()) fail(join(path, key), "expected a string");
        return v.get<std::string>();
    }

    std::vector<double> numbers(const json& v, const std::string& path) const {
        if (!v.is_array()) fail(path, "expected an array of numbers");
        std::vector<double> out;
        for (const auto& x : v) {
            if (!x.is_number()) fail(path, "expected an array of numbers");
            out.push_back(x.get<double>());
        }
        if (!all_finite(out)) fail(path, "entries must be finite");
        return out;
    }

    std::optional<Vector> optional_vector(const json& obj, const std::string& path, const char* key) const {
        if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
        return numbers(obj.at(key), join(path, key));
    }

    Matrix matrix(const json& obj, const std::string& path, const char* key) const {
        const std::string p = join(path, key);
        if (!obj.contains(key)) fail(p, "missing matrix");
        const json& v = obj.at(key);
        if (!v.is_array() || v.empty()) fail(p, "expected a non-empty array of rows");
        std::vector<std::vector<double>> rows;
        for (const auto& r : v) rows.push_back(numbers(r, p));
        try {
            return Matrix::from_rows(rows);
        } catch (const std::exception& e) {
            fail(p, e.what());
        }
    }

    std::optional<Matrix> optional_matrix(const json& obj, const std::string& path, const char* key) const {
        if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
        return matrix(obj, path, key);
    }

private:
    const std::string& text_;
};

ProblemDefinition read_problem(const Reader& rd, const json& obj) {
    const std::string path = "problem";
    if (!obj.is_object()) rd.fail(path, "expected an object");
    const std::string type = rd.string(obj, path, "type", "linear");
    if (type == "linear") {
        rd.only_keys(obj, path, {"type", "A11", "A12", "A21", "A22"});
        return LinearSPProblem{rd.matrix(obj, path, "A11"), rd.matrix(obj, path, "A12"),
                               rd.matrix(obj, path, "A21"), rd.matrix(obj, path, "A22")};
    }
    if (type == "nonlinear") {
        rd.only_keys(obj, path, {"type", "A_slow", "A_fast", "C", "lambda_amplitude", "lambda_frequency"});
        return NonlinearSPProblem{rd.matrix(obj, path, "A_slow"), rd.matrix(obj, path, "A_fast"),
                                  rd.matrix(obj, path, "C"), rd.number(obj, path, "lambda_amplitude", 0.0),
                                  rd.number(obj, path, "lambda_frequency", 1.0)};
    }
    rd.fail("problem.type", "expected \"linear\" or \"nonlinear\"");
}

PowerLawSchedule read_schedule(const Reader& rd, const json& obj, const std::string& path,
                               PowerLawSchedule def) {
    rd.only_keys(obj, path, {"coeff", "exponent", "t_offset"});
    PowerLawSchedule s{rd.number(obj, path, "coeff", def.coeff), rd.number(obj, path, "exponent", def.exponent),
                       rd.integer(obj, path, "t_offset", def.t_offset)};
    try {
        s.validate();
    } catch (const std::invalid_argument& e) {
        rd.fail(path, e.what());
    }
    return s;
}

NoiseBoundSchedule read_noise(const Reader& rd, const json& obj) {
    const std::string path = "noise";
    rd.only_keys(obj, path,
                 {"b0_slow", "b0_fast", "gamma_slow", "gamma_fast", "m0_slow", "m0_fast", "nu_slow", "nu_fast",
                  "t_offset"});
    NoiseBoundSchedule n;
    n.b0_slow = rd.number(obj, path, "b0_slow", 0.0);
    n.b0_fast = rd.number(obj, path, "b0_fast", 0.0);
    n.gamma_slow = rd.number(obj, path, "gamma_slow", 0.0);
    n.gamma_fast = rd.number(obj, path, "gamma_fast", 0.0);
    n.m0_slow = rd.number(obj, path, "m0_slow", 0.0);
    n.m0_fast = rd.number(obj, path, "m0_fast", 0.0);
    n.nu_slow = rd.number(obj, path, "nu_slow", 0.0);
    n.nu_fast = rd.number(obj, path, "nu_fast", 0.0);
    n.t_offset = rd.integer(obj, path, "t_offset", 1);
    try {
        n.validate();
    } catch (const std::invalid_argument& e) {
        rd.fail(path, e.what());
    }
    return n;
}

StabilityOptions read_stability(const Reader& rd, const json& obj) {
    const std::string path = "stability";
    rd.only_keys(obj, path, {"probe_epsilons", "rk4_step_ratio", "rk4_max_time", "v_floor", "synthetic_constants"});
    StabilityOptions s;
    if (obj.contains("probe_epsilons")) s.probe_epsilons = rd.numbers(obj.at("probe_epsilons"), path + ".probe_epsilons");
    for (double e : s.probe_epsilons)
        if (!(e > 0.0)) rd.fail(path + ".probe_epsilons", "entries must be > 0");
    s.rk4_step_ratio = rd.number(obj, path, "rk4_step_ratio", s.rk4_step_ratio);
    if (!(s.rk4_step_ratio > 0.0 && s.rk4_step_ratio <= kMaxStepRatio))
        rd.fail(path + ".rk4_step_ratio", "must lie in (0, 0.1]");
    s.rk4_max_time = rd.number(obj, path, "rk4_max_time", s.rk4_max_time);
    if (!(s.rk4_max_time > 0.0)) rd.fail(path + ".rk4_max_time", "must be > 0");
    s.v_floor = rd.number(obj, path, "v_floor", s.v_floor);
    if (!(s.v_floor > 0.0)) rd.fail(path + ".v_floor", "must be > 0");
    if (obj.contains("synthetic_constants") && !obj.at("synthetic_constants").is_null()) {
        const std::string sp = path + ".synthetic_constants";
        const json& c = obj.at("synthetic_constants");
        rd.only_keys(c, sp, {"c_slow", "c_fast", "D1", "D2", "D3"});
        SyntheticConstants k{rd.number(c, sp, "c_slow", 1.0), rd.number(c, sp, "c_fast", 1.0),
                             rd.number(c, sp, "D1", 1.0), rd.number(c, sp, "D2", 1.0), rd.number(c, sp, "D3", 1.0)};
        if (!(k.c_slow > 0 && k.c_fast > 0 && k.d1 > 0 && k.d2 >= 0 && k.d3 >= 0))
            rd.fail(sp, "c_slow, c_fast, D1 must be > 0 and D2, D3 >= 0");
        s.synthetic = k;
    }
    return s;
}

ordered_json matrix_json(const Matrix& m) { return m.to_rows(); }

ordered_json schedule_json(const PowerLawSchedule& s) {
    return {{"coeff", s.coeff}, {"exponent", s.exponent}, {"t_offset", s.t_offset}};
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1), std::string("malformed JSON: ") + e.what());
    }
    const Reader rd(text);
    rd.only_keys(root, "",
                 {"name", "output_dir", "seed", "horizon", "stride", "dense_prefix", "divergence_threshold",
                  "ensemble_size", "workers", "theta0", "phi0", "problem", "alpha", "beta", "noise", "lyapunov",
                  "fit_window", "stability"});

    ExperimentConfig cfg;
    RunConfig& run = cfg.run;
    cfg.name = rd.string(root, "", "name", cfg.name);
    if (cfg.name.empty() || cfg.name.find_first_of("/\\") != std::string::npos)
        rd.fail("name", "must be a non-empty file-name-safe string");
    cfg.output_dir = rd.string(root, "", "output_dir", cfg.output_dir);
    run.seed = rd.unsigned_integer(root, "", "seed", run.seed);
    run.horizon = rd.integer(root, "", "horizon", run.horizon);
    if (run.horizon < 0) rd.fail("horizon", "must be >= 0");
    run.stride = rd.integer(root, "", "stride", run.stride);
    if (run.stride < 1) rd.fail("stride", "must be >= 1");
    run.dense_prefix = rd.boolean(root, "", "dense_prefix", run.dense_prefix);
    run.divergence_threshold = rd.number(root, "", "divergence_threshold", run.divergence_threshold);
    if (!(run.divergence_threshold > 0.0)) rd.fail("divergence_threshold", "must be > 0");
    cfg.ensemble_size = rd.integer(root, "", "ensemble_size", cfg.ensemble_size);
    if (cfg.ensemble_size < 1) rd.fail("ensemble_size", "must be >= 1");
    cfg.workers = static_cast<int>(rd.integer(root, "", "workers", cfg.workers));
    if (cfg.workers < 0) rd.fail("workers", "must be >= 0");
    run.theta0 = rd.optional_vector(root, "", "theta0");
    run.phi0 = rd.optional_vector(root, "", "phi0");

    if (root.contains("problem")) run.problem = read_problem(rd, root.at("problem"));
    if (root.contains("alpha")) run.alpha = read_schedule(rd, root.at("alpha"), "alpha", run.alpha);
    if (root.contains("beta")) run.beta = read_schedule(rd, root.at("beta"), "beta", run.beta);
    if (root.contains("noise")) run.noise = read_noise(rd, root.at("noise"));
    if (root.contains("lyapunov")) {
        const json& ly = root.at("lyapunov");
        rd.only_keys(ly, "lyapunov", {"Q_slow", "Q_fast", "d_mix"});
        run.lyapunov.q_slow = rd.optional_matrix(ly, "lyapunov", "Q_slow");
        run.lyapunov.q_fast = rd.optional_matrix(ly, "lyapunov", "Q_fast");
        run.lyapunov.d_mix = rd.number(ly, "lyapunov", "d_mix", 0.5);
        if (!(run.lyapunov.d_mix > 0.0 && run.lyapunov.d_mix < 1.0)) rd.fail("lyapunov.d_mix", "must lie in (0, 1)");
    }
    if (root.contains("fit_window")) {
        const json& fw = root.at("fit_window");
        rd.only_keys(fw, "fit_window", {"t_lo", "t_hi"});
        cfg.fit_t_lo = rd.number(fw, "fit_window", "t_lo", cfg.fit_t_lo);
        if (fw.contains("t_hi") && !fw.at("t_hi").is_null()) cfg.fit_t_hi = rd.number(fw, "fit_window", "t_hi", 0.0);
        if (cfg.fit_t_lo < 1.0 || cfg.fit_hi() <= cfg.fit_t_lo)
            rd.fail("fit_window", "need 1 <= t_lo < t_hi");
    }
    if (root.contains("stability")) cfg.stability = read_stability(rd, root.at("stability"));

    // Problem, Lyapunov and initial-state checks all surface as config errors.
    try {
        prepare(run);
    } catch (const std::exception& e) {
        std::string where = "problem";
        if (std::string(e.what()).find("theta0") != std::string::npos) where = "theta0";
        if (std::string(e.what()).find("phi0") != std::string::npos) where = "phi0";
        if (std::string(e.what()).find("Q must") != std::string::npos) where = "lyapunov";
        rd.fail(where, e.what());
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(0, "cannot read config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

ordered_json config_to_json(const ExperimentConfig& cfg) {
    const RunConfig& run = cfg.run;
    ordered_json j;
    j["name"] = cfg.name;
    j["output_dir"] = cfg.output_dir;
    j["seed"] = run.seed;
    j["horizon"] = run.horizon;
    j["stride"] = run.stride;
    j["dense_prefix"] = run.dense_prefix;
    j["divergence_threshold"] = run.divergence_threshold;
    j["ensemble_size"] = cfg.ensemble_size;
    j["workers"] = cfg.workers;
    j["theta0"] = run.theta0 ? ordered_json(*run.theta0) : ordered_json(nullptr);
    j["phi0"] = run.phi0 ? ordered_json(*run.phi0) : ordered_json(nullptr);

    if (const auto* lin = std::get_if<LinearSPProblem>(&run.problem)) {
        j["problem"] = {{"type", "linear"},
                        {"A11", matrix_json(lin->a11)},
                        {"A12", matrix_json(lin->a12)},
                        {"A21", matrix_json(lin->a21)},
                        {"A22", matrix_json(lin->a22)}};
    } else {
        const auto& nl = std::get<NonlinearSPProblem>(run.problem);
        j["problem"] = {{"type", "nonlinear"},
                        {"A_slow", matrix_json(nl.a_slow)},
                        {"A_fast", matrix_json(nl.a_fast)},
                        {"C", matrix_json(nl.coupling)},
                        {"lambda_amplitude", nl.lambda_amplitude},
                        {"lambda_frequency", nl.lambda_frequency}};
    }
    j["alpha"] = schedule_json(run.alpha);
    j["beta"] = schedule_json(run.beta);
    const auto& n = run.noise;
    j["noise"] = {{"b0_slow", n.b0_slow},       {"b0_fast", n.b0_fast}, {"gamma_slow", n.gamma_slow},
                  {"gamma_fast", n.gamma_fast}, {"m0_slow", n.m0_slow}, {"m0_fast", n.m0_fast},
                  {"nu_slow", n.nu_slow},       {"nu_fast", n.nu_fast}, {"t_offset", n.t_offset}};
    j["lyapunov"] = {
        {"Q_slow", run.lyapunov.q_slow ? matrix_json(*run.lyapunov.q_slow) : ordered_json(nullptr)},
        {"Q_fast", run.lyapunov.q_fast ? matrix_json(*run.lyapunov.q_fast) : ordered_json(nullptr)},
        {"d_mix", run.lyapunov.d_mix}};
    j["fit_window"] = {{"t_lo", cfg.fit_t_lo},
                       {"t_hi", cfg.fit_t_hi ? ordered_json(*cfg.fit_t_hi) : ordered_json(nullptr)}};
    const auto& s = cfg.stability;
    ordered_json synth = nullptr;
    if (s.synthetic)
        synth = {{"c_slow", s.synthetic->c_slow}, {"c_fast", s.synthetic->c_fast}, {"D1", s.synthetic->d1},
                 {"D2", s.synthetic->d2},         {"D3", s.synthetic->d3}};
    j["stability"] = {{"probe_epsilons", s.probe_epsilons},
                      {"rk4_step_ratio", s.rk4_step_ratio},
                      {"rk4_max_time", s.rk4_max_time},
                      {"v_floor", s.v_floor},
                      {"synthetic_constants", synth}};
    return j;
}

}  // namespace ttssa
