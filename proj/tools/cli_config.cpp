#include "cli_config.hpp"

#include <algorithm>
#include <sstream>

#include "kinkscan/errors.hpp"
#include "kinkscan/io.hpp"

namespace kinkscan::cli {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == sep) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    cur = trim(cur);
    if (!cur.empty() || !out.empty()) out.push_back(cur);
    return out;
}

} // namespace

ConfigMap ConfigMap::parse(const std::string& text) {
    ConfigMap config;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string stripped = line;
        std::size_t hash = stripped.find('#');
        if (hash != std::string::npos) stripped = stripped.substr(0, hash);
        stripped = trim(stripped);
        if (stripped.empty()) continue;
        std::size_t eq = stripped.find('=');
        if (eq == std::string::npos)
            fail(errc::parse, "config line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(stripped.substr(0, eq));
        std::string value = trim(stripped.substr(eq + 1));
        if (key.empty())
            fail(errc::parse, "config line " + std::to_string(lineno) + ": empty key");
        if (config.entries_.count(key))
            fail(errc::parse, "config line " + std::to_string(lineno) + ": duplicate key '" +
                                  key + "'");
        config.entries_[key] = {value, lineno, false};
    }
    return config;
}

ConfigMap ConfigMap::parse_file(const std::string& path) {
    return parse(read_file(path));
}

bool ConfigMap::has(const std::string& key) const { return entries_.count(key) != 0; }

std::string ConfigMap::get(const std::string& key, const std::string& fallback) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    it->second.consumed = true;
    return it->second.value;
}

std::string ConfigMap::require(const std::string& key) {
    auto it = entries_.find(key);
    if (it == entries_.end())
        fail(errc::parse, "missing required config key '" + key + "'");
    it->second.consumed = true;
    return it->second.value;
}

double ConfigMap::get_double(const std::string& key, double fallback) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    it->second.consumed = true;
    try {
        return std::stod(it->second.value);
    } catch (...) {
        fail(errc::parse, "config line " + std::to_string(it->second.line) + ": key '" + key +
                              "' is not a number");
    }
}

long long ConfigMap::get_int(const std::string& key, long long fallback) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    it->second.consumed = true;
    try {
        return std::stoll(it->second.value);
    } catch (...) {
        fail(errc::parse, "config line " + std::to_string(it->second.line) + ": key '" + key +
                              "' is not an integer");
    }
}

std::uint64_t ConfigMap::get_u64(const std::string& key, std::uint64_t fallback) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    it->second.consumed = true;
    try {
        return std::stoull(it->second.value);
    } catch (...) {
        fail(errc::parse, "config line " + std::to_string(it->second.line) + ": key '" + key +
                              "' is not an unsigned integer");
    }
}

bool ConfigMap::get_bool(const std::string& key, bool fallback) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    it->second.consumed = true;
    const std::string& v = it->second.value;
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    fail(errc::parse, "config line " + std::to_string(it->second.line) + ": key '" + key +
                          "' must be true or false");
}

std::vector<double> ConfigMap::get_double_list(const std::string& key,
                                               const std::string& fallback) {
    std::string raw = get(key, fallback);
    std::vector<double> out;
    for (const auto& field : split_list(raw, ',')) {
        if (field.empty()) continue;
        try {
            out.push_back(std::stod(field));
        } catch (...) {
            fail(errc::parse, "key '" + key + "': malformed list entry '" + field + "'");
        }
    }
    return out;
}

void ConfigMap::reject_unconsumed() const {
    const Entry* worst = nullptr;
    std::string worst_key;
    for (const auto& [key, entry] : entries_) {
        if (entry.consumed) continue;
        if (worst == nullptr || entry.line < worst->line) {
            worst = &entry;
            worst_key = key;
        }
    }
    if (worst != nullptr)
        fail(errc::parse, "unknown config key '" + worst_key + "' (line " +
                              std::to_string(worst->line) + ")");
}

namespace {

LinearProcessSpec lrd_from_config(ConfigMap& config, double alpha, double mean) {
    LinearProcessSpec spec;
    spec.alpha = alpha;
    spec.mean = mean;
    spec.slowly_varying = config.get_double("design.slowly_varying", 1.0);
    std::string trunc = config.get("design.truncation", "auto");
    spec.truncation = trunc == "auto" ? kAutoTruncation : std::stoll(trunc);
    std::string innov = config.get("design.innovations", "gaussian");
    if (innov == "gaussian")
        spec.innovations = Innovations::gaussian;
    else if (innov == "uniform")
        spec.innovations = Innovations::uniform;
    else
        fail(errc::parse, "design.innovations must be gaussian or uniform");
    return spec;
}

} // namespace

Scenario scenario_from_config(ConfigMap& config) {
    Scenario scenario;

    std::string kinks = config.get("scenario.kinks", "");
    for (const auto& item : split_list(kinks, ';')) {
        if (item.empty()) continue;
        auto parts = split_list(item, ':');
        if (parts.size() != 2)
            fail(errc::parse, "scenario.kinks entries must be theta:jump, got '" + item + "'");
        scenario.mu.kinks.push_back({std::stod(parts[0]), std::stod(parts[1])});
    }

    std::string smooth = config.get("scenario.smooth", "zero");
    if (smooth == "zero") {
        scenario.mu.smooth.kind = SmoothKind::zero;
    } else if (smooth == "sine") {
        scenario.mu.smooth.kind = SmoothKind::sine;
    } else if (smooth == "polynomial") {
        scenario.mu.smooth.kind = SmoothKind::polynomial;
    } else {
        fail(errc::parse, "scenario.smooth must be zero, sine or polynomial");
    }
    scenario.mu.smooth.amplitude = config.get_double("scenario.smooth_amplitude", 1.0);
    scenario.mu.smooth.frequency = config.get_double("scenario.smooth_frequency", 1.0);
    scenario.mu.smooth.coeffs = config.get_double_list("scenario.smooth_coeffs", "");
    scenario.mu.smoothness = static_cast<int>(config.get_int("scenario.mu_smoothness", 3));

    std::string sigma = config.get("scenario.sigma", "constant");
    if (sigma == "constant") {
        scenario.sigma.kind = ScaleKind::constant;
    } else if (sigma == "sine_bounded") {
        scenario.sigma.kind = ScaleKind::sine_bounded;
    } else {
        fail(errc::parse, "scenario.sigma must be constant or sine_bounded");
    }
    scenario.sigma.value = config.get_double("scenario.sigma_value", 1.0);
    scenario.sigma.base = config.get_double("scenario.sigma_base", 1.0);
    scenario.sigma.amplitude = config.get_double("scenario.sigma_amplitude", 0.0);
    scenario.sigma.frequency = config.get_double("scenario.sigma_frequency", 1.0);
    scenario.sigma.smoothness = static_cast<int>(config.get_int("scenario.sigma_smoothness", 3));

    std::string assumption = config.require("design.assumption");
    if (assumption == "A") {
        scenario.design.assumption = DesignAssumption::A;
        std::string law = config.get("design.law", "uniform01");
        if (law == "uniform01")
            scenario.design.law = IidLaw::uniform01;
        else if (law == "scaled_beta")
            scenario.design.law = IidLaw::scaled_beta;
        else
            fail(errc::parse, "design.law must be uniform01 or scaled_beta");
        scenario.design.beta_p = config.get_double("design.beta_p", 2.0);
        scenario.design.beta_q = config.get_double("design.beta_q", 2.0);
        scenario.design.error_process =
            lrd_from_config(config, config.get_double("design.alpha_eps", 0.8), 0.0);
    } else if (assumption == "B") {
        scenario.design.assumption = DesignAssumption::B;
        scenario.design.design_process =
            lrd_from_config(config, config.get_double("design.alpha_x", 0.8),
                            config.get_double("design.mean_x", 0.0));
        std::string law = config.get("design.error_law", "gaussian");
        if (law == "gaussian")
            scenario.design.error_law = ErrorLaw::gaussian;
        else if (law == "uniform")
            scenario.design.error_law = ErrorLaw::uniform;
        else
            fail(errc::parse, "design.error_law must be gaussian or uniform");
        scenario.design.error_sd = config.get_double("design.error_sd", 1.0);
    } else {
        fail(errc::parse, "design.assumption must be A or B");
    }

    scenario.validate();
    return scenario;
}

EstimatorConfig estimator_from_config(ConfigMap& config) {
    EstimatorConfig est;
    est.kernel_order = static_cast<int>(config.get_int("estimator.kernel_order", 1));
    std::string hd = config.get("estimator.bandwidth_detect", "auto");
    est.bandwidth_detect = hd == "auto" ? 0.0 : std::stod(hd);
    std::string hz = config.get("estimator.bandwidth_zero", "auto");
    est.bandwidth_zero = hz == "auto" ? 0.0 : std::stod(hz);
    std::string fmode = config.get("estimator.f_mode", "ranks");
    if (fmode == "ranks")
        est.f_mode = FMode::ranks;
    else if (fmode == "oracle")
        est.f_mode = FMode::oracle;
    else
        fail(errc::parse, "estimator.f_mode must be ranks or oracle");
    std::string umode = config.get("estimator.upsilon_mode", "plugin");
    if (umode == "plugin")
        est.upsilon_mode = UpsilonMode::plugin;
    else if (umode == "oracle")
        est.upsilon_mode = UpsilonMode::oracle;
    else
        fail(errc::parse, "estimator.upsilon_mode must be plugin or oracle");
    est.coarse_step_factor = config.get_double("estimator.coarse_step_factor", 0.1);
    std::string fine = config.get("estimator.fine_step_exponent", "auto");
    est.fine_step_exponent = fine == "auto" ? 0 : static_cast<int>(std::stoll(fine));
    est.threshold_inflation = config.get_double("estimator.threshold_inflation", 1.0);
    est.quad_tol = config.get_double("estimator.quad_tol", 1e-10);
    est.validate();
    return est;
}

SimSection sim_from_config(ConfigMap& config) {
    SimSection sim;
    sim.n = static_cast<std::size_t>(config.get_int("sim.n", 4096));
    sim.seed = config.get_u64("sim.seed", 1);
    sim.keep_latents = config.get_bool("sim.keep_latents", false);
    return sim;
}

McSection mc_from_config(ConfigMap& config, McKind kind) {
    McSection mc;
    mc.seed = config.get_u64("mc.seed", 1);
    mc.reps = static_cast<int>(config.get_int("mc.reps", kind == McKind::rate ? 200 : 500));
    switch (kind) {
    case McKind::rate: {
        auto raw = config.get_double_list("mc.n_list", "1024,2048,4096,8192,16384");
        for (double v : raw) mc.n_list.push_back(static_cast<std::size_t>(v));
        mc.slope_min = config.get_double("mc.slope_min", -0.60);
        mc.slope_max = config.get_double("mc.slope_max", -0.27);
        break;
    }
    case McKind::null_cal:
        mc.n = static_cast<std::size_t>(config.get_int("mc.n", 8192));
        mc.eval_x = config.get_double_list("mc.eval_x", "-1,0,1,2");
        mc.cdf_tol = config.get_double("mc.cdf_tol", 0.12);
        mc.max_false_alarm = config.get_double("mc.max_false_alarm", 0.10);
        break;
    case McKind::clt: {
        mc.n = static_cast<std::size_t>(config.get_int("mc.n", 8192));
        mc.t = config.get_double("mc.t", 0.5);
        std::string regime = config.get("mc.regime", "A1");
        if (regime == "A1")
            mc.regime = CltRegime::A1;
        else if (regime == "A2")
            mc.regime = CltRegime::A2;
        else if (regime == "B1")
            mc.regime = CltRegime::B1;
        else if (regime == "B2")
            mc.regime = CltRegime::B2;
        else
            fail(errc::parse, "mc.regime must be A1, A2, B1 or B2");
        mc.ks_max = config.get_double("mc.ks_max", 0.08);
        break;
    }
    }
    return mc;
}

namespace {

std::string join_doubles(const std::vector<double>& values, char sep) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += sep;
        out += format_double(values[i]);
    }
    return out;
}

} // namespace

std::string scenario_to_config(const Scenario& s) {
    std::string out;
    std::string kinks;
    for (std::size_t i = 0; i < s.mu.kinks.size(); ++i) {
        if (i) kinks += ';';
        kinks += format_double(s.mu.kinks[i].theta) + ":" + format_double(s.mu.kinks[i].jump);
    }
    out += "scenario.kinks = " + kinks + "\n";
    const char* smooth = s.mu.smooth.kind == SmoothKind::zero
                             ? "zero"
                             : (s.mu.smooth.kind == SmoothKind::sine ? "sine" : "polynomial");
    out += std::string("scenario.smooth = ") + smooth + "\n";
    out += "scenario.smooth_amplitude = " + format_double(s.mu.smooth.amplitude) + "\n";
    out += "scenario.smooth_frequency = " + format_double(s.mu.smooth.frequency) + "\n";
    out += "scenario.smooth_coeffs = " + join_doubles(s.mu.smooth.coeffs, ',') + "\n";
    out += "scenario.mu_smoothness = " + std::to_string(s.mu.smoothness) + "\n";
    out += std::string("scenario.sigma = ") +
           (s.sigma.kind == ScaleKind::constant ? "constant" : "sine_bounded") + "\n";
    out += "scenario.sigma_value = " + format_double(s.sigma.value) + "\n";
    out += "scenario.sigma_base = " + format_double(s.sigma.base) + "\n";
    out += "scenario.sigma_amplitude = " + format_double(s.sigma.amplitude) + "\n";
    out += "scenario.sigma_frequency = " + format_double(s.sigma.frequency) + "\n";
    out += "scenario.sigma_smoothness = " + std::to_string(s.sigma.smoothness) + "\n";

    const bool is_a = s.design.assumption == DesignAssumption::A;
    out += std::string("design.assumption = ") + (is_a ? "A" : "B") + "\n";
    const LinearProcessSpec& p = is_a ? s.design.error_process : s.design.design_process;
    if (is_a) {
        out += std::string("design.law = ") +
               (s.design.law == IidLaw::uniform01 ? "uniform01" : "scaled_beta") + "\n";
        out += "design.beta_p = " + format_double(s.design.beta_p) + "\n";
        out += "design.beta_q = " + format_double(s.design.beta_q) + "\n";
        out += "design.alpha_eps = " + format_double(p.alpha) + "\n";
    } else {
        out += "design.alpha_x = " + format_double(p.alpha) + "\n";
        out += "design.mean_x = " + format_double(p.mean) + "\n";
        out += std::string("design.error_law = ") +
               (s.design.error_law == ErrorLaw::gaussian ? "gaussian" : "uniform") + "\n";
        out += "design.error_sd = " + format_double(s.design.error_sd) + "\n";
    }
    out += "design.slowly_varying = " + format_double(p.slowly_varying) + "\n";
    out += std::string("design.truncation = ") +
           (p.truncation == kAutoTruncation ? "auto" : std::to_string(p.truncation)) + "\n";
    out += std::string("design.innovations = ") +
           (p.innovations == Innovations::gaussian ? "gaussian" : "uniform") + "\n";
    return out;
}

std::string estimator_to_config(const EstimatorConfig& e) {
    std::string out;
    out += "estimator.kernel_order = " + std::to_string(e.kernel_order) + "\n";
    out += std::string("estimator.bandwidth_detect = ") +
           (e.bandwidth_detect == 0.0 ? "auto" : format_double(e.bandwidth_detect)) + "\n";
    out += std::string("estimator.bandwidth_zero = ") +
           (e.bandwidth_zero == 0.0 ? "auto" : format_double(e.bandwidth_zero)) + "\n";
    out += std::string("estimator.f_mode = ") +
           (e.f_mode == FMode::ranks ? "ranks" : "oracle") + "\n";
    out += std::string("estimator.upsilon_mode = ") +
           (e.upsilon_mode == UpsilonMode::plugin ? "plugin" : "oracle") + "\n";
    out += "estimator.coarse_step_factor = " + format_double(e.coarse_step_factor) + "\n";
    out += std::string("estimator.fine_step_exponent = ") +
           (e.fine_step_exponent == 0 ? "auto" : std::to_string(e.fine_step_exponent)) + "\n";
    out += "estimator.threshold_inflation = " + format_double(e.threshold_inflation) + "\n";
    out += "estimator.quad_tol = " + format_double(e.quad_tol) + "\n";
    return out;
}

std::string sim_to_config(const SimSection& sim) {
    std::string out;
    out += "sim.n = " + std::to_string(sim.n) + "\n";
    out += "sim.seed = " + std::to_string(sim.seed) + "\n";
    out += std::string("sim.keep_latents = ") + (sim.keep_latents ? "true" : "false") + "\n";
    return out;
}

std::string mc_to_config(const McSection& mc, McKind kind) {
    std::string out;
    out += "mc.seed = " + std::to_string(mc.seed) + "\n";
    out += "mc.reps = " + std::to_string(mc.reps) + "\n";
    switch (kind) {
    case McKind::rate: {
        std::string list;
        for (std::size_t i = 0; i < mc.n_list.size(); ++i) {
            if (i) list += ',';
            list += std::to_string(mc.n_list[i]);
        }
        out += "mc.n_list = " + list + "\n";
        out += "mc.slope_min = " + format_double(mc.slope_min) + "\n";
        out += "mc.slope_max = " + format_double(mc.slope_max) + "\n";
        break;
    }
    case McKind::null_cal:
        out += "mc.n = " + std::to_string(mc.n) + "\n";
        out += "mc.eval_x = " + join_doubles(mc.eval_x, ',') + "\n";
        out += "mc.cdf_tol = " + format_double(mc.cdf_tol) + "\n";
        out += "mc.max_false_alarm = " + format_double(mc.max_false_alarm) + "\n";
        break;
    case McKind::clt: {
        out += "mc.n = " + std::to_string(mc.n) + "\n";
        out += "mc.t = " + format_double(mc.t) + "\n";
        const char* regime = mc.regime == CltRegime::A1
                                 ? "A1"
                                 : (mc.regime == CltRegime::A2
                                        ? "A2"
                                        : (mc.regime == CltRegime::B1 ? "B1" : "B2"));
        out += std::string("mc.regime = ") + regime + "\n";
        out += "mc.ks_max = " + format_double(mc.ks_max) + "\n";
        break;
    }
    }
    return out;
}

} // namespace kinkscan::cli
