#include "kinkscan/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "kinkscan/errors.hpp"

namespace kinkscan {

using nlohmann::json;

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void atomic_write_file(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(errc::io, "cannot open " + tmp.string() + " for writing");
        out << content;
        if (!out) fail(errc::io, "write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) fail(errc::io, "rename to " + path + " failed: " + ec.message());
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(errc::io, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string dataset_to_csv(const Dataset& data) {
    std::string out;
    const bool latents = data.has_latents && data.eps.size() == data.n() &&
                         data.f_of_x.size() == data.n();
    out += latents ? "x,y,eps,F\n" : "x,y\n";
    for (std::size_t i = 0; i < data.n(); ++i) {
        out += format_double(data.x[i]);
        out += ',';
        out += format_double(data.y[i]);
        if (latents) {
            out += ',';
            out += format_double(data.eps[i]);
            out += ',';
            out += format_double(data.f_of_x[i]);
        }
        out += '\n';
    }
    return out;
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_field(const std::string& field, std::size_t row) {
    try {
        std::size_t pos = 0;
        double v = std::stod(field, &pos);
        if (pos != field.size())
            fail(errc::parse, "malformed numeric field at data row " + std::to_string(row));
        return v;
    } catch (const Error&) {
        throw;
    } catch (...) {
        fail(errc::parse, "malformed numeric field at data row " + std::to_string(row));
    }
}

} // namespace

Dataset dataset_from_csv(const std::string& content) {
    std::istringstream in(content);
    std::string line;
    if (!std::getline(in, line)) fail(errc::parse, "empty dataset file");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    bool latents;
    if (line == "x,y")
        latents = false;
    else if (line == "x,y,eps,F")
        latents = true;
    else
        fail(errc::parse, "unrecognized dataset header: expected x,y or x,y,eps,F");

    Dataset data;
    data.has_latents = latents;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split(line, ',');
        const std::size_t expected = latents ? 4u : 2u;
        if (fields.size() != expected)
            fail(errc::parse, "wrong field count at data row " + std::to_string(row - 1));
        data.x.push_back(parse_field(fields[0], row - 1));
        data.y.push_back(parse_field(fields[1], row - 1));
        if (latents) {
            data.eps.push_back(parse_field(fields[2], row - 1));
            data.f_of_x.push_back(parse_field(fields[3], row - 1));
        }
    }
    if (data.x.empty()) fail(errc::parse, "dataset file has no data rows");
    data.finalize();
    return data;
}

void write_dataset_csv(const Dataset& data, const std::string& path) {
    atomic_write_file(path, dataset_to_csv(data));
}

Dataset read_dataset_csv(const std::string& path) { return dataset_from_csv(read_file(path)); }

std::string series_to_csv(const LrdSeries& series) {
    std::string out = "xi\n";
    for (double v : series.values) {
        out += format_double(v);
        out += '\n';
    }
    return out;
}

void write_series_csv(const LrdSeries& series, const std::string& path) {
    atomic_write_file(path, series_to_csv(series));
}

std::string estimates_to_json(const std::vector<KinkEstimate>& estimates,
                              const EstimatorConfig& config, std::size_t n,
                              double threshold) {
    json kinks = json::array();
    for (const auto& e : estimates) {
        kinks.push_back({{"lambda_hat", e.lambda_hat},
                         {"theta_hat", e.theta_hat},
                         {"t_low", e.interval_lo},
                         {"t_high", e.interval_hi},
                         {"max_tstat", e.max_abs_tstat},
                         {"jump_sign", e.jump_sign}});
    }
    json out = {{"kinks", kinks},
                {"threshold", threshold},
                {"bandwidth_detect", config.resolve_bandwidth(BandwidthRole::detect, n)},
                {"bandwidth_zero", config.resolve_bandwidth(BandwidthRole::zero, n)},
                {"f_mode", config.f_mode == FMode::oracle ? "oracle" : "ranks"}};
    return out.dump(2) + "\n";
}

std::string verification_to_json(const KernelVerification& report, int order) {
    json checks = json::array();
    for (const auto& c : report.checks)
        checks.push_back({{"name", c.name},
                          {"value", c.value},
                          {"tolerance", c.tolerance},
                          {"pass", c.pass}});
    json out = {{"kernel_order", order}, {"pass", report.pass}, {"checks", checks}};
    return out.dump(2) + "\n";
}

namespace {

std::string mc_header(std::uint64_t seed, const std::string& config_hash) {
    return "# seed=" + std::to_string(seed) + " config_hash=" + config_hash + "\n";
}

} // namespace

std::string rate_study_to_csv(const RateStudyResult& r, std::span<const std::size_t> n_list,
                              const std::string& config_hash) {
    std::string out = mc_header(r.master_seed, config_hash);
    out += "n,rep,abs_error,censored\n";
    for (std::size_t ni = 0; ni < n_list.size(); ++ni)
        for (std::size_t rep = 0; rep < r.abs_errors[ni].size(); ++rep) {
            out += std::to_string(n_list[ni]);
            out += ',';
            out += std::to_string(rep);
            out += ',';
            out += format_double(r.abs_errors[ni][rep]);
            out += ',';
            out += r.censored[ni][rep] ? '1' : '0';
            out += '\n';
        }
    return out;
}

std::string rate_study_to_json(const RateStudyResult& r, double slope_min, double slope_max,
                               const std::string& config_hash) {
    json points = json::array();
    for (const auto& p : r.points)
        points.push_back({{"n", p.n},
                          {"median_abs_err", p.median_abs_err},
                          {"q1", p.q1},
                          {"q3", p.q3},
                          {"misses", p.misses},
                          {"reps", p.reps}});
    json out = {{"study", "rate"},
                {"seed", r.master_seed},
                {"config_hash", config_hash},
                {"points", points},
                {"slope", r.slope},
                {"intercept", r.intercept},
                {"target_slope", r.target_slope},
                {"slope_band", {slope_min, slope_max}},
                {"pass", r.slope >= slope_min && r.slope <= slope_max}};
    return out.dump(2) + "\n";
}

std::string calibration_to_csv(const CalibrationResult& r, const std::string& config_hash) {
    std::string out = mc_header(r.master_seed, config_hash);
    out += "rep,sup_scan,exceeded\n";
    for (std::size_t rep = 0; rep < r.sup_scan.size(); ++rep) {
        out += std::to_string(rep);
        out += ',';
        out += format_double(r.sup_scan[rep]);
        out += ',';
        out += r.sup_scan[rep] >= r.threshold ? '1' : '0';
        out += '\n';
    }
    return out;
}

std::string calibration_to_json(const CalibrationResult& r, double cdf_tol,
                                double max_false_alarm, const std::string& config_hash) {
    json table = json::array();
    bool cdf_pass = true;
    for (std::size_t i = 0; i < r.eval_x.size(); ++i) {
        const double diff = std::abs(r.empirical_cdf[i] - r.gumbel_cdf[i]);
        cdf_pass = cdf_pass && diff <= cdf_tol;
        table.push_back({{"x", r.eval_x[i]},
                         {"empirical", r.empirical_cdf[i]},
                         {"gumbel", r.gumbel_cdf[i]},
                         {"abs_diff", diff}});
    }
    json out = {{"study", "null"},
                {"seed", r.master_seed},
                {"config_hash", config_hash},
                {"n", r.n},
                {"reps", r.reps},
                {"bandwidth", r.bandwidth},
                {"m_n", r.m_n},
                {"threshold", r.threshold},
                {"calibration", table},
                {"cdf_tolerance", cdf_tol},
                {"cdf_pass", cdf_pass},
                {"false_alarm_rate", r.false_alarm_rate},
                {"max_false_alarm", max_false_alarm},
                {"false_alarm_pass", r.false_alarm_rate <= max_false_alarm},
                {"warnings", r.warnings},
                {"pass", cdf_pass && r.false_alarm_rate <= max_false_alarm}};
    return out.dump(2) + "\n";
}

std::string clt_to_csv(const CltResult& r, const std::string& config_hash) {
    std::string out = mc_header(r.master_seed, config_hash);
    out += "rep,standardized\n";
    for (std::size_t rep = 0; rep < r.standardized.size(); ++rep) {
        out += std::to_string(rep);
        out += ',';
        out += format_double(r.standardized[rep]);
        out += '\n';
    }
    return out;
}

std::string clt_to_json(const CltResult& r, double ks_max, const std::string& config_hash) {
    json out = {{"study", "clt"},
                {"seed", r.master_seed},
                {"config_hash", config_hash},
                {"n", r.n},
                {"reps", r.reps},
                {"t", r.t},
                {"bandwidth", r.bandwidth},
                {"kappa_true", r.kappa_true},
                {"target_variance", r.target_variance},
                {"target_provenance", r.target_provenance},
                {"ks_distance", r.ks_distance},
                {"ks_max", ks_max},
                {"pass", r.ks_distance <= ks_max}};
    if (!r.note.empty()) out["note"] = r.note;
    return out.dump(2) + "\n";
}

std::string profile_to_svg(const KappaProfile& profile) {
    const int width = 800, height = 400, pad = 40;
    if (profile.grid.size() < 2) fail(errc::invalid_argument, "profile too short to plot");
    double lo = profile.kappa[0], hi = profile.kappa[0];
    for (double v : profile.kappa) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi == lo) hi = lo + 1.0;
    const double t0 = profile.grid.front(), t1 = profile.grid.back();

    auto px = [&](double t) {
        return pad + (t - t0) / (t1 - t0) * (width - 2 * pad);
    };
    auto py = [&](double v) {
        return height - pad - (v - lo) / (hi - lo) * (height - 2 * pad);
    };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (lo < 0.0 && hi > 0.0)
        svg << "<line x1=\"" << px(t0) << "\" y1=\"" << py(0.0) << "\" x2=\"" << px(t1)
            << "\" y2=\"" << py(0.0) << "\" stroke=\"#999\" stroke-dasharray=\"4\"/>\n";
    svg << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < profile.grid.size(); ++i)
        svg << px(profile.grid[i]) << "," << py(profile.kappa[i]) << " ";
    svg << "\"/>\n";
    svg << "<text x=\"" << pad << "\" y=\"" << pad / 2
        << "\" font-family=\"monospace\" font-size=\"12\">kappa_hat profile, h="
        << format_double(profile.bandwidth) << ", n=" << profile.n << "</text>\n";
    svg << "</svg>\n";
    return svg.str();
}

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t hash = 1469598103934665603ULL;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

} // namespace kinkscan
