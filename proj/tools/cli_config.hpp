#ifndef KINKSCAN_CLI_CONFIG_HPP
#define KINKSCAN_CLI_CONFIG_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "kinkscan/estimator.hpp"
#include "kinkscan/experiments.hpp"
#include "kinkscan/scenario.hpp"

namespace kinkscan::cli {

// Flat "section.key = value" text config. '#' starts a comment; keys are
// consumed by the builders below and anything left over is rejected, naming
// the key and its line number.
class ConfigMap {
public:
    static ConfigMap parse(const std::string& text);
    static ConfigMap parse_file(const std::string& path);

    bool has(const std::string& key) const;
    std::string get(const std::string& key, const std::string& fallback);
    std::string require(const std::string& key);
    double get_double(const std::string& key, double fallback);
    long long get_int(const std::string& key, long long fallback);
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback);
    bool get_bool(const std::string& key, bool fallback);
    std::vector<double> get_double_list(const std::string& key, const std::string& fallback);

    // Throws on the first key never consumed by any builder.
    void reject_unconsumed() const;

private:
    struct Entry {
        std::string value;
        int line;
        mutable bool consumed = false;
    };
    std::map<std::string, Entry> entries_;
};

struct SimSection {
    std::size_t n = 4096;
    std::uint64_t seed = 1;
    bool keep_latents = false;
};

enum class McKind { rate, null_cal, clt };

struct McSection {
    std::uint64_t seed = 1;
    int reps = 200;
    std::size_t n = 8192;
    std::vector<std::size_t> n_list;
    double t = 0.5;
    CltRegime regime = CltRegime::A1;
    std::vector<double> eval_x;
    double slope_min = -0.60;
    double slope_max = -0.27;
    double cdf_tol = 0.12;
    double max_false_alarm = 0.10;
    double ks_max = 0.08;
};

Scenario scenario_from_config(ConfigMap& config);
EstimatorConfig estimator_from_config(ConfigMap& config);
SimSection sim_from_config(ConfigMap& config);
McSection mc_from_config(ConfigMap& config, McKind kind);

// Canonical serialisations: every accepted key with its effective value, in a
// fixed order. parse -> serialize -> parse is the identity on effective
// values.
std::string scenario_to_config(const Scenario& scenario);
std::string estimator_to_config(const EstimatorConfig& config);
std::string sim_to_config(const SimSection& sim);
std::string mc_to_config(const McSection& mc, McKind kind);

} // namespace kinkscan::cli

#endif
