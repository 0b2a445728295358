#include "cli_commands.hpp"

#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cli_config.hpp"
#include "kinkscan/errors.hpp"
#include "kinkscan/io.hpp"

namespace kinkscan::cli {

namespace {

int cmd_kernel(int order, bool verify, double table_step, const std::string& out_path) {
    KinkKernel kernel = KinkKernel::build(order);

    std::cout << "kernel order k = " << order << ", smoothness s = " << kernel.smoothness()
              << "\n";
    std::cout << "normalizer a_k = " << kernel.normalizer().str() << " = "
              << format_double(kernel.normalizer().to_double()) << "\n";
    std::cout << "power,coefficient_exact,coefficient\n";
    const auto& coeff = kernel.coefficients(0);
    for (std::size_t p = 0; p < coeff.size(); ++p) {
        if (coeff[p].is_zero()) continue;
        std::cout << p << "," << coeff[p].str() << "," << format_double(coeff[p].to_double())
                  << "\n";
    }

    if (table_step > 0.0) {
        std::cout << "x,K,K1,K2,K3\n";
        for (double x = -1.0; x <= 1.0 + 1e-12; x += table_step) {
            double xc = std::min(x, 1.0);
            std::cout << format_double(xc);
            for (int d = 0; d <= 3; ++d) std::cout << "," << format_double(kernel.eval(d, xc));
            std::cout << "\n";
        }
    }

    if (verify) {
        KernelVerification report = kernel.verify(1e-12);
        for (const auto& check : report.checks)
            std::cout << (check.pass ? "pass  " : "FAIL  ") << check.name << " = "
                      << format_double(check.value) << "\n";
        std::cout << (report.pass ? "verification passed" : "verification FAILED") << "\n";
        if (!out_path.empty())
            atomic_write_file(out_path, verification_to_json(report, order));
        if (!report.pass) return 1;
    } else if (!out_path.empty()) {
        atomic_write_file(out_path, verification_to_json(kernel.verify(1e-12), order));
    }
    return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& out_path,
                 std::uint64_t seed_override, bool has_seed_override,
                 const std::string& series_out) {
    ConfigMap config = ConfigMap::parse_file(config_path);
    Scenario scenario = scenario_from_config(config);
    SimSection sim = sim_from_config(config);
    config.reject_unconsumed();
    if (has_seed_override) sim.seed = seed_override;

    Dataset data = generate_dataset(scenario, sim.n, sim.seed, sim.keep_latents);
    write_dataset_csv(data, out_path);
    std::cout << "wrote " << data.n() << " rows to " << out_path << "\n";

    if (!series_out.empty()) {
        // The long-memory component of the model: errors under A, design
        // under B. Regenerated from the same substream the dataset used.
        const bool is_a = scenario.design.assumption == DesignAssumption::A;
        auto spec = resolve_truncation(
            is_a ? scenario.design.error_process : scenario.design.design_process, sim.n);
        Rng rng(derive_seed(sim.seed, is_a ? 2 : 1));
        LrdSeries series = simulate_lrd(spec, sim.n, rng);
        series.seed = sim.seed;
        write_series_csv(series, series_out);
        std::cout << "wrote long-memory series to " << series_out << "\n";
    }
    return 0;
}

int cmd_estimate(const std::string& data_path, const std::string& out_path,
                 const std::string& bandwidth, const std::string& bandwidth_zero,
                 const std::string& f_mode, int kernel_order, double threshold_inflation,
                 const std::string& svg_path) {
    Dataset data = read_dataset_csv(data_path);

    EstimatorConfig config;
    config.kernel_order = kernel_order;
    if (bandwidth != "auto") config.bandwidth_detect = std::stod(bandwidth);
    if (bandwidth_zero != "auto") config.bandwidth_zero = std::stod(bandwidth_zero);
    if (f_mode == "ranks")
        config.f_mode = FMode::ranks;
    else if (f_mode == "oracle")
        config.f_mode = FMode::oracle;
    else
        fail(errc::invalid_argument, "--f-mode must be ranks or oracle");
    config.threshold_inflation = threshold_inflation;
    config.validate();

    auto estimates = estimate(data, config);
    KappaProfile profile = detection_profile(data, config);
    atomic_write_file(out_path, estimates_to_json(estimates, config, data.n(),
                                                  profile.threshold));

    if (!svg_path.empty()) {
        // Dense profile for plotting, at the coarse localisation step.
        const double h = config.resolve_bandwidth(BandwidthRole::detect, data.n());
        std::vector<double> grid;
        for (double t = h * 1.05; t < 1.0 - h * 1.05; t += config.coarse_step_factor * h)
            grid.push_back(t);
        atomic_write_file(svg_path, profile_to_svg(kappa_profile(data, config,
                                                                 BandwidthRole::detect, grid)));
    }

    std::cout << estimates.size() << " kink(s) detected; results in " << out_path << "\n";
    return estimates.empty() ? 1 : 0;
}

int cmd_mc(McKind kind, const std::string& config_path, const std::string& out_dir) {
    ConfigMap config = ConfigMap::parse_file(config_path);
    Scenario scenario = scenario_from_config(config);
    EstimatorConfig est = estimator_from_config(config);
    McSection mc = mc_from_config(config, kind);
    config.reject_unconsumed();

    const std::string canonical =
        scenario_to_config(scenario) + estimator_to_config(est) + mc_to_config(mc, kind);
    const std::string hash = fnv1a_hex(canonical);

    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    switch (kind) {
    case McKind::rate: {
        std::cout << "mc rate: " << mc.n_list.size() << " sample sizes x " << mc.reps
                  << " reps, seed " << mc.seed << "\n";
        RateStudyResult r = run_rate_study(scenario, mc.n_list, mc.reps, est, mc.seed);
        atomic_write_file(out_dir + "/rate.csv", rate_study_to_csv(r, mc.n_list, hash));
        atomic_write_file(out_dir + "/rate_summary.json",
                          rate_study_to_json(r, mc.slope_min, mc.slope_max, hash));
        std::cout << "slope " << format_double(r.slope) << " (target "
                  << format_double(r.target_slope) << ", band [" << mc.slope_min << ", "
                  << mc.slope_max << "])\n";
        break;
    }
    case McKind::null_cal: {
        std::cout << "mc null: n = " << mc.n << ", " << mc.reps << " reps, seed " << mc.seed
                  << "\n";
        CalibrationResult r =
            run_null_calibration(scenario, mc.n, mc.reps, est, mc.seed, mc.eval_x);
        atomic_write_file(out_dir + "/null.csv", calibration_to_csv(r, hash));
        atomic_write_file(out_dir + "/null_summary.json",
                          calibration_to_json(r, mc.cdf_tol, mc.max_false_alarm, hash));
        for (std::size_t i = 0; i < r.eval_x.size(); ++i)
            std::cout << "x = " << r.eval_x[i] << ": empirical "
                      << format_double(r.empirical_cdf[i]) << " vs gumbel "
                      << format_double(r.gumbel_cdf[i]) << "\n";
        std::cout << "false alarm rate " << format_double(r.false_alarm_rate) << "\n";
        break;
    }
    case McKind::clt: {
        std::cout << "mc clt: n = " << mc.n << ", " << mc.reps << " reps, regime "
                  << static_cast<int>(mc.regime) << ", seed " << mc.seed << "\n";
        CltResult r = run_clt_study(scenario, mc.t, mc.n, mc.reps, mc.regime, est, mc.seed);
        atomic_write_file(out_dir + "/clt.csv", clt_to_csv(r, hash));
        atomic_write_file(out_dir + "/clt_summary.json", clt_to_json(r, mc.ks_max, hash));
        std::cout << "KS distance " << format_double(r.ks_distance) << " (target variance "
                  << format_double(r.target_variance) << ", " << r.target_provenance << ")\n";
        break;
    }
    }
    return 0;
}

} // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"kink detection and localisation in random-design regression"};
    app.require_subcommand(1);

    // kernel
    int order = 1;
    bool verify = false;
    double table_step = 0.0;
    std::string kernel_out;
    auto* kernel_cmd = app.add_subcommand("kernel", "inspect and verify a detection kernel");
    kernel_cmd->add_option("--order", order, "kernel order k >= 1")->required();
    kernel_cmd->add_flag("--verify", verify, "run boundary and moment checks");
    kernel_cmd->add_option("--table", table_step, "emit (x,K,K1,K2,K3) CSV at this step");
    kernel_cmd->add_option("--out", kernel_out, "write verification report JSON here");

    // simulate
    std::string sim_config, sim_out, series_out;
    std::uint64_t seed_override = 0;
    auto* sim_cmd = app.add_subcommand("simulate", "generate a dataset from a scenario config");
    sim_cmd->add_option("--config", sim_config, "scenario config file")->required();
    sim_cmd->add_option("--out", sim_out, "output dataset CSV")->required();
    auto* seed_opt = sim_cmd->add_option("--seed", seed_override, "override sim.seed");
    sim_cmd->add_option("--series-out", series_out, "also dump the long-memory series CSV");

    // estimate
    std::string est_data, est_out, est_bandwidth = "auto", est_bandwidth_zero = "auto";
    std::string est_fmode = "ranks", est_svg;
    int est_order = 1;
    double est_inflation = 1.0;
    auto* est_cmd = app.add_subcommand("estimate", "detect and localise kinks in a dataset");
    est_cmd->add_option("--data", est_data, "input dataset CSV")->required();
    est_cmd->add_option("--out", est_out, "output result JSON")->required();
    est_cmd->add_option("--bandwidth", est_bandwidth, "detection bandwidth (auto or value)");
    est_cmd->add_option("--bandwidth-zero", est_bandwidth_zero,
                        "zero-crossing bandwidth (auto or value)");
    est_cmd->add_option("--f-mode", est_fmode, "ranks or oracle (oracle needs an F column)");
    est_cmd->add_option("--kernel-order", est_order, "kernel order k");
    est_cmd->add_option("--threshold-inflation", est_inflation, "detection threshold factor");
    est_cmd->add_option("--svg", est_svg, "write a kappa profile plot here");

    // mc
    auto* mc_cmd = app.add_subcommand("mc", "Monte Carlo verification studies");
    mc_cmd->require_subcommand(1);
    std::string mc_config, mc_out_dir;
    auto* rate_cmd = mc_cmd->add_subcommand("rate", "convergence-rate study");
    auto* null_cmd = mc_cmd->add_subcommand("null", "scan-statistic null calibration");
    auto* clt_cmd = mc_cmd->add_subcommand("clt", "central limit theorem study");
    for (auto* sub : {rate_cmd, null_cmd, clt_cmd}) {
        sub->add_option("--config", mc_config, "study config file")->required();
        sub->add_option("--out-dir", mc_out_dir, "output directory")->required();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (kernel_cmd->parsed())
            return cmd_kernel(order, verify, table_step, kernel_out);
        if (sim_cmd->parsed())
            return cmd_simulate(sim_config, sim_out, seed_override, seed_opt->count() > 0,
                                series_out);
        if (est_cmd->parsed())
            return cmd_estimate(est_data, est_out, est_bandwidth, est_bandwidth_zero,
                                est_fmode, est_order, est_inflation, est_svg);
        if (mc_cmd->parsed()) {
            McKind kind = rate_cmd->parsed()
                              ? McKind::rate
                              : (null_cmd->parsed() ? McKind::null_cal : McKind::clt);
            return cmd_mc(kind, mc_config, mc_out_dir);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}

} // namespace kinkscan::cli
