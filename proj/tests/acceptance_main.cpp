// Acceptance suite: one check per release criterion, each printing a single
// PASS/FAIL line with the measured numbers. Run all criteria with
// `kinkscan_acceptance --criterion all`, a single one with `--criterion N`,
// or the non-gating large-bandwidth smoke reports with `--criterion smoke`.

#include <cmath>
#include <cstring>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "cli_commands.hpp"
#include "kinkscan/estimator.hpp"
#include "kinkscan/experiments.hpp"
#include "kinkscan/io.hpp"
#include "kinkscan/kernel.hpp"
#include "kinkscan/parallel.hpp"
#include "kinkscan/rng.hpp"

using namespace kinkscan;

namespace {

int g_failures = 0;

void report(int criterion, const std::string& name, bool pass, const std::string& detail) {
    std::ostringstream line;
    line << "criterion " << (criterion < 10 ? "0" : "") << criterion << " [" << name << "] "
         << (pass ? "PASS" : "FAIL") << ": " << detail;
    std::cout << line.str() << std::endl;
    if (!pass) ++g_failures;
}

Scenario rate_a_scenario() {
    Scenario s;
    s.mu.kinks = {{0.5, 3.0}};
    s.sigma.value = 0.03;
    s.design.assumption = DesignAssumption::A;
    s.design.error_process.alpha = 0.6;
    s.design.error_process.truncation = kAutoTruncation;
    return s;
}

Scenario rate_b_scenario() {
    Scenario s;
    s.mu.kinks = {{0.0, 3.0}}; // lambda = Phi(0) = 1/2
    s.sigma.value = 0.05;
    s.design.assumption = DesignAssumption::B;
    s.design.design_process.alpha = 0.6;
    s.design.design_process.truncation = kAutoTruncation;
    return s;
}

// Rate studies run at a fixed detection bandwidth inside the admissible
// window for every n in the grid, placed so a partition point falls near the
// kink image (the scan only evaluates T_n, and K1 vanishes at both the
// window centre and its edges). Standardisation uses the oracle variance;
// the plug-in window moments absorb the local slope of mu near a kink and
// can mask the signal at the smallest n.
EstimatorConfig rate_config() {
    EstimatorConfig config;
    config.bandwidth_detect = 0.12;
    // Fixed zero bandwidth: its valid band (h_z, 1-h_z) then covers the whole
    // cluster range at every n in the grid, so small-n localisation is not
    // clipped against the band edge. The finer grid keeps the quantisation
    // floor below the sampling error across the whole n grid.
    config.bandwidth_zero = 0.25;
    config.fine_step_exponent = 4;
    config.upsilon_mode = UpsilonMode::oracle;
    return config;
}

// 1. Exactness of the kernel family: boundary values, vanishing moments, the
//    k=1 closed form, and the frozen value of the third moment of K3.
void criterion_01() {
    double worst_residual = 0.0;
    bool pass = true;
    for (int order : {1, 2, 3}) {
        KinkKernel kernel = KinkKernel::build(order);
        for (int d = 1; d <= 3; ++d) {
            worst_residual = std::max({worst_residual, std::abs(kernel.eval(d, -1.0)),
                                       std::abs(kernel.eval(d, 1.0))});
        }
        worst_residual = std::max(worst_residual, std::abs(kernel.eval(1, 0.0)));
        for (int j = 0; j <= 2 * order; ++j) {
            if (!kernel.moment_exact(3, j).is_zero()) pass = false;
            worst_residual = std::max(worst_residual, std::abs(kernel.moment(3, j)));
        }
    }
    pass = pass && worst_residual < 1e-12;

    KinkKernel k1 = KinkKernel::build(1);
    double worst_closed = 0.0;
    for (int i = 0; i < 200; ++i) {
        double x = -1.0 + 2.0 * i / 199.0;
        double closed = 14.765625 / 24.0 * std::pow(1.0 - x * x, 4.0);
        worst_closed = std::max(worst_closed, std::abs(k1.eval(0, x) - closed));
    }
    pass = pass && worst_closed < 1e-12;

    double m3 = k1.moment(3, 3);
    pass = pass && std::abs(m3 + 3.0) < 1e-10;

    std::ostringstream detail;
    detail << "max residual " << worst_residual << ", closed-form gap " << worst_closed
           << ", moment(K3, j=3) = " << m3;
    report(1, "kernel-exactness", pass, detail.str());
}

// 2. Unbiasedness of kappa-hat with the exact design CDF.
void criterion_02() {
    Scenario s;
    s.mu.kinks = {{0.45, 2.0}};
    s.mu.smooth.kind = SmoothKind::sine;
    s.mu.smooth.amplitude = 0.5;
    s.sigma.value = 0.5;
    s.design.assumption = DesignAssumption::A;
    s.design.error_process.alpha = 0.6;
    s.design.error_process.truncation = kAutoTruncation;

    EstimatorConfig config;
    config.bandwidth_detect = 0.1;
    config.f_mode = FMode::oracle;

    const std::size_t n = 2000;
    const double t = 0.5;
    const int reps = 400;
    std::vector<double> values(reps);
    parallel_for(reps, [&](std::size_t rep) {
        Dataset data = generate_dataset(s, n, rep_seed(11213, 0, rep), true);
        values[rep] = kappa_hat(data, config, t);
    });
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= reps;
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= (reps - 1);
    const double se = std::sqrt(var / reps);

    const double kappa_true =
        kappa_true_quadrature(s, KinkKernel::build(1), 0.1, t, 1e-10);
    const double gap = std::abs(mean - kappa_true);
    const bool pass = gap < 3.0 * se;

    std::ostringstream detail;
    detail << "mean kappa_hat " << mean << " vs quadrature " << kappa_true << ", |gap| "
           << gap << " vs 3 SE = " << 3.0 * se;
    report(2, "unbiasedness", pass, detail.str());
}

// 3. Decomposition identity and the two bias routes.
void criterion_03() {
    Scenario s;
    s.mu.kinks = {{0.5, 2.0}};
    s.mu.smooth.kind = SmoothKind::sine;
    s.mu.smooth.amplitude = 0.3;
    s.sigma.value = 0.5;
    s.design.assumption = DesignAssumption::A;
    s.design.error_process.alpha = 0.6;
    s.design.error_process.truncation = kAutoTruncation;

    EstimatorConfig config;
    config.bandwidth_detect = 0.12;
    const double h = 0.12;
    const double identity_tol = 1e-8 / (h * h * h * h);

    double worst_identity = 0.0;
    double worst_routes = 0.0;
    Rng t_rng(515151);
    for (int i = 0; i < 20; ++i) {
        Dataset data = generate_dataset(s, 1024, rep_seed(33, 1, i), true);
        double t = t_rng.uniform(h + 0.02, 1.0 - h - 0.02);
        Decomposition dec = decompose(data, s, config, t);
        worst_identity = std::max(worst_identity, std::abs(dec.residual()));
        worst_routes = std::max(worst_routes, std::abs(dec.bias_term - dec.bias_direct));
    }
    const bool pass = worst_identity < identity_tol && worst_routes < 1e-5;
    std::ostringstream detail;
    detail << "max identity residual " << worst_identity << " (tol " << identity_tol
           << "), max route gap " << worst_routes << " (tol 1e-5)";
    report(3, "decomposition", pass, detail.str());
}

void rate_criterion(int id, const std::string& name, const Scenario& s,
                    const EstimatorConfig& config, double lo, double hi) {
    std::vector<std::size_t> sizes = {1 << 10, 1 << 11, 1 << 12, 1 << 13, 1 << 14};
    RateStudyResult r = run_rate_study(s, sizes, 200, config, 424242);
    const bool pass = r.slope >= lo && r.slope <= hi;
    std::ostringstream detail;
    detail << "slope " << r.slope << " in [" << lo << ", " << hi << "]? target "
           << r.target_slope << "; medians:";
    for (const auto& p : r.points) detail << " " << p.median_abs_err;
    detail << "; misses:";
    for (const auto& p : r.points) detail << " " << p.misses;
    report(id, name, pass, detail.str());
}

// 6. Gumbel calibration of the null scan statistic plus the false-alarm rate
//    of the detection rule at its exact threshold.
void criterion_06() {
    Scenario s;
    s.sigma.value = 1.0;
    s.design.assumption = DesignAssumption::A;
    s.design.error_process.alpha = 0.6;
    s.design.error_process.truncation = kAutoTruncation;

    EstimatorConfig config;
    config.bandwidth_detect = 0.05;
    config.f_mode = FMode::oracle;
    config.upsilon_mode = UpsilonMode::oracle;

    std::vector<double> xs = {-1.0, 0.0, 1.0, 2.0};
    CalibrationResult r = run_null_calibration(s, 8192, 500, config, 20240817, xs);

    double worst_gap = 0.0;
    std::ostringstream detail;
    detail << "m_n " << r.m_n << ";";
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double gap = std::abs(r.empirical_cdf[i] - r.gumbel_cdf[i]);
        worst_gap = std::max(worst_gap, gap);
        detail << " x=" << xs[i] << ": " << r.empirical_cdf[i] << "/" << r.gumbel_cdf[i];
    }
    const bool cdf_pass = worst_gap <= 0.12;
    const bool alarm_pass = r.false_alarm_rate <= 0.10;
    detail << "; max gap " << worst_gap << " (tol 0.12); false alarm " << r.false_alarm_rate
           << " (tol 0.10, threshold " << r.threshold << ")";
    if (!alarm_pass)
        detail << " -- the exceedance rate of the exact threshold sqrt(2|log 2h|) decays "
                  "only like 1/sqrt(pi log m_n), so 0.10 is out of reach at any feasible n; "
                  "see notes";
    report(6, "gumbel-calibration", cdf_pass && alarm_pass, detail.str());
}

// 7. Small-bandwidth central limit theorems under both assumptions.
void criterion_07() {
    EstimatorConfig config;
    config.bandwidth_detect = 0.1;

    Scenario sa;
    sa.sigma.value = 1.0;
    sa.design.assumption = DesignAssumption::A;
    sa.design.error_process.alpha = 0.6;
    sa.design.error_process.truncation = kAutoTruncation;
    CltResult ra = run_clt_study(sa, 0.5, 8192, 1000, CltRegime::A1, config, 5150);

    Scenario sb;
    sb.sigma.value = 1.0;
    sb.design.assumption = DesignAssumption::B;
    sb.design.design_process.alpha = 0.6;
    sb.design.design_process.truncation = kAutoTruncation;
    CltResult rb = run_clt_study(sb, 0.5, 8192, 1000, CltRegime::B1, config, 5151);

    const bool pass = ra.ks_distance <= 0.08 && rb.ks_distance <= 0.08;
    std::ostringstream detail;
    detail << "KS(A1) " << ra.ks_distance << ", KS(B1) " << rb.ks_distance
           << " (tol 0.08 each; target variance " << ra.target_variance << ")";
    report(7, "clt-small-bandwidth", pass, detail.str());
}

// 8. Zero-crossing accuracy in the oracle world.
void criterion_08() {
    Scenario s = rate_a_scenario();
    s.sigma.value = 0.0; // noiseless

    EstimatorConfig config;
    config.f_mode = FMode::oracle;
    config.bandwidth_zero = 0.3;

    const std::size_t n = 4096;
    const double step = config.fine_step(n);
    bool pass = true;
    double worst_lambda = 0.0, worst_theta = 0.0;
    for (int seed = 1; seed <= 10; ++seed) {
        Dataset data = generate_dataset(s, n, rep_seed(808, 0, seed), true);
        auto estimates = estimate(data, config);
        if (estimates.empty()) {
            pass = false;
            break;
        }
        const KinkEstimate* best = &estimates[0];
        for (const auto& e : estimates)
            if (std::abs(e.theta_hat - 0.5) < std::abs(best->theta_hat - 0.5)) best = &e;
        const double lambda_err = std::abs(best->lambda_hat - 0.5);
        // Uniform design: Q(lambda-hat) = lambda-hat.
        const double quantile_gap =
            std::abs(rescale(data, best->lambda_hat) - best->lambda_hat);
        const double theta_err = std::abs(best->theta_hat - 0.5);
        worst_lambda = std::max(worst_lambda, lambda_err);
        worst_theta = std::max(worst_theta, theta_err - quantile_gap);
        if (lambda_err > step || theta_err > quantile_gap + step) pass = false;
    }
    std::ostringstream detail;
    detail << "max |lambda_hat - lambda| " << worst_lambda << " vs fine step " << step
           << "; max excess theta error " << worst_theta;
    report(8, "zero-crossing-oracle", pass, detail.str());
}

// 9. Both kinks of a well-separated pair recovered in at least 90% of runs.
void criterion_09() {
    // W-shaped regression: linear part cancels the tent slopes between the
    // kinks so the level stays near zero around both of them.
    Scenario s;
    s.mu.kinks = {{0.288, 3.0}, {0.832, -3.0}};
    s.mu.smooth.kind = SmoothKind::polynomial;
    s.mu.smooth.coeffs = {1.68, -3.0};
    s.sigma.value = 0.05;
    s.design.assumption = DesignAssumption::A;
    s.design.error_process.alpha = 0.6;
    s.design.error_process.truncation = kAutoTruncation;

    EstimatorConfig config;
    config.bandwidth_detect = 0.08; // separation 0.544 > 6h = 0.48
    config.bandwidth_zero = 0.15;
    config.upsilon_mode = UpsilonMode::oracle;
    const double hz = 0.15;

    const int reps = 100;
    std::vector<int> hits(reps, 0);
    parallel_for(reps, [&](std::size_t rep) {
        Dataset data = generate_dataset(s, 8192, rep_seed(909, 0, rep), false);
        try {
            auto estimates = estimate(data, config);
            double e1 = 1e9, e2 = 1e9;
            for (const auto& e : estimates) {
                e1 = std::min(e1, std::abs(e.theta_hat - 0.288));
                e2 = std::min(e2, std::abs(e.theta_hat - 0.832));
            }
            hits[rep] = (e1 <= hz && e2 <= hz) ? 1 : 0;
        } catch (const Error&) {
            hits[rep] = 0;
        }
    });
    int total = 0;
    for (int h : hits) total += h;
    const double rate = static_cast<double>(total) / reps;
    std::ostringstream detail;
    detail << "both kinks recovered within h_z in " << total << "/" << reps << " runs ("
           << rate << ", need >= 0.90)";
    report(9, "multi-kink", rate >= 0.90, detail.str());
}

// 10. Byte-identical reruns of simulate and mc rate.
void criterion_10() {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "kinkscan_acceptance_c10";
    fs::create_directories(dir);

    const std::string sim_cfg =
        "scenario.kinks = 0.5:3.0\n"
        "scenario.sigma_value = 0.05\n"
        "design.assumption = A\n"
        "design.alpha_eps = 0.6\n"
        "sim.n = 2048\n"
        "sim.seed = 4711\n";
    const std::string rate_cfg =
        "scenario.kinks = 0.5:3.0\n"
        "scenario.sigma_value = 0.02\n"
        "design.assumption = A\n"
        "design.alpha_eps = 0.6\n"
        "estimator.bandwidth_detect = 0.12\n"
        "estimator.upsilon_mode = oracle\n"
        "mc.seed = 31\n"
        "mc.reps = 100\n"
        "mc.n_list = 512,1024,2048,4096\n";
    atomic_write_file((dir / "sim.cfg").string(), sim_cfg);
    atomic_write_file((dir / "rate.cfg").string(), rate_cfg);

    auto run = [&](std::initializer_list<std::string> args) {
        std::vector<const char*> argv;
        argv.push_back("kinkscan");
        std::vector<std::string> hold(args);
        for (auto& a : hold) argv.push_back(a.c_str());
        return cli::run_cli(static_cast<int>(argv.size()), argv.data());
    };

    bool pass = true;
    pass &= run({"simulate", "--config", (dir / "sim.cfg").string(), "--out",
                 (dir / "a.csv").string()}) == 0;
    pass &= run({"simulate", "--config", (dir / "sim.cfg").string(), "--out",
                 (dir / "b.csv").string()}) == 0;
    const bool sim_same =
        read_file((dir / "a.csv").string()) == read_file((dir / "b.csv").string());

    pass &= run({"mc", "rate", "--config", (dir / "rate.cfg").string(), "--out-dir",
                 (dir / "r1").string()}) == 0;
    pass &= run({"mc", "rate", "--config", (dir / "rate.cfg").string(), "--out-dir",
                 (dir / "r2").string()}) == 0;
    const bool rate_same =
        read_file((dir / "r1/rate.csv").string()) == read_file((dir / "r2/rate.csv").string()) &&
        read_file((dir / "r1/rate_summary.json").string()) ==
            read_file((dir / "r2/rate_summary.json").string());

    pass = pass && sim_same && rate_same;
    std::ostringstream detail;
    detail << "simulate byte-identical: " << (sim_same ? "yes" : "NO")
           << "; mc rate byte-identical: " << (rate_same ? "yes" : "NO");
    report(10, "determinism", pass, detail.str());
}

// Non-gating smoke reports for the large-bandwidth limits (A2/B2). Reported,
// never failing: at desk scale these regimes are only marginally reachable.
void smoke_noncentral() {
    EstimatorConfig config;
    config.bandwidth_detect = 0.45;

    Scenario sa;
    sa.sigma.kind = ScaleKind::sine_bounded;
    sa.sigma.base = 1.0;
    sa.sigma.amplitude = 0.5;
    sa.design.assumption = DesignAssumption::A;
    sa.design.error_process.alpha = 0.2;
    sa.design.error_process.truncation = kAutoTruncation;
    CltResult ra = run_clt_study(sa, 0.5, 1 << 14, 400, CltRegime::A2, config, 616);
    std::cout << "smoke A2: KS " << ra.ks_distance << " (informational target <= 0.15), "
              << "target variance " << ra.target_variance << std::endl;

    Scenario sb;
    sb.mu.kinks = {{0.0, 3.0}};
    sb.sigma.value = 0.5;
    sb.design.assumption = DesignAssumption::B;
    sb.design.design_process.alpha = 0.2;
    sb.design.design_process.truncation = kAutoTruncation;
    // t must lie inside (h, 1-h) and away from 1/2, where H1 vanishes by
    // symmetry.
    CltResult rb = run_clt_study(sb, 0.53, 1 << 14, 400, CltRegime::B2, config, 617);
    std::cout << "smoke B2: KS " << rb.ks_distance << " (informational target <= 0.15), "
              << "target variance " << rb.target_variance << "; " << rb.note << std::endl;
    std::cout << "smoke report complete (non-gating)" << std::endl;
}

} // namespace

int main(int argc, char** argv) {
    std::string which = "all";
    for (int i = 1; i + 1 < argc; ++i)
        if (std::strcmp(argv[i], "--criterion") == 0) which = argv[i + 1];

    auto want = [&](int id) { return which == "all" || which == std::to_string(id); };

    try {
        if (want(1)) criterion_01();
        if (want(2)) criterion_02();
        if (want(3)) criterion_03();
        if (want(4)) {
            rate_criterion(4, "rate-assumption-A", rate_a_scenario(), rate_config(), -0.60,
                           -0.27);
        }
        if (want(5)) {
            // Exact-F pipeline: the limit theorems are stated for it, and the
            // rank transform alone already carries the n^(-alpha_x/2) error
            // that would starve detection at the small end of the grid. The
            // quantile rate being tested still enters through Q_n. The zero
            // bandwidth is pinned so its valid band covers the whole cluster
            // range even at the smallest n.
            EstimatorConfig config_b = rate_config();
            config_b.f_mode = FMode::oracle;
            config_b.bandwidth_zero = 0.25;
            rate_criterion(5, "rate-assumption-B", rate_b_scenario(), config_b, -0.45, -0.15);
        }
        if (want(6)) criterion_06();
        if (want(7)) criterion_07();
        if (want(8)) criterion_08();
        if (want(9)) criterion_09();
        if (want(10)) criterion_10();
        if (which == "all" || which == "smoke") smoke_noncentral();
    } catch (const std::exception& e) {
        std::cout << "acceptance run aborted: " << e.what() << std::endl;
        return 99;
    }
    return g_failures;
}
