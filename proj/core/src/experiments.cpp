#include "kinkscan/experiments.hpp"

#include <algorithm>
#include <cmath>

#include "kinkscan/errors.hpp"
#include "kinkscan/parallel.hpp"
#include "kinkscan/quadrature.hpp"
#include "kinkscan/special.hpp"

namespace kinkscan {

double gumbel_norming(std::size_t m, double x) {
    if (m < 3) fail(errc::invalid_argument, "gumbel norming needs m >= 3");
    const double lm = std::log(static_cast<double>(m));
    const double s = std::sqrt(2.0 * lm);
    return s + (x - 0.5 * std::log(lm) - std::log(2.0 * std::sqrt(3.14159265358979323846))) / s;
}

std::uint64_t rep_seed(std::uint64_t master, std::uint64_t block, std::uint64_t rep) {
    return derive_seed(derive_seed(master, 0x6b696e6bULL + block), rep + 1);
}

double ks_distance_to_normal(std::span<const double> samples, double variance) {
    if (samples.empty()) fail(errc::invalid_argument, "KS distance of an empty sample");
    if (!(variance > 0.0)) fail(errc::invalid_argument, "target variance must be positive");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double sd = std::sqrt(variance);
    const double n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double cdf = norm_cdf(sorted[i] / sd);
        d = std::max(d, std::abs(cdf - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - cdf));
    }
    return d;
}

namespace {

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double quartile_of(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    const double w = pos - static_cast<double>(lo);
    return (1.0 - w) * v[lo] + w * v[hi];
}

void fit_line(std::span<const double> x, std::span<const double> y, double& slope,
              double& intercept) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    intercept = (sy - slope * sx) / n;
}

} // namespace

RateStudyResult run_rate_study(const Scenario& scenario, std::span<const std::size_t> n_list,
                               int reps, const EstimatorConfig& config,
                               std::uint64_t master_seed) {
    scenario.validate();
    config.validate();
    if (n_list.size() < 4) fail(errc::invalid_argument, "rate study needs >= 4 sample sizes");
    for (std::size_t i = 1; i < n_list.size(); ++i)
        if (!(n_list[i] > n_list[i - 1]))
            fail(errc::invalid_argument, "sample sizes must be increasing");
    if (reps < 100) fail(errc::invalid_argument, "rate study needs >= 100 replications");
    if (scenario.mu.kinks.size() != 1)
        fail(errc::invalid_argument, "rate study needs exactly one kink");

    const double theta = scenario.mu.kinks[0].theta;
    const double censor = support_half_width(scenario);

    RateStudyResult result;
    result.reps = reps;
    result.master_seed = master_seed;
    result.abs_errors.assign(n_list.size(), std::vector<double>(static_cast<std::size_t>(reps)));
    result.censored.assign(n_list.size(),
                           std::vector<std::uint8_t>(static_cast<std::size_t>(reps)));

    for (std::size_t ni = 0; ni < n_list.size(); ++ni) {
        const std::size_t n = n_list[ni];
        auto& errors = result.abs_errors[ni];
        auto& censored = result.censored[ni];
        parallel_for(static_cast<std::size_t>(reps), [&](std::size_t rep) {
            const std::uint64_t seed = rep_seed(master_seed, ni, rep);
            Dataset data = generate_dataset(scenario, n, seed, false);
            bool miss = false;
            double err = censor;
            try {
                auto estimates = estimate(data, config);
                if (estimates.empty()) {
                    miss = true;
                } else {
                    double best = std::abs(estimates[0].theta_hat - theta);
                    for (const auto& e : estimates)
                        best = std::min(best, std::abs(e.theta_hat - theta));
                    err = best;
                }
            } catch (const Error&) {
                miss = true; // failed pipeline counts as a censored miss
            }
            errors[rep] = miss ? censor : err;
            censored[rep] = miss ? 1 : 0;
        });
    }

    std::vector<double> log_n, log_med;
    for (std::size_t ni = 0; ni < n_list.size(); ++ni) {
        RatePoint p;
        p.n = n_list[ni];
        p.reps = reps;
        p.misses = 0;
        for (auto c : result.censored[ni]) p.misses += c;
        if (p.misses * 2 > reps)
            fail(errc::study_invalid,
                 "more than 50% misses at n = " + std::to_string(p.n) +
                     " (" + std::to_string(p.misses) + "/" + std::to_string(reps) + ")");
        p.median_abs_err = median_of(result.abs_errors[ni]);
        p.q1 = quartile_of(result.abs_errors[ni], 0.25);
        p.q3 = quartile_of(result.abs_errors[ni], 0.75);
        result.points.push_back(p);
        log_n.push_back(std::log(static_cast<double>(p.n)));
        log_med.push_back(std::log(p.median_abs_err));
    }
    fit_line(log_n, log_med, result.slope, result.intercept);

    const int s = std::min(scenario.mu.smoothness, scenario.sigma.smoothness);
    const double zero_rate = -static_cast<double>(s) / (2.0 * s + 1.0);
    if (scenario.design.assumption == DesignAssumption::A)
        result.target_slope = zero_rate;
    else
        result.target_slope = std::max(zero_rate, -scenario.design.design_process.alpha / 2.0);
    return result;
}

CalibrationResult run_null_calibration(const Scenario& scenario, std::size_t n, int reps,
                                       const EstimatorConfig& config,
                                       std::uint64_t master_seed,
                                       std::span<const double> eval_x) {
    scenario.validate();
    config.validate();
    if (!scenario.mu.kinks.empty())
        fail(errc::invalid_argument, "calibration requires a kink-free scenario");
    if (scenario.design.assumption == DesignAssumption::A && !scenario.sigma.is_constant())
        fail(errc::unsupported_scenario,
             "under Assumption A the calibration requires a constant scale function");
    if (reps < 1) fail(errc::invalid_argument, "calibration needs reps >= 1");

    CalibrationResult result;
    result.master_seed = master_seed;
    result.reps = reps;
    result.n = n;
    result.eval_x.assign(eval_x.begin(), eval_x.end());

    const double h = config.resolve_bandwidth(BandwidthRole::detect, n);
    result.bandwidth = h;
    result.m_n = static_cast<std::size_t>(std::ceil(1.0 / (2.0 * h)));
    result.threshold =
        config.threshold_inflation * std::sqrt(2.0 * std::abs(std::log(2.0 * h)));

    // Finite-n proxies for the asymptotic bandwidth schedules: both summands
    // should be small at the requested (n, h).
    const double log_h = std::abs(std::log(h));
    const double lil_term = log_h * log_h * log_h / (static_cast<double>(n) * h * h * h);
    const double alpha = scenario.design.assumption == DesignAssumption::A
                             ? scenario.design.error_process.alpha
                             : scenario.design.design_process.alpha;
    const double L = scenario.design.assumption == DesignAssumption::A
                         ? scenario.design.error_process.slowly_varying
                         : scenario.design.design_process.slowly_varying;
    const double dep_term = L * L * log_h * log_h /
                            (std::pow(static_cast<double>(n), alpha) * std::pow(h, 4.0 / 3.0));
    if (lil_term > 1.0)
        result.warnings.push_back("bandwidth schedule proxy |log h|^3/(n h^3) = " +
                                  std::to_string(lil_term) + " > 1");
    if (dep_term > 1.0)
        result.warnings.push_back("bandwidth schedule proxy L^2 |log h|^2/(n^a h^(4/3)) = " +
                                  std::to_string(dep_term) + " > 1");

    result.sup_scan.assign(static_cast<std::size_t>(reps), 0.0);
    parallel_for(static_cast<std::size_t>(reps), [&](std::size_t rep) {
        const std::uint64_t seed = rep_seed(master_seed, 0, rep);
        Dataset data = generate_dataset(scenario, n, seed, config.f_mode == FMode::oracle);
        KappaProfile profile = detection_profile(data, config);
        double sup = 0.0;
        for (double t : profile.t_stat) sup = std::max(sup, std::abs(t));
        result.sup_scan[rep] = sup;
    });

    int alarms = 0;
    for (double sup : result.sup_scan)
        if (sup >= result.threshold) ++alarms;
    result.false_alarm_rate = static_cast<double>(alarms) / static_cast<double>(reps);

    for (double x : result.eval_x) {
        const double b = gumbel_norming(result.m_n, x);
        int below = 0;
        for (double sup : result.sup_scan)
            if (sup <= b) ++below;
        result.empirical_cdf.push_back(static_cast<double>(below) / static_cast<double>(reps));
        result.gumbel_cdf.push_back(std::exp(-2.0 * std::exp(-x)));
    }
    return result;
}

namespace {

double clt_norming(CltRegime regime, const Scenario& scenario, std::size_t n, double h,
                   int s_min) {
    const double dn = static_cast<double>(n);
    switch (regime) {
    case CltRegime::A1:
    case CltRegime::B1:
        return std::sqrt(dn * std::pow(h, 7.0));
    case CltRegime::A2: {
        const auto& p = scenario.design.error_process;
        return std::pow(dn, p.alpha / 2.0) * std::pow(h, 3.0 - s_min) / p.slowly_varying;
    }
    case CltRegime::B2: {
        const auto& p = scenario.design.design_process;
        return std::pow(dn, p.alpha / 2.0) / p.slowly_varying;
    }
    }
    return 0.0;
}

} // namespace

CltResult run_clt_study(const Scenario& scenario, double t, std::size_t n, int reps,
                        CltRegime regime, const EstimatorConfig& config,
                        std::uint64_t master_seed) {
    scenario.validate();
    config.validate();
    if (reps < 2) fail(errc::invalid_argument, "CLT study needs reps >= 2");

    const bool is_a = regime == CltRegime::A1 || regime == CltRegime::A2;
    if (is_a && scenario.design.assumption != DesignAssumption::A)
        fail(errc::regime, "regimes A1/A2 require an Assumption (A) scenario");
    if (!is_a && scenario.design.assumption != DesignAssumption::B)
        fail(errc::regime, "regimes B1/B2 require an Assumption (B) scenario");
    if (regime == CltRegime::A2 && scenario.sigma.is_constant())
        fail(errc::regime,
             "regime A2 with constant scale is degenerate (upsilon_star vanishes)");
    if (regime == CltRegime::B2 &&
        scenario.design.design_process.innovations != Innovations::gaussian)
        fail(errc::regime, "regime B2 requires a Gaussian long-memory design");

    const double h = config.resolve_bandwidth(BandwidthRole::detect, n);
    if (!(t > h && t < 1.0 - h)) fail(errc::boundary, "t must lie in (h, 1-h)");
    const int s_min = std::min(scenario.mu.smoothness, scenario.sigma.smoothness);

    // The limit theorems are stated for the exact-F estimator, so the study
    // always evaluates it with oracle F, at the resolved bandwidth.
    EstimatorConfig oracle_config = config;
    oracle_config.f_mode = FMode::oracle;
    oracle_config.bandwidth_detect = h;

    const KinkKernel& kernel = KinkKernel::build(config.kernel_order);
    const double kappa_true =
        kappa_true_quadrature(scenario, kernel, h, t, config.quad_tol);
    const double norming = clt_norming(regime, scenario, n, h, s_min);

    CltResult result;
    result.master_seed = master_seed;
    result.n = n;
    result.reps = reps;
    result.t = t;
    result.bandwidth = h;
    result.kappa_true = kappa_true;

    result.standardized.assign(static_cast<std::size_t>(reps), 0.0);
    parallel_for(static_cast<std::size_t>(reps), [&](std::size_t rep) {
        const std::uint64_t seed = rep_seed(master_seed, 1, rep);
        Dataset data = generate_dataset(scenario, n, seed, true);
        const double kh = kappa_hat(data, oracle_config, t, BandwidthRole::detect);
        result.standardized[rep] = norming * (kh - kappa_true);
    });

    switch (regime) {
    case CltRegime::A1:
    case CltRegime::B1: {
        const double mu_f = mu_f_eval(scenario, t);
        const double sigma_f = sigma_f_eval(scenario, t);
        result.target_variance =
            (sigma_f * sigma_f + mu_f * mu_f) * kernel.squared_integral(3);
        result.target_provenance = "upsilon_sq";
        break;
    }
    case CltRegime::A2: {
        auto spec = resolve_truncation(scenario.design.error_process, n);
        const auto constants = lrd_constants(spec, config.quad_tol);
        const double sigma_f_s = sigma_f_derivative(scenario, t, s_min);
        double fact = 1.0;
        for (int i = 2; i <= s_min; ++i) fact *= i;
        const double upsilon_star = sigma_f_s / fact * kernel.moment(3, s_min);
        result.target_variance = constants.c1_sq * upsilon_star * upsilon_star;
        result.target_provenance = "c1sq_upsilon_star_sq";
        break;
    }
    case CltRegime::B2: {
        auto spec = resolve_truncation(scenario.design.design_process, n);
        const auto constants = lrd_constants(spec, config.quad_tol);
        Scenario resolved = scenario; // pin H1's sigma_eta to the simulator truncation
        resolved.design.design_process = spec;
        const double h1 = hermite_h1(resolved, oracle_config, t, config.quad_tol);
        result.target_variance = constants.c1_sq * h1 * h1;
        result.target_provenance = "c1sq_h1_sq";
        result.note = "H1 contains kappa_h and is evaluated at the simulated (n, h) pair";
        break;
    }
    }

    result.ks_distance = ks_distance_to_normal(result.standardized, result.target_variance);
    return result;
}

double hermite_h1(const Scenario& scenario, const EstimatorConfig& config, double t,
                  double quad_tol) {
    scenario.validate();
    if (scenario.design.assumption != DesignAssumption::B ||
        scenario.design.design_process.innovations != Innovations::gaussian)
        fail(errc::unsupported_scenario, "H1 requires a Gaussian long-memory design");
    if (config.bandwidth_detect == 0.0)
        fail(errc::invalid_argument,
             "H1 depends on the bandwidth; set an explicit detection bandwidth");
    const double h = config.bandwidth_detect;
    if (!(t > h && t < 1.0 - h)) fail(errc::boundary, "t must lie in (h, 1-h)");

    const KinkKernel& kernel = KinkKernel::build(config.kernel_order);
    const double kappa = kappa_true_quadrature(scenario, kernel, h, t, quad_tol);
    if (kappa == 0.0) return 0.0;

    auto spec = resolve_truncation(scenario.design.design_process, 1 << 14);
    const double sigma_eta = innovation_sd(spec);
    const double s_x = std::sqrt(std::max(0.0, 1.0 - sigma_eta * sigma_eta));
    if (!(s_x > 0.0)) fail(errc::numeric, "degenerate s_X for the requested process");

    const double z = norm_quantile(t);
    auto integrand = [&](double u) {
        return norm_pdf((z - u) / s_x) * (z - u) * norm_pdf(u / sigma_eta);
    };
    // The integrand is a narrow product bump; seed the adaptive rule with
    // breakpoints where each factor carries its mass, or the first probes all
    // land in the tails and the recursion exits on a spurious zero. The
    // prefactor amplifies the integral, so the requested tolerance is spent
    // on the final value.
    std::vector<double> breaks;
    for (double k : {-3.0, -1.0, 0.0, 1.0, 3.0}) {
        breaks.push_back(k * sigma_eta);
        breaks.push_back(z + k * s_x);
    }
    const double prefactor = kappa / (s_x * s_x * s_x * sigma_eta * norm_pdf(z));
    const double u_tol = std::max(quad_tol / std::max(1.0, std::abs(prefactor)), 1e-15);
    const double integral =
        integrate_with_breaks(integrand, z - 10.0, z + 10.0, breaks, u_tol);
    return prefactor * integral;
}

} // namespace kinkscan
