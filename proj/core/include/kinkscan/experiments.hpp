#ifndef KINKSCAN_EXPERIMENTS_HPP
#define KINKSCAN_EXPERIMENTS_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "kinkscan/estimator.hpp"

namespace kinkscan {

// Gumbel centering/scaling sequence
//   B_m(x) = sqrt(2 log m) + (x - (log log m)/2 - log(2 sqrt(pi))) / sqrt(2 log m).
// Requires m >= 3.
double gumbel_norming(std::size_t m, double x);

// Deterministic per-replication seed; block separates different n values (or
// studies) within one master seed.
std::uint64_t rep_seed(std::uint64_t master, std::uint64_t block, std::uint64_t rep);

// One-sample Kolmogorov-Smirnov distance of samples to N(0, variance).
double ks_distance_to_normal(std::span<const double> samples, double variance);

struct RatePoint {
    std::size_t n = 0;
    double median_abs_err = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    int misses = 0;
    int reps = 0;
};

struct RateStudyResult {
    std::vector<RatePoint> points;
    std::vector<std::vector<double>> abs_errors; // [n index][rep], censored values included
    std::vector<std::vector<std::uint8_t>> censored;
    double slope = 0.0;
    double intercept = 0.0;
    double target_slope = 0.0;
    int reps = 0;
    std::uint64_t master_seed = 0;
};

// Simulate -> estimate -> record |theta_hat - theta| of the estimate nearest
// the true kink; misses are censored at the design-support half-width. The
// log-log slope of the medians is fitted by least squares. Errors out if any
// n has a miss rate above 50%.
RateStudyResult run_rate_study(const Scenario& scenario, std::span<const std::size_t> n_list,
                               int reps, const EstimatorConfig& config,
                               std::uint64_t master_seed);

struct CalibrationResult {
    std::vector<double> sup_scan; // per replication
    std::vector<double> eval_x;
    std::vector<double> empirical_cdf; // P(sup <= B_{m_n}(x))
    std::vector<double> gumbel_cdf;    // exp(-2 exp(-x))
    double false_alarm_rate = 0.0;
    double threshold = 0.0;
    std::size_t m_n = 0;
    double bandwidth = 0.0;
    std::vector<std::string> warnings;
    std::uint64_t master_seed = 0;
    int reps = 0;
    std::size_t n = 0;
};

// Null-scenario scan-statistic calibration against the Gumbel limit, plus the
// frequency of threshold exceedance. Requires a kink-free mu; under
// Assumption A the scale must be constant.
CalibrationResult run_null_calibration(const Scenario& scenario, std::size_t n, int reps,
                                       const EstimatorConfig& config,
                                       std::uint64_t master_seed,
                                       std::span<const double> eval_x);

enum class CltRegime { A1, A2, B1, B2 };

struct CltResult {
    std::vector<double> standardized;
    double ks_distance = 0.0;
    double target_variance = 0.0;
    std::string target_provenance; // "upsilon_sq", "c1sq_upsilon_star_sq", "c1sq_h1_sq"
    std::string note;
    double kappa_true = 0.0;
    double bandwidth = 0.0;
    double t = 0.0;
    std::size_t n = 0;
    int reps = 0;
    std::uint64_t master_seed = 0;
};

// Replicates (kappa_hat - kappa_h)(t) under the regime's norming and measures
// the KS distance to the centred normal law with the regime's variance. The
// statistic uses the exact design CDF, matching the estimator the limit
// theorems are stated for.
CltResult run_clt_study(const Scenario& scenario, double t, std::size_t n, int reps,
                        CltRegime regime, const EstimatorConfig& config,
                        std::uint64_t master_seed);

// First Hermite coefficient scale of the kernel average under a Gaussian
// long-memory design:
//   H1(t) = kappa_h(t) / (s_X^3 sigma_eta phi(z)) *
//           integral of phi((z-u)/s_X) (z-u) phi(u/sigma_eta) du,  z = Phi^-1(t),
// with s_X^2 = 1 - sigma_eta^2 and quadrature over z +- 10.
double hermite_h1(const Scenario& scenario, const EstimatorConfig& config, double t,
                  double quad_tol);

} // namespace kinkscan

#endif
