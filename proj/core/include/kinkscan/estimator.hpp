#ifndef KINKSCAN_ESTIMATOR_HPP
#define KINKSCAN_ESTIMATOR_HPP

#include <span>
#include <vector>

#include "kinkscan/kernel.hpp"
#include "kinkscan/scenario.hpp"

namespace kinkscan {

enum class FMode { oracle, ranks };
enum class UpsilonMode { oracle, plugin };
enum class BandwidthRole { detect, zero };

// Default bandwidths: detection at the midpoint exponent n^(-5/21) of the
// admissible window (n^(-1/3), n^(-1/7)); zero-crossing at n^(-1/(2s+1)),
// the smallest bandwidth the separation bound allows. Both capped below 1/2.
double default_bandwidth(std::size_t n, int s, BandwidthRole role);

struct EstimatorConfig {
    int kernel_order = 1;          // k; smoothness s = 2k+1
    double bandwidth_detect = 0.0; // 0 = auto from n
    double bandwidth_zero = 0.0;   // 0 = auto from n
    FMode f_mode = FMode::ranks;
    UpsilonMode upsilon_mode = UpsilonMode::plugin;
    double coarse_step_factor = 0.1; // localisation grid step, fraction of h
    int fine_step_exponent = 0;      // 0 = auto (s); fine step max(h_z^e, 1e-6)
    double threshold_inflation = 1.0;
    double quad_tol = 1e-10;

    int smoothness() const { return 2 * kernel_order + 1; }
    double resolve_bandwidth(BandwidthRole role, std::size_t n) const;
    double fine_step(std::size_t n) const;
    void validate() const;
};

// kappa-hat and its standardisation evaluated over a grid. For detection the
// grid is the partition {2hj} intersected with (h, 1-h).
struct KappaProfile {
    std::vector<double> grid;
    std::vector<double> kappa;
    std::vector<double> upsilon;
    std::vector<double> t_stat; // sqrt(n h^7) kappa / upsilon
    double bandwidth = 0.0;
    std::size_t n = 0;
    std::size_t m_n = 0;                      // ceil(1/(2h))
    std::vector<std::size_t> partition_index; // j with grid point 2hj, aligned with grid
    double threshold = 0.0;                   // inflation * sqrt(2 |log 2h|)
    int empty_window_count = 0;
};

struct Cluster {
    std::size_t first_j = 0; // partition indices of the exceedance run
    std::size_t last_j = 0;
    double t_lo = 0.0; // widened by 2h and clipped to (h, 1-h)
    double t_hi = 0.0;
    double max_abs_tstat = 0.0;
};

struct KinkEstimate {
    double cluster_lo = 0.0;
    double cluster_hi = 0.0;
    double t_hat_min = 0.0; // argmin of kappa-hat on the coarse grid
    double t_hat_max = 0.0; // argmax
    double interval_lo = 0.0;
    double interval_hi = 0.0;
    double lambda_hat = 0.0;
    double theta_hat = 0.0;
    double max_abs_tstat = 0.0;
    int jump_sign = 0;
};

struct Decomposition {
    double kappa_hat = 0.0;
    double kappa_true = 0.0; // quadrature
    double bias_term = 0.0;  // centred mu(X_i)K3 sum, centring by quadrature
    double noise_term = 0.0; // scale-weighted error sum
    double bias_direct = 0.0; // kappa_hat - kappa_true - noise_term
    double residual() const { return kappa_hat - (kappa_true + bias_term + noise_term); }
};

// Point estimate of the smoothed third derivative of mu_F,
// (n h^4)^-1 sum Y_i K3((F~(X_i) - t)/h). F~ is the oracle F (latents or
// scenario) or the rank transform (i - 0.5)/n.
double kappa_hat(const Dataset& data, const EstimatorConfig& config, double t,
                 BandwidthRole role = BandwidthRole::detect);

KappaProfile kappa_profile(const Dataset& data, const EstimatorConfig& config,
                           BandwidthRole role, std::span<const double> grid);

// Profile on the detection partition, with m_n, threshold and indices filled.
KappaProfile detection_profile(const Dataset& data, const EstimatorConfig& config);

double upsilon(const Dataset& data, const EstimatorConfig& config, double t,
               BandwidthRole role = BandwidthRole::detect);

// Maximal runs of consecutive partition points with |T| >= threshold, each
// widened by 2h and clipped to (h, 1-h).
std::vector<Cluster> detect_kinks(const KappaProfile& profile);

std::vector<Cluster> merge_overlapping(std::vector<Cluster> clusters);

// Extrema of kappa-hat on the coarse grid inside the cluster range. Returns
// (argmin, argmax); ties break toward smaller t.
std::pair<double, double> localize(const Dataset& data, const EstimatorConfig& config,
                                   const Cluster& cluster);

// Fine-grid argmin of |kappa-hat| at the zero-crossing bandwidth inside
// [lo, hi] clipped to (h_z, 1-h_z).
double zero_crossing(const Dataset& data, const EstimatorConfig& config, double lo,
                     double hi);

// theta-hat = Q_n(lambda-hat).
double rescale(const Dataset& data, double lambda_hat);

// Full pipeline: detection profile -> clusters -> merge -> per cluster
// localisation, zero-crossing, rescale. Empty result = no kink detected.
std::vector<KinkEstimate> estimate(const Dataset& data, const EstimatorConfig& config);

// Oracle decomposition kappa_hat = kappa_true + bias + noise; needs latents.
Decomposition decompose(const Dataset& data, const Scenario& scenario,
                        const EstimatorConfig& config, double t,
                        BandwidthRole role = BandwidthRole::detect);

// kappa_h(t, mu_F) via the kernel quadrature oracle for this scenario; kink
// jumps are mapped to rank scale (jump / f(theta)).
double kappa_true_quadrature(const Scenario& scenario, const KinkKernel& kernel, double h,
                             double t, double quad_tol);

namespace detail {
// Data sorted by the transformed design variable, shared by the pipeline.
struct SortedView {
    std::vector<double> f; // ascending
    std::vector<double> y;
    static SortedView build(const Dataset& data, FMode mode);
};
double kappa_from_view(const SortedView& view, const KinkKernel& kernel, double h, double t);
} // namespace detail

} // namespace kinkscan

#endif
