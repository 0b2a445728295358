#ifndef KINKSCAN_LRD_HPP
#define KINKSCAN_LRD_HPP

#include <cstdint>
#include <vector>

#include "kinkscan/rng.hpp"

namespace kinkscan {

enum class Innovations { gaussian, uniform };

// Parameters of the causal long-memory moving average
//   xi_i = mean + sum_{j=0}^{M} c_j eta_{i-j},
// c_0 = 1, c_j = j^{-(1+alpha)/2} * L for j >= 1, with i.i.d. innovations of
// variance (sum c_j^2)^{-1} so that Var xi = 1 under the truncation.
// alpha = 1 is the short-range case.
struct LinearProcessSpec {
    double alpha = 1.0;
    double slowly_varying = 1.0; // constant L
    double mean = 0.0;
    // Number of retained MA coefficients beyond c_0; kAutoTruncation resolves
    // to max(n, 2^14) at simulation-request time (scenario layer).
    long long truncation = 1LL << 14;
    Innovations innovations = Innovations::gaussian;

    void validate() const;
};

inline constexpr long long kAutoTruncation = -1;

// Copy of spec with auto truncation resolved against a sample size.
LinearProcessSpec resolve_truncation(const LinearProcessSpec& spec, std::size_t n);

struct LrdSeries {
    std::vector<double> values;
    LinearProcessSpec spec;
    std::uint64_t seed = 0;
    std::vector<double> innovations; // retained only on request
};

struct LrdConstants {
    double c0_sq = 0.0;
    double c1_sq = 0.0;
    double c2_sq = 0.0; // valid iff has_c2
    double c3_sq = 0.0; // valid iff has_c3
    double s_x = 0.0;   // sqrt(1 - sigma_eta^2)
    double sigma_eta = 0.0;
    bool has_c2 = false;
    bool has_c3 = false;
};

std::vector<double> ma_coefficients(const LinearProcessSpec& spec);
double innovation_sd(const LinearProcessSpec& spec);

// Generates truncation+n innovations (full burn-in before the first output)
// and emits n values. Deterministic given (spec, seed via rng state, n).
LrdSeries simulate_lrd(const LinearProcessSpec& spec, std::size_t n, Rng& rng,
                       bool keep_innovations = false);

// Second-order constants of the process. Requires alpha in (0,1); the
// alpha = 1/2 boundary case for the squared-sum variance is not supported.
LrdConstants lrd_constants(const LinearProcessSpec& spec, double quad_tol);

// Regime-checked accessors; throw errc::regime outside their validity range.
double lrd_c2_sq(const LinearProcessSpec& spec, double quad_tol);
double lrd_c3_sq(const LinearProcessSpec& spec, double quad_tol);

// Truncated-lag autocovariance of the process at lag >= 0 (unit variance).
double lrd_autocovariance(const LinearProcessSpec& spec, std::size_t lag);

namespace detail {
// Direct O(n*M) convolution contract; the FFT path must match it.
std::vector<double> convolve_direct(const std::vector<double>& coeff,
                                    const std::vector<double>& innov, std::size_t n);
std::vector<double> convolve_fft(const std::vector<double>& coeff,
                                 const std::vector<double>& innov, std::size_t n);
} // namespace detail

} // namespace kinkscan

#endif
