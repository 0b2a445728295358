#ifndef KINKSCAN_SCENARIO_HPP
#define KINKSCAN_SCENARIO_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kinkscan/lrd.hpp"

namespace kinkscan {

// One kink of the regression function in x-scale: the first derivative jumps
// by `jump` at `theta`.
struct Kink {
    double theta;
    double jump;
};

enum class SmoothKind { zero, sine, polynomial };

struct SmoothPart {
    SmoothKind kind = SmoothKind::zero;
    double amplitude = 1.0; // sine
    double frequency = 1.0; // sine, in full periods over one unit
    std::vector<double> coeffs; // polynomial, by power

    double eval(double x) const;
    double derivative(double x, int order) const;
};

// mu(x) = sum_j (a_j/2) |x - theta_j| + smooth(x). The basis gives a
// first-derivative jump of exactly a_j at theta_j while all higher one-sided
// derivatives agree.
struct KinkFunction {
    std::vector<Kink> kinks; // sorted by theta, distinct, jumps nonzero
    SmoothPart smooth;
    int smoothness = 3; // s >= 3

    double eval(double x) const;
    double derivative(double x) const; // one-sided from the right at kinks
    void validate() const;
};

enum class ScaleKind { constant, sine_bounded };

// Scale function sigma. constant(0) is allowed as the documented noiseless
// diagnostic case; sine_bounded must stay strictly positive.
struct ScaleSpec {
    ScaleKind kind = ScaleKind::constant;
    double value = 1.0;     // constant
    double base = 1.0;      // sine_bounded
    double amplitude = 0.0; // sine_bounded, |amplitude| < base
    double frequency = 1.0;
    int smoothness = 3; // r >= 3

    double eval(double x) const;
    bool is_constant() const { return kind == ScaleKind::constant; }
    void validate() const;
};

enum class DesignAssumption { A, B };
enum class IidLaw { uniform01, scaled_beta };
enum class ErrorLaw { gaussian, uniform };

// Under A the design is i.i.d. with a smooth positive density and the errors
// are the long-memory component; under B the design is a Gaussian long-memory
// process (unit variance by construction) and the errors are i.i.d.
struct DesignSpec {
    DesignAssumption assumption = DesignAssumption::A;

    // Assumption A
    IidLaw law = IidLaw::uniform01;
    double beta_p = 2.0;
    double beta_q = 2.0;
    LinearProcessSpec error_process; // alpha_eps lives here

    // Assumption B
    LinearProcessSpec design_process; // gaussian required; mean = mu_X
    ErrorLaw error_law = ErrorLaw::gaussian;
    double error_sd = 1.0;

    void validate() const;
};

struct Scenario {
    KinkFunction mu;
    ScaleSpec sigma;
    DesignSpec design;

    void validate() const;
};

struct Dataset {
    std::vector<double> x;
    std::vector<double> y;

    bool has_latents = false;
    std::vector<double> eps;
    std::vector<double> f_of_x; // oracle F(X_i)
    std::vector<double> theta_true;
    std::vector<double> lambda_true;

    std::optional<Scenario> scenario;
    std::uint64_t seed = 0;

    std::size_t n() const { return x.size(); }

    // Indices sorting x ascending; built once by finalize().
    const std::vector<std::uint32_t>& order_by_x() const { return order_; }
    void finalize();

private:
    std::vector<std::uint32_t> order_;
};

// Draws design and errors from independent substreams of `seed` and composes
// y_i = mu(x_i) + sigma(x_i) eps_i. Requires n >= 8.
Dataset generate_dataset(const Scenario& scenario, std::size_t n, std::uint64_t seed,
                         bool keep_latents);

double true_cdf(const Scenario& scenario, double x);
double true_quantile(const Scenario& scenario, double p);
double design_density(const Scenario& scenario, double x);

// lambda_j = F(theta_j), strictly increasing, each in (0,1).
std::vector<double> kink_images(const Scenario& scenario);

// Compositions with the true quantile function, t in (0,1).
double mu_f_eval(const Scenario& scenario, double t);
double sigma_f_eval(const Scenario& scenario, double t);

// m-th derivative of sigma_F at t; exact zero for constant sigma, otherwise
// central finite differences with step 1e-4 * min(t, 1-t). m in 1..4, m <= r.
double sigma_f_derivative(const Scenario& scenario, double t, int order);

// Half-width of the design support; quantile-range proxy for unbounded laws.
double support_half_width(const Scenario& scenario);

double empirical_cdf(const Dataset& data, double x);

// Left-continuous generalized inverse: smallest order statistic with index
// ceil(n*p); p in (0,1].
double empirical_quantile(const Dataset& data, double p);

} // namespace kinkscan

#endif
