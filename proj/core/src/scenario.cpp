#include "kinkscan/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "kinkscan/errors.hpp"
#include "kinkscan/special.hpp"

namespace kinkscan {

namespace {
constexpr double kTwoPi = 6.28318530717958647692;
}

double SmoothPart::eval(double x) const {
    switch (kind) {
    case SmoothKind::zero:
        return 0.0;
    case SmoothKind::sine:
        return amplitude * std::sin(kTwoPi * frequency * x);
    case SmoothKind::polynomial: {
        double v = 0.0;
        for (std::size_t i = coeffs.size(); i-- > 0;) v = v * x + coeffs[i];
        return v;
    }
    }
    return 0.0;
}

double SmoothPart::derivative(double x, int order) const {
    if (order < 0) fail(errc::invalid_argument, "derivative order must be >= 0");
    if (order == 0) return eval(x);
    switch (kind) {
    case SmoothKind::zero:
        return 0.0;
    case SmoothKind::sine: {
        const double w = kTwoPi * frequency;
        const double scale = amplitude * std::pow(w, order);
        switch (order % 4) {
        case 0: return scale * std::sin(w * x);
        case 1: return scale * std::cos(w * x);
        case 2: return -scale * std::sin(w * x);
        default: return -scale * std::cos(w * x);
        }
    }
    case SmoothKind::polynomial: {
        double v = 0.0;
        for (std::size_t i = coeffs.size(); i-- > static_cast<std::size_t>(order);) {
            double factor = 1.0;
            for (int d = 0; d < order; ++d) factor *= static_cast<double>(i - d);
            v = v * x + factor * coeffs[i];
        }
        return v;
    }
    }
    return 0.0;
}

double KinkFunction::eval(double x) const {
    double v = smooth.eval(x);
    for (const auto& k : kinks) v += 0.5 * k.jump * std::abs(x - k.theta);
    return v;
}

double KinkFunction::derivative(double x) const {
    double v = smooth.derivative(x, 1);
    for (const auto& k : kinks) v += 0.5 * k.jump * (x >= k.theta ? 1.0 : -1.0);
    return v;
}

void KinkFunction::validate() const {
    if (smoothness < 3) fail(errc::invalid_argument, "smoothness s must be >= 3");
    for (std::size_t i = 0; i < kinks.size(); ++i) {
        if (kinks[i].jump == 0.0)
            fail(errc::invalid_argument, "kink jumps must be nonzero");
        if (i > 0 && !(kinks[i].theta > kinks[i - 1].theta))
            fail(errc::invalid_argument, "kink locations must be sorted and distinct");
    }
}

double ScaleSpec::eval(double x) const {
    switch (kind) {
    case ScaleKind::constant:
        return value;
    case ScaleKind::sine_bounded:
        return base + amplitude * std::sin(kTwoPi * frequency * x);
    }
    return value;
}

void ScaleSpec::validate() const {
    if (smoothness < 3) fail(errc::invalid_argument, "scale smoothness r must be >= 3");
    switch (kind) {
    case ScaleKind::constant:
        if (value < 0.0) fail(errc::invalid_argument, "constant scale must be >= 0");
        break;
    case ScaleKind::sine_bounded:
        if (!(base - std::abs(amplitude) > 0.0))
            fail(errc::invalid_argument, "sine_bounded scale must stay strictly positive");
        break;
    }
}

void DesignSpec::validate() const {
    switch (assumption) {
    case DesignAssumption::A:
        if (law == IidLaw::scaled_beta && !(beta_p > 0.0 && beta_q > 0.0))
            fail(errc::invalid_argument, "beta design parameters must be positive");
        error_process.validate();
        break;
    case DesignAssumption::B:
        design_process.validate();
        if (design_process.innovations != Innovations::gaussian)
            fail(errc::unsupported_scenario,
                 "long-memory design variables are supported only with gaussian innovations");
        if (!(error_sd > 0.0))
            fail(errc::invalid_argument, "error standard deviation must be positive");
        break;
    }
}

void Scenario::validate() const {
    mu.validate();
    sigma.validate();
    design.validate();
}

void Dataset::finalize() {
    order_.resize(x.size());
    std::iota(order_.begin(), order_.end(), 0u);
    std::sort(order_.begin(), order_.end(),
              [&](std::uint32_t a, std::uint32_t b) { return x[a] < x[b]; });
}

Dataset generate_dataset(const Scenario& scenario, std::size_t n, std::uint64_t seed,
                         bool keep_latents) {
    scenario.validate();
    if (n < 8) fail(errc::invalid_argument, "dataset size must be >= 8");

    Dataset data;
    data.seed = seed;
    data.x.resize(n);
    std::vector<double> eps(n);

    Rng design_rng(derive_seed(seed, 1));
    Rng error_rng(derive_seed(seed, 2));

    switch (scenario.design.assumption) {
    case DesignAssumption::A: {
        switch (scenario.design.law) {
        case IidLaw::uniform01:
            for (auto& xi : data.x) xi = design_rng.uniform01();
            break;
        case IidLaw::scaled_beta:
            for (auto& xi : data.x)
                xi = inv_inc_beta(scenario.design.beta_p, scenario.design.beta_q,
                                  design_rng.uniform01());
            break;
        }
        auto spec = resolve_truncation(scenario.design.error_process, n);
        eps = simulate_lrd(spec, n, error_rng).values;
        break;
    }
    case DesignAssumption::B: {
        auto spec = resolve_truncation(scenario.design.design_process, n);
        data.x = simulate_lrd(spec, n, design_rng).values;
        switch (scenario.design.error_law) {
        case ErrorLaw::gaussian:
            for (auto& e : eps) e = error_rng.gaussian(0.0, scenario.design.error_sd);
            break;
        case ErrorLaw::uniform: {
            const double half = scenario.design.error_sd * std::sqrt(3.0);
            for (auto& e : eps) e = error_rng.uniform(-half, half);
            break;
        }
        }
        break;
    }
    }

    data.y.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        data.y[i] = scenario.mu.eval(data.x[i]) + scenario.sigma.eval(data.x[i]) * eps[i];

    if (keep_latents) {
        data.has_latents = true;
        data.eps = std::move(eps);
        data.f_of_x.resize(n);
        for (std::size_t i = 0; i < n; ++i) data.f_of_x[i] = true_cdf(scenario, data.x[i]);
        for (const auto& k : scenario.mu.kinks) data.theta_true.push_back(k.theta);
        data.lambda_true = kink_images(scenario);
    }
    data.scenario = scenario;
    data.finalize();
    return data;
}

double true_cdf(const Scenario& scenario, double x) {
    switch (scenario.design.assumption) {
    case DesignAssumption::A:
        switch (scenario.design.law) {
        case IidLaw::uniform01:
            return std::clamp(x, 0.0, 1.0);
        case IidLaw::scaled_beta:
            return reg_inc_beta(scenario.design.beta_p, scenario.design.beta_q,
                                std::clamp(x, 0.0, 1.0));
        }
        break;
    case DesignAssumption::B:
        return norm_cdf(x - scenario.design.design_process.mean);
    }
    return 0.0;
}

double true_quantile(const Scenario& scenario, double p) {
    if (!(p > 0.0 && p < 1.0))
        fail(errc::invalid_argument, "quantile level must lie in (0,1)");
    switch (scenario.design.assumption) {
    case DesignAssumption::A:
        switch (scenario.design.law) {
        case IidLaw::uniform01:
            return p;
        case IidLaw::scaled_beta:
            return inv_inc_beta(scenario.design.beta_p, scenario.design.beta_q, p);
        }
        break;
    case DesignAssumption::B:
        return scenario.design.design_process.mean + norm_quantile(p);
    }
    return 0.0;
}

double design_density(const Scenario& scenario, double x) {
    switch (scenario.design.assumption) {
    case DesignAssumption::A:
        switch (scenario.design.law) {
        case IidLaw::uniform01:
            return (x >= 0.0 && x <= 1.0) ? 1.0 : 0.0;
        case IidLaw::scaled_beta: {
            if (x <= 0.0 || x >= 1.0) return 0.0;
            const double a = scenario.design.beta_p, b = scenario.design.beta_q;
            return std::exp((a - 1.0) * std::log(x) + (b - 1.0) * std::log(1.0 - x) -
                            log_beta(a, b));
        }
        }
        break;
    case DesignAssumption::B:
        return norm_pdf(x - scenario.design.design_process.mean);
    }
    return 0.0;
}

std::vector<double> kink_images(const Scenario& scenario) {
    std::vector<double> lambdas;
    const bool bounded = scenario.design.assumption == DesignAssumption::A;
    for (const auto& k : scenario.mu.kinks) {
        if (bounded && !(k.theta > 0.0 && k.theta < 1.0))
            fail(errc::invalid_argument,
                 "kink location lies outside the interior of the design support");
        double lambda = true_cdf(scenario, k.theta);
        if (!(lambda > 0.0 && lambda < 1.0))
            fail(errc::invalid_argument, "kink image must lie strictly inside (0,1)");
        lambdas.push_back(lambda);
    }
    return lambdas;
}

double mu_f_eval(const Scenario& scenario, double t) {
    return scenario.mu.eval(true_quantile(scenario, t));
}

double sigma_f_eval(const Scenario& scenario, double t) {
    return scenario.sigma.eval(true_quantile(scenario, t));
}

double sigma_f_derivative(const Scenario& scenario, double t, int order) {
    if (!(t > 0.0 && t < 1.0)) fail(errc::invalid_argument, "t must lie in (0,1)");
    if (order < 1 || order > 4)
        fail(errc::invalid_argument, "derivative order must be in 1..4");
    if (order > scenario.sigma.smoothness)
        fail(errc::invalid_argument, "derivative order exceeds scale smoothness");
    if (scenario.sigma.is_constant()) return 0.0;

    const double step = 1e-4 * std::min(t, 1.0 - t);
    auto f = [&](double u) { return sigma_f_eval(scenario, u); };
    switch (order) {
    case 1:
        return (f(t + step) - f(t - step)) / (2.0 * step);
    case 2:
        return (f(t + step) - 2.0 * f(t) + f(t - step)) / (step * step);
    case 3:
        return (f(t + 2 * step) - 2.0 * f(t + step) + 2.0 * f(t - step) - f(t - 2 * step)) /
               (2.0 * step * step * step);
    default:
        return (f(t + 2 * step) - 4.0 * f(t + step) + 6.0 * f(t) - 4.0 * f(t - step) +
                f(t - 2 * step)) /
               (step * step * step * step);
    }
}

double support_half_width(const Scenario& scenario) {
    if (scenario.design.assumption == DesignAssumption::A) return 0.5; // [0,1]
    return 0.5 * (true_quantile(scenario, 0.999) - true_quantile(scenario, 0.001));
}

double empirical_cdf(const Dataset& data, double x) {
    if (data.n() == 0) fail(errc::invalid_argument, "empty dataset");
    const auto& order = data.order_by_x();
    // count of X_i <= x over sorted order
    std::size_t lo = 0, hi = order.size();
    while (lo < hi) {
        std::size_t mid = (lo + hi) / 2;
        if (data.x[order[mid]] <= x)
            lo = mid + 1;
        else
            hi = mid;
    }
    return static_cast<double>(lo) / static_cast<double>(order.size());
}

double empirical_quantile(const Dataset& data, double p) {
    if (data.n() == 0) fail(errc::invalid_argument, "empty dataset");
    if (!(p > 0.0 && p <= 1.0))
        fail(errc::invalid_argument, "empirical quantile level must lie in (0,1]");
    const auto& order = data.order_by_x();
    const double np = static_cast<double>(data.n()) * p;
    std::size_t rank = static_cast<std::size_t>(std::ceil(np - 1e-12));
    if (rank < 1) rank = 1;
    if (rank > data.n()) rank = data.n();
    return data.x[order[rank - 1]];
}

} // namespace kinkscan
