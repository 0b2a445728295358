#include "kinkscan/kernel.hpp"

#include <algorithm>
#include <cmath>

#include "kinkscan/errors.hpp"
#include "kinkscan/quadrature.hpp"

namespace kinkscan {

namespace {

// Exact integral over [-1,1] of x^j * poly. Odd total powers cancel.
Rational poly_moment(const std::vector<Rational>& coeff, int j) {
    Rational total;
    for (std::size_t p = 0; p < coeff.size(); ++p) {
        if (coeff[p].is_zero()) continue;
        int tot = static_cast<int>(p) + j;
        if (tot % 2 != 0) continue; // integral of odd power over [-1,1]
        total += coeff[p] * Rational(2, tot + 1);
    }
    return total;
}

std::vector<Rational> differentiate(const std::vector<Rational>& coeff) {
    if (coeff.size() <= 1) return {Rational(0)};
    std::vector<Rational> out(coeff.size() - 1);
    for (std::size_t p = 1; p < coeff.size(); ++p)
        out[p - 1] = coeff[p] * Rational(static_cast<long long>(p));
    return out;
}

double horner(const std::vector<double>& coeff, double x) {
    double v = 0.0;
    for (std::size_t i = coeff.size(); i-- > 0;) v = v * x + coeff[i];
    return v;
}

} // namespace

KinkKernel KinkKernel::build(int order) {
    if (order < 1) fail(errc::invalid_argument, "kernel order must be >= 1");
    if (order > 6) fail(errc::invalid_argument, "kernel order above 6 not supported");

    KinkKernel K;
    K.order_ = order;
    const int k = order;

    // a_k = (4k+5)! / (2^(4k+5) (2k)! (2k+2)!)
    K.normalizer_ = Rational::factorial(4 * k + 5) /
                    (Rational::pow2(4 * k + 5) * Rational::factorial(2 * k) *
                     Rational::factorial(2 * k + 2));

    // b_{j,k} = (-1)^(k+j+1) (2j)! / (j! (2k-j+2)! (2j-2k+2)!), exponent 2j-2k+2
    K.coeff_[0].assign(static_cast<std::size_t>(2 * k + 7), Rational(0));
    for (int j = k - 1; j <= 2 * k + 2; ++j) {
        Rational b = Rational::factorial(2 * j) /
                     (Rational::factorial(j) * Rational::factorial(2 * k - j + 2) *
                      Rational::factorial(2 * j - 2 * k + 2));
        if ((k + j + 1) % 2 != 0) b = -b;
        K.coeff_[0][static_cast<std::size_t>(2 * j - 2 * k + 2)] = K.normalizer_ * b;
    }

    K.differentiate_and_finalize();
    return K;
}

void KinkKernel::differentiate_and_finalize() {
    for (int d = 1; d <= 3; ++d) coeff_[d] = differentiate(coeff_[d - 1]);
    for (int d = 0; d <= 3; ++d) {
        coeffd_[d].resize(coeff_[d].size());
        for (std::size_t p = 0; p < coeff_[d].size(); ++p)
            coeffd_[d][p] = coeff_[d][p].to_double();
    }

    // Separation constant: scan tau in (0,1) at step 1e-4 for the region where
    // |K_1| stays above half its tangent slope at 0.
    const double slope = std::abs(eval(2, 0.0));
    const double step = 1e-4;
    double cq = 0.0;
    for (double tau = step; tau < 1.0; tau += step) {
        if (std::abs(eval(1, tau)) >= 0.5 * slope * tau)
            cq = tau;
        else
            break;
    }
    separation_constant_ = cq;
}

const std::vector<Rational>& KinkKernel::coefficients(int deriv) const {
    if (deriv < 0 || deriv > 3)
        fail(errc::invalid_argument, "derivative index must be in 0..3");
    return coeff_[static_cast<std::size_t>(deriv)];
}

double KinkKernel::eval(int deriv, double x) const {
    if (deriv < 0 || deriv > 3)
        fail(errc::invalid_argument, "derivative index must be in 0..3");
    if (x < -1.0 || x > 1.0) return 0.0;
    return horner(coeffd_[static_cast<std::size_t>(deriv)], x);
}

Rational KinkKernel::moment_exact(int deriv, int j) const {
    if (deriv < 0 || deriv > 3)
        fail(errc::invalid_argument, "derivative index must be in 0..3");
    if (j < 0) fail(errc::invalid_argument, "moment order must be >= 0");
    return poly_moment(coeff_[static_cast<std::size_t>(deriv)], j);
}

Rational KinkKernel::squared_integral_exact(int deriv) const {
    if (deriv < 0 || deriv > 3)
        fail(errc::invalid_argument, "derivative index must be in 0..3");
    const auto& c = coeff_[static_cast<std::size_t>(deriv)];
    Rational total;
    for (std::size_t p = 0; p < c.size(); ++p) {
        if (c[p].is_zero()) continue;
        for (std::size_t q = 0; q < c.size(); ++q) {
            if (c[q].is_zero()) continue;
            int tot = static_cast<int>(p + q);
            if (tot % 2 != 0) continue;
            total += c[p] * c[q] * Rational(2, tot + 1);
        }
    }
    return total;
}

KernelVerification KinkKernel::verify(double tol) const {
    if (tol <= 0.0) fail(errc::invalid_argument, "verification tolerance must be positive");
    KernelVerification report;
    auto add = [&](const std::string& name, double residual) {
        report.checks.push_back({name, residual, tol, std::abs(residual) < tol});
    };

    for (int d = 1; d <= 3; ++d) {
        add("K" + std::to_string(d) + "(-1)", eval(d, -1.0));
        add("K" + std::to_string(d) + "(+1)", eval(d, 1.0));
    }
    add("K1(0)", eval(1, 0.0));
    for (int j = 0; j <= 2 * order_; ++j)
        add("moment K3 j=" + std::to_string(j), moment(3, j));

    report.pass = std::all_of(report.checks.begin(), report.checks.end(),
                              [](const KernelCheck& c) { return c.pass; });
    return report;
}

KinkKernel KinkKernel::perturbed(int power, const Rational& delta) const {
    if (power < 0 || static_cast<std::size_t>(power) >= coeff_[0].size())
        fail(errc::invalid_argument, "perturbation power outside polynomial degree");
    KinkKernel K;
    K.order_ = order_;
    K.normalizer_ = normalizer_;
    K.coeff_[0] = coeff_[0];
    K.coeff_[0][static_cast<std::size_t>(power)] += normalizer_ * delta;
    K.differentiate_and_finalize();
    return K;
}

KappaOracle kappa_oracle(const KinkKernel& kernel,
                         const std::function<double(double)>& mu_f,
                         std::span<const KinkPoint> kinks,
                         double h, double t, double quad_tol) {
    if (!(h > 0.0 && h < 0.5))
        fail(errc::invalid_argument, "bandwidth must lie in (0, 1/2)");
    if (!(t > h && t < 1.0 - h))
        fail(errc::boundary, "evaluation point must lie in (h, 1-h)");
    if (quad_tol <= 0.0) fail(errc::invalid_argument, "quadrature tolerance must be positive");

    const double lo = t - h;
    const double hi = t + h;
    std::vector<double> breaks;
    for (const auto& kink : kinks) breaks.push_back(kink.location);

    auto integrand = [&](double x) { return kernel.eval(3, (x - t) / h) * mu_f(x); };
    // Tolerance is requested on kappa itself, so scale by h^4 for the raw
    // integral; the floor keeps the request above the roundoff resolution of
    // the integrand sums.
    const double raw_tol = std::max(quad_tol * h * h * h * h, 1e-15);
    double raw = integrate_with_breaks(integrand, lo, hi, breaks, raw_tol);
    double kappa = raw / (h * h * h * h);

    double localisation = 0.0;
    for (const auto& kink : kinks)
        localisation += kernel.eval(1, (kink.location - t) / h) * kink.jump / (h * h);

    return {kappa, localisation, kappa - localisation};
}

} // namespace kinkscan
