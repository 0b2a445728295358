#include "kinkscan/special.hpp"

#include <cmath>

#include "kinkscan/errors.hpp"

namespace kinkscan {

namespace {
constexpr double kSqrt2 = 1.41421356237309504880;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
} // namespace

double norm_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double norm_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double norm_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        fail(errc::invalid_argument, "norm_quantile: p must lie in (0,1)");

    // Acklam's rational approximation.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};

    const double plow = 0.02425;
    double x;
    if (p < plow) {
        double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        double q = p - 0.5;
        double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }

    // One Halley refinement against the exact CDF.
    double e = norm_cdf(x) - p;
    double u = e / norm_pdf(x);
    x = x - u / (1.0 + 0.5 * x * u);
    return x;
}

double log_beta(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

namespace {

// Continued fraction for the incomplete beta (Lentz's method).
double beta_cf(double a, double b, double x) {
    const int max_iter = 300;
    const double eps = 1e-15;
    const double fpmin = 1e-300;

    double qab = a + b;
    double qap = a + 1.0;
    double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::abs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::abs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) return h;
    }
    fail(errc::numeric, "incomplete beta continued fraction did not converge");
}

} // namespace

double reg_inc_beta(double a, double b, double x) {
    if (a <= 0.0 || b <= 0.0)
        fail(errc::invalid_argument, "reg_inc_beta: shape parameters must be positive");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double front = std::exp(a * std::log(x) + b * std::log(1.0 - x) - log_beta(a, b));
    if (x < (a + 1.0) / (a + b + 2.0))
        return front * beta_cf(a, b, x) / a;
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double inv_inc_beta(double a, double b, double p) {
    if (!(p > 0.0 && p < 1.0))
        fail(errc::invalid_argument, "inv_inc_beta: p must lie in (0,1)");
    double lo = 0.0, hi = 1.0;
    double x = 0.5;
    for (int iter = 0; iter < 200; ++iter) {
        double f = reg_inc_beta(a, b, x) - p;
        if (f > 0.0)
            hi = x;
        else
            lo = x;
        double density = std::exp((a - 1.0) * std::log(x) + (b - 1.0) * std::log(1.0 - x) -
                                  log_beta(a, b));
        double step = density > 0.0 ? f / density : 0.0;
        double next = x - step;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi); // Newton left the bracket
        if (std::abs(next - x) < 1e-15 * (1.0 + std::abs(x))) return next;
        x = next;
    }
    return x;
}

} // namespace kinkscan
