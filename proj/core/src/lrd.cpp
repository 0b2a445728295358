#include "kinkscan/lrd.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "kinkscan/errors.hpp"
#include "kinkscan/quadrature.hpp"

namespace kinkscan {

void LinearProcessSpec::validate() const {
    if (!(alpha > 0.0 && alpha <= 1.0))
        fail(errc::invalid_argument, "memory parameter alpha must lie in (0,1]");
    if (!(slowly_varying > 0.0))
        fail(errc::invalid_argument, "slowly varying constant must be positive");
    if (!std::isfinite(mean)) fail(errc::invalid_argument, "process mean must be finite");
    if (truncation < 0 && truncation != kAutoTruncation)
        fail(errc::invalid_argument, "truncation must be >= 0 or auto");
}

LinearProcessSpec resolve_truncation(const LinearProcessSpec& spec, std::size_t n) {
    LinearProcessSpec out = spec;
    if (out.truncation == kAutoTruncation)
        out.truncation = std::max<long long>(static_cast<long long>(n), 1LL << 14);
    return out;
}

std::vector<double> ma_coefficients(const LinearProcessSpec& spec) {
    spec.validate();
    if (spec.truncation == kAutoTruncation)
        fail(errc::invalid_argument, "truncation must be resolved before use");
    const std::size_t m = static_cast<std::size_t>(spec.truncation);
    std::vector<double> c(m + 1);
    c[0] = 1.0;
    const double expo = -(1.0 + spec.alpha) / 2.0;
    for (std::size_t i = 1; i <= m; ++i)
        c[i] = std::pow(static_cast<double>(i), expo) * spec.slowly_varying;
    return c;
}

double innovation_sd(const LinearProcessSpec& spec) {
    auto c = ma_coefficients(spec);
    double sum_sq = 0.0;
    for (std::size_t i = c.size(); i-- > 0;) sum_sq += c[i] * c[i]; // small terms first
    return 1.0 / std::sqrt(sum_sq);
}

namespace detail {

std::vector<double> convolve_direct(const std::vector<double>& coeff,
                                    const std::vector<double>& innov, std::size_t n) {
    const std::size_t m = coeff.size() - 1; // truncation
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        // xi_i uses innovations at absolute positions m+i, m+i-1, ..., i.
        double acc = 0.0;
        const double* e = innov.data() + m + i;
        for (std::size_t j = 0; j <= m; ++j) acc += coeff[j] * e[-static_cast<long>(j)];
        out[i] = acc;
    }
    return out;
}

void fft_radix2(std::vector<std::complex<double>>& a, bool inverse) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        double ang = 2.0 * 3.14159265358979323846 / static_cast<double>(len) *
                     (inverse ? -1.0 : 1.0);
        std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                std::complex<double> u = a[i + j];
                std::complex<double> v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wl;
            }
        }
    }
    if (inverse)
        for (auto& z : a) z /= static_cast<double>(n);
}

std::vector<double> convolve_fft(const std::vector<double>& coeff,
                                 const std::vector<double>& innov, std::size_t n) {
    const std::size_t m = coeff.size() - 1;
    const std::size_t full = innov.size() + coeff.size() - 1;
    std::size_t size = 1;
    while (size < full) size <<= 1;

    std::vector<std::complex<double>> fa(size), fb(size);
    for (std::size_t i = 0; i < coeff.size(); ++i) fa[i] = coeff[i];
    for (std::size_t i = 0; i < innov.size(); ++i) fb[i] = innov[i];
    fft_radix2(fa, false);
    fft_radix2(fb, false);
    for (std::size_t i = 0; i < size; ++i) fa[i] *= fb[i];
    fft_radix2(fa, true);

    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = fa[m + i].real();
    return out;
}

} // namespace detail

LrdSeries simulate_lrd(const LinearProcessSpec& spec, std::size_t n, Rng& rng,
                       bool keep_innovations) {
    if (n < 1) fail(errc::invalid_argument, "series length must be >= 1");
    auto coeff = ma_coefficients(spec);
    const std::size_t m = coeff.size() - 1;
    const double sd = innovation_sd(spec);

    std::vector<double> innov(m + n);
    switch (spec.innovations) {
    case Innovations::gaussian:
        for (auto& e : innov) e = sd * rng.gaussian();
        break;
    case Innovations::uniform: {
        const double half = sd * std::sqrt(3.0); // centred uniform with variance sd^2
        for (auto& e : innov) e = rng.uniform(-half, half);
        break;
    }
    }

    // The FFT path is used above a fixed work threshold. The threshold is a
    // compile-time constant so the numerical path depends only on (spec, n).
    constexpr std::size_t kDirectWorkLimit = 1u << 22;
    std::vector<double> values;
    if (n * (m + 1) <= kDirectWorkLimit)
        values = detail::convolve_direct(coeff, innov, n);
    else
        values = detail::convolve_fft(coeff, innov, n);
    if (spec.mean != 0.0)
        for (auto& v : values) v += spec.mean;

    LrdSeries out;
    out.values = std::move(values);
    out.spec = spec;
    if (keep_innovations) out.innovations = std::move(innov);
    return out;
}

namespace {

// Integral over (0, inf) of (x^2+x)^(-(1+alpha)/2) dx. Split at 1 and flatten
// the endpoint singularities by power substitutions so the adaptive rule sees
// smooth integrands.
double covariance_tail_integral(double alpha, double tol) {
    const double p = (1.0 + alpha) / 2.0;
    // x in (0,1): x = u^(2/(1-alpha)) makes x^-p dx proportional to du.
    const double head_power = 2.0 / (1.0 - alpha);
    auto head = [&](double u) {
        double x = std::pow(u, head_power);
        return head_power * std::pow(1.0 + x, -p);
    };
    // x in (1,inf): x = 1/v, then v = w^(1/alpha) flattens v^(alpha-1).
    const double tail_power = 1.0 / alpha;
    auto tail = [&](double w) {
        double v = std::pow(w, tail_power);
        return tail_power * std::pow(1.0 + v, -p);
    };
    return integrate(head, 0.0, 1.0, tol / 2.0) + integrate(tail, 0.0, 1.0, tol / 2.0);
}

} // namespace

double lrd_autocovariance(const LinearProcessSpec& spec, std::size_t lag) {
    auto c = ma_coefficients(spec);
    if (lag >= c.size()) return 0.0;
    const double sd = innovation_sd(spec);
    double acc = 0.0;
    for (std::size_t j = 0; j + lag < c.size(); ++j) acc += c[j] * c[j + lag];
    return sd * sd * acc;
}

LrdConstants lrd_constants(const LinearProcessSpec& spec, double quad_tol) {
    spec.validate();
    if (quad_tol <= 0.0) fail(errc::invalid_argument, "quadrature tolerance must be positive");
    if (!(spec.alpha < 1.0))
        fail(errc::regime, "second-order constants require alpha in (0,1)");

    LrdConstants k;
    const double sigma_eta = innovation_sd(spec);
    k.sigma_eta = sigma_eta;
    k.s_x = std::sqrt(std::max(0.0, 1.0 - sigma_eta * sigma_eta));

    const double integral = covariance_tail_integral(spec.alpha, quad_tol);
    k.c0_sq = sigma_eta * sigma_eta * integral;
    k.c1_sq = 2.0 * k.c0_sq / ((1.0 - spec.alpha) * (2.0 - spec.alpha));

    if (spec.alpha < 0.5) {
        k.c2_sq = 4.0 * k.c0_sq * k.c0_sq / ((1.0 - 2.0 * spec.alpha) * (2.0 - 2.0 * spec.alpha));
        k.has_c2 = true;
    }
    if (spec.alpha > 0.5 && spec.innovations == Innovations::gaussian) {
        // Gaussian identity Cov(xi_0^2, xi_i^2) = 2 rho_i^2 with rho from the
        // truncated coefficients; the lag sum is summable for alpha > 1/2.
        // All lag autocovariances at once via the power spectrum of c.
        auto c = ma_coefficients(spec);
        const std::size_t m = c.size() - 1;
        std::size_t size = 1;
        while (size < 2 * (m + 1)) size <<= 1;
        std::vector<std::complex<double>> a(size);
        for (std::size_t i = 0; i <= m; ++i) a[i] = c[i];
        detail::fft_radix2(a, false);
        for (auto& z : a) z = z * std::conj(z);
        detail::fft_radix2(a, true);
        const double var_eta = sigma_eta * sigma_eta;
        double sum = 0.0;
        for (std::size_t i = 0; i <= m; ++i) {
            double rho = var_eta * a[i].real();
            sum += 2.0 * rho * rho;
        }
        k.c3_sq = 1.0 + 2.0 * sum;
        k.has_c3 = true;
    }
    return k;
}

double lrd_c2_sq(const LinearProcessSpec& spec, double quad_tol) {
    if (!(spec.alpha < 0.5))
        fail(errc::regime, "C2^2 requires alpha < 1/2; the alpha = 1/2 boundary case is unsupported");
    return lrd_constants(spec, quad_tol).c2_sq;
}

double lrd_c3_sq(const LinearProcessSpec& spec, double quad_tol) {
    if (!(spec.alpha > 0.5))
        fail(errc::regime, "C3^2 requires alpha > 1/2; the alpha = 1/2 boundary case is unsupported");
    if (spec.innovations != Innovations::gaussian)
        fail(errc::regime, "C3^2 uses the Gaussian product identity; innovations must be gaussian");
    return lrd_constants(spec, quad_tol).c3_sq;
}

} // namespace kinkscan
