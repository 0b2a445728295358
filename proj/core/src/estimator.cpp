#include "kinkscan/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "kinkscan/errors.hpp"
#include "kinkscan/quadrature.hpp"

namespace kinkscan {

namespace {

const KinkKernel& cached_kernel(int order) {
    static std::mutex mutex;
    static std::vector<KinkKernel> cache; // index = order - 1
    std::lock_guard<std::mutex> lock(mutex);
    if (order < 1) fail(errc::invalid_argument, "kernel order must be >= 1");
    while (static_cast<int>(cache.size()) < order)
        cache.push_back(KinkKernel::build(static_cast<int>(cache.size()) + 1));
    return cache[static_cast<std::size_t>(order - 1)];
}

void check_interior(double t, double h) {
    if (!(t > h && t < 1.0 - h))
        fail(errc::boundary, "evaluation point must lie in (h, 1-h)");
}

struct Window {
    std::size_t lo; // first index with f >= t - h
    std::size_t hi; // one past last index with f <= t + h
    std::size_t size() const { return hi - lo; }
};

Window window_of(const std::vector<double>& f, double t, double h) {
    auto lo = std::lower_bound(f.begin(), f.end(), t - h);
    auto hi = std::upper_bound(lo, f.end(), t + h);
    return {static_cast<std::size_t>(lo - f.begin()), static_cast<std::size_t>(hi - f.begin())};
}

} // namespace

double default_bandwidth(std::size_t n, int s, BandwidthRole role) {
    if (n < 64) fail(errc::invalid_argument, "default bandwidth needs n >= 64");
    if (s < 3) fail(errc::invalid_argument, "smoothness must be >= 3");
    const double dn = static_cast<double>(n);
    double h = 0.0;
    switch (role) {
    case BandwidthRole::detect: {
        h = std::pow(dn, -5.0 / 21.0);
        h = std::clamp(h, std::pow(dn, -1.0 / 3.0), std::pow(dn, -1.0 / 7.0));
        break;
    }
    case BandwidthRole::zero:
        h = std::pow(dn, -1.0 / (2.0 * s + 1.0));
        break;
    }
    // n^(-1/(2s+1)) crosses 1/2 for n <= 128 at s = 3; the bandwidth domain
    // (0, 1/2) wins.
    return std::min(h, 0.49);
}

double EstimatorConfig::resolve_bandwidth(BandwidthRole role, std::size_t n) const {
    double h = role == BandwidthRole::detect ? bandwidth_detect : bandwidth_zero;
    if (h == 0.0) h = default_bandwidth(n, smoothness(), role);
    if (!(h > 0.0 && h < 0.5)) fail(errc::invalid_argument, "bandwidth must lie in (0, 1/2)");
    return h;
}

double EstimatorConfig::fine_step(std::size_t n) const {
    const double hz = resolve_bandwidth(BandwidthRole::zero, n);
    const int expo = fine_step_exponent > 0 ? fine_step_exponent : smoothness();
    return std::max(std::pow(hz, expo), 1e-6);
}

void EstimatorConfig::validate() const {
    if (kernel_order < 1) fail(errc::invalid_argument, "kernel order must be >= 1");
    for (double h : {bandwidth_detect, bandwidth_zero})
        if (h != 0.0 && !(h > 0.0 && h < 0.5))
            fail(errc::invalid_argument, "explicit bandwidths must lie in (0, 1/2)");
    if (!(coarse_step_factor > 0.0 && coarse_step_factor <= 1.0))
        fail(errc::invalid_argument, "coarse step factor must lie in (0, 1]");
    if (fine_step_exponent < 0)
        fail(errc::invalid_argument, "fine step exponent must be >= 0");
    if (!(threshold_inflation > 0.0))
        fail(errc::invalid_argument, "threshold inflation must be positive");
    if (!(quad_tol > 0.0)) fail(errc::invalid_argument, "quadrature tolerance must be positive");
}

namespace detail {

SortedView SortedView::build(const Dataset& data, FMode mode) {
    const std::size_t n = data.n();
    if (n == 0) fail(errc::invalid_argument, "empty dataset");
    const auto& order = data.order_by_x();
    SortedView view;
    view.f.resize(n);
    view.y.resize(n);
    switch (mode) {
    case FMode::ranks:
        for (std::size_t i = 0; i < n; ++i) {
            view.f[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
            view.y[i] = data.y[order[i]];
        }
        break;
    case FMode::oracle:
        if (data.has_latents && data.f_of_x.size() == n) {
            for (std::size_t i = 0; i < n; ++i) {
                view.f[i] = data.f_of_x[order[i]];
                view.y[i] = data.y[order[i]];
            }
        } else if (data.scenario) {
            for (std::size_t i = 0; i < n; ++i) {
                view.f[i] = true_cdf(*data.scenario, data.x[order[i]]);
                view.y[i] = data.y[order[i]];
            }
        } else {
            fail(errc::missing_latent,
                 "oracle F mode requires retained latents or an attached scenario");
        }
        break;
    }
    return view;
}

double kappa_from_view(const SortedView& view, const KinkKernel& kernel, double h, double t) {
    const Window w = window_of(view.f, t, h);
    double acc = 0.0;
    for (std::size_t i = w.lo; i < w.hi; ++i)
        acc += view.y[i] * kernel.eval(3, (view.f[i] - t) / h);
    const double n = static_cast<double>(view.f.size());
    return acc / (n * h * h * h * h);
}

} // namespace detail

namespace {

// Plug-in pieces shared by upsilon() and the profile builder.
struct WindowMoments {
    double mean = 0.0;
    double var = 0.0;
    std::size_t count = 0;
};

WindowMoments window_moments(const detail::SortedView& view, double t, double h) {
    const Window w = window_of(view.f, t, h);
    WindowMoments m;
    m.count = w.size();
    if (m.count == 0) return m;
    double sum = 0.0;
    for (std::size_t i = w.lo; i < w.hi; ++i) sum += view.y[i];
    m.mean = sum / static_cast<double>(m.count);
    if (m.count > 1) {
        double ss = 0.0;
        for (std::size_t i = w.lo; i < w.hi; ++i) {
            double d = view.y[i] - m.mean;
            ss += d * d;
        }
        m.var = ss / static_cast<double>(m.count - 1);
    }
    return m;
}

constexpr double kUpsilonSqFloor = 1e-8;
constexpr std::size_t kPluginMinWindow = 20;

double upsilon_oracle(const Scenario& scenario, const KinkKernel& kernel, double t) {
    const double mu_f = mu_f_eval(scenario, t);
    const double sigma_f = sigma_f_eval(scenario, t);
    const double v_sq = (sigma_f * sigma_f + mu_f * mu_f) * kernel.squared_integral(3);
    return std::sqrt(std::max(v_sq, kUpsilonSqFloor));
}

double upsilon_plugin(const detail::SortedView& view, const KinkKernel& kernel, double t,
                      double h) {
    const WindowMoments m = window_moments(view, t, h);
    if (m.count < kPluginMinWindow)
        fail(errc::insufficient_data,
             "plug-in variance needs at least 20 observations in the window");
    const double v_sq = (m.var + m.mean * m.mean) * kernel.squared_integral(3);
    return std::sqrt(std::max(v_sq, kUpsilonSqFloor));
}

double upsilon_impl(const Dataset& data, const detail::SortedView& view,
                    const EstimatorConfig& config, const KinkKernel& kernel, double t,
                    double h) {
    switch (config.upsilon_mode) {
    case UpsilonMode::oracle:
        if (!data.scenario)
            fail(errc::missing_latent, "oracle upsilon mode requires an attached scenario");
        return upsilon_oracle(*data.scenario, kernel, t);
    case UpsilonMode::plugin:
        return upsilon_plugin(view, kernel, t, h);
    }
    return 0.0;
}

KappaProfile profile_impl(const Dataset& data, const detail::SortedView& view,
                          const EstimatorConfig& config, BandwidthRole role,
                          std::span<const double> grid) {
    const std::size_t n = data.n();
    const double h = config.resolve_bandwidth(role, n);
    const KinkKernel& kernel = cached_kernel(config.kernel_order);

    KappaProfile profile;
    profile.bandwidth = h;
    profile.n = n;
    profile.grid.assign(grid.begin(), grid.end());
    for (std::size_t i = 1; i < profile.grid.size(); ++i)
        if (!(profile.grid[i] > profile.grid[i - 1]))
            fail(errc::invalid_argument, "profile grid must be strictly increasing");

    const double scale = std::sqrt(static_cast<double>(n) * std::pow(h, 7.0));
    profile.kappa.reserve(grid.size());
    profile.upsilon.reserve(grid.size());
    profile.t_stat.reserve(grid.size());
    for (double t : grid) {
        check_interior(t, h);
        const Window w = window_of(view.f, t, h);
        double kappa = 0.0;
        double ups;
        if (w.size() == 0) {
            ++profile.empty_window_count;
            ups = std::sqrt(kUpsilonSqFloor);
        } else {
            kappa = detail::kappa_from_view(view, kernel, h, t);
            ups = upsilon_impl(data, view, config, kernel, t, h);
        }
        profile.kappa.push_back(kappa);
        profile.upsilon.push_back(ups);
        profile.t_stat.push_back(scale * kappa / ups);
    }
    return profile;
}

KappaProfile detection_profile_impl(const Dataset& data, const detail::SortedView& view,
                                    const EstimatorConfig& config) {
    const std::size_t n = data.n();
    const double h = config.resolve_bandwidth(BandwidthRole::detect, n);
    const std::size_t m_n = static_cast<std::size_t>(std::ceil(1.0 / (2.0 * h)));

    std::vector<double> grid;
    std::vector<std::size_t> indices;
    for (std::size_t j = 1; j < m_n; ++j) {
        const double t = 2.0 * h * static_cast<double>(j);
        if (t > h && t < 1.0 - h) {
            grid.push_back(t);
            indices.push_back(j);
        }
    }

    KappaProfile profile = profile_impl(data, view, config, BandwidthRole::detect, grid);
    profile.m_n = m_n;
    profile.partition_index = std::move(indices);
    profile.threshold =
        config.threshold_inflation * std::sqrt(2.0 * std::abs(std::log(2.0 * h)));
    return profile;
}

std::pair<double, double> localize_impl(const Dataset& data, const detail::SortedView& view,
                                        const EstimatorConfig& config, std::size_t n,
                                        const Cluster& cluster) {
    const double h = config.resolve_bandwidth(BandwidthRole::detect, n);
    const KinkKernel& kernel = cached_kernel(config.kernel_order);
    const double step = config.coarse_step_factor * h;

    std::vector<double> grid;
    for (double t = cluster.t_lo; t < cluster.t_hi; t += step) grid.push_back(t);
    grid.push_back(cluster.t_hi);
    if (grid.size() < 2) fail(errc::no_extrema, "cluster range degenerate");

    // Extrema of the standardised profile T = sqrt(n h^7) kappa / upsilon
    // rather than raw kappa: the variance of kappa grows with the squared
    // regression level across the cluster, and under a long-memory design
    // that growth routinely out-shouts the kink's own extrema. Standardising
    // equalises the noise floor; at constant upsilon the two searches agree.
    double min_v = 0.0, max_v = 0.0, min_t = 0.0, max_t = 0.0;
    bool first = true;
    for (double t : grid) {
        const double kappa = detail::kappa_from_view(view, kernel, h, t);
        double ups;
        try {
            ups = upsilon_impl(data, view, config, kernel, t, h);
        } catch (const Error&) {
            ups = 0.0; // thin window: no usable signal at this point
        }
        const double v = ups > 0.0 ? kappa / ups : 0.0;
        if (first || v < min_v) { min_v = v; min_t = t; }
        if (first || v > max_v) { max_v = v; max_t = t; }
        first = false;
    }
    if (min_v == max_v)
        fail(errc::no_extrema, "flat profile inside the cluster; no extrema pair");
    return {min_t, max_t};
}

double zero_crossing_impl(const detail::SortedView& view, const EstimatorConfig& config,
                          std::size_t n, double lo, double hi) {
    const double hz = config.resolve_bandwidth(BandwidthRole::zero, n);
    const KinkKernel& kernel = cached_kernel(config.kernel_order);
    const double lo_clipped = std::max(lo, std::nextafter(hz, 1.0));
    const double hi_clipped = std::min(hi, std::nextafter(1.0 - hz, 0.0));
    if (!(lo_clipped <= hi_clipped))
        fail(errc::boundary, "zero-crossing interval lies outside (h_z, 1-h_z)");

    const double step = config.fine_step(n);
    double best_t = lo_clipped;
    double best_v = std::abs(detail::kappa_from_view(view, kernel, hz, lo_clipped));
    for (double t = lo_clipped + step; t <= hi_clipped; t += step) {
        const double v = std::abs(detail::kappa_from_view(view, kernel, hz, t));
        if (v < best_v) { // strict: ties keep the smaller t
            best_v = v;
            best_t = t;
        }
    }
    return best_t;
}

} // namespace

double kappa_hat(const Dataset& data, const EstimatorConfig& config, double t,
                 BandwidthRole role) {
    config.validate();
    const double h = config.resolve_bandwidth(role, data.n());
    check_interior(t, h);
    auto view = detail::SortedView::build(data, config.f_mode);
    return detail::kappa_from_view(view, cached_kernel(config.kernel_order), h, t);
}

KappaProfile kappa_profile(const Dataset& data, const EstimatorConfig& config,
                           BandwidthRole role, std::span<const double> grid) {
    config.validate();
    auto view = detail::SortedView::build(data, config.f_mode);
    return profile_impl(data, view, config, role, grid);
}

KappaProfile detection_profile(const Dataset& data, const EstimatorConfig& config) {
    config.validate();
    auto view = detail::SortedView::build(data, config.f_mode);
    return detection_profile_impl(data, view, config);
}

double upsilon(const Dataset& data, const EstimatorConfig& config, double t,
               BandwidthRole role) {
    config.validate();
    const double h = config.resolve_bandwidth(role, data.n());
    check_interior(t, h);
    auto view = detail::SortedView::build(data, config.f_mode);
    return upsilon_impl(data, view, config, cached_kernel(config.kernel_order), t, h);
}

std::vector<Cluster> detect_kinks(const KappaProfile& profile) {
    if (profile.partition_index.size() != profile.grid.size())
        fail(errc::invalid_argument, "detection requires a profile built on the partition");
    const double h = profile.bandwidth;
    const double lo_lim = std::nextafter(h, 1.0);
    const double hi_lim = std::nextafter(1.0 - h, 0.0);

    std::vector<Cluster> clusters;
    std::size_t i = 0;
    const std::size_t g = profile.grid.size();
    while (i < g) {
        if (std::abs(profile.t_stat[i]) < profile.threshold) {
            ++i;
            continue;
        }
        std::size_t run_end = i;
        double max_stat = std::abs(profile.t_stat[i]);
        while (run_end + 1 < g &&
               profile.partition_index[run_end + 1] == profile.partition_index[run_end] + 1 &&
               std::abs(profile.t_stat[run_end + 1]) >= profile.threshold) {
            ++run_end;
            max_stat = std::max(max_stat, std::abs(profile.t_stat[run_end]));
        }
        Cluster c;
        c.first_j = profile.partition_index[i];
        c.last_j = profile.partition_index[run_end];
        c.t_lo = std::max(lo_lim, profile.grid[i] - 2.0 * h);
        c.t_hi = std::min(hi_lim, profile.grid[run_end] + 2.0 * h);
        c.max_abs_tstat = max_stat;
        clusters.push_back(c);
        i = run_end + 1;
    }
    return clusters;
}

std::vector<Cluster> merge_overlapping(std::vector<Cluster> clusters) {
    std::sort(clusters.begin(), clusters.end(),
              [](const Cluster& a, const Cluster& b) { return a.t_lo < b.t_lo; });
    // Strict overlap only: widened ranges of runs three partition steps
    // apart share exactly one endpoint, and gluing those would fuse kinks
    // separated by just over 6h into a single cluster.
    std::vector<Cluster> merged;
    for (const auto& c : clusters) {
        if (!merged.empty() && c.t_lo < merged.back().t_hi) {
            merged.back().t_hi = std::max(merged.back().t_hi, c.t_hi);
            merged.back().last_j = std::max(merged.back().last_j, c.last_j);
            merged.back().max_abs_tstat = std::max(merged.back().max_abs_tstat, c.max_abs_tstat);
        } else {
            merged.push_back(c);
        }
    }
    return merged;
}

std::pair<double, double> localize(const Dataset& data, const EstimatorConfig& config,
                                   const Cluster& cluster) {
    config.validate();
    auto view = detail::SortedView::build(data, config.f_mode);
    return localize_impl(data, view, config, data.n(), cluster);
}

double zero_crossing(const Dataset& data, const EstimatorConfig& config, double lo,
                     double hi) {
    config.validate();
    if (!(lo <= hi)) fail(errc::invalid_argument, "zero-crossing interval is empty");
    auto view = detail::SortedView::build(data, config.f_mode);
    return zero_crossing_impl(view, config, data.n(), lo, hi);
}

double rescale(const Dataset& data, double lambda_hat) {
    return empirical_quantile(data, lambda_hat);
}

std::vector<KinkEstimate> estimate(const Dataset& data, const EstimatorConfig& config) {
    config.validate();
    if (data.n() < 64) fail(errc::invalid_argument, "estimation needs n >= 64");

    auto view = detail::SortedView::build(data, config.f_mode);
    KappaProfile profile = detection_profile_impl(data, view, config);
    auto clusters = merge_overlapping(detect_kinks(profile));

    // Sign convention: near the kink kappa behaves like K2(0) * (t - lambda)
    // times the jump, so with an argmin left of the argmax the jump sign is
    // -sign(K2(0)).
    const KinkKernel& kernel = cached_kernel(config.kernel_order);
    const int orientation = kernel.eval(2, 0.0) < 0.0 ? 1 : -1;

    std::vector<KinkEstimate> estimates;
    for (const auto& cluster : clusters) {
        // A cluster whose localisation lands outside the zero-crossing band
        // (or is degenerate) is dropped; the remaining clusters still yield
        // estimates. Spurious edge exceedances would otherwise veto genuine
        // kinks elsewhere in the sample.
        try {
            auto [t_min, t_max] = localize_impl(data, view, config, data.n(), cluster);
            KinkEstimate e;
            e.cluster_lo = cluster.t_lo;
            e.cluster_hi = cluster.t_hi;
            e.t_hat_min = t_min;
            e.t_hat_max = t_max;
            e.interval_lo = std::min(t_min, t_max);
            e.interval_hi = std::max(t_min, t_max);
            e.lambda_hat =
                zero_crossing_impl(view, config, data.n(), e.interval_lo, e.interval_hi);
            e.theta_hat = rescale(data, e.lambda_hat);
            e.max_abs_tstat = cluster.max_abs_tstat;
            e.jump_sign = (t_min < t_max ? 1 : -1) * orientation;
            estimates.push_back(e);
        } catch (const Error& err) {
            if (err.code() != errc::boundary && err.code() != errc::no_extrema) throw;
        }
    }
    std::sort(estimates.begin(), estimates.end(),
              [](const KinkEstimate& a, const KinkEstimate& b) {
                  return a.lambda_hat < b.lambda_hat;
              });
    return estimates;
}

double kappa_true_quadrature(const Scenario& scenario, const KinkKernel& kernel, double h,
                             double t, double quad_tol) {
    std::vector<KinkPoint> kinks;
    auto lambdas = kink_images(scenario);
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        const auto& k = scenario.mu.kinks[i];
        kinks.push_back({lambdas[i], k.jump / design_density(scenario, k.theta)});
    }
    auto mu_f = [&](double u) { return mu_f_eval(scenario, u); };
    return kappa_oracle(kernel, mu_f, kinks, h, t, quad_tol).kappa;
}

Decomposition decompose(const Dataset& data, const Scenario& scenario,
                        const EstimatorConfig& config, double t, BandwidthRole role) {
    config.validate();
    if (!data.has_latents || data.eps.size() != data.n() || data.f_of_x.size() != data.n())
        fail(errc::missing_latent, "decomposition requires retained latents (eps, F)");
    const std::size_t n = data.n();
    const double h = config.resolve_bandwidth(role, n);
    check_interior(t, h);
    const KinkKernel& kernel = cached_kernel(config.kernel_order);
    const double denom = static_cast<double>(n) * h * h * h * h;

    double kappa_hat_acc = 0.0;
    double gamma_acc = 0.0;
    double noise_acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double k3 = kernel.eval(3, (data.f_of_x[i] - t) / h);
        if (k3 == 0.0) continue;
        kappa_hat_acc += data.y[i] * k3;
        gamma_acc += scenario.mu.eval(data.x[i]) * k3;
        noise_acc += scenario.sigma.eval(data.x[i]) * k3 * data.eps[i];
    }

    Decomposition d;
    d.kappa_hat = kappa_hat_acc / denom;
    d.noise_term = noise_acc / denom;
    d.kappa_true = kappa_true_quadrature(scenario, kernel, h, t, config.quad_tol);

    // Centring constant E gamma_1 by its own quadrature, so the two bias
    // routes are independent computations.
    std::vector<double> breaks;
    for (double lambda : kink_images(scenario)) breaks.push_back(lambda);
    auto integrand = [&](double u) {
        return mu_f_eval(scenario, u) * kernel.eval(3, (u - t) / h);
    };
    const double raw_tol = std::max(config.quad_tol * h * h * h * h, 1e-15);
    const double mean_gamma =
        integrate_with_breaks(integrand, t - h, t + h, breaks, raw_tol);
    d.bias_term = gamma_acc / denom - mean_gamma / (h * h * h * h);
    d.bias_direct = d.kappa_hat - d.kappa_true - d.noise_term;
    return d;
}

} // namespace kinkscan
