#include "rdness/stats.hpp"

#include <algorithm>
#include <cmath>

#include "rdness/error.hpp"
#include "rdness/rng.hpp"

namespace rdness {

double mean(std::span<const double> x) {
    if (x.empty()) return 0.0;
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
    if (x.size() < 2) return 0.0;
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size() - 1);
}

std::vector<double> autocorrelation(std::span<const double> x, std::size_t max_lag) {
    const std::size_t n = x.size();
    max_lag = std::min(max_lag, n == 0 ? 0 : n - 1);
    std::vector<double> rho(max_lag + 1, 0.0);
    if (n == 0) return rho;
    const double m = mean(x);
    double c0 = 0.0;
    for (double v : x) c0 += (v - m) * (v - m);
    if (c0 <= 0.0) {
        rho[0] = 1.0;
        return rho;
    }
    for (std::size_t t = 0; t <= max_lag; ++t) {
        double c = 0.0;
        for (std::size_t i = 0; i + t < n; ++i) c += (x[i] - m) * (x[i + t] - m);
        rho[t] = c / c0;
    }
    return rho;
}

double integrated_autocorr_time(std::span<const double> x, double window_c) {
    const std::size_t n = x.size();
    if (n < 4) return 1.0;
    const double m = mean(x);
    double c0 = 0.0;
    for (double v : x) c0 += (v - m) * (v - m);
    if (c0 <= 0.0) return 1.0;
    double tau = 1.0;
    for (std::size_t t = 1; t < n / 2; ++t) {
        double c = 0.0;
        for (std::size_t i = 0; i + t < n; ++i) c += (x[i] - m) * (x[i + t] - m);
        tau += 2.0 * c / c0;
        if (static_cast<double>(t) >= window_c * tau) break;
    }
    return std::max(tau, 1.0);
}

std::vector<double> batch_means(std::span<const double> x, std::size_t length) {
    if (length == 0) throw ParameterError("batch_means: length must be >= 1");
    std::vector<double> out;
    for (std::size_t b = 0; (b + 1) * length <= x.size(); ++b) out.push_back(mean(x.subspan(b * length, length)));
    return out;
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
    std::vector<double> ones(x.size(), 1.0);
    auto f = weighted_linear_fit(x, y, ones);
    // Unweighted: rescale slope_se by the residual standard deviation.
    const std::size_t n = x.size();
    if (n > 2) {
        double rss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = y[i] - f.intercept - f.slope * x[i];
            rss += r * r;
        }
        f.slope_se *= std::sqrt(rss / static_cast<double>(n - 2));
    } else {
        f.slope_se = 0.0;
    }
    return f;
}

LinearFit weighted_linear_fit(std::span<const double> x, std::span<const double> y, std::span<const double> sigma) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n || sigma.size() != n) throw ParameterError("linear_fit: need >= 2 matching points");
    double s = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(sigma[i] > 0.0)) throw ParameterError("linear_fit: sigma must be > 0");
        const double w = 1.0 / (sigma[i] * sigma[i]);
        s += w;
        sx += w * x[i];
        sy += w * y[i];
        sxx += w * x[i] * x[i];
        sxy += w * x[i] * y[i];
    }
    const double det = s * sxx - sx * sx;
    if (!(det > 0.0)) throw NumericalError("linear_fit: degenerate abscissae");
    LinearFit f;
    f.slope = (s * sxy - sx * sy) / det;
    f.intercept = (sxx * sy - sx * sxy) / det;
    f.slope_se = std::sqrt(s / det);
    double ss_tot = 0.0, ss_res = 0.0;
    const double ym = sy / s;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = 1.0 / (sigma[i] * sigma[i]);
        ss_tot += w * (y[i] - ym) * (y[i] - ym);
        const double r = y[i] - f.intercept - f.slope * x[i];
        ss_res += w * r * r;
    }
    f.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return f;
}

double bootstrap_sd(std::size_t count, std::size_t resamples, std::uint64_t seed,
                    const std::function<double(std::span<const std::size_t>)>& statistic) {
    if (count == 0 || resamples < 2) throw ParameterError("bootstrap_sd: need count >= 1 and resamples >= 2");
    CounterRng rng(CounterRng::mix(seed ^ 0xB007B007ull));
    std::vector<std::size_t> idx(count);
    std::vector<double> stats(resamples);
    for (std::size_t r = 0; r < resamples; ++r) {
        for (auto& i : idx) i = rng.below(count);
        stats[r] = statistic(idx);
    }
    return std::sqrt(variance(stats));
}

}  // namespace rdness
