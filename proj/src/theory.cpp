#include "rdness/theory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rdness/error.hpp"
#include "rdness/rng.hpp"

namespace rdness {

namespace {

constexpr double kFourPi2 = 4.0 * std::numbers::pi * std::numbers::pi;

void check_density(double rho, const char* what) {
    if (!(rho >= 0.0 && rho <= 1.0)) throw DomainError(std::string(what) + ": density outside [0,1]");
}

}  // namespace

void ModelParams::validate() const {
    if (!(a > 0.0)) throw ParameterError("ModelParams: a must be > 0");
    if (!(b > 0.0)) throw ParameterError("ModelParams: b must be > 0");
    if (!(lambda > -a)) throw ParameterError("ModelParams: lambda must be > -a");
    if (d < 1 || d > 3) throw ParameterError("ModelParams: d must be 1, 2 or 3");
    if (n < 2) throw ParameterError("ModelParams: n must be >= 2");
}

double ModelParams::eps0() const noexcept { return std::min({a, a + lambda, b}); }

double ModelParams::c_max() const noexcept { return std::max(a + std::max(lambda, 0.0), b); }

double reaction_drift(double rho, const ModelParams& p) {
    check_density(rho, "F");
    return (p.a + p.lambda * rho) * (1.0 - rho) - p.b * rho;
}

double reaction_drift_slope(double rho, const ModelParams& p) {
    check_density(rho, "F'");
    return p.lambda * (1.0 - rho) - (p.a + p.lambda * rho) - p.b;
}

double reaction_noise(double rho, const ModelParams& p) {
    check_density(rho, "G");
    return (p.a + p.lambda * rho) * (1.0 - rho) + p.b * rho;
}

double rho_star(const ModelParams& p) {
    p.validate();
    // F(0) = a > 0 > -b = F(1) and F is quadratic with a single sign change on [0,1].
    double lo = 0.0;
    double hi = 1.0;
    // Bisect to adjacent doubles, then keep the endpoint with the smaller residual.
    for (;;) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double f = reaction_drift(mid, p);
        if (f == 0.0) return mid;
        if (f > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return std::abs(reaction_drift(lo, p)) <= std::abs(reaction_drift(hi, p)) ? lo : hi;
}

double kappa(double rho, const ModelParams& p) {
    if (!(rho > 0.0 && rho < 1.0)) throw DomainError("kappa: density must lie in (0,1)");
    const double eps0 = p.eps0();
    const double asym = std::abs(1.0 - 2.0 * rho);
    if (asym < 1e-8) return 1.0 / eps0;
    return 2.0 * rho * (1.0 - rho) * std::abs(std::log(rho / (1.0 - rho))) / (eps0 * asym);
}

double green_scale(double n, int d) {
    if (!(n >= 1.0)) throw DomainError("g_d: n must be >= 1");
    if (d == 1) return n;
    if (d == 2) return std::log(n);
    return 1.0;
}

FixedPoint fixed_point(const ModelParams& p) {
    FixedPoint fp;
    fp.rho = rho_star(p);
    fp.chi = mobility(fp.rho);
    fp.slope = reaction_drift_slope(fp.rho, p);
    fp.noise = reaction_noise(fp.rho, p);
    fp.eps0 = p.eps0();
    fp.kappa = kappa(fp.rho, p);
    fp.lambda = p.lambda;
    return fp;
}

SpectrumForms mode_variance_forms(double k2, const FixedPoint& fp) {
    const double w = kFourPi2 * k2;
    SpectrumForms f;
    f.correction_form = fp.chi + fp.excess() / (2.0 * w - 2.0 * fp.slope);
    f.parseval_form = w * fp.chi / (w - fp.slope) + fp.noise / (2.0 * w - 2.0 * fp.slope);
    return f;
}

double mode_variance(double k2, const FixedPoint& fp) {
    const auto f = mode_variance_forms(k2, fp);
    const double scale = std::max(std::abs(f.correction_form), std::abs(f.parseval_form));
    if (std::abs(f.correction_form - f.parseval_form) > 1e-12 * scale)
        throw ConsistencyError("spectrum: the two closed forms of lambda_k disagree");
    return f.correction_form;
}

double mode_variance(double k2, const ModelParams& p) { return mode_variance(k2, fixed_point(p)); }

SpectrumPrediction spectrum(std::span<const int> k, const ModelParams& p) {
    SpectrumPrediction s;
    for (std::size_t i = 0; i < k.size() && i < 3; ++i) {
        s.k[i] = k[i];
        s.k2 += static_cast<double>(k[i]) * k[i];
    }
    s.variance = mode_variance(s.k2, p);
    return s;
}

double mode_rate(double k2, const FixedPoint& fp) noexcept { return -kFourPi2 * k2 + fp.slope; }

MftRates mft_rates(double rho, const ModelParams& p) {
    check_density(rho, "mft_rates");
    return {(p.a + p.lambda * rho) * (1.0 - rho), p.b * rho};
}

double xi(double r) {
    if (!(r > 0.0)) throw DomainError("Xi: r must be > 0");
    // r - 1 - log r, written to keep precision for r near 1.
    return 0.5 * ((r - 1.0) - std::log1p(r - 1.0));
}

double gaussian_entropy_shell(const ModelParams& p, int lo, int hi) {
    if (lo < -1 || hi < lo) throw ParameterError("gaussian_entropy_shell: need -1 <= lo <= hi");
    const auto fp = fixed_point(p);
    if (fp.excess() == 0.0) return 0.0;
    // lambda_k depends on |k|^2 only; cache per |k|^2.
    std::vector<double> cache(static_cast<std::size_t>(p.d) * static_cast<std::size_t>(hi) * hi + 1, -1.0);
    auto term = [&](long k2) {
        auto& c = cache[static_cast<std::size_t>(k2)];
        if (c < 0.0) c = xi(mode_variance(static_cast<double>(k2), fp) / fp.chi);
        return c;
    };
    double sum = 0.0;
    const int d = p.d;
    for (int k0 = -hi; k0 <= hi; ++k0)
        for (int k1 = (d > 1 ? -hi : 0); k1 <= (d > 1 ? hi : 0); ++k1)
            for (int k2 = (d > 2 ? -hi : 0); k2 <= (d > 2 ? hi : 0); ++k2) {
                const int inf = std::max({std::abs(k0), std::abs(k1), std::abs(k2)});
                if (inf <= lo) continue;
                sum += term(static_cast<long>(k0) * k0 + static_cast<long>(k1) * k1 + static_cast<long>(k2) * k2);
            }
    return sum;
}

double gaussian_entropy_sum(const ModelParams& p, int cutoff) {
    if (cutoff < 0) throw ParameterError("gaussian_entropy_sum: cutoff must be >= 0");
    return gaussian_entropy_shell(p, -1, cutoff);
}

SmallnessDiagnostic smallness_diagnostic(const ModelParams& p, double constant) {
    const auto fp = fixed_point(p);
    SmallnessDiagnostic s;
    const double u = std::abs(p.lambda) / (p.d * fp.rho);
    s.a_term = u * (1.0 + u);
    s.value = constant * fp.kappa * s.a_term;
    s.satisfied = s.value < 0.5 && s.a_term <= 1.0;
    return s;
}

BoundedVariable bernoulli_variable(double p) {
    BoundedVariable v;
    v.lo = 0.0;
    v.hi = 1.0;
    v.exact_log_mgf = [p](double theta) { return std::log1p(p * std::expm1(theta)) - theta * p; };
    v.sample = [p](std::uint64_t i, std::uint64_t seed) {
        CounterRng r(CounterRng::mix(seed), i);
        return r.uniform() < p ? 1.0 : 0.0;
    };
    return v;
}

BoundedVariable uniform_variable(double lo, double hi) {
    BoundedVariable v;
    v.lo = lo;
    v.hi = hi;
    v.exact_log_mgf = [lo, hi](double theta) {
        const double w = (hi - lo) * theta;
        if (w == 0.0) return 0.0;
        return std::log(std::expm1(w) / w) - w / 2.0;
    };
    v.sample = [lo, hi](std::uint64_t i, std::uint64_t seed) {
        CounterRng r(CounterRng::mix(seed), i);
        return lo + (hi - lo) * r.uniform();
    };
    return v;
}

BoundedVariable constant_variable(double c) {
    BoundedVariable v;
    v.lo = c;
    v.hi = c;
    v.exact_log_mgf = [](double) { return 0.0; };
    v.sample = [c](std::uint64_t, std::uint64_t) { return c; };
    return v;
}

ConcentrationReport hoeffding_check(const BoundedVariable& x, double theta, std::uint64_t samples,
                                    std::uint64_t seed) {
    if (samples < 2) throw ParameterError("hoeffding_check: need at least 2 samples");
    if (!std::isfinite(theta)) throw ParameterError("hoeffding_check: theta must be finite");
    std::vector<double> xs(samples);
    double mean = 0.0;
    for (std::uint64_t i = 0; i < samples; ++i) {
        xs[i] = x.sample(i, seed);
        mean += xs[i];
    }
    mean /= static_cast<double>(samples);
    double m1 = 0.0;
    double m2 = 0.0;
    for (double v : xs) {
        const double e = std::exp(theta * (v - mean));
        m1 += e;
        m2 += e * e;
    }
    m1 /= static_cast<double>(samples);
    m2 /= static_cast<double>(samples);
    const double var = std::max(0.0, m2 - m1 * m1) * static_cast<double>(samples) / static_cast<double>(samples - 1);
    ConcentrationReport r;
    r.estimate = std::log(m1);
    r.std_error = std::sqrt(var / static_cast<double>(samples)) / m1;
    r.bound = (x.hi - x.lo) * (x.hi - x.lo) * theta * theta / 8.0;
    r.exact = x.exact_log_mgf ? x.exact_log_mgf(theta) : std::numeric_limits<double>::quiet_NaN();
    r.passed = r.estimate <= r.bound + 3.0 * r.std_error;
    return r;
}

ConcentrationReport subgaussian_check(double sigma2, double gamma, std::uint64_t samples, std::uint64_t seed) {
    if (!(sigma2 > 0.0)) throw ParameterError("subgaussian_check: sigma2 must be > 0");
    if (!(gamma < 1.0 / (2.0 * sigma2))) throw ParameterError("subgaussian_check: need gamma < 1/(2 sigma2)");
    if (samples < 2) throw ParameterError("subgaussian_check: need at least 2 samples");
    // Proposal N(0, s2) with 1/s2 = 1/sigma2 - 2 alpha gamma; the weighted integrand is
    // sqrt(s2/sigma2) exp(gamma (1 - alpha) y^2), of finite variance iff alpha > 2 - 1/(2 sigma2 gamma).
    double alpha = 0.0;
    if (gamma > 0.0) {
        const double alpha_min = std::max(0.0, 2.0 - 1.0 / (2.0 * sigma2 * gamma));
        alpha = 0.5 * (alpha_min + 1.0);
    }
    const double s2 = 1.0 / (1.0 / sigma2 - 2.0 * alpha * gamma);
    const double scale = std::sqrt(s2 / sigma2);
    const double s = std::sqrt(s2);
    CounterRng rng(CounterRng::mix(seed ^ 0x5B6C0FFEEull));
    double m1 = 0.0;
    double m2 = 0.0;
    for (std::uint64_t i = 0; i < samples; ++i) {
        const double y = s * rng.normal();
        const double w = scale * std::exp(gamma * (1.0 - alpha) * y * y);
        m1 += w;
        m2 += w * w;
    }
    m1 /= static_cast<double>(samples);
    m2 /= static_cast<double>(samples);
    ConcentrationReport r;
    r.estimate = m1;
    r.std_error = std::sqrt(std::max(0.0, m2 - m1 * m1) / static_cast<double>(samples - 1));
    r.bound = 1.0 / std::sqrt(1.0 - 2.0 * sigma2 * gamma);
    r.exact = r.bound;
    r.passed = std::abs(r.estimate - r.bound) <= 3.0 * r.std_error + 1e-12 * r.bound;
    return r;
}

}  // namespace rdness
