#include "rdness/spde.hpp"

#include <cmath>
#include <numbers>

#include "rdness/error.hpp"
#include "rdness/simulate.hpp"

namespace rdness {

namespace {

constexpr double kEightPi2 = 8.0 * std::numbers::pi * std::numbers::pi;

double norm2(const Wavevector& k) {
    return static_cast<double>(k[0]) * k[0] + static_cast<double>(k[1]) * k[1] + static_cast<double>(k[2]) * k[2];
}

bool is_zero(const Wavevector& k) { return k[0] == 0 && k[1] == 0 && k[2] == 0; }

Wavevector negate(const Wavevector& k) { return {-k[0], -k[1], -k[2]}; }

struct Moments {
    double sum = 0.0;
    double sum2 = 0.0;
    void add(double v) {
        sum += v;
        sum2 += v * v;
    }
    [[nodiscard]] ModeCheck finish(const Wavevector& k, double theory, std::uint64_t n) const {
        ModeCheck c;
        c.k = k;
        c.theory = theory;
        const double m = sum / static_cast<double>(n);
        c.empirical = m;
        const double var = (sum2 / static_cast<double>(n) - m * m) * static_cast<double>(n) / static_cast<double>(n - 1);
        c.std_error = std::sqrt(std::max(var, 0.0) / static_cast<double>(n));
        c.z = c.std_error > 0.0 ? (c.empirical - c.theory) / c.std_error : 0.0;
        return c;
    }
};

}  // namespace

TrigPolynomial TrigPolynomial::cosine(const Wavevector& k, double amp) {
    if (is_zero(k)) return {{k}, {amp}};
    return {{k, negate(k)}, {amp / 2.0, amp / 2.0}};
}

TrigPolynomial TrigPolynomial::sine(const Wavevector& k, double amp) {
    if (is_zero(k)) return {};
    return {{k, negate(k)}, {std::complex<double>(0.0, -amp / 2.0), std::complex<double>(0.0, amp / 2.0)}};
}

TrigPolynomial& TrigPolynomial::operator+=(const TrigPolynomial& other) {
    for (std::size_t i = 0; i < other.ks.size(); ++i) {
        bool merged = false;
        for (std::size_t j = 0; j < ks.size(); ++j)
            if (ks[j] == other.ks[i]) {
                coef[j] += other.coef[i];
                merged = true;
                break;
            }
        if (!merged) {
            ks.push_back(other.ks[i]);
            coef.push_back(other.coef[i]);
        }
    }
    return *this;
}

std::complex<double> GaussianFieldSample::at(const Wavevector& k) const {
    for (std::size_t i = 0; i < ks.size(); ++i) {
        if (ks[i] == k) return coef[i];
        if (ks[i] == negate(k)) return std::conj(coef[i]);
    }
    throw ParameterError("GaussianFieldSample::at: wavevector outside the cutoff set");
}

double GaussianFieldSample::apply(const TrigPolynomial& f) const {
    std::complex<double> s = 0.0;
    for (std::size_t i = 0; i < f.ks.size(); ++i) s += f.coef[i] * at(f.ks[i]);
    return s.real();
}

GaussianFieldSample zero_field(const ModelParams& p, int cutoff) {
    if (cutoff < 0) throw ParameterError("zero_field: cutoff must be >= 0");
    const auto fp = fixed_point(p);
    GaussianFieldSample s;
    s.d = p.d;
    s.ks = half_space_modes(p.d, cutoff);
    s.coef.assign(s.ks.size(), 0.0);
    s.variance.resize(s.ks.size());
    for (std::size_t i = 0; i < s.ks.size(); ++i) s.variance[i] = mode_variance(norm2(s.ks[i]), fp);
    return s;
}

GaussianFieldSample sample_stationary(const ModelParams& p, int cutoff, CounterRng& rng) {
    auto s = zero_field(p, cutoff);
    for (std::size_t i = 0; i < s.ks.size(); ++i) {
        const double sd = std::sqrt(s.variance[i]);
        const double z1 = rng.normal();
        if (is_zero(s.ks[i])) {
            s.coef[i] = sd * z1;
        } else {
            const double z2 = rng.normal();
            s.coef[i] = sd * std::complex<double>(z1, z2) / std::numbers::sqrt2;
        }
    }
    return s;
}

double ou_noise_intensity(double k2, const FixedPoint& fp) { return kEightPi2 * k2 * fp.chi + fp.noise; }

void evolve_ou(GaussianFieldSample& s, double dt, const ModelParams& p, CounterRng& rng, bool with_noise) {
    if (!(dt > 0.0)) throw ParameterError("evolve_ou: dt must be > 0");
    const auto fp = fixed_point(p);
    for (std::size_t i = 0; i < s.ks.size(); ++i) {
        const double theta = mode_rate(norm2(s.ks[i]), fp);
        const double decay = std::exp(theta * dt);
        s.coef[i] *= decay;
        if (!with_noise) continue;
        const double sd = std::sqrt(s.variance[i] * -std::expm1(2.0 * theta * dt));
        const double z1 = rng.normal();
        if (is_zero(s.ks[i])) {
            s.coef[i] += sd * z1;
        } else {
            const double z2 = rng.normal();
            s.coef[i] += sd * std::complex<double>(z1, z2) / std::numbers::sqrt2;
        }
    }
}

std::vector<ModeCheck> stationary_variance_check(const ModelParams& p, int cutoff, std::uint64_t samples,
                                                 std::uint64_t seed) {
    if (samples < 2) throw ParameterError("stationary_variance_check: need at least 2 samples");
    auto proto = zero_field(p, cutoff);
    std::vector<Moments> acc(proto.ks.size());
    CounterRng rng(CounterRng::mix(seed ^ 0x5DE5A3Dull));
    for (std::uint64_t j = 0; j < samples; ++j) {
        const auto s = sample_stationary(p, cutoff, rng);
        for (std::size_t i = 0; i < s.ks.size(); ++i) acc[i].add(std::norm(s.coef[i]));
    }
    std::vector<ModeCheck> out;
    for (std::size_t i = 0; i < proto.ks.size(); ++i) out.push_back(acc[i].finish(proto.ks[i], proto.variance[i], samples));
    return out;
}

std::vector<ModeCheck> lag_covariance_check(const ModelParams& p, int cutoff, double lag, std::uint64_t samples,
                                            std::uint64_t seed) {
    if (samples < 2) throw ParameterError("lag_covariance_check: need at least 2 samples");
    const auto fp = fixed_point(p);
    auto proto = zero_field(p, cutoff);
    std::vector<Moments> acc(proto.ks.size());
    CounterRng rng(CounterRng::mix(seed ^ 0x1A6C0Full));
    for (std::uint64_t j = 0; j < samples; ++j) {
        const auto s0 = sample_stationary(p, cutoff, rng);
        auto s1 = s0;
        evolve_ou(s1, lag, p, rng);
        for (std::size_t i = 0; i < s0.ks.size(); ++i) acc[i].add((s1.coef[i] * std::conj(s0.coef[i])).real());
    }
    std::vector<ModeCheck> out;
    for (std::size_t i = 0; i < proto.ks.size(); ++i) {
        const double theory = proto.variance[i] * std::exp(mode_rate(norm2(proto.ks[i]), fp) * lag);
        out.push_back(acc[i].finish(proto.ks[i], theory, samples));
    }
    return out;
}

double field_variance(const TrigPolynomial& f, const ModelParams& p) {
    const auto fp = fixed_point(p);
    double s = 0.0;
    for (std::size_t i = 0; i < f.ks.size(); ++i) s += std::norm(f.coef[i]) * mode_variance(norm2(f.ks[i]), fp);
    return s;
}

std::vector<CovarianceRow> covariance_check(const ModelParams& p, int cutoff,
                                            const std::vector<std::pair<std::string, TrigPolynomial>>& battery,
                                            std::uint64_t samples, std::uint64_t seed) {
    if (samples < 2) throw ParameterError("covariance_check: need at least 2 samples");
    std::vector<Moments> acc(battery.size());
    CounterRng rng(CounterRng::mix(seed ^ 0xC0FA1Aull));
    for (std::uint64_t j = 0; j < samples; ++j) {
        const auto s = sample_stationary(p, cutoff, rng);
        for (std::size_t b = 0; b < battery.size(); ++b) {
            const double x = s.apply(battery[b].second);
            acc[b].add(x * x);
        }
    }
    std::vector<CovarianceRow> out;
    for (std::size_t b = 0; b < battery.size(); ++b) {
        const auto c = acc[b].finish({}, field_variance(battery[b].second, p), samples);
        out.push_back({battery[b].first, c.empirical, c.std_error, c.theory, c.z});
    }
    return out;
}

}  // namespace rdness
