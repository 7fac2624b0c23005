#include "rdness/localeq.hpp"

#include <bit>
#include <cmath>

#include "rdness/error.hpp"
#include "rdness/rng.hpp"
#include "rdness/stats.hpp"

namespace rdness {

BoxMarginal empty_marginal(int d, int n, int radius) {
    if (radius < 0) throw ParameterError("BoxMarginal: radius must be >= 0");
    if (n <= 2 * radius + 1) throw SizeError("BoxMarginal: box too large for torus (need n > 2R+1)");
    const Box box(d, radius);
    if (box.size() > 12) throw SizeError("BoxMarginal: pattern space above 4096");
    BoxMarginal m;
    m.d = d;
    m.radius = radius;
    m.n = n;
    m.counts.assign(std::size_t{1} << box.size(), 0);
    return m;
}

std::vector<double> BoxMarginal::frequencies() const {
    std::vector<double> f(counts.size(), 0.0);
    if (total == 0) return f;
    for (std::size_t p = 0; p < counts.size(); ++p) f[p] = static_cast<double>(counts[p]) / static_cast<double>(total);
    return f;
}

BoxMarginal& BoxMarginal::merge(const BoxMarginal& other) {
    if (other.d != d || other.radius != radius || other.n != n || other.counts.size() != counts.size())
        throw ParameterError("BoxMarginal::merge: shape mismatch");
    if (total > 0 && other.total > 0 && other.centers_per_config != centers_per_config)
        throw ParameterError("BoxMarginal::merge: pooled and single-centre marginals cannot be merged");
    if (total == 0) centers_per_config = other.centers_per_config;
    for (std::size_t p = 0; p < counts.size(); ++p) counts[p] += other.counts[p];
    total += other.total;
    config_counts.insert(config_counts.end(), other.config_counts.begin(), other.config_counts.end());
    return *this;
}

void BoxMarginal::validate() const {
    std::uint64_t s = 0;
    for (auto c : counts) s += c;
    if (s != total) throw ConsistencyError("BoxMarginal: counts do not sum to total");
    if (!counts.empty() && config_counts.size() % counts.size() != 0)
        throw ConsistencyError("BoxMarginal: ragged per-configuration counts");
}

double BoxMarginal::effective_samples() const {
    const std::size_t c = configs();
    if (total == 0) return 0.0;
    // Spatial overlap floor: disjoint boxes per configuration.
    const double box_sites = std::pow(2.0 * radius + 1.0, d);
    const double disjoint = std::max(1.0, std::floor(std::pow(static_cast<double>(n), d) / box_sites));
    const double fallback = static_cast<double>(c) * std::min(disjoint, static_cast<double>(centers_per_config));
    if (c < 2 || centers_per_config == 0) return std::max(fallback, 1.0);
    // Design effect from the between-configuration spread of frequencies.
    const auto freq = frequencies();
    const double per = static_cast<double>(centers_per_config);
    double observed = 0.0;
    double binomial = 0.0;
    for (std::size_t p = 0; p < counts.size(); ++p) {
        std::vector<double> fc(c);
        for (std::size_t j = 0; j < c; ++j) fc[j] = config_counts[j * counts.size() + p] / per;
        observed += variance(fc);
        binomial += freq[p] * (1.0 - freq[p]) / per;
    }
    if (!(observed > 0.0) || !(binomial > 0.0)) return std::max(fallback, 1.0);
    const double deff = std::max(1.0, observed / binomial);
    return static_cast<double>(total) / deff;
}

BoxMarginal collect_marginal(std::span<const ParticleConfig> configs, int radius, bool pooled) {
    if (configs.empty()) throw ParameterError("collect_marginal: no configurations");
    const auto& t0 = configs.front().torus();
    auto m = empty_marginal(t0.dim(), t0.side(), radius);
    const Box box(t0.dim(), radius);
    const std::size_t np = m.counts.size();
    m.centers_per_config = pooled ? t0.site_count() : 1;
    m.config_counts.assign(configs.size() * np, 0);
    for (std::size_t j = 0; j < configs.size(); ++j) {
        if (!(configs[j].torus() == t0)) throw ParameterError("collect_marginal: configurations on different tori");
        for (std::size_t x = 0; x < m.centers_per_config; ++x) {
            const auto pat = project_box(configs[j], box, x);
            ++m.config_counts[j * np + pat];
            ++m.counts[pat];
        }
    }
    m.total = configs.size() * m.centers_per_config;
    return m;
}

BoxMarginal collect_marginal(std::span<const SampleStream> streams) {
    if (streams.empty()) throw ParameterError("collect_marginal: no streams");
    const auto& s0 = streams.front();
    if (s0.box_radius < 0) throw ParameterError("collect_marginal: stream has no pattern counts");
    auto m = empty_marginal(s0.d, s0.n, s0.box_radius);
    const std::size_t np = m.counts.size();
    m.centers_per_config = static_cast<std::size_t>(std::pow(static_cast<double>(s0.n), s0.d) + 0.5);
    for (const auto& s : streams) {
        if (s.d != s0.d || s.n != s0.n || s.box_radius != s0.box_radius || s.pattern_space != np)
            throw ParameterError("collect_marginal: streams disagree on (d, n, R)");
        m.config_counts.insert(m.config_counts.end(), s.pattern_counts.begin(), s.pattern_counts.end());
        for (std::size_t j = 0; j < s.size(); ++j) {
            const auto row = s.patterns(j);
            for (std::size_t p = 0; p < np; ++p) m.counts[p] += row[p];
        }
        m.total += s.size() * m.centers_per_config;
    }
    m.validate();
    return m;
}

std::vector<double> product_marginal(int d, int radius, double rho) {
    const Box box(d, radius);
    if (box.size() > 12) throw SizeError("product_marginal: pattern space above 4096");
    const int sites = static_cast<int>(box.size());
    std::vector<double> out(std::size_t{1} << sites);
    for (std::size_t p = 0; p < out.size(); ++p) {
        const int ones = std::popcount(p);
        out[p] = std::pow(rho, ones) * std::pow(1.0 - rho, sites - ones);
    }
    return out;
}

double plug_in_tv(std::span<const double> freq, std::span<const double> reference) {
    if (freq.size() != reference.size()) throw ParameterError("plug_in_tv: size mismatch");
    double s = 0.0;
    for (std::size_t p = 0; p < freq.size(); ++p) s += std::abs(freq[p] - reference[p]);
    return 0.5 * s;
}

TvEstimate tv_to_product(const BoxMarginal& m, double rho, int resamples, std::uint64_t seed) {
    m.validate();
    if (m.total == 0) throw ParameterError("tv_to_product: empty marginal");
    const auto ref = product_marginal(m.d, m.radius, rho);
    const auto freq = m.frequencies();
    TvEstimate out;
    out.tv = plug_in_tv(freq, ref);
    out.effective_samples = m.effective_samples();
    for (double f : freq) out.bias_floor += std::sqrt(f * (1.0 - f) / out.effective_samples);
    out.bias_floor *= 0.5;
    const std::size_t c = m.configs();
    const std::size_t np = m.pattern_space();
    if (c >= 2 && resamples > 1) {
        out.resamples = resamples;
        std::vector<double> boot(np);
        out.error = bootstrap_sd(c, resamples, seed, [&](std::span<const std::size_t> idx) {
            std::fill(boot.begin(), boot.end(), 0.0);
            double tot = 0.0;
            for (auto j : idx)
                for (std::size_t p = 0; p < np; ++p) {
                    const double v = m.config_counts[j * np + p];
                    boot[p] += v;
                    tot += v;
                }
            for (auto& b : boot) b /= tot;
            return plug_in_tv(boot, ref);
        });
    }
    return out;
}

PinskerAudit pinsker_audit(std::span<const double> freq, std::span<const double> reference) {
    if (freq.size() != reference.size()) throw ParameterError("pinsker_audit: size mismatch");
    PinskerAudit a;
    for (std::size_t p = 0; p < freq.size(); ++p) {
        if (!(reference[p] > 0.0)) throw ParameterError("pinsker_audit: reference has a zero-probability pattern");
        if (freq[p] > 0.0) a.kl += freq[p] * std::log(freq[p] / reference[p]);
    }
    a.kl = std::max(a.kl, 0.0);
    a.tv = plug_in_tv(freq, reference);
    a.passed = 2.0 * a.tv * a.tv <= a.kl + 1e-15;
    return a;
}

PinskerAudit pinsker_audit(const BoxMarginal& m, double rho) {
    return pinsker_audit(m.frequencies(), product_marginal(m.d, m.radius, rho));
}

}  // namespace rdness
