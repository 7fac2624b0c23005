#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rdness/lattice.hpp"
#include "rdness/stream.hpp"

namespace rdness {

/**
 * Histogram of box patterns under Pi_R, kept per configuration so resampling
 * can act on whole configurations. Pattern bit j is the box offset j of Box(d, R).
 */
struct BoxMarginal {
    int d = 1;
    int radius = 0;
    int n = 0;
    std::size_t centers_per_config = 0;
    std::vector<std::uint64_t> counts;          ///< pooled, size 2^{|B_R|}
    std::uint64_t total = 0;
    std::vector<std::uint32_t> config_counts;   ///< configs x patterns, row-major

    [[nodiscard]] std::size_t pattern_space() const noexcept { return counts.size(); }
    [[nodiscard]] std::size_t configs() const noexcept {
        return counts.empty() ? 0 : config_counts.size() / counts.size();
    }
    [[nodiscard]] std::vector<double> frequencies() const;
    /// Merge another marginal with the same (d, R, n). Associative.
    BoxMarginal& merge(const BoxMarginal& other);
    /// Sampling-equivalent number of independent centres, from the spread of per-config frequencies.
    [[nodiscard]] double effective_samples() const;
    /// Throws ConsistencyError when counts do not sum to total.
    void validate() const;
};

/// Empty marginal; guards n > 2R+1 and |B_R| <= 12.
[[nodiscard]] BoxMarginal empty_marginal(int d, int n, int radius);

/// Pool all n^d centres (or only centre 0 when pooled = false) of each configuration.
[[nodiscard]] BoxMarginal collect_marginal(std::span<const ParticleConfig> configs, int radius, bool pooled = true);

/// Marginal from the pattern counts recorded in streams; every sample is one configuration.
[[nodiscard]] BoxMarginal collect_marginal(std::span<const SampleStream> streams);

/// Bernoulli(rho)^{B_R} probability of every pattern.
[[nodiscard]] std::vector<double> product_marginal(int d, int radius, double rho);

struct TvEstimate {
    double tv = 0.0;
    double error = 0.0;        ///< bootstrap standard deviation
    double bias_floor = 0.0;   ///< sum_p sqrt(p(1-p)/N_eff) / 2
    double effective_samples = 0.0;
    int resamples = 0;
};

/// Plug-in TV between the empirical marginal and the Bernoulli(rho) product.
[[nodiscard]] double plug_in_tv(std::span<const double> freq, std::span<const double> reference);

/// Plug-in TV with a bootstrap over configurations.
[[nodiscard]] TvEstimate tv_to_product(const BoxMarginal& m, double rho, int resamples = 200, std::uint64_t seed = 1);

struct PinskerAudit {
    double tv = 0.0;
    double kl = 0.0;           ///< H(empirical | product)
    bool passed = false;       ///< 2 tv^2 <= kl
};

/// Throws ParameterError unless every product probability is positive.
[[nodiscard]] PinskerAudit pinsker_audit(std::span<const double> freq, std::span<const double> reference);
[[nodiscard]] PinskerAudit pinsker_audit(const BoxMarginal& m, double rho);

}  // namespace rdness
