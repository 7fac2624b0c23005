#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace rdness {

[[nodiscard]] double mean(std::span<const double> x);
/// Unbiased sample variance; 0 for fewer than two values.
[[nodiscard]] double variance(std::span<const double> x);

/**
 * Integrated autocorrelation time tau = 1 + 2 sum_{t>=1} rho(t), in samples,
 * with Sokal's self-consistent window W >= c * tau (c = 6). Returns 1 for
 * series shorter than 4 or with zero variance.
 */
[[nodiscard]] double integrated_autocorr_time(std::span<const double> x, double window_c = 6.0);

/// Normalised autocorrelation rho(0..max_lag); rho(0) = 1.
[[nodiscard]] std::vector<double> autocorrelation(std::span<const double> x, std::size_t max_lag);

/// Means of consecutive non-overlapping batches of `length`; a trailing partial batch is dropped.
[[nodiscard]] std::vector<double> batch_means(std::span<const double> x, std::size_t length);

/// Ordinary least squares y = intercept + slope x.
struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
    double r2 = 0.0;
};
[[nodiscard]] LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

/// Weighted least squares with weights 1/sigma^2; slope_se from the weighted normal equations.
[[nodiscard]] LinearFit weighted_linear_fit(std::span<const double> x, std::span<const double> y,
                                            std::span<const double> sigma);

/// Bootstrap standard deviation of `statistic` over `resamples` draws of the index set [0, count).
[[nodiscard]] double bootstrap_sd(std::size_t count, std::size_t resamples, std::uint64_t seed,
                                  const std::function<double(std::span<const std::size_t>)>& statistic);

}  // namespace rdness
