#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "rdness/rng.hpp"
#include "rdness/stream.hpp"
#include "rdness/theory.hpp"

namespace rdness {

/// Real trigonometric polynomial f = sum_k hat f(k) e^{2 pi i k.x}; callers list both k and -k.
struct TrigPolynomial {
    std::vector<Wavevector> ks;
    std::vector<std::complex<double>> coef;

    /// amp * cos(2 pi k.x): hat f(+-k) = amp/2 (amp at k = 0).
    static TrigPolynomial cosine(const Wavevector& k, double amp = 1.0);
    /// amp * sin(2 pi k.x): hat f(k) = -i amp/2, hat f(-k) = i amp/2.
    static TrigPolynomial sine(const Wavevector& k, double amp = 1.0);
    TrigPolynomial& operator+=(const TrigPolynomial& other);
};

/**
 * Mode coefficients c_k = sqrt(lambda_k) xi_k of the stationary Gaussian
 * field on the half-space set of half_space_modes(d, K): c_0 real,
 * c_{-k} = conj(c_k).
 */
struct GaussianFieldSample {
    int d = 1;
    std::vector<Wavevector> ks;
    std::vector<std::complex<double>> coef;
    std::vector<double> variance;   ///< lambda_k

    /// c_k for k or -k in the set. Throws ParameterError otherwise.
    [[nodiscard]] std::complex<double> at(const Wavevector& k) const;
    /// X(f) = sum_k hat f(k) c_k, real for real f.
    [[nodiscard]] double apply(const TrigPolynomial& f) const;
};

/// Exact stationary draw: xi_0 = zeta_{0,1}; xi_k = (zeta_{k,1} + i zeta_{k,2})/sqrt 2 on the half space.
[[nodiscard]] GaussianFieldSample sample_stationary(const ModelParams& p, int cutoff, CounterRng& rng);

/// All-zero field on the same mode set.
[[nodiscard]] GaussianFieldSample zero_field(const ModelParams& p, int cutoff);

/**
 * Exact OU transition of every mode over dt: c_k <- e^{theta_k dt} c_k + noise
 * of variance lambda_k (1 - e^{2 theta_k dt}) (split evenly between real and
 * imaginary parts for k != 0). `with_noise = false` gives the deterministic part.
 */
void evolve_ou(GaussianFieldSample& s, double dt, const ModelParams& p, CounterRng& rng, bool with_noise = true);

/// sigma_k^2 = 8 pi^2 |k|^2 chi + G, the noise intensity of mode k.
[[nodiscard]] double ou_noise_intensity(double k2, const FixedPoint& fp);

struct ModeCheck {
    Wavevector k{};
    double empirical = 0.0;
    double std_error = 0.0;
    double theory = 0.0;
    double z = 0.0;
};

/// E|c_k|^2 over independent stationary draws vs lambda_k.
[[nodiscard]] std::vector<ModeCheck> stationary_variance_check(const ModelParams& p, int cutoff,
                                                               std::uint64_t samples, std::uint64_t seed);

/// E[Re c_k(s) conj c_k(0)] from stationary starts evolved by `lag`, vs lambda_k e^{theta_k lag}.
[[nodiscard]] std::vector<ModeCheck> lag_covariance_check(const ModelParams& p, int cutoff, double lag,
                                                          std::uint64_t samples, std::uint64_t seed);

struct CovarianceRow {
    std::string label;
    double empirical = 0.0;
    double std_error = 0.0;
    double theory = 0.0;    ///< sum_k |hat f(k)|^2 lambda_k
    double z = 0.0;
};

/// E[X(f)^2] for each f in the battery vs the closed form; the field is sampled with cutoff K.
[[nodiscard]] std::vector<CovarianceRow> covariance_check(const ModelParams& p, int cutoff,
                                                          const std::vector<std::pair<std::string, TrigPolynomial>>& battery,
                                                          std::uint64_t samples, std::uint64_t seed);

/// Closed-form E[X(f)^2] = sum_k |hat f(k)|^2 lambda_k.
[[nodiscard]] double field_variance(const TrigPolynomial& f, const ModelParams& p);

}  // namespace rdness
