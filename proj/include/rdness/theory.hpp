#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace rdness {

/**
 * Parameters of the reaction-diffusion exclusion process on T_n^d.
 *
 * Reaction rates c_x = (a + lambda/(2d) * sum_{y~x} eta_y)(1 - eta_x) + b eta_x,
 * exclusion at rate n^2 per nearest-neighbour edge.
 */
struct ModelParams {
    double a = 1.0;
    double b = 1.0;
    double lambda = 0.0;
    int d = 1;
    int n = 16;

    /// Throws ParameterError unless a, b > 0, lambda > -a, d in {1,2,3}, n >= 2.
    void validate() const;

    /// eps0 = min(a, a + lambda, b), the uniform lower bound on c_x.
    [[nodiscard]] double eps0() const noexcept;
    /// c_max = max(a + max(lambda, 0), b), the uniform upper bound on c_x.
    [[nodiscard]] double c_max() const noexcept;
};

/// Reaction drift F(rho) = (a + lambda rho)(1 - rho) - b rho. Domain: [0,1].
[[nodiscard]] double reaction_drift(double rho, const ModelParams& p);
/// F'(rho) = lambda (1 - rho) - (a + lambda rho) - b.
[[nodiscard]] double reaction_drift_slope(double rho, const ModelParams& p);
/// G(rho) = (a + lambda rho)(1 - rho) + b rho = F(rho) + 2 b rho. Domain: [0,1].
[[nodiscard]] double reaction_noise(double rho, const ModelParams& p);

/// Unique zero of F in (0,1), by bisection down to adjacent doubles.
[[nodiscard]] double rho_star(const ModelParams& p);

/// Mobility chi(rho) = rho (1 - rho).
[[nodiscard]] inline double mobility(double rho) noexcept { return rho * (1.0 - rho); }

/**
 * Inverse log-Sobolev lower bound for the reaction part:
 * kappa(rho) = 2 rho (1-rho) |log(rho/(1-rho))| / (eps0 |1 - 2 rho|),
 * replaced by its limit 1/eps0 when |1 - 2 rho| < 1e-8.
 */
[[nodiscard]] double kappa(double rho, const ModelParams& p);

/// Green's-function scale g_d(n): n, log n, or 1 for d = 1, 2, >= 3.
[[nodiscard]] double green_scale(double n, int d);

/// Constants evaluated at the stable density.
struct FixedPoint {
    double rho = 0.0;        ///< rho*
    double chi = 0.0;        ///< chi(rho*)
    double slope = 0.0;      ///< F'(rho*) < 0
    double noise = 0.0;      ///< G(rho*)
    double eps0 = 0.0;
    double kappa = 0.0;      ///< kappa(rho*)
    double lambda = 0.0;
    /// G(rho*) + 2 F'(rho*) chi(rho*), reduced with F(rho*) = 0 to 2 lambda rho* (1 - rho*)^2. Zero iff lambda = 0.
    [[nodiscard]] double excess() const noexcept { return 2.0 * lambda * rho * (1.0 - rho) * (1.0 - rho); }
};

[[nodiscard]] FixedPoint fixed_point(const ModelParams& p);

/// Limit mode variance lambda_k at wavevector k.
struct SpectrumPrediction {
    std::array<int, 3> k{};
    double k2 = 0.0;         ///< ||k||^2
    double variance = 0.0;   ///< lambda_k
};

/**
 * lambda_k = chi + (G + 2F'chi)/(8 pi^2 |k|^2 - 2F') evaluated at rho*.
 *
 * Computed twice, in the white-noise-plus-correction form and in the
 * gradient-noise-plus-reaction-noise form; throws ConsistencyError if the two
 * differ by more than 1e-12 relative.
 */
[[nodiscard]] double mode_variance(double k2, const ModelParams& p);
[[nodiscard]] double mode_variance(double k2, const FixedPoint& fp);
[[nodiscard]] SpectrumPrediction spectrum(std::span<const int> k, const ModelParams& p);

/// The two closed forms of lambda_k separately (for auditing).
struct SpectrumForms {
    double correction_form = 0.0;
    double parseval_form = 0.0;
};
[[nodiscard]] SpectrumForms mode_variance_forms(double k2, const FixedPoint& fp);

/// Relaxation exponent theta_k = -4 pi^2 |k|^2 + F'(rho*) of mode k.
[[nodiscard]] double mode_rate(double k2, const FixedPoint& fp) noexcept;

/// Creation and annihilation rates averaged over Bernoulli(rho): A = (a + lambda rho)(1-rho), B = b rho.
struct MftRates {
    double creation = 0.0;
    double annihilation = 0.0;
};
[[nodiscard]] MftRates mft_rates(double rho, const ModelParams& p);

/// Xi(r) = (r - log r - 1)/2, the relative entropy of N(0, r) w.r.t. N(0, 1).
[[nodiscard]] double xi(double r);

/// Sum of Xi(lambda_k / chi) over the cube ||k||_inf <= K of Z^d.
[[nodiscard]] double gaussian_entropy_sum(const ModelParams& p, int cutoff);

/// Sum of Xi(lambda_k / chi) over the shell cutoff_lo < ||k||_inf <= cutoff_hi.
[[nodiscard]] double gaussian_entropy_shell(const ModelParams& p, int cutoff_lo, int cutoff_hi);

/**
 * Diagnostic for the smallness condition C kappa(rho*) A(lambda/(d rho*)) < 1/2
 * and A(lambda/(d rho*)) <= 1, with A(u) = u(1+u). C is not known; it is an input.
 */
struct SmallnessDiagnostic {
    double value = 0.0;   ///< C kappa A
    double a_term = 0.0;  ///< A(|lambda|/(d rho*))
    bool satisfied = false;
};
[[nodiscard]] SmallnessDiagnostic smallness_diagnostic(const ModelParams& p, double constant = 1.0);

/// Result of a Monte Carlo check of a concentration inequality.
struct ConcentrationReport {
    double estimate = 0.0;    ///< Monte Carlo estimate of the left-hand side
    double std_error = 0.0;
    double bound = 0.0;       ///< right-hand side
    double exact = 0.0;       ///< closed form of the left-hand side when known (NaN otherwise)
    bool passed = false;
};

/// A bounded random variable: sampler plus its almost-sure range [lo, hi].
struct BoundedVariable {
    std::function<double(std::uint64_t /*index*/, std::uint64_t /*seed*/)> sample;
    double lo = 0.0;
    double hi = 1.0;
    std::function<double(double /*theta*/)> exact_log_mgf;  ///< log E e^{theta(X - EX)} if known
};

[[nodiscard]] BoundedVariable bernoulli_variable(double p);
[[nodiscard]] BoundedVariable uniform_variable(double lo, double hi);
[[nodiscard]] BoundedVariable constant_variable(double c);

/**
 * Hoeffding: log E[exp(theta (X - EX))] <= (hi - lo)^2 theta^2 / 8.
 * Passes when the Monte Carlo estimate is below the bound plus three standard
 * errors (delta method on the log of the sample mean).
 */
[[nodiscard]] ConcentrationReport hoeffding_check(const BoundedVariable& x, double theta, std::uint64_t samples,
                                                  std::uint64_t seed = 1);

/**
 * Subgaussian moment: X ~ N(0, sigma2) attains E[exp(gamma X^2)] = (1 - 2 sigma2 gamma)^{-1/2}.
 * Estimated by importance-sampled Monte Carlo (the plain estimator has infinite
 * variance for gamma >= 1/(4 sigma2)); passes when within three standard errors.
 * Throws ParameterError unless gamma < 1/(2 sigma2).
 */
[[nodiscard]] ConcentrationReport subgaussian_check(double sigma2, double gamma, std::uint64_t samples = 200000,
                                                    std::uint64_t seed = 1);

}  // namespace rdness
