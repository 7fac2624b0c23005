#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "rdness/lattice.hpp"
#include "rdness/rng.hpp"
#include "rdness/stream.hpp"
#include "rdness/theory.hpp"

namespace rdness {

/// c_x(eta) = (a + lambda/(2d) sum_{y~x} eta_y)(1 - eta_x) + b eta_x.
[[nodiscard]] double reaction_rate(const ParticleConfig& eta, std::size_t x, const ModelParams& p);

enum class EventKind : std::uint8_t { Exchange, FlipAccepted, FlipRejected };

struct StepResult {
    double dt = 0.0;
    EventKind kind = EventKind::Exchange;
    std::size_t site = 0;   ///< flipped site, or tail of the exchanged edge
    bool changed = false;   ///< configuration differs from before the event
};

struct FlipProposal {
    std::size_t site = 0;
    bool accepted = false;
};

/// One thinned flip proposal on a frozen configuration: uniform site, accepted with c_x/c_max.
[[nodiscard]] FlipProposal propose_flip(const ParticleConfig& eta, const ModelParams& p, CounterRng& rng);

/**
 * Continuous-time simulator of the generator
 *   L f = n^2 sum_{x~y} (f(eta^{x,y}) - f(eta)) + sum_x c_x (f(eta^x) - f(eta))
 * by uniformization: exchanges at rate n^2 on each of the d n^d edges, flip
 * proposals at rate c_max per site thinned to c_x.
 *
 * Owns its configuration and RNG; single-threaded.
 */
class Engine {
public:
    Engine(const ModelParams& p, ParticleConfig initial, CounterRng rng, double t0 = 0.0);

    [[nodiscard]] const ParticleConfig& config() const;
    [[nodiscard]] double time() const noexcept { return time_.value(); }
    [[nodiscard]] const ModelParams& params() const noexcept { return p_; }
    [[nodiscard]] CounterRng& rng() noexcept { return rng_; }

    /// Total bound rate n^2 d n^d + c_max n^d.
    [[nodiscard]] double bound_rate() const noexcept { return exchange_rate_ + flip_rate_; }
    [[nodiscard]] double exchange_rate() const noexcept { return exchange_rate_; }
    [[nodiscard]] double flip_proposal_rate() const noexcept { return flip_rate_; }

    /// One event of the uniformized chain, with an Exp(bound_rate) waiting time.
    StepResult step();

    /**
     * Run until model time `t` (>= time()). Flip proposals form a Poisson
     * process of rate c_max n^d; between consecutive proposals the number of
     * exchanges is Poisson(n^2 d n^d * gap). Equal in law to iterating step().
     */
    void advance_to(double t);

    std::uint64_t exchange_events = 0;
    std::uint64_t flip_proposals = 0;
    std::uint64_t flips_accepted = 0;

private:
    void do_exchanges(std::uint64_t count) noexcept;
    FlipProposal do_flip_proposal();
    [[nodiscard]] double local_rate(std::size_t x) const noexcept;

    ModelParams p_;
    // One byte per site is the working state; the packed copy is rebuilt on demand.
    std::vector<std::uint8_t> occ_;
    std::vector<std::uint32_t> nbr_;
    mutable ParticleConfig eta_;
    mutable bool packed_ = true;
    CounterRng rng_;
    KahanSum time_;
    std::vector<std::uint64_t> edge_ends_;  // tail | head << 32 for edge e = axis * N + tail
    std::uint32_t edges_ = 0;
    std::uint32_t edge_threshold_ = 0;
    double c_max_ = 0.0;
    double exchange_rate_ = 0.0;
    double flip_rate_ = 0.0;
    double pending_flip_gap_ = -1.0;   // < 0: not drawn
};

/// Product Bernoulli configuration with site densities profile(x/n).
[[nodiscard]] ParticleConfig bernoulli_config(const Torus& t, const std::function<double(const std::array<double, 3>&)>& profile,
                                              CounterRng& rng);
[[nodiscard]] ParticleConfig bernoulli_config(const Torus& t, double rho, CounterRng& rng);

struct SimConfig {
    ModelParams params;
    std::uint64_t seed = 1;
    double burn_in = std::numeric_limits<double>::quiet_NaN();  ///< NaN: 10 / |F'(rho*)|
    double sample_interval = 0.1;
    double total_time = 10.0;    ///< samples are taken at burn_in + j * sample_interval <= total_time
    int replicas = 1;
    int threads = 1;

    /// Initial density profile u0(x) on the unit torus; empty: constant rho*.
    std::function<double(const std::array<double, 3>&)> initial_profile;

    int mode_cutoff = 0;         ///< record modes 0 < k (half space) with ||k||_inf <= cutoff, plus k = 0
    double mode_radius = -1.0;   ///< if > 0, keep only modes with ||k||_2 <= mode_radius
    int box_radius = -1;         ///< record box-pattern counts for B_R when >= 0
    std::string snapshot_dir;    ///< write final snapshot per replica when non-empty

    [[nodiscard]] double effective_burn_in() const;
    void validate() const;
};

struct RunTelemetry {
    std::uint64_t events = 0;
    std::uint64_t flips_accepted = 0;
    double wall_seconds = 0.0;
};

struct RunResult {
    std::vector<SampleStream> replicas;
    RunTelemetry telemetry;
};

/// Run one replica (index `replica`) to completion.
[[nodiscard]] SampleStream run_replica(const SimConfig& cfg, std::uint64_t replica, RunTelemetry* telemetry = nullptr);

/// Run all replicas, in parallel over `cfg.threads` workers; bit-exact given (seed, replica).
[[nodiscard]] RunResult run(const SimConfig& cfg);

/// Half-space mode set used by the simulator: k = 0 and one representative of each +-k pair.
[[nodiscard]] std::vector<Wavevector> half_space_modes(int d, int cutoff, double radius = -1.0);

}  // namespace rdness
