#include "rdness/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <mutex>
#include <random>
#include <thread>

#include "rdness/error.hpp"
#include "rdness/fields.hpp"

namespace rdness {

double reaction_rate(const ParticleConfig& eta, std::size_t x, const ModelParams& p) {
    if (eta.get(x)) return p.b;
    const auto& t = eta.torus();
    int occupied = 0;
    for (int i = 0; i < t.dim(); ++i) {
        occupied += eta.get(t.shift(x, i, +1)) ? 1 : 0;
        occupied += eta.get(t.shift(x, i, -1)) ? 1 : 0;
    }
    return p.a + p.lambda / (2.0 * t.dim()) * occupied;
}

FlipProposal propose_flip(const ParticleConfig& eta, const ModelParams& p, CounterRng& rng) {
    FlipProposal f;
    f.site = rng.below(eta.site_count());
    f.accepted = rng.uniform() * p.c_max() < reaction_rate(eta, f.site, p);
    return f;
}

Engine::Engine(const ModelParams& p, ParticleConfig initial, CounterRng rng, double t0)
    : p_(p), eta_(std::move(initial)), rng_(rng), time_(t0) {
    p_.validate();
    const auto& t = eta_.torus();
    if (t.dim() != p_.d || t.side() != p_.n) throw ParameterError("Engine: configuration geometry does not match params");
    const std::size_t sites = t.site_count();
    const std::size_t edges = t.edge_count();
    if (edges >= (std::size_t{1} << 32)) throw SizeError("Engine: too many edges");
    edges_ = static_cast<std::uint32_t>(edges);
    edge_threshold_ = static_cast<std::uint32_t>((std::uint64_t{1} << 32) % edges_);
    edge_ends_.resize(edges);
    for (std::size_t e = 0; e < edges; ++e)
        edge_ends_[e] = static_cast<std::uint64_t>(t.edge_tail(e)) | (static_cast<std::uint64_t>(t.edge_head(e)) << 32);
    nbr_ = t.neighbor_table();
    occ_.resize(sites);
    for (std::size_t x = 0; x < sites; ++x) occ_[x] = eta_.get(x) ? 1 : 0;
    c_max_ = p_.c_max();
    const double n2 = static_cast<double>(p_.n) * p_.n;
    exchange_rate_ = n2 * static_cast<double>(edges);
    flip_rate_ = c_max_ * static_cast<double>(sites);
}

const ParticleConfig& Engine::config() const {
    if (!packed_) {
        auto w = eta_.words();
        std::fill(w.begin(), w.end(), 0);
        for (std::size_t x = 0; x < occ_.size(); ++x) w[x >> 6] |= static_cast<std::uint64_t>(occ_[x]) << (x & 63);
        packed_ = true;
    }
    return eta_;
}

double Engine::local_rate(std::size_t x) const noexcept {
    if (occ_[x]) return p_.b;
    const std::size_t deg = 2 * static_cast<std::size_t>(p_.d);
    const std::uint32_t* nb = nbr_.data() + x * deg;
    int occupied = 0;
    for (std::size_t j = 0; j < deg; ++j) occupied += occ_[nb[j]];
    return p_.a + p_.lambda / static_cast<double>(deg) * occupied;
}

void Engine::do_exchanges(std::uint64_t count) noexcept {
    if (count == 0) return;
    packed_ = false;
    std::uint8_t* s = occ_.data();
    const std::uint64_t* ends = edge_ends_.data();
    const std::uint64_t edges = edges_;
    const std::uint32_t threshold = edge_threshold_;

    auto apply = [&](std::uint32_t e) {
        const std::uint64_t xy = ends[e];
        const auto x = static_cast<std::uint32_t>(xy);
        const auto y = static_cast<std::uint32_t>(xy >> 32);
        const std::uint8_t a = s[x];
        const std::uint8_t b = s[y];
        s[x] = b;
        s[y] = a;
    };
    // Two 32-bit Lemire draws per 64-bit output.
    auto draw = [&](std::uint32_t r32, std::uint32_t& out) {
        const std::uint64_t m = static_cast<std::uint64_t>(r32) * edges;
        if (static_cast<std::uint32_t>(m) < threshold) return false;
        out = static_cast<std::uint32_t>(m >> 32);
        return true;
    };

    std::uint64_t done = 0;
    while (done < count) {
        const std::uint64_t r = rng_();
        std::uint32_t e;
        if (draw(static_cast<std::uint32_t>(r), e)) {
            apply(e);
            ++done;
        }
        if (done < count && draw(static_cast<std::uint32_t>(r >> 32), e)) {
            apply(e);
            ++done;
        }
    }
    exchange_events += count;
}

FlipProposal Engine::do_flip_proposal() {
    // Same draws as propose_flip, on the byte state.
    ++flip_proposals;
    FlipProposal f;
    f.site = rng_.below(occ_.size());
    f.accepted = rng_.uniform() * c_max_ < local_rate(f.site);
    if (f.accepted) {
        occ_[f.site] ^= 1u;
        packed_ = false;
        ++flips_accepted;
    }
    return f;
}

StepResult Engine::step() {
    pending_flip_gap_ = -1.0;  // residual flip clock is memoryless; redraw on next advance_to
    StepResult r;
    r.dt = rng_.exponential(bound_rate());
    time_.add(r.dt);
    if (rng_.uniform() * bound_rate() < exchange_rate_) {
        const auto e = rng_.below(edges_);
        const std::size_t x = edge_ends_[e] & 0xFFFFFFFFu;
        const std::size_t y = edge_ends_[e] >> 32;
        r.kind = EventKind::Exchange;
        r.site = x;
        r.changed = occ_[x] != occ_[y];
        std::swap(occ_[x], occ_[y]);
        packed_ = packed_ && !r.changed;
        ++exchange_events;
    } else {
        const auto f = do_flip_proposal();
        r.site = f.site;
        r.kind = f.accepted ? EventKind::FlipAccepted : EventKind::FlipRejected;
        r.changed = f.accepted;
    }
    return r;
}

void Engine::advance_to(double t) {
    if (t < time()) throw ParameterError("Engine::advance_to: target time is in the past");
    for (;;) {
        if (pending_flip_gap_ < 0.0) pending_flip_gap_ = rng_.exponential(flip_rate_);
        const double remaining = t - time();
        if (pending_flip_gap_ <= remaining) {
            std::poisson_distribution<std::uint64_t> pois(exchange_rate_ * pending_flip_gap_);
            do_exchanges(pois(rng_));
            time_.add(pending_flip_gap_);
            pending_flip_gap_ = -1.0;
            do_flip_proposal();
        } else {
            if (remaining > 0.0) {
                std::poisson_distribution<std::uint64_t> pois(exchange_rate_ * remaining);
                do_exchanges(pois(rng_));
            }
            pending_flip_gap_ -= remaining;
            time_.reset(t);
            return;
        }
    }
}

ParticleConfig bernoulli_config(const Torus& t, const std::function<double(const std::array<double, 3>&)>& profile,
                                CounterRng& rng) {
    ParticleConfig eta(t);
    std::array<double, 3> pos{};
    for (std::size_t x = 0; x < t.site_count(); ++x) {
        for (int i = 0; i < t.dim(); ++i)
            pos[static_cast<std::size_t>(i)] = static_cast<double>(t.coord(x, i)) / t.side();
        const double rho = profile(pos);
        if (!(rho >= 0.0 && rho <= 1.0)) throw DomainError("bernoulli_config: profile value outside [0,1]");
        if (rng.uniform() < rho) eta.set(x, true);
    }
    return eta;
}

ParticleConfig bernoulli_config(const Torus& t, double rho, CounterRng& rng) {
    return bernoulli_config(t, [rho](const std::array<double, 3>&) { return rho; }, rng);
}

double SimConfig::effective_burn_in() const {
    if (!std::isnan(burn_in)) return burn_in;
    return 10.0 / std::abs(fixed_point(params).slope);
}

void SimConfig::validate() const {
    params.validate();
    const double b = effective_burn_in();
    if (!(b > 0.0)) throw ParameterError("SimConfig: burn_in must be > 0");
    if (!(sample_interval > 0.0)) throw ParameterError("SimConfig: sample_interval must be > 0");
    if (!(total_time > 0.0)) throw ParameterError("SimConfig: total_time must be > 0");
    if (!(total_time > b)) throw ParameterError("SimConfig: total_time must exceed burn_in");
    if (replicas < 1) throw ParameterError("SimConfig: replicas must be >= 1");
    if (threads < 1) throw ParameterError("SimConfig: threads must be >= 1");
    if (mode_cutoff < 0) throw ParameterError("SimConfig: mode_cutoff must be >= 0");
    if (2 * mode_cutoff >= params.n && mode_cutoff > 0) throw SizeError("SimConfig: mode_cutoff must be < n/2");
    if (box_radius >= 0) {
        if (params.n <= 2 * box_radius + 1) throw SizeError("SimConfig: box too large for torus (need n > 2R+1)");
        if (Box(params.d, box_radius).size() > 12) throw SizeError("SimConfig: box pattern space above 4096");
    }
}

std::vector<Wavevector> half_space_modes(int d, int cutoff, double radius) {
    std::vector<Wavevector> out;
    const int k1lo = d > 1 ? -cutoff : 0;
    const int k2lo = d > 2 ? -cutoff : 0;
    const int k1hi = d > 1 ? cutoff : 0;
    const int k2hi = d > 2 ? cutoff : 0;
    for (int k2 = k2lo; k2 <= k2hi; ++k2)
        for (int k1 = k1lo; k1 <= k1hi; ++k1)
            for (int k0 = -cutoff; k0 <= cutoff; ++k0) {
                // Keep k = 0 and the lexicographically positive member of each +-k pair (last axis first).
                const Wavevector k{k0, k1, k2};
                bool positive = false;
                bool zero = true;
                for (int i = 2; i >= 0; --i) {
                    if (k[static_cast<std::size_t>(i)] != 0) {
                        positive = k[static_cast<std::size_t>(i)] > 0;
                        zero = false;
                        break;
                    }
                }
                if (!zero && !positive) continue;
                if (radius > 0.0) {
                    const double k2n = static_cast<double>(k0) * k0 + static_cast<double>(k1) * k1 + static_cast<double>(k2) * k2;
                    if (k2n > radius * radius + 1e-9) continue;
                }
                out.push_back(k);
            }
    std::stable_sort(out.begin(), out.end(), [](const Wavevector& a, const Wavevector& b) {
        const long na = static_cast<long>(a[0]) * a[0] + static_cast<long>(a[1]) * a[1] + static_cast<long>(a[2]) * a[2];
        const long nb = static_cast<long>(b[0]) * b[0] + static_cast<long>(b[1]) * b[1] + static_cast<long>(b[2]) * b[2];
        return na < nb;
    });
    return out;
}

SampleStream run_replica(const SimConfig& cfg, std::uint64_t replica, RunTelemetry* telemetry) {
    cfg.validate();
    const auto& p = cfg.params;
    const auto fp = fixed_point(p);
    const Torus torus(p.d, p.n);
    auto rng = CounterRng::for_replica(cfg.seed, replica);

    ParticleConfig init = cfg.initial_profile ? bernoulli_config(torus, cfg.initial_profile, rng)
                                              : bernoulli_config(torus, fp.rho, rng);
    Engine engine(p, std::move(init), rng);

    SampleStream s;
    s.d = p.d;
    s.n = p.n;
    s.rho_ref = fp.rho;
    s.replica = replica;
    s.mode_set = cfg.mode_cutoff > 0 ? half_space_modes(p.d, cfg.mode_cutoff, cfg.mode_radius) : std::vector<Wavevector>{};
    std::optional<ModeProjector> projector;
    if (!s.mode_set.empty()) projector.emplace(torus, s.mode_set);
    std::optional<Box> box;
    if (cfg.box_radius >= 0) {
        box.emplace(p.d, cfg.box_radius);
        s.box_radius = cfg.box_radius;
        s.pattern_space = std::size_t{1} << box->size();
    }

    const double burn = cfg.effective_burn_in();
    const auto samples = static_cast<std::size_t>(std::floor((cfg.total_time - burn) / cfg.sample_interval + 1e-9)) + 1;
    s.times.reserve(samples);
    s.densities.reserve(samples);
    s.modes.reserve(samples * s.mode_set.size());
    if (box) s.pattern_counts.reserve(samples * s.pattern_space);
    std::vector<std::complex<double>> buf(s.mode_set.size());

    for (std::size_t j = 0; j < samples; ++j) {
        const double t = burn + static_cast<double>(j) * cfg.sample_interval;
        engine.advance_to(t);
        const auto& eta = engine.config();
        s.times.push_back(t);
        s.densities.push_back(eta.density());
        if (projector) {
            projector->project(eta, fp.rho, buf);
            for (const auto& c : buf) s.modes.emplace_back(static_cast<float>(c.real()), static_cast<float>(c.imag()));
        }
        if (box) {
            const auto base = s.pattern_counts.size();
            s.pattern_counts.resize(base + s.pattern_space, 0);
            for (std::size_t x = 0; x < eta.site_count(); ++x) ++s.pattern_counts[base + project_box(eta, *box, x)];
        }
    }

    if (!cfg.snapshot_dir.empty()) {
        std::filesystem::create_directories(cfg.snapshot_dir);
        save_snapshot(cfg.snapshot_dir + "/replica_" + std::to_string(replica) + ".snap",
                      Snapshot{engine.config(), engine.time()});
    }
    if (telemetry) {
        telemetry->events += engine.exchange_events + engine.flip_proposals;
        telemetry->flips_accepted += engine.flips_accepted;
    }
    return s;
}

RunResult run(const SimConfig& cfg) {
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();
    RunResult result;
    const auto reps = static_cast<std::size_t>(cfg.replicas);
    result.replicas.resize(reps);
    std::vector<RunTelemetry> tel(reps);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            const auto r = next.fetch_add(1);
            if (r >= reps) return;
            try {
                result.replicas[r] = run_replica(cfg, r, &tel[r]);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const auto workers = std::min<std::size_t>(static_cast<std::size_t>(cfg.threads), reps);
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);
    for (const auto& t : tel) {
        result.telemetry.events += t.events;
        result.telemetry.flips_accepted += t.flips_accepted;
    }
    result.telemetry.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

}  // namespace rdness
