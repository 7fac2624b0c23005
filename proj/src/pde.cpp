#include "rdness/pde.hpp"

#include <fftw3.h>

#include <boost/math/quadrature/exp_sinh.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <thread>

#include "fftw_guard.hpp"
#include "rdness/error.hpp"
#include "rdness/fields.hpp"
#include "rdness/simulate.hpp"

namespace rdness {

namespace {

constexpr double kFourPi2 = 4.0 * std::numbers::pi * std::numbers::pi;

std::size_t grid_points(int d, int m) {
    std::size_t s = 1;
    for (int i = 0; i < d; ++i) s *= static_cast<std::size_t>(m);
    return s;
}

int grid_coord(std::size_t j, int axis, int m) {
    std::size_t v = j;
    for (int i = 0; i < axis; ++i) v /= static_cast<std::size_t>(m);
    return static_cast<int>(v % static_cast<std::size_t>(m));
}

// F without the domain check; the solver checks bounds itself.
double drift(double u, const ModelParams& p) { return (p.a + p.lambda * u) * (1.0 - u) - p.b * u; }

double norm2(const Wavevector& k) {
    return static_cast<double>(k[0]) * k[0] + static_cast<double>(k[1]) * k[1] + static_cast<double>(k[2]) * k[2];
}

/// Complex-to-complex transforms on the M^d grid, planned once.
class SpectralGrid {
public:
    SpectralGrid(int d, int m) : size_(grid_points(d, m)), symbol_(size_) {
        buf_ = fftw_alloc_complex(size_);
        if (!buf_) throw NumericalError("solve_hydro: allocation failed");
        std::array<int, 3> dims{m, m, m};
        {
            std::lock_guard lock(detail::fftw_planner_mutex());
            fwd_ = fftw_plan_dft(d, dims.data(), buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
            bwd_ = fftw_plan_dft(d, dims.data(), buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
        }
        for (std::size_t j = 0; j < size_; ++j) {
            double k2 = 0.0;
            for (int i = 0; i < d; ++i) {
                const int c = grid_coord(j, i, m);
                const int k = 2 * c > m ? c - m : c;
                k2 += static_cast<double>(k) * k;
            }
            symbol_[j] = -kFourPi2 * k2;
        }
    }
    SpectralGrid(const SpectralGrid&) = delete;
    SpectralGrid& operator=(const SpectralGrid&) = delete;
    ~SpectralGrid() {
        {
            std::lock_guard lock(detail::fftw_planner_mutex());
            fftw_destroy_plan(fwd_);
            fftw_destroy_plan(bwd_);
        }
        fftw_free(buf_);
    }

    void forward(std::span<const double> in, std::vector<std::complex<double>>& out) {
        for (std::size_t j = 0; j < size_; ++j) {
            buf_[j][0] = in[j];
            buf_[j][1] = 0.0;
        }
        fftw_execute(fwd_);
        out.resize(size_);
        for (std::size_t j = 0; j < size_; ++j) out[j] = {buf_[j][0], buf_[j][1]};
    }
    void backward(const std::vector<std::complex<double>>& in, std::vector<double>& out) {
        for (std::size_t j = 0; j < size_; ++j) {
            buf_[j][0] = in[j].real();
            buf_[j][1] = in[j].imag();
        }
        fftw_execute(bwd_);
        out.resize(size_);
        const double inv = 1.0 / static_cast<double>(size_);
        for (std::size_t j = 0; j < size_; ++j) out[j] = buf_[j][0] * inv;
    }
    [[nodiscard]] double symbol(std::size_t j) const { return symbol_[j]; }
    [[nodiscard]] std::size_t size() const { return size_; }

private:
    std::size_t size_;
    std::vector<double> symbol_;
    fftw_complex* buf_ = nullptr;
    fftw_plan fwd_{};
    fftw_plan bwd_{};
};

}  // namespace

DensityProfile DensityProfile::sample(int d, int m, const std::function<double(const std::array<double, 3>&)>& f) {
    if (d < 1 || d > 3 || m < 2) throw ParameterError("DensityProfile: need d in {1,2,3} and M >= 2");
    DensityProfile u{d, m, std::vector<double>(grid_points(d, m))};
    std::array<double, 3> x{};
    for (std::size_t j = 0; j < u.u.size(); ++j) {
        for (int i = 0; i < d; ++i) x[static_cast<std::size_t>(i)] = static_cast<double>(grid_coord(j, i, m)) / m;
        u.u[j] = f(x);
    }
    return u;
}

DensityProfile DensityProfile::constant(int d, int m, double value) {
    return sample(d, m, [value](const std::array<double, 3>&) { return value; });
}

double DensityProfile::mean() const {
    double s = 0.0;
    for (double v : u) s += v;
    return u.empty() ? 0.0 : s / static_cast<double>(u.size());
}

double hydro_max_step(const ModelParams& p) { return 1.0 / (std::abs(p.lambda) + p.a + p.b); }

HydroTrajectory solve_hydro(const DensityProfile& u0, double T, const ModelParams& p, double dt,
                            std::span<const double> output_times, double bound_tol) {
    p.validate();
    if (u0.u.size() != grid_points(u0.d, u0.m)) throw SizeError("solve_hydro: profile size != M^d");
    if (!(T >= 0.0)) throw ParameterError("solve_hydro: T must be >= 0");
    if (!(dt > 0.0) || dt > hydro_max_step(p)) throw ParameterError("solve_hydro: step outside the stability bound");
    for (double v : u0.u)
        if (!(v >= -bound_tol && v <= 1.0 + bound_tol)) throw DomainError("solve_hydro: initial profile outside [0,1]");

    std::vector<double> checkpoints(output_times.begin(), output_times.end());
    for (double t : checkpoints)
        if (!(t >= 0.0 && t <= T)) throw ParameterError("solve_hydro: output time outside [0, T]");
    checkpoints.push_back(T);
    std::sort(checkpoints.begin(), checkpoints.end());
    checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()), checkpoints.end());

    const double gamma = 1.0 - 1.0 / std::numbers::sqrt2;
    const double delta = 1.0 - 1.0 / (2.0 * gamma);
    SpectralGrid grid(u0.d, u0.m);
    const std::size_t size = grid.size();

    HydroTrajectory traj;
    std::vector<double> u = u0.u;
    std::vector<double> f0(size), f1(size), u1(size);
    std::vector<std::complex<double>> uh, f0h, f1h, u1h(size), u2h(size);

    auto record = [&](double t) {
        traj.times.push_back(t);
        traj.profiles.push_back(DensityProfile{u0.d, u0.m, u});
    };
    auto track = [&](const std::vector<double>& v) {
        for (double x : v) {
            traj.min_value = std::min(traj.min_value, x);
            traj.max_value = std::max(traj.max_value, x);
            if (!(x >= -bound_tol && x <= 1.0 + bound_tol))
                throw NumericalError("solve_hydro: maximum principle violated (value " + std::to_string(x) + ")");
        }
    };
    track(u);

    double t = 0.0;
    for (double target : checkpoints) {
        const double span = target - t;
        const auto steps = static_cast<std::size_t>(std::ceil(span / dt - 1e-12));
        const double h = steps > 0 ? span / static_cast<double>(steps) : 0.0;
        for (std::size_t s = 0; s < steps; ++s) {
            grid.forward(u, uh);
            for (std::size_t j = 0; j < size; ++j) f0[j] = drift(u[j], p);
            grid.forward(f0, f0h);
            for (std::size_t j = 0; j < size; ++j) u1h[j] = (uh[j] + gamma * h * f0h[j]) / (1.0 - gamma * h * grid.symbol(j));
            grid.backward(u1h, u1);
            for (std::size_t j = 0; j < size; ++j) f1[j] = drift(u1[j], p);
            grid.forward(f1, f1h);
            for (std::size_t j = 0; j < size; ++j) {
                const double a = grid.symbol(j);
                u2h[j] = (uh[j] + h * ((1.0 - gamma) * a * u1h[j] + delta * f0h[j] + (1.0 - delta) * f1h[j])) /
                         (1.0 - gamma * h * a);
            }
            grid.backward(u2h, u);
            track(u);
        }
        t = target;
        record(t);
    }
    return traj;
}

double cosine_amplitude(const DensityProfile& u, const Wavevector& k) {
    double s = 0.0;
    for (std::size_t j = 0; j < u.u.size(); ++j) {
        double phase = 0.0;
        for (int i = 0; i < u.d; ++i)
            phase += static_cast<double>(k[static_cast<std::size_t>(i)]) * grid_coord(j, i, u.m) / u.m;
        s += u.u[j] * std::cos(2.0 * std::numbers::pi * phase);
    }
    return 2.0 * s / static_cast<double>(u.u.size());
}

std::vector<std::complex<double>> semigroup_apply(std::span<const Wavevector> ks,
                                                  std::span<const std::complex<double>> coef, double t,
                                                  const ModelParams& p) {
    if (ks.size() != coef.size()) throw SizeError("semigroup_apply: length mismatch");
    if (!(t >= 0.0)) throw ParameterError("semigroup_apply: t must be >= 0");
    const auto fp = fixed_point(p);
    std::vector<std::complex<double>> out(coef.size());
    for (std::size_t i = 0; i < ks.size(); ++i) out[i] = std::exp(mode_rate(norm2(ks[i]), fp) * t) * coef[i];
    return out;
}

SemigroupIdentity semigroup_energy_identity(std::span<const Wavevector> ks, std::span<const std::complex<double>> coef,
                                            const ModelParams& p) {
    if (ks.size() != coef.size()) throw SizeError("semigroup_energy_identity: length mismatch");
    const auto fp = fixed_point(p);
    std::vector<double> w(ks.size()), theta(ks.size()), k2(ks.size());
    double norm_f = 0.0;
    for (std::size_t i = 0; i < ks.size(); ++i) {
        w[i] = std::norm(coef[i]);
        k2[i] = norm2(ks[i]);
        theta[i] = mode_rate(k2[i], fp);
        norm_f += w[i];
    }
    auto grad = [&](double t) {
        double s = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * kFourPi2 * k2[i] * std::exp(2.0 * theta[i] * t);
        return s;
    };
    auto mass = [&](double t) {
        double s = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * std::exp(2.0 * theta[i] * t);
        return s;
    };
    boost::math::quadrature::exp_sinh<double> integrator;
    SemigroupIdentity r;
    r.gradient_integral = integrator.integrate(grad, 0.0, std::numeric_limits<double>::infinity());
    r.mass_integral = integrator.integrate(mass, 0.0, std::numeric_limits<double>::infinity());
    r.lhs = r.gradient_integral;
    r.rhs = 0.5 * norm_f + fp.slope * r.mass_integral;
    for (std::size_t i = 0; i < w.size(); ++i) r.closed_form_lhs += w[i] * kFourPi2 * k2[i] / (-2.0 * theta[i]);
    r.error = std::abs(r.lhs - r.rhs);
    return r;
}

HydroComparison hydro_vs_particles(const std::function<double(const std::array<double, 3>&)>& u0,
                                   const ModelParams& p, int grid, std::span<const double> times, int replicas,
                                   std::uint64_t seed, int threads) {
    p.validate();
    if (grid < 2 || p.n % grid != 0) throw ParameterError("hydro_vs_particles: grid M must divide n");
    if (replicas < 1) throw ParameterError("hydro_vs_particles: replicas must be >= 1");
    std::vector<double> ts(times.begin(), times.end());
    std::sort(ts.begin(), ts.end());
    if (ts.empty() || ts.front() < 0.0) throw ParameterError("hydro_vs_particles: need nonnegative times");
    const int ell = p.n / grid;
    const auto kern = block_kernels(ell, p.n, p.d);
    const Torus torus(p.d, p.n);
    const std::size_t points = grid_points(p.d, grid);

    // Grid point j sits at site j * l; the q^l window is centred by shifting l - 1 along each axis.
    std::vector<std::size_t> anchor(points);
    for (std::size_t j = 0; j < points; ++j) {
        std::array<int, 3> c{};
        for (int i = 0; i < p.d; ++i) c[static_cast<std::size_t>(i)] = grid_coord(j, i, grid) * ell - (ell - 1);
        anchor[j] = torus.offset(0, std::span<const int>(c.data(), static_cast<std::size_t>(p.d)));
    }

    const auto hydro = solve_hydro(DensityProfile::sample(p.d, grid, u0), ts.back(), p,
                                   std::min(1e-4, hydro_max_step(p)), ts);
    auto pde_at = [&](double t) -> const std::vector<double>& {
        for (std::size_t i = 0; i < hydro.times.size(); ++i)
            if (hydro.times[i] == t) return hydro.profiles[i].u;
        throw ConsistencyError("hydro_vs_particles: missing PDE checkpoint");
    };

    // per_rep[r][ti * points + j]
    std::vector<std::vector<double>> per_rep(static_cast<std::size_t>(replicas));
    std::vector<std::uint64_t> events(static_cast<std::size_t>(replicas), 0);
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            const int r = next.fetch_add(1);
            if (r >= replicas) return;
            try {
                auto rng = CounterRng::for_replica(seed, static_cast<std::uint64_t>(r));
                Engine engine(p, bernoulli_config(torus, u0, rng), rng);
                auto& out = per_rep[static_cast<std::size_t>(r)];
                out.resize(ts.size() * points);
                for (std::size_t ti = 0; ti < ts.size(); ++ti) {
                    engine.advance_to(ts[ti]);
                    const auto& eta = engine.config();
                    for (std::size_t j = 0; j < points; ++j) out[ti * points + j] = block_average(eta, anchor[j], kern, 0.0);
                }
                events[static_cast<std::size_t>(r)] = engine.exchange_events + engine.flip_proposals;
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const int workers = std::max(1, std::min(threads, replicas));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    HydroComparison cmp;
    cmp.grid = grid;
    cmp.replicas = replicas;
    for (auto e : events) cmp.events += e;
    for (std::size_t ti = 0; ti < ts.size(); ++ti) {
        HydroComparisonRow row;
        row.n = p.n;
        row.t = ts[ti];
        row.pde = pde_at(ts[ti]);
        row.particle.assign(points, 0.0);
        for (const auto& rep : per_rep)
            for (std::size_t j = 0; j < points; ++j) row.particle[j] += rep[ti * points + j] / replicas;
        double s = 0.0;
        for (std::size_t j = 0; j < points; ++j) s += (row.particle[j] - row.pde[j]) * (row.particle[j] - row.pde[j]);
        row.l2_error = std::sqrt(s / static_cast<double>(points));
        for (const auto& rep : per_rep) {
            double e = 0.0;
            for (std::size_t j = 0; j < points; ++j)
                e += (rep[ti * points + j] - row.pde[j]) * (rep[ti * points + j] - row.pde[j]);
            row.mean_replica_error += std::sqrt(e / static_cast<double>(points)) / replicas;
        }
        cmp.rows.push_back(std::move(row));
    }
    return cmp;
}

}  // namespace rdness
