#include "rdness/fields.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <mutex>
#include <numbers>

#include "rdness/error.hpp"
#include "rdness/stats.hpp"
#include "fftw_guard.hpp"

namespace rdness {

namespace {

std::size_t reduce(int k, int n) { return static_cast<std::size_t>(((k % n) + n) % n); }

std::size_t reduced_linear(const Wavevector& k, int d, int n) {
    std::size_t lin = 0;
    std::size_t stride = 1;
    for (int i = 0; i < d; ++i) {
        lin += reduce(k[static_cast<std::size_t>(i)], n) * stride;
        stride *= static_cast<std::size_t>(n);
    }
    return lin;
}

double norm2(const Wavevector& k) {
    return static_cast<double>(k[0]) * k[0] + static_cast<double>(k[1]) * k[1] + static_cast<double>(k[2]) * k[2];
}

std::mutex& fftw_mutex() { return detail::fftw_planner_mutex(); }

}  // namespace

double fluctuation_field(const ParticleConfig& eta, std::span<const double> f, double rho) {
    const auto& t = eta.torus();
    if (f.size() != t.site_count()) throw SizeError("fluctuation_field: test function size != n^d");
    double s = 0.0;
    for (std::size_t x = 0; x < f.size(); ++x) s += ((eta.get(x) ? 1.0 : 0.0) - rho) * f[x];
    return s / std::pow(static_cast<double>(t.side()), 0.5 * t.dim());
}

std::vector<double> sample_on_lattice(const Torus& t, const std::function<double(const std::array<double, 3>&)>& f) {
    std::vector<double> out(t.site_count());
    std::array<double, 3> pos{};
    for (std::size_t x = 0; x < out.size(); ++x) {
        for (int i = 0; i < t.dim(); ++i)
            pos[static_cast<std::size_t>(i)] = static_cast<double>(t.coord(x, i)) / t.side();
        out[x] = f(pos);
    }
    return out;
}

std::complex<double> FluctuationField::at(const Wavevector& k) const {
    const auto target = reduced_linear(k, d, n);
    if (full) return coef[target];
    for (std::size_t m = 0; m < ks.size(); ++m)
        if (reduced_linear(ks[m], d, n) == target) return coef[m];
    throw ParameterError("FluctuationField::at: wavevector not in the mode set");
}

ModeProjector::ModeProjector(const Torus& t, std::vector<Wavevector> ks) : torus_(t), ks_(std::move(ks)) {
    const int d = t.dim();
    const int n = t.side();
    phase_.resize(ks_.size() * static_cast<std::size_t>(d) * static_cast<std::size_t>(n));
    zero_.resize(ks_.size());
    for (std::size_t m = 0; m < ks_.size(); ++m) {
        bool z = true;
        for (int i = 0; i < d; ++i) {
            const auto ki = reduce(ks_[m][static_cast<std::size_t>(i)], n);
            if (ki != 0) z = false;
            for (int c = 0; c < n; ++c) {
                // Reduce the phase index exactly before converting to an angle.
                const auto r = (ki * static_cast<std::size_t>(c)) % static_cast<std::size_t>(n);
                const double ang = -2.0 * std::numbers::pi * static_cast<double>(r) / n;
                phase_[(m * static_cast<std::size_t>(d) + static_cast<std::size_t>(i)) * static_cast<std::size_t>(n) +
                       static_cast<std::size_t>(c)] = {std::cos(ang), std::sin(ang)};
            }
        }
        zero_[m] = z;
    }
}

void ModeProjector::project(const ParticleConfig& eta, double rho, std::span<std::complex<double>> out) const {
    if (!(eta.torus() == torus_)) throw ParameterError("ModeProjector: geometry mismatch");
    if (out.size() != ks_.size()) throw SizeError("ModeProjector: output size mismatch");
    const int d = torus_.dim();
    const auto n = static_cast<std::size_t>(torus_.side());
    const double norm = std::pow(static_cast<double>(n), -0.5 * d);

    std::vector<std::array<std::uint32_t, 3>> occupied;
    occupied.reserve(eta.particle_count());
    const auto words = eta.words();
    for (std::size_t w = 0; w < words.size(); ++w) {
        std::uint64_t bits = words[w];
        while (bits) {
            const auto x = w * 64 + static_cast<std::size_t>(std::countr_zero(bits));
            bits &= bits - 1;
            std::array<std::uint32_t, 3> c{};
            for (int i = 0; i < d; ++i) c[static_cast<std::size_t>(i)] = static_cast<std::uint32_t>(torus_.coord(x, i));
            occupied.push_back(c);
        }
    }
    const double count = static_cast<double>(occupied.size());
    const double centred_zero = (count - rho * static_cast<double>(torus_.site_count())) * norm;
    for (std::size_t m = 0; m < ks_.size(); ++m) {
        if (zero_[m]) {
            out[m] = centred_zero;
            continue;
        }
        // sum_x e^{-2 pi i k.x/n} vanishes for k != 0 mod n, so only particles contribute.
        const auto* ph = phase_.data() + m * static_cast<std::size_t>(d) * n;
        std::complex<double> s = 0.0;
        if (d == 1) {
            for (const auto& c : occupied) s += ph[c[0]];
        } else if (d == 2) {
            for (const auto& c : occupied) s += ph[c[0]] * ph[n + c[1]];
        } else {
            for (const auto& c : occupied) s += ph[c[0]] * ph[n + c[1]] * ph[2 * n + c[2]];
        }
        out[m] = s * norm;
    }
}

FluctuationField fourier_modes(const ParticleConfig& eta, double rho, int cutoff) {
    const auto& t = eta.torus();
    if (cutoff < 0 || 2 * cutoff >= t.side()) throw SizeError("fourier_modes: cutoff must satisfy 0 <= K < n/2");
    FluctuationField f;
    f.d = t.dim();
    f.n = t.side();
    f.rho = rho;
    const int d = t.dim();
    for (int k2 = (d > 2 ? -cutoff : 0); k2 <= (d > 2 ? cutoff : 0); ++k2)
        for (int k1 = (d > 1 ? -cutoff : 0); k1 <= (d > 1 ? cutoff : 0); ++k1)
            for (int k0 = -cutoff; k0 <= cutoff; ++k0) f.ks.push_back({k0, k1, k2});
    f.coef.resize(f.ks.size());
    ModeProjector(t, f.ks).project(eta, rho, f.coef);
    return f;
}

FluctuationField fourier_modes_full(const ParticleConfig& eta, double rho) {
    const auto& t = eta.torus();
    const int d = t.dim();
    const int n = t.side();
    const std::size_t sites = t.site_count();
    FluctuationField f;
    f.d = d;
    f.n = n;
    f.rho = rho;
    f.full = true;
    auto* buf = fftw_alloc_complex(sites);
    if (!buf) throw NumericalError("fourier_modes_full: allocation failed");
    fftw_plan plan;
    {
        std::lock_guard lock(fftw_mutex());
        std::array<int, 3> dims{n, n, n};
        plan = fftw_plan_dft(d, dims.data(), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    }
    // FFTW's last dimension is fastest, matching axis 0 of the torus encoding.
    for (std::size_t x = 0; x < sites; ++x) {
        buf[x][0] = (eta.get(x) ? 1.0 : 0.0) - rho;
        buf[x][1] = 0.0;
    }
    fftw_execute(plan);
    const double norm = std::pow(static_cast<double>(n), -0.5 * d);
    f.ks.resize(sites);
    f.coef.resize(sites);
    for (std::size_t x = 0; x < sites; ++x) {
        Wavevector k{};
        for (int i = 0; i < d; ++i) {
            const int c = t.coord(x, i);
            k[static_cast<std::size_t>(i)] = 2 * c > n ? c - n : c;
        }
        f.ks[x] = k;
        f.coef[x] = {buf[x][0] * norm, buf[x][1] * norm};
    }
    {
        std::lock_guard lock(fftw_mutex());
        fftw_destroy_plan(plan);
    }
    fftw_free(buf);
    return f;
}

double sobolev_norm(const FluctuationField& field, double m) {
    double s = 0.0;
    for (std::size_t i = 0; i < field.ks.size(); ++i)
        s += std::norm(field.coef[i]) * std::pow(1.0 + norm2(field.ks[i]), m);
    return std::sqrt(s);
}

double LocalObservable::mean(double rho) const {
    if (!(rho >= 0.0 && rho <= 1.0)) throw DomainError("LocalObservable::mean: density outside [0,1]");
    const std::size_t bits = box.size();
    if (table.size() != (std::size_t{1} << bits)) throw SizeError("LocalObservable: table size != 2^|B_R|");
    double s = 0.0;
    for (std::size_t p = 0; p < table.size(); ++p) {
        const int ones = std::popcount(p);
        s += table[p] * std::pow(rho, ones) * std::pow(1.0 - rho, static_cast<int>(bits) - ones);
    }
    return s;
}

LocalObservable LocalObservable::occupation(int d) { return {Box(d, 0), {0.0, 1.0}}; }

LocalObservable LocalObservable::neighbor_product(int d, int axis) {
    if (axis < 0 || axis >= d) throw ParameterError("neighbor_product: axis out of range");
    LocalObservable o{Box(d, 1), {}};
    const std::size_t origin = o.box.origin();
    std::size_t stride = 1;
    for (int i = 0; i < axis; ++i) stride *= 3;
    const std::size_t other = origin + stride;
    o.table.resize(std::size_t{1} << o.box.size());
    for (std::size_t p = 0; p < o.table.size(); ++p) o.table[p] = ((p >> origin) & 1u) && ((p >> other) & 1u) ? 1.0 : 0.0;
    return o;
}

LocalObservable LocalObservable::constant(int d, double c) { return {Box(d, 0), {c, c}}; }

double observable_field(const ParticleConfig& eta, const LocalObservable& psi, std::span<const double> f, double rho) {
    const auto& t = eta.torus();
    if (f.size() != t.site_count()) throw SizeError("observable_field: test function size != n^d");
    const double avg = psi.mean(rho);
    double s = 0.0;
    for (std::size_t x = 0; x < f.size(); ++x) s += (psi(project_box(eta, psi.box, x)) - avg) * f[x];
    return s / static_cast<double>(t.site_count());
}

BlockKernels block_kernels(int ell, int n, int d) {
    if (ell < 1) throw ParameterError("block_kernels: l must be >= 1");
    if (!(2 * ell - 1 < n)) throw SizeError("block_kernels: need 2l - 1 < n");
    BlockKernels k{ell, Torus(d, n), {}, {}, {}};
    // One-dimensional factors; both kernels are tensor products.
    std::vector<double> q1(static_cast<std::size_t>(2 * ell - 1), 0.0);
    for (int i = 0; i < ell; ++i)
        for (int j = 0; j < ell; ++j) q1[static_cast<std::size_t>(i + j)] += 1.0 / (static_cast<double>(ell) * ell);
    const double p1 = 1.0 / ell;
    const std::size_t sites = k.torus.site_count();
    k.p.assign(sites, 0.0);
    k.q.assign(sites, 0.0);
    for (std::size_t x = 0; x < sites; ++x) {
        double pv = 1.0;
        double qv = 1.0;
        for (int i = 0; i < d; ++i) {
            const int c = k.torus.coord(x, i);
            pv *= c < ell ? p1 : 0.0;
            qv *= c < 2 * ell - 1 ? q1[static_cast<std::size_t>(c)] : 0.0;
        }
        k.p[x] = pv;
        k.q[x] = qv;
        bool in = true;
        for (int i = 0; i < d; ++i) in = in && k.torus.coord(x, i) < 2 * ell - 1;
        if (in) k.support.push_back(x);
    }
    return k;
}

double block_average(const ParticleConfig& eta, std::size_t x, const BlockKernels& k, double rho) {
    if (!(eta.torus() == k.torus)) throw ParameterError("block_average: geometry mismatch");
    double s = 0.0;
    for (std::size_t y : k.support) s += k.q[y] * ((eta.get(k.torus.add(x, y)) ? 1.0 : 0.0) - rho);
    return s;
}

std::vector<SpectrumEstimate> spectrum_estimate(std::span<const SampleStream> streams, const ModelParams& p,
                                                bool skip_zero) {
    if (streams.empty()) throw ParameterError("spectrum_estimate: no streams");
    const auto& modes = streams.front().mode_set;
    for (const auto& s : streams)
        if (s.mode_set != modes) throw ParameterError("spectrum_estimate: streams carry different mode sets");
    const auto fp = fixed_point(p);
    std::vector<SpectrumEstimate> out;
    for (std::size_t m = 0; m < modes.size(); ++m) {
        const double k2 = norm2(modes[m]);
        if (skip_zero && k2 == 0.0) continue;
        SpectrumEstimate e;
        e.k = modes[m];
        e.k2 = k2;
        e.theory = mode_variance(k2, fp);

        // Autocorrelation time: average over replicas weighted by length.
        std::vector<std::vector<double>> sq(streams.size());
        double tau_acc = 0.0;
        double w_acc = 0.0;
        std::complex<double> sum_x = 0.0;
        std::size_t total = 0;
        for (std::size_t r = 0; r < streams.size(); ++r) {
            const auto& s = streams[r];
            sq[r].resize(s.size());
            for (std::size_t j = 0; j < s.size(); ++j) {
                const auto x = s.mode(j, m);
                sq[r][j] = std::norm(x);
                sum_x += x;
            }
            total += s.size();
            if (s.size() >= 4) {
                tau_acc += integrated_autocorr_time(sq[r]) * static_cast<double>(s.size());
                w_acc += static_cast<double>(s.size());
            }
        }
        if (total == 0) throw ParameterError("spectrum_estimate: empty streams");
        e.tau_int = w_acc > 0.0 ? tau_acc / w_acc : 1.0;
        e.batch_length = static_cast<std::size_t>(std::ceil(20.0 * e.tau_int));

        std::vector<double> bm;
        for (const auto& v : sq) {
            const auto b = batch_means(v, e.batch_length);
            bm.insert(bm.end(), b.begin(), b.end());
        }
        e.batches = bm.size();
        e.insufficient = e.batches < 30;
        double mean_sq = 0.0;
        for (const auto& v : sq)
            for (double x : v) mean_sq += x;
        mean_sq /= static_cast<double>(total);
        const auto mean_x = sum_x / static_cast<double>(total);
        e.variance = mean_sq - std::norm(mean_x);
        e.std_error = bm.size() >= 2 ? std::sqrt(variance(bm) / static_cast<double>(bm.size())) : 0.0;
        e.z = e.std_error > 0.0 ? (e.variance - e.theory) / e.std_error : 0.0;
        out.push_back(e);
    }
    return out;
}

}  // namespace rdness
