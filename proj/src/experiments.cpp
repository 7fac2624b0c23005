#include "rdness/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <sstream>

#include "rdness/error.hpp"
#include "rdness/exact.hpp"
#include "rdness/fields.hpp"
#include "rdness/flows.hpp"
#include "rdness/io.hpp"
#include "rdness/localeq.hpp"
#include "rdness/pde.hpp"
#include "rdness/rng.hpp"
#include "rdness/simulate.hpp"
#include "rdness/spde.hpp"
#include "rdness/stats.hpp"

namespace rdness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class Stopwatch {
public:
    [[nodiscard]] double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

void prepare(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
}

ModelParams with_size(ModelParams p, int d, int n) {
    p.d = d;
    p.n = n;
    return p;
}

}  // namespace

bool ExperimentOutput::passed() const {
    return std::all_of(gates.begin(), gates.end(), [](const Gate& g) { return g.passed; });
}

json to_json(const ModelParams& p) { return {{"a", p.a}, {"b", p.b}, {"lambda", p.lambda}, {"d", p.d}, {"n", p.n}}; }

fs::path write_manifest(const ExperimentOutput& out, const json& config, const fs::path& out_dir) {
    json m;
    m["manifest_version"] = kManifestVersion;
    m["library_version"] = kLibraryVersion;
    m["experiment"] = out.name;
    m["config"] = config;
    m["config_digest"] = git_blob_sha1(config.dump());
    json files = json::array();
    for (const auto& f : out.files)
        files.push_back({{"path", f.lexically_relative(out_dir).generic_string()}, {"sha256", sha256_file(f)}});
    m["outputs"] = files;
    json gates = json::array();
    for (const auto& g : out.gates)
        gates.push_back({{"criterion", g.criterion}, {"name", g.name}, {"passed", g.passed}, {"detail", g.detail}});
    m["gates"] = gates;
    m["passed"] = out.passed();
    m["summary"] = out.summary;
    m["telemetry"] = {{"events", out.events}, {"wall_seconds", out.wall_seconds}};
    const auto path = out_dir / "manifest.json";
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write " + path.string());
    f << m.dump(2) << '\n';
    return path;
}

// ---------------------------------------------------------------- theory-card

ExperimentOutput theory_card(const TheoryCardConfig& cfg, const fs::path& out_dir) {
    Stopwatch clock;
    prepare(out_dir);
    cfg.params.validate();
    ExperimentOutput out;
    out.name = "theory-card";
    const auto& p = cfg.params;
    const auto fp = fixed_point(p);
    const auto small = smallness_diagnostic(p);

    json card = {{"params", to_json(p)},
                 {"eps0", fp.eps0},
                 {"rho_star", fp.rho},
                 {"chi", fp.chi},
                 {"F_prime", fp.slope},
                 {"G", fp.noise},
                 {"kappa", fp.kappa},
                 {"excess", fp.excess()},
                 {"smallness", {{"constant", 1.0}, {"value", small.value}, {"a_term", small.a_term}, {"satisfied", small.satisfied}}}};
    json table = json::array();
    {
        CsvWriter csv(out_dir / "theory_spectrum.csv", {"k", "k2", "lambda_k", "theta_k", "chi"});
        for (int k = 0; k <= cfg.cutoff; ++k) {
            const double k2 = static_cast<double>(k) * k;
            const double lk = mode_variance(k2, fp);
            csv.field(k).field(k2).field(lk).field(mode_rate(k2, fp)).field(fp.chi).end_row();
            table.push_back({{"k", k}, {"lambda_k", lk}});
        }
        csv.close();
        out.files.push_back(csv.path());
    }
    card["lambda_k"] = table;
    {
        const auto path = out_dir / "theory_card.json";
        std::ofstream f(path, std::ios::binary);
        f << card.dump(2) << '\n';
        f.close();
        out.files.push_back(path);
    }

    // Two closed forms of lambda_k over random (k, params); white noise at lambda = 0.
    {
        CounterRng rng(CounterRng::mix(cfg.seed ^ 0x5BEC7ull));
        double worst = 0.0;
        double worst_white = 0.0;
        for (std::uint64_t i = 0; i < cfg.form_trials; ++i) {
            ModelParams q;
            q.a = 0.05 + 3.0 * rng.uniform();
            q.b = 0.05 + 3.0 * rng.uniform();
            q.lambda = -0.95 * q.a + (3.0 + 0.95 * q.a) * rng.uniform();
            q.d = 1 + static_cast<int>(rng.below(3));
            double k2 = 0.0;
            for (int j = 0; j < q.d; ++j) {
                const double kj = static_cast<double>(rng.below(65)) - 32.0;
                k2 += kj * kj;
            }
            const auto f = mode_variance_forms(k2, fixed_point(q));
            const double scale = std::max(std::abs(f.correction_form), std::abs(f.parseval_form));
            worst = std::max(worst, std::abs(f.correction_form - f.parseval_form) / scale);
            q.lambda = 0.0;
            const auto w = fixed_point(q);
            worst_white = std::max(worst_white, std::abs(mode_variance(k2, w) - w.chi));
        }
        out.summary["spectrum_forms_max_relative_gap"] = worst;
        out.summary["white_noise_max_gap"] = worst_white;
        out.gates.push_back({5, "spectrum closed forms agree", worst <= 1e-12,
                             "max relative gap " + fmt(worst) + " over " + std::to_string(cfg.form_trials) + " draws"});
        out.gates.push_back({5, "lambda = 0 gives chi exactly", worst_white == 0.0, "max |lambda_k - chi| " + fmt(worst_white)});
    }

    // Concentration lemmas at closed-form cases.
    {
        CsvWriter csv(out_dir / "theory_concentration.csv", {"check", "case", "estimate", "std_error", "bound", "exact", "passed"});
        struct HCase {
            const char* label;
            BoundedVariable x;
            double theta;
        };
        const std::vector<HCase> hcases = {{"bernoulli(0.5) theta=1", bernoulli_variable(0.5), 1.0},
                                           {"constant theta=1", constant_variable(0.3), 1.0},
                                           {"uniform[0,1] theta=2", uniform_variable(0.0, 1.0), 2.0}};
        bool ok = true;
        std::string detail;
        for (std::size_t i = 0; i < hcases.size(); ++i) {
            const auto r = hoeffding_check(hcases[i].x, hcases[i].theta, cfg.mc_samples, cfg.seed + i);
            csv.field("hoeffding").field(hcases[i].label).field(r.estimate).field(r.std_error).field(r.bound).field(r.exact).field(r.passed).end_row();
            ok = ok && r.passed;
            if (!detail.empty()) detail += "; ";
            detail += std::string(hcases[i].label) + ": " + fmt(r.estimate) + " <= " + fmt(r.bound);
        }
        out.gates.push_back({12, "Hoeffding lemma", ok, detail});
        ok = true;
        detail.clear();
        const std::vector<std::pair<double, double>> scases = {{1.0, 0.0}, {1.0, 0.25}, {2.0, 0.2}};
        for (std::size_t i = 0; i < scases.size(); ++i) {
            const auto [s2, g] = scases[i];
            const auto r = subgaussian_check(s2, g, cfg.mc_samples, cfg.seed + 100 + i);
            const std::string label = "sigma2=" + fmt(s2) + " gamma=" + fmt(g);
            csv.field("subgaussian").field(label).field(r.estimate).field(r.std_error).field(r.bound).field(r.exact).field(r.passed).end_row();
            ok = ok && r.passed;
            if (!detail.empty()) detail += "; ";
            detail += label + ": " + fmt(r.estimate) + " vs " + fmt(r.bound);
        }
        out.gates.push_back({12, "subgaussian moment", ok, detail});
        csv.close();
        out.files.push_back(csv.path());
    }

    // Gaussian entropy sum: dyadic increments shrink like K^{d-4}.
    {
        CsvWriter csv(out_dir / "theory_entropy_sum.csv", {"d", "K", "partial_sum", "increment_to_2K"});
        bool cauchy = true;
        bool slope_ok = true;
        bool zero_ok = true;
        std::string detail;
        for (int d = 1; d <= 3; ++d) {
            ModelParams q = with_size(p, d, p.n);
            if (q.lambda == 0.0) q.lambda = 0.2;
            std::vector<double> lx;
            std::vector<double> ly;
            double prev = std::numeric_limits<double>::infinity();
            for (int K = 1; 2 * K <= cfg.entropy_max_cutoff; K *= 2) {
                const double s = gaussian_entropy_sum(q, K);
                const double inc = gaussian_entropy_shell(q, K, 2 * K);
                csv.field(d).field(K).field(s).field(inc).end_row();
                cauchy = cauchy && inc < prev;
                prev = inc;
                if (K >= 4) {
                    lx.push_back(std::log(static_cast<double>(K)));
                    ly.push_back(std::log(inc));
                }
            }
            const auto fit = linear_fit(lx, ly);
            const bool ok = std::abs(fit.slope - (d - 4.0)) <= 0.3;
            slope_ok = slope_ok && ok;
            if (!detail.empty()) detail += "; ";
            detail += "d=" + std::to_string(d) + " slope " + fmt(fit.slope) + " (target " + std::to_string(d - 4) + ")";
            ModelParams w = q;
            w.lambda = 0.0;
            for (int K = 1; K <= cfg.entropy_max_cutoff; K *= 2) zero_ok = zero_ok && gaussian_entropy_sum(w, K) == 0.0;
        }
        out.gates.push_back({13, "entropy sum increments decrease", cauchy, "dyadic shells K -> 2K"});
        out.gates.push_back({13, "entropy sum tail exponent", slope_ok, detail});
        out.gates.push_back({13, "entropy sum vanishes at lambda = 0", zero_ok, "all K, d = 1, 2, 3"});
        csv.close();
        out.files.push_back(csv.path());
    }
    out.wall_seconds = clock.seconds();
    return out;
}

// ---------------------------------------------------------------- exact-audit

ExperimentOutput exact_audit(const ExactAuditConfig& cfg, const fs::path& out_dir) {
    Stopwatch clock;
    prepare(out_dir);
    ExperimentOutput out;
    out.name = "exact-audit";
    const auto& p = cfg.params;
    p.validate();

    {
        CsvWriter csv(out_dir / "exact_adjoint.csv", {"d", "n", "a", "b", "lambda", "max_residual"});
        CounterRng rng(CounterRng::mix(cfg.seed ^ 0xAD101ull));
        double worst = 0.0;
        std::vector<ModelParams> tuples;
        for (int i = 0; i < cfg.adjoint_tuples; ++i) {
            ModelParams q;
            q.a = 0.2 + 2.0 * rng.uniform();
            q.b = 0.2 + 2.0 * rng.uniform();
            q.lambda = -0.9 * q.a + (2.0 + 0.9 * q.a) * rng.uniform();
            tuples.push_back(q);
        }
        std::vector<ModelParams> cases{p};
        for (const auto& q0 : tuples) {
            cases.push_back(with_size(q0, 1, 4));
            cases.push_back(with_size(q0, 2, 2));
        }
        for (const auto& q : cases) {
            double r = 0.0;
            try {
                r = adjoint_one(q, 1e-12).max_residual;
            } catch (const ConsistencyError&) {
                r = adjoint_one(q, std::numeric_limits<double>::infinity()).max_residual;
            }
            worst = std::max(worst, r);
            csv.field(q.d).field(q.n).field(q.a).field(q.b).field(q.lambda).field(r).end_row();
        }
        out.gates.push_back({1, "adjoint identity", worst <= 1e-12, "max residual " + fmt(worst)});
        out.summary["adjoint_max_residual"] = worst;
        csv.close();
        out.files.push_back(csv.path());
    }

    {
        auto q = with_size(p, 1, 4);
        q.lambda = 0.0;
        const auto g = build_generator(q);
        const auto pi = stationary_distribution(g);
        const auto nu = product_measure(g.torus, q.a / (q.a + q.b));
        const double tv = total_variation(pi, nu);
        out.gates.push_back({2, "lambda = 0 NESS is product", tv < 1e-10, "TV " + fmt(tv)});
        out.summary["lambda0_tv"] = tv;
    }

    {
        const auto g = build_generator(p);
        const auto pi = stationary_distribution(g);
        const auto nu = product_measure(g.torus, rho_star(p));
        CsvWriter csv(out_dir / "exact_stationary.csv", {"state", "pi", "nu_rho_star"});
        for (std::size_t s = 0; s < pi.size(); ++s) csv.field(static_cast<std::uint64_t>(s)).field(pi[s]).field(nu[s]).end_row();
        csv.close();
        out.files.push_back(csv.path());
        out.summary["stationary_entropy"] = relative_entropy(pi, nu);
        out.summary["stationary_residual"] = stationary_residual(g, pi);
    }

    {
        CsvWriter csv(out_dir / "exact_yau.csv", {"lambda", "t", "entropy", "derivative", "derivative_fd", "dissipation", "source", "slack", "holds"});
        bool ok = true;
        std::string detail;
        for (double lam : cfg.lambdas) {
            auto q = with_size(p, 1, 3);
            q.lambda = lam;
            const auto r = yau_inequality_check(q, cfg.yau_times, cfg.yau_limit_time);
            double min_slack = std::numeric_limits<double>::infinity();
            for (const auto& pt : r.points) {
                csv.field(lam).field(pt.t).field(pt.entropy).field(pt.derivative).field(pt.derivative_fd).field(pt.dissipation)
                    .field(pt.source).field(pt.slack).field(pt.holds).end_row();
                min_slack = std::min(min_slack, pt.slack);
            }
            ok = ok && r.passed;
            if (!detail.empty()) detail += "; ";
            detail += "lambda=" + fmt(lam) + " min slack " + fmt(min_slack) + " limit error " + fmt(r.limit_error);
        }
        out.gates.push_back({3, "Yau inequality and entropy limit", ok, detail});
        csv.close();
        out.files.push_back(csv.path());
    }

    {
        auto q = with_size(p, 1, 3);
        const auto ls = log_sobolev_check(q, cfg.trials, cfg.seed);
        const Torus t(1, 3);
        const auto nu = product_measure(t, rho_star(q));
        CounterRng rng(CounterRng::mix(cfg.seed ^ 0xE171ull));
        std::size_t violations = 0;
        double min_gap = std::numeric_limits<double>::infinity();
        std::vector<double> h(nu.size());
        for (std::size_t i = 0; i < cfg.trials; ++i) {
            const auto f = random_density(nu, i, cfg.seed + 7);
            const double scale = std::exp(3.0 * rng.uniform() - 1.5);
            for (auto& v : h) v = scale * rng.normal();
            const double gamma = 0.05 + 4.0 * rng.uniform();
            const auto r = entropy_inequality_check(h, f, gamma, nu);
            if (!r.passed) ++violations;
            min_gap = std::min(min_gap, r.rhs - r.lhs);
        }
        CsvWriter csv(out_dir / "exact_inequalities.csv", {"check", "trials", "violations", "detail_name", "detail_value"});
        csv.field("log_sobolev").field(static_cast<std::uint64_t>(ls.trials)).field(static_cast<std::uint64_t>(ls.violations))
            .field("worst_ratio_over_kappa").field(ls.worst_ratio / ls.kappa).end_row();
        csv.field("entropy_inequality").field(static_cast<std::uint64_t>(cfg.trials)).field(static_cast<std::uint64_t>(violations))
            .field("min_gap").field(min_gap).end_row();
        csv.close();
        out.files.push_back(csv.path());
        out.gates.push_back({4, "log-Sobolev inequality", ls.passed,
                             std::to_string(ls.violations) + " violations in " + std::to_string(ls.trials) +
                                 ", worst H/D " + fmt(ls.worst_ratio) + " vs kappa " + fmt(ls.kappa)});
        out.gates.push_back({4, "entropy inequality", violations == 0,
                             std::to_string(violations) + " violations in " + std::to_string(cfg.trials) + ", min gap " + fmt(min_gap)});
    }
    out.wall_seconds = clock.seconds();
    return out;
}

// ---------------------------------------------------------------- flow-audit

ExperimentOutput flow_audit(const FlowAuditConfig& cfg, const fs::path& out_dir) {
    Stopwatch clock;
    prepare(out_dir);
    ExperimentOutput out;
    out.name = "flow-audit";
    CsvWriter csv(out_dir / "flow_energy.csv", {"d", "kind", "ell", "n", "energy", "energy_over_g", "residual"});
    double worst_residual = 0.0;
    double worst_ratio = 0.0;
    std::string detail;
    for (int d : cfg.dims)
        for (auto kind : {FlowKind::Sweep, FlowKind::MinimalEnergy}) {
            const auto s = energy_scaling(cfg.ells, d, kind);
            const char* name = kind == FlowKind::Sweep ? "sweep" : "minimal";
            for (const auto& r : s.rows) csv.field(d).field(name).field(r.ell).field(r.n).field(r.energy).field(r.scaled).field(r.residual).end_row();
            worst_residual = std::max(worst_residual, s.max_residual);
            out.summary["ratio"][name][std::to_string(d)] = s.ratio;
            if (kind == FlowKind::Sweep) {
                worst_ratio = std::max(worst_ratio, s.ratio);
                if (!detail.empty()) detail += "; ";
                detail += "d=" + std::to_string(d) + " ratio " + fmt(s.ratio);
            }
        }
    csv.close();
    out.files.push_back(csv.path());
    out.gates.push_back({10, "flow divergence identity", worst_residual < cfg.residual_gate, "max residual " + fmt(worst_residual)});
    out.gates.push_back({10, "flow energy / g_d bounded", worst_ratio < cfg.ratio_gate, detail});
    out.wall_seconds = clock.seconds();
    return out;
}

// ---------------------------------------------------------------- spde-audit

ExperimentOutput spde_audit(const SpdeAuditConfig& cfg, const fs::path& out_dir) {
    Stopwatch clock;
    prepare(out_dir);
    ExperimentOutput out;
    out.name = "spde-audit";
    const auto& p = cfg.params;
    p.validate();
    const auto var = stationary_variance_check(p, cfg.cutoff, cfg.samples, cfg.seed);
    const auto lag = lag_covariance_check(p, cfg.cutoff, cfg.lag, cfg.samples, cfg.seed + 1);
    CsvWriter csv(out_dir / "spde_modes.csv", {"k0", "k1", "k2", "lambda_k", "variance", "std_error", "z", "lag",
                                                "lag_theory", "lag_covariance", "lag_std_error", "lag_z"});
    double worst = 0.0;
    double worst_lag = 0.0;
    for (std::size_t i = 0; i < var.size(); ++i) {
        const auto& v = var[i];
        const auto& l = lag[i];
        csv.field(v.k[0]).field(v.k[1]).field(v.k[2]).field(v.theory).field(v.empirical).field(v.std_error).field(v.z)
            .field(cfg.lag).field(l.theory).field(l.empirical).field(l.std_error).field(l.z).end_row();
        worst = std::max(worst, std::abs(v.z));
        worst_lag = std::max(worst_lag, std::abs(l.z));
    }
    csv.close();
    out.files.push_back(csv.path());
    out.gates.push_back({11, "stationary mode variances", worst <= cfg.z_pass, "max |z| " + fmt(worst) + " over " + std::to_string(var.size()) + " modes"});
    out.gates.push_back({11, "OU lag covariance", worst_lag <= cfg.z_pass, "max |z| " + fmt(worst_lag)});

    // E[X(f)^2] for a small battery of real trigonometric polynomials.
    std::vector<std::pair<std::string, TrigPolynomial>> battery;
    const Wavevector e1{1, 0, 0};
    const Wavevector e2{p.d > 1 ? 0 : 2, p.d > 1 ? 1 : 0, 0};
    const Wavevector e3{3, 0, 0};
    battery.emplace_back("cos_k1", TrigPolynomial::cosine(e1));
    battery.emplace_back("sin_k2", TrigPolynomial::sine(e2));
    auto mix = TrigPolynomial::cosine({0, 0, 0}, 0.5);
    mix += TrigPolynomial::cosine(e1, 0.7);
    mix += TrigPolynomial::sine(e3, 1.3);
    battery.emplace_back("mixed", mix);
    const auto cov = covariance_check(p, cfg.cutoff, battery, cfg.samples, cfg.seed + 2);
    CsvWriter ccsv(out_dir / "spde_covariance.csv", {"f", "variance", "std_error", "theory", "z"});
    double worst_cov = 0.0;
    for (const auto& r : cov) {
        ccsv.field(r.label).field(r.empirical).field(r.std_error).field(r.theory).field(r.z).end_row();
        worst_cov = std::max(worst_cov, std::abs(r.z));
    }
    ccsv.close();
    out.files.push_back(ccsv.path());
    out.gates.push_back({0, "field covariance", worst_cov <= cfg.z_pass, "max |z| " + fmt(worst_cov)});

    CsvWriter icsv(out_dir / "spde_semigroup.csv", {"f", "lhs", "rhs", "closed_form_lhs", "error"});
    double worst_id = 0.0;
    for (const auto& [label, f] : battery) {
        const auto r = semigroup_energy_identity(f.ks, f.coef, p);
        icsv.field(label).field(r.lhs).field(r.rhs).field(r.closed_form_lhs).field(r.error).end_row();
        worst_id = std::max({worst_id, r.error, std::abs(r.lhs - r.closed_form_lhs)});
    }
    icsv.close();
    out.files.push_back(icsv.path());
    out.gates.push_back({11, "semigroup energy identity", worst_id <= cfg.identity_tol, "max error " + fmt(worst_id)});
    out.wall_seconds = clock.seconds();
    return out;
}

// ---------------------------------------------------------------- hydro

ExperimentOutput hydro(const HydroConfig& cfg, const fs::path& out_dir) {
    Stopwatch clock;
    prepare(out_dir);
    ExperimentOutput out;
    out.name = "hydro";
    if (cfg.sizes.empty() || cfg.times.empty()) throw ParameterError("hydro: sizes and times must be non-empty");
    const double rho = rho_star(cfg.params);
    const double amp = cfg.amplitude;
    const auto u0 = [rho, amp](const std::array<double, 3>& x) { return rho + amp * std::cos(2.0 * std::numbers::pi * x[0]); };
    CsvWriter csv(out_dir / "hydro_error.csv", {"n", "t", "grid", "replicas", "l2_error", "mean_replica_error"});
    CsvWriter prof(out_dir / "hydro_profiles.csv", {"n", "t", "cell", "particle", "pde"});
    std::vector<double> final_error;
    for (int n : cfg.sizes) {
        const auto p = with_size(cfg.params, cfg.params.d, n);
        const auto cmp = hydro_vs_particles(u0, p, cfg.grid, cfg.times, cfg.replicas, cfg.seed, cfg.threads);
        out.events += cmp.events;
        for (const auto& r : cmp.rows) {
            csv.field(n).field(r.t).field(cmp.grid).field(cmp.replicas).field(r.l2_error).field(r.mean_replica_error).end_row();
            for (std::size_t i = 0; i < r.particle.size(); ++i)
                prof.field(n).field(r.t).field(static_cast<std::uint64_t>(i)).field(r.particle[i]).field(r.pde[i]).end_row();
        }
        final_error.push_back(cmp.rows.back().l2_error);
        out.summary["l2_error_final"][std::to_string(n)] = cmp.rows.back().l2_error;
    }
    csv.close();
    prof.close();
    out.files.push_back(csv.path());
    out.files.push_back(prof.path());
    const double t_end = cfg.times.back();
    out.gates.push_back({8, "L2 error at largest n", final_error.back() < cfg.l2_gate,
                         "n=" + std::to_string(cfg.sizes.back()) + " t=" + fmt(t_end) + " L2 " + fmt(final_error.back())});
    out.gates.push_back({8, "L2 error decreases in n", final_error.back() < final_error.front(),
                         "n=" + std::to_string(cfg.sizes.front()) + ": " + fmt(final_error.front()) + ", n=" +
                             std::to_string(cfg.sizes.back()) + ": " + fmt(final_error.back())});
    out.wall_seconds = clock.seconds();
    return out;
}

// ---------------------------------------------------------------- hydrostatics-scaling

ExperimentOutput hydrostatics_scaling(const HydrostaticsConfig& cfg, const fs::path& out_dir) {
    Stopwatch clock;
    prepare(out_dir);
    ExperimentOutput out;
    out.name = "hydrostatics-scaling";
    if (cfg.sizes.size() < 2) throw ParameterError("hydrostatics-scaling: need at least two sizes");
    const auto fp = fixed_point(cfg.params);
    CsvWriter csv(out_dir / "hydrostatics.csv", {"d", "n", "mean_sq_deviation", "std_error", "tau_int", "samples", "theory_lambda0_scaled"});
    std::vector<double> lx;
    std::vector<double> ly;
    std::vector<double> lw;
    for (int n : cfg.sizes) {
        SimConfig sc;
        sc.params = with_size(cfg.params, cfg.params.d, n);
        sc.seed = cfg.seed;
        sc.sample_interval = cfg.sample_interval;
        sc.total_time = cfg.total_time;
        sc.replicas = cfg.replicas;
        sc.threads = cfg.threads;
        const auto run_result = run(sc);
        out.events += run_result.telemetry.events;
        std::vector<double> dev;
        std::vector<std::vector<double>> per;
        for (const auto& s : run_result.replicas) {
            per.emplace_back();
            for (double rho : s.densities) per.back().push_back((rho - fp.rho) * (rho - fp.rho));
            dev.insert(dev.end(), per.back().begin(), per.back().end());
        }
        double tau = 0.0;
        for (const auto& v : per) tau += integrated_autocorr_time(v) * static_cast<double>(v.size());
        tau /= static_cast<double>(dev.size());
        const double m = mean(dev);
        const double se = std::sqrt(variance(dev) * tau / static_cast<double>(dev.size()));
        // E[(mean density - rho*)^2] ~ lambda_0 / n^d for the limit field.
        const double theory = mode_variance(0.0, fp) / std::pow(static_cast<double>(n), cfg.params.d);
        csv.field(cfg.params.d).field(n).field(m).field(se).field(tau).field(static_cast<std::uint64_t>(dev.size())).field(theory).end_row();
        lx.push_back(std::log(static_cast<double>(n)));
        ly.push_back(std::log(m));
        lw.push_back(se / m);
    }
    csv.close();
    out.files.push_back(csv.path());
    const auto fit = weighted_linear_fit(lx, ly, lw);
    out.summary["slope"] = fit.slope;
    out.summary["slope_se"] = fit.slope_se;
    out.summary["intercept"] = fit.intercept;
    out.gates.push_back({7, "hydrostatic scaling slope", std::abs(fit.slope - cfg.slope_target) <= cfg.slope_tolerance,
                         "slope " + fmt(fit.slope) + " +- " + fmt(fit.slope_se) + " (target " + fmt(cfg.slope_target) + ")"});
    out.wall_seconds = clock.seconds();
    return out;
}

// ---------------------------------------------------------------- clt-spectrum

ExperimentOutput clt_spectrum(const CltConfig& cfg, const fs::path& out_dir) {
    Stopwatch clock;
    prepare(out_dir);
    ExperimentOutput out;
    out.name = "clt-spectrum";
    SimConfig sc;
    sc.params = cfg.params;
    sc.seed = cfg.seed;
    sc.sample_interval = cfg.sample_interval;
    sc.total_time = cfg.total_time;
    sc.replicas = cfg.replicas;
    sc.threads = cfg.threads;
    sc.mode_cutoff = cfg.kmax;
    sc.mode_radius = cfg.kmax;
    const auto run_result = run(sc);
    out.events = run_result.telemetry.events;
    const auto rows = spectrum_estimate(run_result.replicas, cfg.params, false);
    const auto fp = fixed_point(cfg.params);

    CsvWriter csv(out_dir / "clt_spectrum.csv", {"k0", "k1", "k2", "k_norm2", "variance", "std_error", "lambda_k", "z",
                                                  "tau_int", "batch_length", "batches", "insufficient"});
    std::size_t modes = 0;
    std::size_t within = 0;
    std::size_t insufficient = 0;
    double num = 0.0;
    double den = 0.0;
    double num0 = 0.0;
    double den0 = 0.0;
    for (const auto& r : rows) {
        csv.field(r.k[0]).field(r.k[1]).field(r.k[2]).field(r.k2).field(r.variance).field(r.std_error).field(r.theory).field(r.z)
            .field(r.tau_int).field(static_cast<std::uint64_t>(r.batch_length)).field(static_cast<std::uint64_t>(r.batches))
            .field(r.insufficient).end_row();
        // Matched filter against white noise: projection of (v - chi) on (lambda - chi), in SE units.
        const double w = (r.theory - fp.chi) / (r.std_error * r.std_error);
        num0 += w * (r.variance - fp.chi);
        den0 += w * (r.theory - fp.chi);
        if (r.k2 == 0.0) continue;
        ++modes;
        if (std::abs(r.z) <= cfg.z_pass) ++within;
        if (r.insufficient) ++insufficient;
        num += w * (r.variance - fp.chi);
        den += w * (r.theory - fp.chi);
    }
    csv.close();
    out.files.push_back(csv.path());
    const double z_white = den > 0.0 ? num / std::sqrt(den) : 0.0;
    const double z_white0 = den0 > 0.0 ? num0 / std::sqrt(den0) : 0.0;
    const auto needed = static_cast<std::size_t>(std::ceil(15.0 / 16.0 * static_cast<double>(modes)));
    out.summary["modes"] = modes;
    out.summary["within_z"] = within;
    out.summary["insufficient_batches"] = insufficient;
    out.summary["white_noise_z"] = z_white;
    out.summary["white_noise_z_with_k0"] = z_white0;
    out.summary["expected_white_noise_z"] = den > 0.0 ? std::sqrt(den) : 0.0;
    out.gates.push_back({6, "mode variances match lambda_k", modes > 0 && within >= needed,
                         std::to_string(within) + " of " + std::to_string(modes) + " modes within " + fmt(cfg.z_pass) +
                             " SE (need " + std::to_string(needed) + ")" +
                             (insufficient > 0 ? ", " + std::to_string(insufficient) + " with < 30 batches" : "")});
    out.gates.push_back({6, "spectrum rejects white noise", z_white > cfg.white_noise_z,
                         "aggregate z " + fmt(z_white) + " (expected " + fmt(den > 0.0 ? std::sqrt(den) : 0.0) +
                             "; with k=0: " + fmt(z_white0) + ")"});
    out.wall_seconds = clock.seconds();
    return out;
}

// ---------------------------------------------------------------- localeq-sweep

ExperimentOutput localeq_sweep(const LocaleqConfig& cfg, const fs::path& out_dir) {
    Stopwatch clock;
    prepare(out_dir);
    ExperimentOutput out;
    out.name = "localeq-sweep";
    if (cfg.sizes.size() < 2) throw ParameterError("localeq-sweep: need at least two sizes");
    const double rho = rho_star(cfg.params);
    CsvWriter csv(out_dir / "localeq_tv.csv", {"n", "R", "lambda", "tv", "error", "bias_floor", "effective_samples",
                                                "configs", "kl", "pinsker"});
    bool pinsker_ok = true;
    std::vector<std::vector<TvEstimate>> est(cfg.radii.size());
    for (int n : cfg.sizes)
        for (std::size_t ri = 0; ri < cfg.radii.size(); ++ri) {
            SimConfig sc;
            sc.params = with_size(cfg.params, cfg.params.d, n);
            sc.seed = cfg.seed;
            sc.sample_interval = cfg.sample_interval;
            sc.total_time = cfg.total_time;
            sc.replicas = cfg.replicas;
            sc.threads = cfg.threads;
            sc.box_radius = cfg.radii[ri];
            const auto run_result = run(sc);
            out.events += run_result.telemetry.events;
            const auto m = collect_marginal(run_result.replicas);
            const auto tv = tv_to_product(m, rho, cfg.resamples, cfg.seed + static_cast<std::uint64_t>(n));
            const auto pa = pinsker_audit(m, rho);
            pinsker_ok = pinsker_ok && pa.passed;
            est[ri].push_back(tv);
            csv.field(n).field(cfg.radii[ri]).field(cfg.params.lambda).field(tv.tv).field(tv.error).field(tv.bias_floor)
                .field(tv.effective_samples).field(static_cast<std::uint64_t>(m.configs())).field(pa.kl).field(pa.passed).end_row();
        }
    csv.close();
    out.files.push_back(csv.path());
    bool decay = true;
    std::string detail;
    for (std::size_t ri = 0; ri < cfg.radii.size(); ++ri) {
        const auto& lo = est[ri].front();
        const auto& hi = est[ri].back();
        decay = decay && (lo.tv - lo.error > hi.tv + hi.error);
        if (!detail.empty()) detail += "; ";
        detail += "R=" + std::to_string(cfg.radii[ri]) + ": n=" + std::to_string(cfg.sizes.front()) + " " + fmt(lo.tv) + "+-" +
                  fmt(lo.error) + " (floor " + fmt(lo.bias_floor) + "), n=" + std::to_string(cfg.sizes.back()) + " " +
                  fmt(hi.tv) + "+-" + fmt(hi.error) + " (floor " + fmt(hi.bias_floor) + ")";
    }
    out.gates.push_back({9, "TV decreases in n beyond error bars", decay, detail});
    out.gates.push_back({9, "Pinsker audit", pinsker_ok, "every marginal"});
    out.wall_seconds = clock.seconds();
    return out;
}

}  // namespace rdness
