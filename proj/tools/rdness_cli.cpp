#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rdness/error.hpp"
#include "rdness/exact.hpp"
#include "rdness/experiments.hpp"
#include "rdness/io.hpp"
#include "rdness/simulate.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rdness;

namespace {

struct Globals {
    std::uint64_t seed = 1;
    std::string out_dir = "out";
    int threads = 1;
};

void add_params(CLI::App* sub, ModelParams& p) {
    sub->add_option("--a", p.a, "creation rate a > 0");
    sub->add_option("--b", p.b, "annihilation rate b > 0");
    sub->add_option("--lambda", p.lambda, "neighbour-enhanced creation, lambda > -a");
    sub->add_option("--d", p.d, "dimension 1..3")->check(CLI::Range(1, 3));
    sub->add_option("--n", p.n, "torus side");
}

// Flat key = value file; keys are long option names without dashes. Command-line values win.
void apply_config(CLI::App* sub, const std::string& path) {
    if (path.empty()) return;
    if (!fs::exists(path)) throw ParameterError("config file not found: " + path);
    for (const auto& item : CLI::ConfigTOML().from_file(path)) {
        if (item.name == "++" || item.name == "--") continue;
        if (!item.parents.empty()) throw ParameterError("config " + path + ": sections are not supported (" + item.parents.front() + ")");
        auto* opt = sub->get_option_no_throw("--" + item.name);
        if (opt == nullptr || item.name == "config") throw ParameterError("config " + path + ": unknown key '" + item.name + "'");
        if (opt->count() == 0) {
            opt->add_result(item.inputs);
            opt->run_callback();
        }
    }
}

// Every resolved option of the subcommand, echoed into the manifest.
json resolved_options(const CLI::App* sub, const Globals& g) {
    json cfg = {{"seed", g.seed}, {"threads", g.threads}};
    for (const auto* opt : sub->get_options()) {
        const auto& names = opt->get_lnames();
        if (names.empty() || names.front() == "help" || names.front() == "config") continue;
        std::string v = opt->count() > 0 ? opt->as<std::string>() : opt->get_default_str();
        cfg[names.front()] = v;
    }
    return cfg;
}

int finish(const ExperimentOutput& out, const CLI::App* sub, const Globals& g, const fs::path& dir) {
    write_manifest(out, resolved_options(sub, g), dir);
    for (const auto& gate : out.gates)
        std::cout << (gate.passed ? "PASS " : "FAIL ") << out.name << ": " << gate.name << " -- " << gate.detail << '\n';
    return out.passed() ? 0 : 2;
}

void write_stream_csv(const std::vector<SampleStream>& streams, const fs::path& dir, std::vector<fs::path>& files) {
    if (streams.empty()) return;
    const auto& s0 = streams.front();
    std::vector<std::string> header{"replica", "t", "density"};
    for (const auto& k : s0.mode_set) {
        const std::string tag = std::to_string(k[0]) + "_" + std::to_string(k[1]) + "_" + std::to_string(k[2]);
        header.push_back("re_" + tag);
        header.push_back("im_" + tag);
    }
    CsvWriter csv(dir / "samples.csv", header);
    for (const auto& s : streams)
        for (std::size_t j = 0; j < s.size(); ++j) {
            csv.field(s.replica).field(s.times[j]).field(s.densities[j]);
            for (std::size_t m = 0; m < s.mode_set.size(); ++m) {
                const auto c = s.mode(j, m);
                csv.field(c.real()).field(c.imag());
            }
            csv.end_row();
        }
    csv.close();
    files.push_back(csv.path());
    if (s0.box_radius < 0) return;
    CsvWriter pat(dir / "patterns.csv", {"replica", "t", "R", "pattern", "count"});
    for (const auto& s : streams)
        for (std::size_t j = 0; j < s.size(); ++j) {
            const auto row = s.patterns(j);
            for (std::size_t p = 0; p < row.size(); ++p)
                if (row[p] > 0) pat.field(s.replica).field(s.times[j]).field(s.box_radius).field(static_cast<std::uint64_t>(p)).field(static_cast<std::uint64_t>(row[p])).end_row();
        }
    pat.close();
    files.push_back(pat.path());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reaction-diffusion exclusion process: simulator and verifier"};
    app.option_defaults()->always_capture_default();
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--seed", g.seed, "base seed");
    app.add_option("--out-dir", g.out_dir, "directory for CSV/JSON artifacts");
    app.add_option("--threads", g.threads, "worker threads")->check(CLI::PositiveNumber);

    std::map<CLI::App*, std::string> configs;
    std::map<CLI::App*, std::function<int(CLI::App*)>> actions;
    auto add = [&](const std::string& name, const std::string& help) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", configs[sub], "flat key = value file");
        return sub;
    };

    // theory
    TheoryCardConfig theory_cfg;
    {
        auto* sub = add("theory", "print the parameter card (JSON) and write the lambda_k table");
        add_params(sub, theory_cfg.params);
        sub->add_option("--cutoff", theory_cfg.cutoff, "largest |k| in the lambda_k table");
        actions[sub] = [&](CLI::App* s) {
            theory_cfg.seed = g.seed;
            theory_cfg.form_trials = 1000;
            const fs::path dir = g.out_dir;
            const auto out = theory_card(theory_cfg, dir);
            write_manifest(out, resolved_options(s, g), dir);
            std::cout << read_file(dir / "theory_card.json");
            return 0;
        };
    }
    TheoryCardConfig card_cfg;
    {
        auto* sub = add("theory-card", "parameter card plus closed-form audits");
        add_params(sub, card_cfg.params);
        sub->add_option("--cutoff", card_cfg.cutoff);
        sub->add_option("--form-trials", card_cfg.form_trials);
        sub->add_option("--entropy-max-cutoff", card_cfg.entropy_max_cutoff);
        sub->add_option("--mc-samples", card_cfg.mc_samples);
        actions[sub] = [&](CLI::App* s) {
            card_cfg.seed = g.seed;
            return finish(theory_card(card_cfg, g.out_dir), s, g, g.out_dir);
        };
    }

    // simulate
    SimConfig sim_cfg;
    sim_cfg.params.n = 64;
    {
        auto* sub = add("simulate", "run replicas and write sampled observables");
        add_params(sub, sim_cfg.params);
        sub->add_option("--burn-in", sim_cfg.burn_in, "model time before the first sample (default 10/|F'(rho*)|)");
        sub->add_option("--interval", sim_cfg.sample_interval);
        sub->add_option("--total-time", sim_cfg.total_time);
        sub->add_option("--replicas", sim_cfg.replicas);
        sub->add_option("--modes", sim_cfg.mode_cutoff, "record Fourier modes with ||k||_inf <= K");
        sub->add_option("--mode-radius", sim_cfg.mode_radius, "keep only modes with ||k||_2 <= r");
        sub->add_option("--box", sim_cfg.box_radius, "record box-pattern counts for radius R");
        sub->add_option("--snapshot-dir", sim_cfg.snapshot_dir);
        actions[sub] = [&](CLI::App* s) {
            sim_cfg.seed = g.seed;
            sim_cfg.threads = g.threads;
            const fs::path dir = g.out_dir;
            fs::create_directories(dir);
            const auto result = run(sim_cfg);
            ExperimentOutput out;
            out.name = "simulate";
            out.events = result.telemetry.events;
            out.wall_seconds = result.telemetry.wall_seconds;
            out.summary["flips_accepted"] = result.telemetry.flips_accepted;
            write_stream_csv(result.replicas, dir, out.files);
            return finish(out, s, g, dir);
        };
    }

    // exact
    ModelParams exact_params{1.0, 1.0, 0.3, 1, 3};
    std::vector<double> exact_times{0.01, 0.05, 0.1, 0.5, 1.0, 2.0};
    {
        auto* sub = add("exact", "stationary law, entropy, adjoint residual and Yau table on a small torus");
        add_params(sub, exact_params);
        sub->add_option("--times", exact_times)->delimiter(',');
        actions[sub] = [&](CLI::App* s) {
            const fs::path dir = g.out_dir;
            fs::create_directories(dir);
            ExperimentOutput out;
            out.name = "exact";
            const auto gen = build_generator(exact_params);
            const auto pi = stationary_distribution(gen);
            const auto nu = product_measure(gen.torus, rho_star(exact_params));
            CsvWriter csv(dir / "exact_stationary.csv", {"state", "pi", "nu_rho_star"});
            for (std::size_t i = 0; i < pi.size(); ++i) csv.field(static_cast<std::uint64_t>(i)).field(pi[i]).field(nu[i]).end_row();
            csv.close();
            out.files.push_back(csv.path());
            const auto adj = adjoint_one(exact_params, std::numeric_limits<double>::infinity());
            out.summary["stationary_entropy"] = relative_entropy(pi, nu);
            out.summary["adjoint_max_residual"] = adj.max_residual;
            out.gates.push_back({0, "adjoint identity", adj.max_residual < 1e-12, "max residual " + format_double(adj.max_residual)});
            if (gen.states() <= 1024) {
                const auto yau = yau_inequality_check(exact_params, exact_times);
                CsvWriter y(dir / "exact_yau.csv", {"t", "entropy", "derivative", "dissipation", "source", "slack", "holds"});
                for (const auto& pt : yau.points)
                    y.field(pt.t).field(pt.entropy).field(pt.derivative).field(pt.dissipation).field(pt.source).field(pt.slack).field(pt.holds).end_row();
                y.close();
                out.files.push_back(y.path());
                out.gates.push_back({0, "Yau inequality", yau.passed, "limit error " + format_double(yau.limit_error)});
            }
            std::cout << out.summary.dump(2) << '\n';
            return finish(out, s, g, dir);
        };
    }

    ExactAuditConfig exact_cfg;
    {
        auto* sub = add("exact-audit", "adjoint identity, exact NESS, Yau, log-Sobolev and entropy inequality");
        add_params(sub, exact_cfg.params);
        sub->add_option("--lambdas", exact_cfg.lambdas)->delimiter(',');
        sub->add_option("--times", exact_cfg.yau_times)->delimiter(',');
        sub->add_option("--limit-time", exact_cfg.yau_limit_time);
        sub->add_option("--adjoint-tuples", exact_cfg.adjoint_tuples);
        sub->add_option("--trials", exact_cfg.trials);
        actions[sub] = [&](CLI::App* s) {
            exact_cfg.seed = g.seed;
            return finish(exact_audit(exact_cfg, g.out_dir), s, g, g.out_dir);
        };
    }

    HydroConfig hydro_cfg;
    {
        auto* sub = add("hydro", "block-averaged particle density vs the reaction-diffusion PDE");
        add_params(sub, hydro_cfg.params);
        sub->add_option("--sizes", hydro_cfg.sizes)->delimiter(',');
        sub->add_option("--times", hydro_cfg.times)->delimiter(',');
        sub->add_option("--amplitude", hydro_cfg.amplitude);
        sub->add_option("--grid", hydro_cfg.grid, "block grid M per axis");
        sub->add_option("--replicas", hydro_cfg.replicas);
        sub->add_option("--l2-gate", hydro_cfg.l2_gate);
        actions[sub] = [&](CLI::App* s) {
            hydro_cfg.seed = g.seed;
            hydro_cfg.threads = g.threads;
            return finish(hydro(hydro_cfg, g.out_dir), s, g, g.out_dir);
        };
    }

    HydrostaticsConfig hs_cfg;
    {
        auto* sub = add("hydrostatics-scaling", "E[(mean density - rho*)^2] against n");
        add_params(sub, hs_cfg.params);
        sub->add_option("--sizes", hs_cfg.sizes)->delimiter(',');
        sub->add_option("--total-time", hs_cfg.total_time);
        sub->add_option("--interval", hs_cfg.sample_interval);
        sub->add_option("--replicas", hs_cfg.replicas);
        sub->add_option("--slope-target", hs_cfg.slope_target);
        sub->add_option("--slope-tolerance", hs_cfg.slope_tolerance);
        actions[sub] = [&](CLI::App* s) {
            hs_cfg.seed = g.seed;
            hs_cfg.threads = g.threads;
            return finish(hydrostatics_scaling(hs_cfg, g.out_dir), s, g, g.out_dir);
        };
    }

    CltConfig clt_cfg;
    {
        auto* sub = add("clt-spectrum", "empirical fluctuation spectrum vs lambda_k");
        add_params(sub, clt_cfg.params);
        sub->add_option("--kmax", clt_cfg.kmax);
        sub->add_option("--total-time", clt_cfg.total_time);
        sub->add_option("--interval", clt_cfg.sample_interval);
        sub->add_option("--replicas", clt_cfg.replicas);
        sub->add_option("--z-pass", clt_cfg.z_pass);
        sub->add_option("--white-noise-z", clt_cfg.white_noise_z);
        actions[sub] = [&](CLI::App* s) {
            clt_cfg.seed = g.seed;
            clt_cfg.threads = g.threads;
            return finish(clt_spectrum(clt_cfg, g.out_dir), s, g, g.out_dir);
        };
    }

    LocaleqConfig le_cfg;
    {
        auto* sub = add("localeq-sweep", "TV between NESS box marginals and the product measure");
        add_params(sub, le_cfg.params);
        sub->add_option("--sizes", le_cfg.sizes)->delimiter(',');
        sub->add_option("--radii", le_cfg.radii)->delimiter(',');
        sub->add_option("--total-time", le_cfg.total_time);
        sub->add_option("--interval", le_cfg.sample_interval);
        sub->add_option("--replicas", le_cfg.replicas);
        sub->add_option("--resamples", le_cfg.resamples);
        actions[sub] = [&](CLI::App* s) {
            le_cfg.seed = g.seed;
            le_cfg.threads = g.threads;
            return finish(localeq_sweep(le_cfg, g.out_dir), s, g, g.out_dir);
        };
    }

    FlowAuditConfig flow_cfg;
    {
        auto* sub = add("flow-audit", "divergence identity and energy scaling of the telescoping flows");
        sub->add_option("--ells", flow_cfg.ells)->delimiter(',');
        sub->add_option("--dims", flow_cfg.dims)->delimiter(',');
        sub->add_option("--ratio-gate", flow_cfg.ratio_gate);
        actions[sub] = [&](CLI::App* s) { return finish(flow_audit(flow_cfg, g.out_dir), s, g, g.out_dir); };
    }

    SpdeAuditConfig spde_cfg;
    {
        auto* sub = add("spde-audit", "stationary Gaussian field and OU mode dynamics");
        add_params(sub, spde_cfg.params);
        sub->add_option("--cutoff", spde_cfg.cutoff);
        sub->add_option("--samples", spde_cfg.samples);
        sub->add_option("--lag", spde_cfg.lag);
        actions[sub] = [&](CLI::App* s) {
            spde_cfg.seed = g.seed;
            return finish(spde_audit(spde_cfg, g.out_dir), s, g, g.out_dir);
        };
    }

    CLI11_PARSE(app, argc, argv);
    auto* sub = app.get_subcommands().front();
    try {
        apply_config(sub, configs[sub]);
        return actions.at(sub)(sub);
    } catch (const std::exception& e) {
        std::cerr << "rdness " << sub->get_name() << ": " << e.what() << '\n';
        return 1;
    }
}
