#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "rdness/theory.hpp"

namespace rdness {

/// One assertion of an experiment. `criterion` is the acceptance item it feeds (0: none).
struct Gate {
    int criterion = 0;
    std::string name;
    bool passed = false;
    std::string detail;
};

struct ExperimentOutput {
    std::string name;
    std::vector<std::filesystem::path> files;
    std::vector<Gate> gates;
    nlohmann::json summary = nlohmann::json::object();
    std::uint64_t events = 0;
    double wall_seconds = 0.0;

    [[nodiscard]] bool passed() const;
};

struct TheoryCardConfig {
    ModelParams params{1.0, 1.0, 0.0, 1, 16};
    int cutoff = 16;
    std::uint64_t seed = 1;
    std::uint64_t form_trials = 100000;
    int entropy_max_cutoff = 64;        ///< dyadic increments K -> 2K up to this K (d = 1, 2, 3)
    std::uint64_t mc_samples = 200000;  ///< Hoeffding and subgaussian gates
};

struct ExactAuditConfig {
    ModelParams params{1.0, 1.0, 0.3, 1, 3};
    std::vector<double> lambdas{0.1, 0.3};             ///< Yau check, n = 3 d = 1
    std::vector<double> yau_times{0.01, 0.05, 0.1, 0.5, 1.0, 2.0};
    double yau_limit_time = 60.0;
    int adjoint_tuples = 5;                            ///< random (a, b, lambda) on n=4 d=1 and 2x2 d=2
    std::size_t trials = 10000;                        ///< log-Sobolev and entropy inequality instances
    std::uint64_t seed = 1;
};

struct HydroConfig {
    ModelParams params{1.0, 1.0, 0.3, 1, 512};
    std::vector<int> sizes{128, 256, 512};
    std::vector<double> times{0.1, 0.5};
    double amplitude = 0.2;
    int grid = 8;              ///< block grid M per axis; block side n / M
    int replicas = 20;
    double l2_gate = 0.02;
    std::uint64_t seed = 1;
    int threads = 1;
};

struct HydrostaticsConfig {
    ModelParams params{1.0, 1.0, 0.2, 1, 64};
    std::vector<int> sizes{64, 128, 256, 512};
    double total_time = 400.0;
    double sample_interval = 0.5;
    int replicas = 1;
    double slope_target = -1.0;
    double slope_tolerance = 0.15;
    std::uint64_t seed = 1;
    int threads = 1;
};

struct CltConfig {
    ModelParams params{1.0, 1.0, 0.2, 1, 256};
    int kmax = 16;                   ///< modes 1 <= ||k||_2 <= kmax
    double total_time = 2000.0;      ///< per replica, burn-in included
    double sample_interval = 0.01;
    int replicas = 8;
    double z_pass = 3.0;
    double white_noise_z = 4.0;
    std::uint64_t seed = 1;
    int threads = 1;
};

struct LocaleqConfig {
    ModelParams params{1.0, 1.0, 0.3, 1, 256};
    std::vector<int> sizes{256, 1024};
    std::vector<int> radii{1};
    double total_time = 60.0;
    double sample_interval = 1.0;
    int replicas = 4;
    int resamples = 200;
    std::uint64_t seed = 1;
    int threads = 1;
};

struct FlowAuditConfig {
    std::vector<int> ells{2, 3, 4, 5, 6, 7, 8};
    std::vector<int> dims{1, 2, 3};
    double residual_gate = 1e-12;
    double ratio_gate = 10.0;
};

struct SpdeAuditConfig {
    ModelParams params{1.0, 1.0, 0.2, 1, 16};
    int cutoff = 8;
    std::uint64_t samples = 100000;
    double lag = 0.01;
    double z_pass = 3.0;
    double identity_tol = 1e-8;
    std::uint64_t seed = 1;
};

[[nodiscard]] ExperimentOutput theory_card(const TheoryCardConfig& cfg, const std::filesystem::path& out_dir);
[[nodiscard]] ExperimentOutput exact_audit(const ExactAuditConfig& cfg, const std::filesystem::path& out_dir);
[[nodiscard]] ExperimentOutput hydro(const HydroConfig& cfg, const std::filesystem::path& out_dir);
[[nodiscard]] ExperimentOutput hydrostatics_scaling(const HydrostaticsConfig& cfg, const std::filesystem::path& out_dir);
[[nodiscard]] ExperimentOutput clt_spectrum(const CltConfig& cfg, const std::filesystem::path& out_dir);
[[nodiscard]] ExperimentOutput localeq_sweep(const LocaleqConfig& cfg, const std::filesystem::path& out_dir);
[[nodiscard]] ExperimentOutput flow_audit(const FlowAuditConfig& cfg, const std::filesystem::path& out_dir);
[[nodiscard]] ExperimentOutput spde_audit(const SpdeAuditConfig& cfg, const std::filesystem::path& out_dir);

/// JSON form of the parameters, shared by cards and manifests.
[[nodiscard]] nlohmann::json to_json(const ModelParams& p);

/**
 * Writes manifest.json into out_dir: experiment name, resolved config, seed,
 * library version, every output file with its SHA-256, gates, telemetry.
 * Wall-clock data lives only here so CSV bodies stay byte-identical across reruns.
 */
std::filesystem::path write_manifest(const ExperimentOutput& out, const nlohmann::json& config,
                                     const std::filesystem::path& out_dir);

inline constexpr const char* kLibraryVersion = "0.1.0";
inline constexpr int kManifestVersion = 1;

}  // namespace rdness
