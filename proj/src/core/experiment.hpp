#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "serialize.hpp"
#include "svg_plot.hpp"

namespace relubias {

enum class Scenario {
    SingleThm,
    SingleSweepD,
    TwoGoodInit,
    TwoRandomInit,
    TwoLowDim,
    MultiDisjoint,
    MultiSharedSignFail,
    SingleModerateDim,
    GramConc,
};

const char* to_string(Scenario s);
Scenario scenario_from_string(const std::string& s);

struct ExperimentConfig {
    Scenario scenario = Scenario::SingleThm;
    std::vector<std::uint64_t> seeds;
    std::uint64_t seed_offset = 0;
    std::string out_dir = ".";

    // dataset parameters (scenario presets fill the defaults)
    int n = 0;
    int d = 0;
    std::vector<int> d_list;  // sweep scenarios
    SpectrumKind spectrum_kind = SpectrumKind::Isotropic;
    double spectrum_ratio = 0.5;
    std::vector<double> spectrum_lambda;
    ZDist z_dist = ZDist::Gaussian;
    double y_min = 0.1;
    double y_max = 1.0;
    double frac_positive = -1.0;  // < 0: per-seed random split with both signs

    // run parameters
    double eta = -1.0;  // < 0: recommend_step_size default
    long max_iters = -1;
    double grad_tol = -1.0;

    // constants (C_g <= 0 means: estimate per dataset)
    double const_C = 10.0;
    double const_C_y = 2.0;
    double const_C_g = -1.0;

    int minnorm_cap = 16;
    int minnorm_two_cap = 14;
    int threads = 0;  // 0: RELUBIAS_THREADS or hardware
    bool emit_dataset = true;
    bool emit_trajectory = true;

    static ExperimentConfig from_json(const std::string& text);
    std::string to_json() const;
    // fills unset fields with the scenario preset values
    void apply_scenario_defaults();
};

struct ManifestFile {
    std::string path;  // relative to out_dir
    std::string hash;  // fnv1a64, hex
};

struct SeedResult {
    std::uint64_t seed = 0;
    int d = 0;
    std::vector<ManifestFile> files;
    std::map<std::string, double> metrics;
    std::string error;   // empty on success
    std::string stage;   // stage where the error occurred
};

struct ArtifactManifest {
    std::string scenario;
    std::string config_json;
    std::vector<SeedResult> results;
    std::map<std::string, double> aggregate;
    std::vector<ManifestFile> extra_files;  // aggregate csv / svg

    std::string to_json() const;
    bool any_errors() const;
};

ArtifactManifest run_experiment(const ExperimentConfig& config);

// Reads the aggregate CSV and writes a self-contained SVG; returns the path.
std::string emit_plot(const std::string& aggregate_csv_path, const std::string& svg_path,
                      const std::string& style = "default");

// Re-runs the monitor checks on persisted artifacts.
// exit semantics: 0 = pass, 1 = check failure, 2 = schema/input error.
struct VerifyFilesResult {
    int exit_code = 0;
    std::string report_json;
};
VerifyFilesResult verify_files(const std::string& trajectory_csv_path,
                               const std::string& dataset_json_path,
                               const std::string& config_json);

// Deterministic per-seed derivations shared by the scenario runner and
// verify_files: the positive-count draw and the multi-neuron assignment.
int derive_n_pos(std::uint64_t seed, int n);
std::vector<int> derive_assignment(std::uint64_t seed, const Dataset& ds,
                                   const std::vector<int>& signs);

}  // namespace relubias
