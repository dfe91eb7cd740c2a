#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace genprior::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kConfigError = 2, kIoError = 3, kInfeasible = 4 };

struct EvalScene
{
    std::filesystem::path plan;
    std::filesystem::path ground_truth;
    /// ablation name -> manifest; empty means {"det": the plan's manifest}.
    std::vector<std::pair<std::string, std::filesystem::path>> ablations;
};

/// Every knob of a run. Values come from defaults, then the config file, then flags.
struct RunConfig
{
    std::filesystem::path manifest;
    std::filesystem::path scene;
    std::filesystem::path out;
    std::string scene_name;
    std::vector<std::filesystem::path> plans;
    std::vector<std::filesystem::path> ground_truth;
    std::vector<EvalScene> scenes;

    std::size_t samples = 100;
    std::uint64_t seed = 1234;

    double max_depth = 20.0;
    double outlier_radius = 0.1;
    std::size_t outlier_neighbors = 10;
    double trim_band = 0.20;
    bool icp = true;
    std::optional<double> max_icp_rms;
    double ransac_threshold = 0.01;
    std::size_t ransac_iters = 1000;

    double target_radius = 1.0;
    double footprint_radius = 0.25;
    double band_min = 0.20;
    double band_max = 1.50;
    std::size_t n_vertices = 2000;
    std::optional<double> gamma;
    double step = 0.05;
    double angular_weight = 0.0;
    std::size_t frontier_cap = 4'000'000;
    unsigned threads = 0;
    std::vector<std::string> labels;

    double epsilon = 1e-6;
    bool smoothing = true;
    std::string log_base = "e";

    /// Keys set explicitly by the config file or a flag.
    std::set<std::string> explicit_keys;
    bool is_explicit(const std::string& key) const { return explicit_keys.count(key) > 0; }

    void validate() const;
};

/// Apply a JSON config document on top of `cfg`. Keys match the long flag names with '_' for '-'.
void apply_config_json(RunConfig& cfg, const std::string& json_text, const std::filesystem::path& base_dir);
void apply_config_file(RunConfig& cfg, const std::filesystem::path& path);

int cmd_ingest(const RunConfig& cfg);
int cmd_synth(const RunConfig& cfg);
int cmd_plan(const RunConfig& cfg);
int cmd_eval(const RunConfig& cfg);

/// Parse arguments, dispatch the subcommand and map failures to exit codes.
int run(int argc, char** argv);

}  // namespace genprior::cli
