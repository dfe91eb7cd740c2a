#include "genprior/cli.hpp"

#include "genprior/error.hpp"
#include "genprior/io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <functional>
#include <iostream>
#include <map>

namespace genprior::cli {

using nlohmann::json;
namespace fs = std::filesystem;

void RunConfig::validate() const
{
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0)) fail_config(std::string(name) + " must be > 0");
    };
    positive(max_depth, "max_depth");
    positive(outlier_radius, "outlier_radius");
    positive(ransac_threshold, "ransac_threshold");
    positive(target_radius, "target_radius");
    positive(footprint_radius, "footprint_radius");
    positive(step, "step");
    positive(epsilon, "epsilon");
    if (!(band_min < band_max)) fail_config("band_min must be < band_max");
    if (!(trim_band >= 0.0)) fail_config("trim_band must be >= 0");
    if (n_vertices < 2) fail_config("n_vertices must be >= 2");
    if (gamma && !(*gamma > 0.0)) fail_config("gamma must be > 0");
    if (!(angular_weight >= 0.0)) fail_config("angular_weight must be >= 0");
    if (frontier_cap == 0) fail_config("frontier_cap must be >= 1");
    if (log_base != "e" && log_base != "2") fail_config("log_base must be 'e' or '2'");
    if (max_icp_rms && !(*max_icp_rms > 0.0)) fail_config("max_icp_rms must be > 0");
}

namespace {

fs::path resolve(const fs::path& base, const std::string& p)
{
    const fs::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

using Setter = std::function<void(RunConfig&, const json&, const fs::path&)>;

template<typename T>
Setter value_of(T RunConfig::*field)
{
    return [field](RunConfig& c, const json& j, const fs::path&) { c.*field = j.get<T>(); };
}

Setter path_of(fs::path RunConfig::*field)
{
    return [field](RunConfig& c, const json& j, const fs::path& base) { c.*field = resolve(base, j.get<std::string>()); };
}

Setter paths_of(std::vector<fs::path> RunConfig::*field)
{
    return [field](RunConfig& c, const json& j, const fs::path& base) {
        (c.*field).clear();
        for (const auto& p : j) (c.*field).push_back(resolve(base, p.get<std::string>()));
    };
}

const std::map<std::string, Setter>& setters()
{
    static const std::map<std::string, Setter> table = {
        {"manifest", path_of(&RunConfig::manifest)},
        {"scene", path_of(&RunConfig::scene)},
        {"out", path_of(&RunConfig::out)},
        {"scene_name", value_of(&RunConfig::scene_name)},
        {"plan", paths_of(&RunConfig::plans)},
        {"ground_truth", paths_of(&RunConfig::ground_truth)},
        {"samples", value_of(&RunConfig::samples)},
        {"seed", value_of(&RunConfig::seed)},
        {"max_depth", value_of(&RunConfig::max_depth)},
        {"outlier_radius", value_of(&RunConfig::outlier_radius)},
        {"outlier_neighbors", value_of(&RunConfig::outlier_neighbors)},
        {"trim_band", value_of(&RunConfig::trim_band)},
        {"icp", value_of(&RunConfig::icp)},
        {"max_icp_rms", [](RunConfig& c, const json& j, const fs::path&) {
             if (j.is_null()) c.max_icp_rms.reset();
             else c.max_icp_rms = j.get<double>();
         }},
        {"ransac_threshold", value_of(&RunConfig::ransac_threshold)},
        {"ransac_iters", value_of(&RunConfig::ransac_iters)},
        {"target_radius", value_of(&RunConfig::target_radius)},
        {"footprint_radius", value_of(&RunConfig::footprint_radius)},
        {"band_min", value_of(&RunConfig::band_min)},
        {"band_max", value_of(&RunConfig::band_max)},
        {"n_vertices", value_of(&RunConfig::n_vertices)},
        {"gamma", [](RunConfig& c, const json& j, const fs::path&) {
             if (j.is_null()) c.gamma.reset();
             else c.gamma = j.get<double>();
         }},
        {"step", value_of(&RunConfig::step)},
        {"angular_weight", value_of(&RunConfig::angular_weight)},
        {"frontier_cap", value_of(&RunConfig::frontier_cap)},
        {"threads", value_of(&RunConfig::threads)},
        {"labels", value_of(&RunConfig::labels)},
        {"epsilon", value_of(&RunConfig::epsilon)},
        {"smoothing", value_of(&RunConfig::smoothing)},
        {"log_base", value_of(&RunConfig::log_base)},
        {"scenes", [](RunConfig& c, const json& j, const fs::path& base) {
             c.scenes.clear();
             for (const auto& s : j) {
                 EvalScene e;
                 e.plan = resolve(base, s.at("plan").get<std::string>());
                 if (s.contains("ground_truth")) e.ground_truth = resolve(base, s.at("ground_truth").get<std::string>());
                 if (s.contains("ablations"))
                     for (const auto& [name, path] : s.at("ablations").items())
                         e.ablations.emplace_back(name, resolve(base, path.get<std::string>()));
                 c.scenes.push_back(std::move(e));
             }
         }},
    };
    return table;
}

}  // namespace

void apply_config_json(RunConfig& cfg, const std::string& json_text, const fs::path& base_dir)
{
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        fail_config(e.what());
    }
    if (!j.is_object()) fail_config("config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        const auto it = setters().find(key);
        if (it == setters().end()) fail_config("unknown config key '" + key + "'");
        try {
            it->second(cfg, value, base_dir);
        } catch (const json::exception& e) {
            fail_config("config key '" + key + "': " + e.what());
        }
        cfg.explicit_keys.insert(key);
    }
}

void apply_config_file(RunConfig& cfg, const fs::path& path)
{
    try {
        apply_config_json(cfg, read_text_file(path), path.parent_path());
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Config) fail_config("config '" + path.string() + "': " + e.what());
        throw;
    }
}

namespace {

/// Flag values land in `flags`; after parsing, the ones actually given are copied over the merged config.
struct Binder
{
    RunConfig& flags;
    std::vector<std::tuple<CLI::Option*, std::string, std::function<void(RunConfig&)>>> bound;

    template<typename T>
    CLI::Option* add(CLI::App* app, T RunConfig::*field, const std::string& key, const std::string& help)
    {
        std::string flag = "--" + key;
        std::replace(flag.begin(), flag.end(), '_', '-');
        CLI::Option* opt = app->add_option(flag, flags.*field, help)->capture_default_str();
        bound.emplace_back(opt, key, [this, field](RunConfig& dst) { dst.*field = flags.*field; });
        return opt;
    }

    void apply(RunConfig& dst) const
    {
        for (const auto& [opt, key, copy] : bound) {
            if (opt->count() == 0) continue;
            copy(dst);
            dst.explicit_keys.insert(key);
        }
    }
};

const char* kRef = " [reference setting]";

void add_preprocess(Binder& b, CLI::App* app)
{
    b.add(app, &RunConfig::max_depth, "max_depth",
          std::string("Drop camera-frame points beyond this forward depth, meters") + kRef);
    b.add(app, &RunConfig::outlier_radius, "outlier_radius",
          std::string("Radius outlier removal: neighborhood radius, meters") + kRef);
    b.add(app, &RunConfig::outlier_neighbors, "outlier_neighbors",
          std::string("Radius outlier removal: minimum neighbors to keep a point (0 disables)") + kRef);
    b.add(app, &RunConfig::trim_band, "trim_band",
          std::string("Remove points lower than this height above the floor, meters") + kRef);
    b.add(app, &RunConfig::icp, "icp", "Register each sample to the observation by translation-only ICP");
    b.add(app, &RunConfig::max_icp_rms, "max_icp_rms", "Reject samples whose ICP residual RMS exceeds this, meters");
    b.add(app, &RunConfig::ransac_threshold, "ransac_threshold",
          std::string("Floor RANSAC inlier distance, meters (matches the 1 cm floor-fit RMSE bound)") + kRef);
    b.add(app, &RunConfig::ransac_iters, "ransac_iters", "Floor RANSAC hypotheses");
}

void add_geometry(Binder& b, CLI::App* app)
{
    b.add(app, &RunConfig::footprint_radius, "footprint_radius", "Robot disc radius, meters");
    b.add(app, &RunConfig::band_min, "band_min", "Lowest point height that counts as an obstacle, meters");
    b.add(app, &RunConfig::band_max, "band_max", "Highest point height that counts as an obstacle, meters");
    b.add(app, &RunConfig::target_radius, "target_radius",
          std::string("Target acquisition radius around the robot, meters") + kRef);
}

int exit_code_for(ErrorKind k)
{
    switch (k) {
    case ErrorKind::Config: return kConfigError;
    case ErrorKind::Io: return kIoError;
    case ErrorKind::Infeasible: return kInfeasible;
    case ErrorKind::Invalid: return kFailure;
    }
    return kFailure;
}

}  // namespace

int run(int argc, char** argv)
{
    CLI::App app{"genprior: sampling-based spatio-semantic priors and uncertainty-aware planning"};
    app.require_subcommand(1);
    app.fallthrough();
    RunConfig flags;
    Binder b{flags, {}};
    std::string config_path;
    app.add_option("--config", config_path, "JSON config file; flags override its values");

    auto* ingest = app.add_subcommand("ingest", "Load a manifest, align and filter, write a normalized bundle");
    b.add(ingest, &RunConfig::manifest, "manifest", "Input manifest");
    b.add(ingest, &RunConfig::out, "out", "Output directory");
    b.add(ingest, &RunConfig::seed, "seed", "Seed for every randomized stage");
    add_preprocess(b, ingest);

    auto* synth = app.add_subcommand("synth", "Draw samples from a synthetic scene and write a bundle");
    b.add(synth, &RunConfig::scene, "scene", "Scene description (JSON)");
    b.add(synth, &RunConfig::out, "out", "Output directory");
    b.add(synth, &RunConfig::samples, "samples", std::string("Number of samples N") + kRef);
    b.add(synth, &RunConfig::seed, "seed", std::string("Base seed; sample i uses seed + i") + kRef);

    auto* planc = app.add_subcommand("plan", "Build the roadmap and plan for one or more labels");
    b.add(planc, &RunConfig::manifest, "manifest", "Bundle or manifest to plan on");
    b.add(planc, &RunConfig::out, "out", "Output directory");
    b.add(planc, &RunConfig::scene_name, "scene_name", "Scene name in outputs (default: manifest directory name)");
    b.add(planc, &RunConfig::labels, "label", "Target label name or id; repeatable (default: whole vocabulary)");
    b.add(planc, &RunConfig::seed, "seed", "Seed for roadmap sampling");
    b.add(planc, &RunConfig::n_vertices, "n_vertices", std::string("Roadmap vertices") + kRef);
    b.add(planc, &RunConfig::gamma, "gamma", "Connection radius constant (default: 2 sqrt(3 area / pi))");
    b.add(planc, &RunConfig::step, "step", "Edge collision-check resolution, meters");
    b.add(planc, &RunConfig::angular_weight, "angular_weight", "Meters per radian of heading change in path length");
    b.add(planc, &RunConfig::frontier_cap, "frontier_cap", "Search states generated before settling for the best found");
    b.add(planc, &RunConfig::threads, "threads", "Worker threads for edge masks (0: all cores)");
    add_geometry(b, planc);

    auto* evalc = app.add_subcommand("eval", "Assemble detection, plan and divergence reports");
    b.add(evalc, &RunConfig::plans, "plan", "plan.json from the plan command; repeatable");
    b.add(evalc, &RunConfig::ground_truth, "ground_truth", "Ground-truth label masses, one per --plan in order");
    b.add(evalc, &RunConfig::out, "out", "Output directory");
    b.add(evalc, &RunConfig::epsilon, "epsilon", "Smoothing mass added to every label when one has none");
    b.add(evalc, &RunConfig::smoothing, "smoothing", "Enable smoothing of zero predicted masses");
    b.add(evalc, &RunConfig::log_base, "log_base", "Logarithm base for the divergence: e or 2");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        RunConfig cfg;
        if (!config_path.empty()) apply_config_file(cfg, config_path);
        b.apply(cfg);
        cfg.validate();
        if (ingest->parsed()) return cmd_ingest(cfg);
        if (synth->parsed()) return cmd_synth(cfg);
        if (planc->parsed()) return cmd_plan(cfg);
        return cmd_eval(cfg);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    }
}

}  // namespace genprior::cli
