#include "genprior/cli.hpp"

#include "genprior/error.hpp"
#include "genprior/eval.hpp"
#include "genprior/io.hpp"
#include "genprior/json_util.hpp"
#include "genprior/manifest.hpp"
#include "genprior/planner.hpp"
#include "genprior/sampler.hpp"
#include "genprior/spatial_index.hpp"

#include <json.hpp>

#include <cstdio>
#include <iostream>

namespace genprior::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void require_path(const fs::path& p, const char* what)
{
    if (p.empty()) fail_config(std::string("missing required --") + what);
}

void make_dir(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail_io("cannot create '" + dir.string() + "': " + ec.message());
}

RobotFootprint footprint(const RunConfig& cfg)
{
    return RobotFootprint{cfg.footprint_radius, cfg.band_min, cfg.band_max};
}

void report_warnings(const std::vector<std::string>& warnings)
{
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

}  // namespace

int cmd_synth(const RunConfig& cfg)
{
    require_path(cfg.scene, "scene");
    require_path(cfg.out, "out");
    if (cfg.samples == 0) fail_config("--samples must be >= 1");
    const SyntheticScene scene = load_scene(cfg.scene);
    SampleSet set = synthesize_sample_set(scene, cfg.samples, cfg.seed);
    set.camera_height = scene.camera_height;
    write_bundle(set, cfg.out);
    std::cout << "wrote " << set.size() << " samples to " << cfg.out.string() << "\n";
    return kOk;
}

int cmd_ingest(const RunConfig& cfg)
{
    require_path(cfg.manifest, "manifest");
    require_path(cfg.out, "out");
    Manifest m = read_manifest(cfg.manifest);
    auto& p = m.preprocess;
    if (cfg.is_explicit("max_depth")) p.max_depth = cfg.max_depth;
    if (cfg.is_explicit("outlier_radius")) p.outlier_radius = cfg.outlier_radius;
    if (cfg.is_explicit("outlier_neighbors")) p.outlier_neighbors = cfg.outlier_neighbors;
    if (cfg.is_explicit("trim_band")) p.trim_band = cfg.trim_band;
    if (cfg.is_explicit("icp")) p.icp = cfg.icp;
    if (cfg.is_explicit("max_icp_rms")) p.max_icp_rms = cfg.max_icp_rms;
    if (cfg.is_explicit("ransac_threshold")) m.alignment.ransac.inlier_threshold = cfg.ransac_threshold;
    if (cfg.is_explicit("ransac_iters")) m.alignment.ransac.max_iters = cfg.ransac_iters;
    if (cfg.is_explicit("seed")) m.alignment.ransac.seed = cfg.seed;

    SampleSet set = load_sample_set(m);
    if (set.camera_height && (*set.camera_height < 1.0 || *set.camera_height > 2.0)) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "camera height %.3f m is outside the plausible range [1.0, 2.0] m",
                      *set.camera_height);
        set.warnings.push_back(buf);
    }
    write_bundle(set, cfg.out);

    json summary;
    summary["samples"] = set.size();
    summary["observed_points"] = set.observed.size();
    json counts = json::array();
    for (const auto& s : set.samples) counts.push_back(s.cloud.size() - s.observed_tail);
    summary["sample_points"] = counts;
    summary["camera_height"] = set.camera_height ? json(*set.camera_height) : json(nullptr);
    if (set.floor)
        summary["floor"] = {{"normal", to_json(set.floor->normal)},
                            {"offset", set.floor->offset},
                            {"inlier_ratio", set.floor->inlier_ratio},
                            {"rmse", set.floor->rmse}};
    else
        summary["floor"] = nullptr;
    summary["warnings"] = set.warnings;
    write_text_file(cfg.out / "summary.json", summary.dump(2) + "\n");
    report_warnings(set.warnings);
    std::cout << "ingested " << set.size() << " samples into " << cfg.out.string() << "\n";
    return kOk;
}

namespace {

std::vector<LabelId> resolve_labels(const SampleSet& set, const std::vector<std::string>& requested)
{
    std::vector<LabelId> out;
    if (requested.empty()) {
        for (const auto& e : set.vocabulary) out.push_back(e.id);
        return out;
    }
    for (const auto& r : requested) {
        if (auto id = set.find_label(r)) {
            out.push_back(*id);
            continue;
        }
        LabelId id = kUnlabeled;
        try {
            std::size_t used = 0;
            id = static_cast<LabelId>(std::stol(r, &used));
            if (used != r.size()) throw std::invalid_argument(r);
        } catch (const std::exception&) {
            fail_config("label '" + r + "' is not in the vocabulary");
        }
        if (!set.has_label(id)) fail_config("label " + r + " is not in the vocabulary");
        out.push_back(id);
    }
    return out;
}

std::string scene_name_for(const RunConfig& cfg)
{
    if (!cfg.scene_name.empty()) return cfg.scene_name;
    return fs::absolute(cfg.manifest).lexically_normal().parent_path().filename().string();
}

json path_json(const std::vector<Configuration>& path)
{
    json out = json::array();
    for (const auto& c : path) out.push_back(json::array({c.x, c.y, c.theta}));
    return out;
}

}  // namespace

int cmd_plan(const RunConfig& cfg)
{
    require_path(cfg.manifest, "manifest");
    require_path(cfg.out, "out");
    const SampleSet set = load_sample_set(cfg.manifest);
    report_warnings(set.warnings);
    const auto labels = resolve_labels(set, cfg.labels);
    const RobotFootprint fp = footprint(cfg);
    const SampleSetIndex index(set, fp);

    PrmParams prm;
    prm.n_vertices = cfg.n_vertices;
    prm.gamma = cfg.gamma;
    prm.step = cfg.step;
    prm.seed = cfg.seed;
    prm.threads = cfg.threads;
    const Configuration start(set.support.origin.x(), set.support.origin.y(), set.support.yaw);
    Roadmap map = build_prm(set, index, start, prm);

    PlanParams pp;
    pp.target_radius = cfg.target_radius;
    pp.angular_weight = cfg.angular_weight;
    pp.frontier_cap = cfg.frontier_cap;

    json results = json::array();
    for (LabelId label : labels) {
        annotate_targets(map, index, label, cfg.target_radius);
        const PlanResult r = plan(map, set, label, fp, pp);
        if (r.cap_hit) std::cerr << "warning: label '" << set.label(label).name << "': search cap reached, result may be suboptimal\n";
        results.push_back({{"label", label},
                           {"name", set.label(label).name},
                           {"p_det", r.p_det},
                           {"p_plan", r.p_plan},
                           {"length", r.length},
                           {"path", path_json(r.path)},
                           {"vertices", r.vertex_ids},
                           {"success_mask", r.success_mask.to_hex()},
                           {"cap_hit", r.cap_hit},
                           {"states", r.states}});
        std::printf("%-16s p_det %.2f  p_plan %.2f  length %.2f\n", set.label(label).name.c_str(), r.p_det,
                    r.p_plan, r.length);
    }

    make_dir(cfg.out);
    const fs::path manifest_abs = fs::absolute(cfg.manifest).lexically_normal();
    const fs::path out_abs = fs::absolute(cfg.out).lexically_normal();
    json j;
    j["format"] = "genprior-plan";
    j["version"] = 1;
    j["scene"] = scene_name_for(cfg);
    j["manifest"] = manifest_abs.lexically_relative(out_abs).generic_string();
    j["samples"] = set.size();
    j["roadmap"] = {{"vertices", map.vertices.size()},
                    {"edges", map.edges.size()},
                    {"connection_radius", map.connection_radius},
                    {"draws", map.draws},
                    {"file", "roadmap.txt"}};
    j["params"] = {{"seed", cfg.seed},
                   {"n_vertices", cfg.n_vertices},
                   {"step", cfg.step},
                   {"target_radius", cfg.target_radius},
                   {"footprint_radius", cfg.footprint_radius},
                   {"band", json::array({cfg.band_min, cfg.band_max})},
                   {"angular_weight", cfg.angular_weight}};
    j["results"] = results;
    write_text_file(cfg.out / "plan.json", j.dump(2) + "\n");
    write_text_file(cfg.out / "roadmap.txt", format_roadmap(map));
    return kOk;
}

int cmd_eval(const RunConfig& cfg)
{
    require_path(cfg.out, "out");
    std::vector<EvalScene> scenes = cfg.scenes;
    if (scenes.empty()) {
        if (cfg.plans.empty()) fail_config("eval needs at least one --plan (or 'scenes' in the config)");
        if (!cfg.ground_truth.empty() && cfg.ground_truth.size() != cfg.plans.size())
            fail_config("give one --ground-truth per --plan, or none");
        for (std::size_t i = 0; i < cfg.plans.size(); ++i)
            scenes.push_back({cfg.plans[i], cfg.ground_truth.empty() ? fs::path() : cfg.ground_truth[i], {}});
    }

    EvalReport report;
    const LogBase base = cfg.log_base == "2" ? LogBase::Two : LogBase::Natural;
    for (const auto& sc : scenes) {
        json pj;
        try {
            pj = json::parse(read_text_file(sc.plan));
            if (pj.value("format", std::string()) != "genprior-plan")
                fail_config("'" + sc.plan.string() + "' is not a plan file");
        } catch (const json::exception& e) {
            fail_config("'" + sc.plan.string() + "': " + e.what());
        }
        const std::string scene = pj.at("scene").get<std::string>();
        for (const auto& r : pj.at("results"))
            report.rows.push_back({scene, r.at("name").get<std::string>(), r.at("p_det").get<double>(),
                                   r.at("p_plan").get<double>(), r.at("length").get<double>()});

        if (sc.ground_truth.empty()) {
            report.notices.push_back("scene " + scene + ": no ground truth, divergence omitted");
            continue;
        }
        auto ablations = sc.ablations;
        if (ablations.empty())
            ablations.emplace_back("det", sc.plan.parent_path() / pj.at("manifest").get<std::string>());
        for (const auto& [name, manifest] : ablations) {
            const SampleSet set = load_sample_set(manifest);
            std::vector<LabelId> ids;
            for (const auto& e : set.vocabulary) ids.push_back(e.id);
            const SceneDistribution gt = read_ground_truth(sc.ground_truth, set.vocabulary);
            const SceneDistribution pred = scene_distribution(set, ids, cfg.smoothing, cfg.epsilon);
            if (pred.smoothed) {
                char buf[64];
                std::snprintf(buf, sizeof buf, "%g", cfg.epsilon);
                report.notices.push_back("scene " + scene + ", " + name + ": zero predicted mass smoothed with epsilon " + buf);
            }
            report.kl[scene][name] = kl_divergence(gt, pred, base);
            if (std::find(report.ablations.begin(), report.ablations.end(), name) == report.ablations.end())
                report.ablations.push_back(name);
        }
    }
    if (report.ablations.empty()) report.notices.push_back("no ground truth given; divergence columns omitted");

    make_dir(cfg.out);
    write_text_file(cfg.out / "report.csv", format_report_csv(report));
    write_text_file(cfg.out / "report.json", format_report_json(report));
    for (const auto& n : report.notices) std::cerr << "notice: " << n << "\n";
    std::cout << "wrote " << report.rows.size() << " rows to " << cfg.out.string() << "\n";
    return kOk;
}

}  // namespace genprior::cli
