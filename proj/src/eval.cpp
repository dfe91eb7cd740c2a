#include "genprior/eval.hpp"

#include "genprior/error.hpp"
#include "genprior/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace genprior {

using nlohmann::json;

void SceneDistribution::validate() const
{
    if (labels.size() != masses.size()) fail("distribution: label and mass counts differ");
    double sum = 0.0;
    for (double m : masses) {
        if (!(m >= 0.0) || !std::isfinite(m)) fail("distribution: masses must be finite and non-negative");
        sum += m;
    }
    if (std::abs(sum - 1.0) > 1e-12) fail("distribution: masses do not sum to 1");
}

SceneDistribution normalize_masses(std::vector<LabelId> labels, std::vector<double> raw, bool smoothing,
                                   double epsilon)
{
    if (labels.size() != raw.size()) fail("distribution: label and mass counts differ");
    if (labels.empty()) fail("distribution: no labels");
    for (double m : raw)
        if (!(m >= 0.0) || !std::isfinite(m)) fail("distribution: masses must be finite and non-negative");
    SceneDistribution d;
    d.labels = std::move(labels);
    const bool has_zero = std::any_of(raw.begin(), raw.end(), [](double m) { return m == 0.0; });
    if (has_zero && smoothing) {
        if (!(epsilon > 0.0)) fail("distribution: smoothing epsilon must be > 0");
        for (double& m : raw) m += epsilon;
        d.smoothed = true;
    }
    const double sum = std::accumulate(raw.begin(), raw.end(), 0.0);
    if (sum == 0.0) fail("distribution: every mass is zero and smoothing is disabled");
    for (double& m : raw) m /= sum;
    d.masses = std::move(raw);
    return d;
}

SceneDistribution scene_distribution(const SampleSet& set, const std::vector<LabelId>& labels, bool smoothing,
                                     double epsilon)
{
    std::vector<double> raw;
    raw.reserve(labels.size());
    for (LabelId l : labels) raw.push_back(detection_probability(set, l));
    return normalize_masses(labels, std::move(raw), smoothing, epsilon);
}

double kl_divergence(const SceneDistribution& gt, const SceneDistribution& pred, LogBase base)
{
    if (gt.labels != pred.labels) fail("kl_divergence: distributions are over different label lists");
    double total = 0.0;
    for (std::size_t i = 0; i < gt.masses.size(); ++i) {
        const double p = gt.masses[i];
        const double q = pred.masses[i];
        if (p == 0.0) continue;
        if (!(q > 0.0))
            fail("kl_divergence: predicted mass is zero for label " + std::to_string(gt.labels[i]) +
                 " where the ground truth is positive");
        total += p * std::log(p / q);
    }
    if (base == LogBase::Two) total /= std::log(2.0);
    return total;
}

SceneDistribution parse_ground_truth(const std::string& text, const std::vector<LabelEntry>& vocabulary)
{
    std::vector<LabelId> labels;
    for (const auto& e : vocabulary) labels.push_back(e.id);
    std::vector<double> raw(labels.size(), 0.0);
    std::vector<bool> seen(labels.size(), false);

    std::istringstream in(text);
    std::string line;
    for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) fail_config("ground truth line " + std::to_string(lineno) + ": expected 'label, mass'");
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string name = trim(line.substr(0, comma));
        const std::string value = trim(line.substr(comma + 1));
        double mass = 0.0;
        try {
            std::size_t used = 0;
            mass = std::stod(value, &used);
            if (used != value.size()) throw std::invalid_argument(value);
        } catch (const std::exception&) {
            fail_config("ground truth line " + std::to_string(lineno) + ": bad mass '" + value + "'");
        }
        const auto it = std::find_if(vocabulary.begin(), vocabulary.end(), [&](const auto& e) { return e.name == name; });
        if (it == vocabulary.end())
            fail_config("ground truth line " + std::to_string(lineno) + ": label '" + name + "' is not in the vocabulary");
        const auto k = static_cast<std::size_t>(it - vocabulary.begin());
        if (seen[k]) fail_config("ground truth line " + std::to_string(lineno) + ": duplicate label '" + name + "'");
        if (!(mass >= 0.0)) fail_config("ground truth line " + std::to_string(lineno) + ": negative mass");
        seen[k] = true;
        raw[k] = mass;
    }
    try {
        return normalize_masses(std::move(labels), std::move(raw), false);
    } catch (const Error& e) {
        fail_config(std::string("ground truth: ") + e.what());
    }
}

SceneDistribution read_ground_truth(const std::filesystem::path& path, const std::vector<LabelEntry>& vocabulary)
{
    try {
        return parse_ground_truth(read_text_file(path), vocabulary);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Config) fail_config("'" + path.string() + "': " + e.what());
        throw;
    }
}

namespace {

std::string fixed2(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

}  // namespace

std::string format_report_csv(const EvalReport& report)
{
    std::string out = "scene, label, p_det, p_plan, length";
    for (const auto& a : report.ablations) out += ", kl_" + a;
    out += "\n";
    for (const auto& r : report.rows) {
        out += r.scene + ", " + r.label + ", " + fixed2(r.p_det) + ", " + fixed2(r.p_plan) + ", " + fixed2(r.length);
        const auto scene = report.kl.find(r.scene);
        for (const auto& a : report.ablations) {
            out += ", ";
            if (scene == report.kl.end()) continue;
            const auto it = scene->second.find(a);
            if (it != scene->second.end()) out += fixed2(it->second);
        }
        out += "\n";
    }
    return out;
}

std::string format_report_json(const EvalReport& report)
{
    json j;
    j["format"] = "genprior-report";
    j["version"] = 1;
    j["ablations"] = report.ablations;
    json rows = json::array();
    for (const auto& r : report.rows)
        rows.push_back({{"scene", r.scene}, {"label", r.label}, {"p_det", r.p_det}, {"p_plan", r.p_plan},
                        {"length", r.length}});
    j["rows"] = rows;
    json kl = json::object();
    for (const auto& [scene, per] : report.kl) kl[scene] = per;
    j["kl"] = kl;
    j["notices"] = report.notices;
    return j.dump(2) + "\n";
}

EvalReport parse_report_json(const std::string& text)
{
    try {
        const json j = json::parse(text);
        if (j.value("format", std::string()) != "genprior-report" || j.value("version", 0) != 1)
            fail_config("not a genprior-report version 1 document");
        EvalReport r;
        r.ablations = j.at("ablations").get<std::vector<std::string>>();
        for (const auto& row : j.at("rows"))
            r.rows.push_back({row.at("scene").get<std::string>(), row.at("label").get<std::string>(),
                              row.at("p_det").get<double>(), row.at("p_plan").get<double>(),
                              row.at("length").get<double>()});
        for (const auto& [scene, per] : j.at("kl").items())
            r.kl[scene] = per.get<std::map<std::string, double>>();
        r.notices = j.at("notices").get<std::vector<std::string>>();
        return r;
    } catch (const json::exception& e) {
        fail_config(std::string("report: ") + e.what());
    }
}

}  // namespace genprior
