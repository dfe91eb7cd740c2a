#pragma once

#include "genprior/priors.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace genprior {

/// Normalized per-label masses over a fixed label list.
struct SceneDistribution
{
    std::vector<LabelId> labels;
    std::vector<double> masses;
    bool smoothed = false;

    void validate() const;
};

inline constexpr double kDefaultSmoothing = 1e-6;

/**
 * Normalize raw non-negative masses. When any mass is zero and smoothing is
 * on, `epsilon` is added to every label first. All-zero input without
 * smoothing is an error.
 */
SceneDistribution normalize_masses(std::vector<LabelId> labels, std::vector<double> raw, bool smoothing = true,
                                   double epsilon = kDefaultSmoothing);

/// Masses proportional to detection_probability for each label.
SceneDistribution scene_distribution(const SampleSet& set, const std::vector<LabelId>& labels,
                                     bool smoothing = true, double epsilon = kDefaultSmoothing);

enum class LogBase { Natural, Two };

/// sum_o gt(o) log(gt(o) / pred(o)); terms with gt(o) = 0 vanish. Throws if pred(o) = 0 < gt(o).
double kl_divergence(const SceneDistribution& gt, const SceneDistribution& pred, LogBase base = LogBase::Natural);

/**
 * Ground-truth statistics: one `label, mass` pair per line, label given by
 * name; '#' starts a comment. The result is normalized over `vocabulary`,
 * labels missing from the file getting mass 0.
 */
SceneDistribution parse_ground_truth(const std::string& text, const std::vector<LabelEntry>& vocabulary);
SceneDistribution read_ground_truth(const std::filesystem::path& path, const std::vector<LabelEntry>& vocabulary);

struct ReportRow
{
    std::string scene;
    std::string label;
    double p_det = 0.0;
    double p_plan = 0.0;
    double length = 0.0;
    bool operator==(const ReportRow&) const = default;
};

struct EvalReport
{
    std::vector<std::string> ablations;
    std::vector<ReportRow> rows;
    /// scene -> ablation -> divergence; absent entries are reported empty.
    std::map<std::string, std::map<std::string, double>> kl;
    std::vector<std::string> notices;

    bool operator==(const EvalReport&) const = default;
};

/// Comma-separated table: scene, label, p_det, p_plan, length, then kl_<ablation>; two decimals.
std::string format_report_csv(const EvalReport& report);
std::string format_report_json(const EvalReport& report);
EvalReport parse_report_json(const std::string& text);

}  // namespace genprior
