#include "genprior/priors.hpp"

#include "genprior/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <tuple>

namespace genprior {

double wrap_angle(double theta)
{
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double t = std::fmod(theta + std::numbers::pi, two_pi);
    if (t < 0.0) t += two_pi;
    t -= std::numbers::pi;
    if (t >= std::numbers::pi) t -= two_pi;
    return t;
}

void RobotFootprint::validate() const
{
    if (!(radius > 0.0)) fail("footprint: radius must be > 0");
    if (!(z_min < z_max)) fail("footprint: obstacle band needs z_min < z_max");
}

std::vector<Vec2> SupportRegion::polygon() const
{
    const Vec2 fwd(std::cos(yaw), std::sin(yaw));
    const Vec2 left(-fwd.y(), fwd.x());
    const double half = (frustum.far - frustum.near) * frustum.tan_half_h();
    const Vec2 apex = origin + frustum.near * fwd;
    const Vec2 far_center = origin + frustum.far * fwd;
    // Counter-clockwise: apex, far-right, far-left.
    return {apex, far_center - half * left, far_center + half * left};
}

double polygon_area(const std::vector<Vec2>& poly)
{
    double a = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Vec2& p = poly[i];
        const Vec2& q = poly[(i + 1) % poly.size()];
        a += p.x() * q.y() - q.x() * p.y();
    }
    return 0.5 * a;
}

bool polygon_contains(const std::vector<Vec2>& poly, const Vec2& p)
{
    if (poly.size() < 3) return false;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Vec2 e = poly[(i + 1) % poly.size()] - poly[i];
        const Vec2 d = p - poly[i];
        if (e.x() * d.y() - e.y() * d.x() < 0.0) return false;
    }
    return true;
}

double SupportRegion::area() const
{
    return polygon_area(polygon());
}

bool SupportRegion::contains(const Vec2& p) const
{
    return polygon_contains(polygon(), p);
}

bool SampleSet::has_label(LabelId id) const
{
    return std::any_of(vocabulary.begin(), vocabulary.end(), [&](const auto& e) { return e.id == id; });
}

const LabelEntry& SampleSet::label(LabelId id) const
{
    for (const auto& e : vocabulary)
        if (e.id == id) return e;
    fail("unknown label id " + std::to_string(id));
}

std::optional<LabelId> SampleSet::find_label(const std::string& name) const
{
    for (const auto& e : vocabulary)
        if (e.name == name) return e.id;
    return std::nullopt;
}

void SampleSet::require_label(LabelId id) const
{
    if (id == kUnlabeled || !has_label(id)) fail("label " + std::to_string(id) + " is not in the vocabulary");
}

void SampleSet::validate() const
{
    if (samples.empty()) fail("sample set: need at least one sample");
    support.frustum.validate();
    alignment.validate();
    for (const auto& e : vocabulary)
        if (e.id == kUnlabeled) fail("sample set: label id 0 is reserved for unlabeled points");
    for (const auto& s : samples) {
        s.cloud.validate();
        if (s.observed_tail > s.cloud.size()) fail("sample set: observed tail exceeds cloud size");
    }
    observed.validate();
}

void merge_observed(SampleSet& set)
{
    for (auto& s : set.samples) {
        s.cloud.append(set.observed);
        s.observed_tail = set.observed.size();
    }
}

bool collision_indicator(const Configuration& q, const WorkspaceSample& s, const RobotFootprint& fp)
{
    const double r2 = fp.radius * fp.radius;
    for (const auto& p : s.cloud.points) {
        if (p.z() < fp.z_min || p.z() > fp.z_max) continue;
        if (planar_dist2(q.x, q.y, p) < r2) return true;
    }
    return false;
}

bool target_indicator(const Configuration& q, const WorkspaceSample& s, LabelId label, double radius)
{
    if (label == kUnlabeled) fail("target_indicator: label 0 is not a target");
    const double r2 = radius * radius;
    const auto& pts = s.cloud.points;
    for (std::size_t i = 0; i < pts.size(); ++i)
        if (s.cloud.labels[i] == label && planar_dist2(q.x, q.y, pts[i]) <= r2) return true;
    return false;
}

bool semantic_indicator(const Configuration& q, const WorkspaceSample& s, const SemanticQuery& query,
                        const RobotFootprint& fp)
{
    switch (query.kind) {
    case SemanticQuery::Kind::Obstacle: return collision_indicator(q, s, fp);
    case SemanticQuery::Kind::Target: return target_indicator(q, s, query.label, query.target_radius);
    case SemanticQuery::Kind::ObstacleFreeAndTarget:
        return !collision_indicator(q, s, fp) && target_indicator(q, s, query.label, query.target_radius);
    }
    return false;
}

SampleMask indicator_mask(const Configuration& q, const SampleSet& set, const SemanticQuery& query,
                          const RobotFootprint& fp)
{
    if (query.kind != SemanticQuery::Kind::Obstacle) set.require_label(query.label);
    SampleMask m(set.size());
    for (std::size_t i = 0; i < set.size(); ++i)
        if (semantic_indicator(q, set.samples[i], query, fp)) m.set(i);
    return m;
}

double prior_estimate(const Configuration& q, const SampleSet& set, const SemanticQuery& query,
                      const RobotFootprint& fp)
{
    return mask_fraction(indicator_mask(q, set, query, fp));
}

std::vector<Configuration> densify_segment(const Configuration& a, const Configuration& b, double step)
{
    if (!(step > 0.0)) fail("densify: step must be > 0");
    const bool swap = std::tie(b.x, b.y) < std::tie(a.x, a.y);
    const Configuration& p = swap ? b : a;
    const Configuration& r = swap ? a : b;
    const double dx = r.x - p.x;
    const double dy = r.y - p.y;
    const double len = std::sqrt(dx * dx + dy * dy);
    const auto pieces = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(len / step)));
    std::vector<Configuration> out;
    out.reserve(pieces + 1);
    for (std::size_t j = 0; j <= pieces; ++j) {
        const double t = static_cast<double>(j) / static_cast<double>(pieces);
        Configuration c;
        // Endpoints are reproduced exactly so they coincide with roadmap vertices.
        c.x = j == pieces ? r.x : p.x + dx * t;
        c.y = j == pieces ? r.y : p.y + dy * t;
        c.theta = a.theta;
        out.push_back(c);
    }
    return out;
}

SampleMask path_success_mask(const std::vector<Configuration>& path, const SampleSet& set, LabelId label,
                             const RobotFootprint& fp, double step, double target_radius)
{
    if (path.empty()) fail("path_success_probability: empty path");
    if (!(step > 0.0)) fail("path_success_probability: step must be > 0");
    set.require_label(label);

    std::vector<Configuration> checks;
    if (path.size() == 1) {
        checks.push_back(path.front());
    } else {
        for (std::size_t i = 0; i + 1 < path.size(); ++i) {
            auto seg = densify_segment(path[i], path[i + 1], step);
            checks.insert(checks.end(), seg.begin(), seg.end());
        }
    }

    SampleMask m(set.size());
    for (std::size_t i = 0; i < set.size(); ++i) {
        const auto& s = set.samples[i];
        if (!target_indicator(path.back(), s, label, target_radius)) continue;
        const bool free = std::none_of(checks.begin(), checks.end(),
                                       [&](const Configuration& c) { return collision_indicator(c, s, fp); });
        if (free) m.set(i);
    }
    return m;
}

double path_success_probability(const std::vector<Configuration>& path, const SampleSet& set, LabelId label,
                                const RobotFootprint& fp, double step, double target_radius)
{
    return mask_fraction(path_success_mask(path, set, label, fp, step, target_radius));
}

SampleMask detection_mask(const SampleSet& set, LabelId label)
{
    set.require_label(label);
    SampleMask m(set.size());
    for (std::size_t i = 0; i < set.size(); ++i) {
        const auto& labels = set.samples[i].cloud.labels;
        if (std::find(labels.begin(), labels.end(), label) != labels.end()) m.set(i);
    }
    return m;
}

double detection_probability(const SampleSet& set, LabelId label)
{
    return mask_fraction(detection_mask(set, label));
}

}  // namespace genprior
