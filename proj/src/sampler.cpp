#include "genprior/sampler.hpp"

#include "genprior/error.hpp"
#include "genprior/io.hpp"
#include "genprior/json_util.hpp"
#include "genprior/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace genprior {

using nlohmann::json;

bool Box3::contains(const Box3& inner) const
{
    return (inner.lo.array() >= lo.array()).all() && (inner.hi.array() <= hi.array()).all();
}

namespace {

void check_probability(double p, const std::string& what)
{
    if (!(p >= 0.0 && p <= 1.0)) fail(what + ": presence probability must lie in [0, 1]");
}

}  // namespace

void RoomDistribution::validate() const
{
    if (!(extent.lo.array() <= extent.hi.array()).all()) fail("room: extent min exceeds max");
    for (const auto& w : walls) {
        check_probability(w.presence, "wall '" + w.name + "'");
        if (w.from.x() != w.to.x() && w.from.y() != w.to.y())
            fail("wall '" + w.name + "': segment must be axis-aligned");
        if (!(w.z_min < w.z_max)) fail("wall '" + w.name + "': z_min must be < z_max");
        if (!(w.density >= 0.0)) fail("wall '" + w.name + "': negative density");
        const Box3 box{Vec3(std::min(w.from.x(), w.to.x()), std::min(w.from.y(), w.to.y()), w.z_min),
                       Vec3(std::max(w.from.x(), w.to.x()), std::max(w.from.y(), w.to.y()), w.z_max)};
        if (!extent.contains(box)) fail("wall '" + w.name + "': outside the room extent");
    }
    for (const auto& o : objects) {
        check_probability(o.presence, "object '" + o.name + "'");
        if (!(o.region.lo.array() <= o.region.hi.array()).all())
            fail("object '" + o.name + "': region min exceeds max");
        if (!(o.region.lo.z() < o.region.hi.z())) fail("object '" + o.name + "': region needs positive height");
        if (!(o.radius > 0.0)) fail("object '" + o.name + "': radius must be > 0");
        if (!(o.density >= 0.0)) fail("object '" + o.name + "': negative density");
        if (!extent.contains(o.region)) fail("object '" + o.name + "': region outside the room extent");
        if (o.label != kUnlabeled &&
            std::none_of(vocabulary.begin(), vocabulary.end(), [&](const auto& e) { return e.id == o.label; }))
            fail("object '" + o.name + "': label " + std::to_string(o.label) + " not in vocabulary");
    }
}

std::size_t wall_point_count(const WallSpec& w)
{
    const double area = (w.to - w.from).norm() * (w.z_max - w.z_min);
    return static_cast<std::size_t>(std::ceil(area * w.density));
}

std::size_t object_point_count(const ObjectSpec& o)
{
    const double area = 2.0 * std::numbers::pi * o.radius * (o.region.hi.z() - o.region.lo.z());
    return static_cast<std::size_t>(std::ceil(area * o.density));
}

WorkspaceSample draw_sample(const RoomDistribution& dist, std::uint64_t seed)
{
    WorkspaceSample s;
    s.seed = seed;
    s.source = "synthetic";
    s.entity_present.resize(dist.entity_count(), false);
    std::uint64_t e = 0;
    for (const auto& w : dist.walls) {
        CounterRng presence = CounterRng::for_stream(seed, 2 * e);
        const bool present = presence.uniform01() < w.presence;
        s.entity_present[e] = present;
        if (present) {
            CounterRng geo = CounterRng::for_stream(seed, 2 * e + 1);
            const std::size_t n = wall_point_count(w);
            for (std::size_t k = 0; k < n; ++k) {
                const double t = geo.uniform01();
                const double z = geo.uniform(w.z_min, w.z_max);
                const Vec2 xy = w.from + t * (w.to - w.from);
                s.cloud.push_back(Vec3(xy.x(), xy.y(), z), w.label, 1.0);
            }
        }
        ++e;
    }
    for (const auto& o : dist.objects) {
        CounterRng presence = CounterRng::for_stream(seed, 2 * e);
        const bool present = presence.uniform01() < o.presence;
        s.entity_present[e] = present;
        if (present) {
            CounterRng geo = CounterRng::for_stream(seed, 2 * e + 1);
            const double cx = geo.uniform(o.region.lo.x(), o.region.hi.x());
            const double cy = geo.uniform(o.region.lo.y(), o.region.hi.y());
            const std::size_t n = object_point_count(o);
            for (std::size_t k = 0; k < n; ++k) {
                const double a = geo.uniform(0.0, 2.0 * std::numbers::pi);
                const double z = geo.uniform(o.region.lo.z(), o.region.hi.z());
                s.cloud.push_back(Vec3(cx + o.radius * std::cos(a), cy + o.radius * std::sin(a), z), o.label, 1.0);
            }
        }
        ++e;
    }
    return s;
}

namespace {

enum class DiscRelation { Inside, Outside };

/// Relation of the x-y box [lo, hi] to the disc around c. `strict` is the
/// strict-inequality membership used by collisions.
DiscRelation classify(const Vec2& lo, const Vec2& hi, const Vec2& c, double radius, bool strict,
                      const std::string& what)
{
    const Vec2 nearest = c.cwiseMax(lo).cwiseMin(hi);
    const double min_d2 = (nearest - c).squaredNorm();
    const Vec2 far(std::abs(lo.x() - c.x()) > std::abs(hi.x() - c.x()) ? lo.x() : hi.x(),
                   std::abs(lo.y() - c.y()) > std::abs(hi.y() - c.y()) ? lo.y() : hi.y());
    const double max_d2 = (far - c).squaredNorm();
    const double r2 = radius * radius;
    if (strict ? max_d2 < r2 : max_d2 <= r2) return DiscRelation::Inside;
    if (strict ? min_d2 >= r2 : min_d2 > r2) return DiscRelation::Outside;
    fail("exact_prior: " + what + " partially overlaps the query disc");
}

struct EntityGeometry
{
    Vec2 lo, hi;
    double z_min, z_max;
    double presence;
    LabelId label;
    std::size_t points;
    std::string name;
};

std::vector<EntityGeometry> entity_geometry(const RoomDistribution& dist)
{
    std::vector<EntityGeometry> out;
    for (const auto& w : dist.walls)
        out.push_back({w.from.cwiseMin(w.to), w.from.cwiseMax(w.to), w.z_min, w.z_max, w.presence, w.label,
                       wall_point_count(w), "wall '" + w.name + "'"});
    for (const auto& o : dist.objects) {
        const Vec2 pad = Vec2::Constant(o.radius);
        out.push_back({o.region.lo.head<2>() - pad, o.region.hi.head<2>() + pad, o.region.lo.z(),
                       o.region.hi.z(), o.presence, o.label, object_point_count(o), "object '" + o.name + "'"});
    }
    return out;
}

}  // namespace

double exact_prior(const RoomDistribution& dist, const Configuration& q, const SemanticQuery& query,
                   const RobotFootprint& fp)
{
    dist.validate();
    fp.validate();
    const bool want_obstacle = query.kind != SemanticQuery::Kind::Target;
    const bool want_target = query.kind != SemanticQuery::Kind::Obstacle;
    if (want_target && (query.label == kUnlabeled ||
                        std::none_of(dist.vocabulary.begin(), dist.vocabulary.end(),
                                     [&](const auto& e) { return e.id == query.label; })))
        fail("exact_prior: label " + std::to_string(query.label) + " not in vocabulary");

    const Vec2 c(q.x, q.y);
    struct Relevant
    {
        double p;
        bool obstacle;
        bool target;
    };
    std::vector<Relevant> uncertain;
    bool certain_obstacle = false;
    bool certain_target = false;
    for (const auto& g : entity_geometry(dist)) {
        if (g.points == 0 || g.presence == 0.0) continue;
        bool obstacle = false;
        bool target = false;
        if (want_obstacle && classify(g.lo, g.hi, c, fp.radius, true, g.name) == DiscRelation::Inside) {
            const bool inside_band = g.z_min >= fp.z_min && g.z_max <= fp.z_max;
            const bool outside_band = g.z_max < fp.z_min || g.z_min > fp.z_max;
            if (!inside_band && !outside_band)
                fail("exact_prior: " + g.name + " partially overlaps the obstacle height band");
            obstacle = inside_band;
        }
        if (want_target && g.label == query.label &&
            classify(g.lo, g.hi, c, query.target_radius, false, g.name) == DiscRelation::Inside)
            target = true;
        if (!obstacle && !target) continue;
        if (g.presence == 1.0) {
            certain_obstacle |= obstacle;
            certain_target |= target;
        } else {
            uncertain.push_back({g.presence, obstacle, target});
        }
    }
    if (uncertain.size() > 20)
        fail("exact_prior: " + std::to_string(uncertain.size()) + " uncertain entities exceed the limit of 20");

    const std::size_t k = uncertain.size();
    double total = 0.0;
    for (std::uint32_t combo = 0; combo < (1u << k); ++combo) {
        double weight = 1.0;
        bool obstacle = certain_obstacle;
        bool target = certain_target;
        for (std::size_t j = 0; j < k; ++j) {
            const bool on = (combo >> j) & 1u;
            weight *= on ? uncertain[j].p : 1.0 - uncertain[j].p;
            if (on) {
                obstacle |= uncertain[j].obstacle;
                target |= uncertain[j].target;
            }
        }
        bool holds = false;
        switch (query.kind) {
        case SemanticQuery::Kind::Obstacle: holds = obstacle; break;
        case SemanticQuery::Kind::Target: holds = target; break;
        case SemanticQuery::Kind::ObstacleFreeAndTarget: holds = !obstacle && target; break;
        }
        if (holds) total += weight;
    }
    return total;
}

namespace {

Box3 parse_box(const json& j, const std::string& what)
{
    Box3 b;
    b.lo = json_vec3(j.at("min"), what + ".min");
    b.hi = json_vec3(j.at("max"), what + ".max");
    return b;
}

LabelId parse_label_ref(const json& j, const std::vector<LabelEntry>& vocab, const std::string& what)
{
    if (j.is_number_integer()) return j.get<LabelId>();
    if (j.is_string()) {
        const auto name = j.get<std::string>();
        for (const auto& e : vocab)
            if (e.name == name) return e.id;
        fail_config(what + ": label '" + name + "' is not in the vocabulary");
    }
    fail_config(what + ": label must be an id or a name");
}

void parse_entities(const json& j, const std::vector<LabelEntry>& vocab, RoomDistribution& d)
{
    if (j.contains("walls")) {
        for (const auto& w : j.at("walls")) {
            WallSpec s;
            s.name = w.value("name", "wall" + std::to_string(d.walls.size()));
            s.from = json_vec2(w.at("from"), s.name + ".from");
            s.to = json_vec2(w.at("to"), s.name + ".to");
            if (w.contains("z")) {
                s.z_min = w.at("z").at(0).get<double>();
                s.z_max = w.at("z").at(1).get<double>();
            }
            s.presence = w.value("presence", 1.0);
            s.density = w.value("density", s.density);
            if (w.contains("label")) s.label = parse_label_ref(w.at("label"), vocab, s.name);
            d.walls.push_back(s);
        }
    }
    if (j.contains("objects")) {
        for (const auto& o : j.at("objects")) {
            ObjectSpec s;
            s.name = o.value("name", "object" + std::to_string(d.objects.size()));
            s.label = o.contains("label") ? parse_label_ref(o.at("label"), vocab, s.name) : kUnlabeled;
            s.region = parse_box(o.at("region"), s.name + ".region");
            s.presence = o.value("presence", 1.0);
            s.radius = o.value("radius", s.radius);
            s.density = o.value("density", s.density);
            d.objects.push_back(s);
        }
    }
}

}  // namespace

SyntheticScene parse_scene(const std::string& json_text)
{
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        fail_config(std::string("scene file: ") + e.what());
    }
    try {
        SyntheticScene scene;
        const auto vocab = parse_vocabulary(j.at("vocabulary"));
        auto& d = scene.distribution;
        d.vocabulary = vocab;
        d.extent = parse_box(j.at("extent"), "extent");
        parse_entities(j, vocab, d);
        scene.observed.vocabulary = vocab;
        scene.observed.extent = d.extent;
        if (j.contains("observed")) parse_entities(j.at("observed"), vocab, scene.observed);
        for (auto& w : scene.observed.walls) w.presence = 1.0;
        for (auto& o : scene.observed.objects) o.presence = 1.0;

        const auto& cam = j.at("camera");
        scene.support.origin = Vec2(cam.at("x").get<double>(), cam.at("y").get<double>());
        scene.support.yaw = cam.value("yaw", 0.0);
        scene.camera_height = cam.value("height", scene.camera_height);
        scene.support.frustum = parse_frustum(j.at("frustum"));
        d.validate();
        scene.observed.validate();
        scene.support.frustum.validate();
        return scene;
    } catch (const json::exception& e) {
        fail_config(std::string("scene file: ") + e.what());
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Invalid) fail_config(std::string("scene file: ") + e.what());
        throw;
    }
}

SyntheticScene load_scene(const std::filesystem::path& path)
{
    try {
        return parse_scene(read_text_file(path));
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Config) fail_config("'" + path.string() + "': " + e.what());
        throw;
    }
}

std::uint64_t sample_seed(std::uint64_t base_seed, std::size_t index)
{
    return base_seed + index;
}

std::uint64_t observed_seed(std::uint64_t base_seed)
{
    return mix64(base_seed ^ 0x4F42535256454400ull);  // "OBSRVED"
}

SampleSet synthesize_sample_set(const SyntheticScene& scene, std::size_t n, std::uint64_t base_seed)
{
    if (n == 0) fail("synthesize: need at least one sample");
    SampleSet set;
    set.vocabulary = scene.distribution.vocabulary;
    set.support = scene.support;
    const auto obs = draw_sample(scene.observed, observed_seed(base_seed));
    set.observed = obs.cloud;
    set.samples.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto s = draw_sample(scene.distribution, sample_seed(base_seed, i));
        s.sample_id = static_cast<int>(i);
        set.samples.push_back(std::move(s));
    }
    merge_observed(set);
    return set;
}

}  // namespace genprior
