#include "genprior/planner.hpp"

#include "genprior/error.hpp"
#include "genprior/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <queue>
#include <thread>
#include <tuple>

namespace genprior {

double prm_gamma(double support_area)
{
    if (!(support_area > 0.0)) fail("prm: support area must be > 0");
    return 2.0 * std::sqrt(3.0 * support_area / std::numbers::pi);
}

double prm_radius(double gamma, std::size_t n)
{
    if (n < 2) fail("prm: need at least 2 vertices");
    const double nd = static_cast<double>(n);
    return gamma * std::sqrt(std::log(nd) / nd);
}

Roadmap build_prm(const SampleSet& set, const Configuration& start, const RobotFootprint& fp,
                  const PrmParams& params)
{
    const SampleSetIndex index(set, fp);
    return build_prm(set, index, start, params);
}

namespace {

Vec2 sample_triangle(const std::vector<Vec2>& tri, double r1, double r2)
{
    if (r1 + r2 > 1.0) {
        r1 = 1.0 - r1;
        r2 = 1.0 - r2;
    }
    return tri[0] + r1 * (tri[1] - tri[0]) + r2 * (tri[2] - tri[0]);
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> neighbor_pairs(const std::vector<Configuration>& v, double r)
{
    double min_x = std::numeric_limits<double>::infinity(), min_y = min_x;
    for (const auto& c : v) {
        min_x = std::min(min_x, c.x);
        min_y = std::min(min_y, c.y);
    }
    std::map<std::pair<long, long>, std::vector<std::uint32_t>> cells;
    auto cell = [&](const Configuration& c) {
        return std::pair<long, long>(static_cast<long>(std::floor((c.x - min_x) / r)),
                                     static_cast<long>(std::floor((c.y - min_y) / r)));
    };
    for (std::uint32_t i = 0; i < v.size(); ++i) cells[cell(v[i])].push_back(i);

    const double r2 = r * r;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
    for (std::uint32_t i = 0; i < v.size(); ++i) {
        const auto [cx, cy] = cell(v[i]);
        for (long dy = -1; dy <= 1; ++dy) {
            for (long dx = -1; dx <= 1; ++dx) {
                const auto it = cells.find({cx + dx, cy + dy});
                if (it == cells.end()) continue;
                for (std::uint32_t j : it->second) {
                    if (j <= i) continue;
                    const double ex = v[j].x - v[i].x;
                    const double ey = v[j].y - v[i].y;
                    if (ex * ex + ey * ey <= r2) out.emplace_back(i, j);
                }
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

Roadmap build_prm(const SampleSet& set, const SampleSetIndex& index, const Configuration& start,
                  const PrmParams& params)
{
    if (params.n_vertices < 2) fail("prm: n_vertices must be >= 2");
    if (!(params.step > 0.0)) fail("prm: densification step must be > 0");
    const auto tri = set.support.polygon();
    const double area = polygon_area(tri);
    if (!(area > 0.0)) fail("prm: support region is empty");
    if (!set.support.contains(start.xy())) fail("prm: start configuration lies outside the support region");

    const std::size_t n = set.size();
    Roadmap map;
    map.step = params.step;
    map.n_samples = n;

    SampleMask start_free = index.free_mask(start.x, start.y);
    if (start_free.empty_set()) fail_infeasible("start configuration collides in every sample");
    map.vertices.push_back(start);
    map.vertex_free.push_back(std::move(start_free));

    CounterRng rng = CounterRng::for_stream(params.seed, 0x50524D00u /* "PRM" */);
    const std::size_t max_draws = params.max_draws_factor * params.n_vertices;
    while (map.vertices.size() < params.n_vertices && map.draws < max_draws) {
        const double r1 = rng.uniform01();
        const double r2 = rng.uniform01();
        const double th = rng.uniform(-std::numbers::pi, std::numbers::pi);
        ++map.draws;
        const Vec2 p = sample_triangle(tri, r1, r2);
        SampleMask free = index.free_mask(p.x(), p.y());
        if (free.empty_set()) continue;
        map.vertices.emplace_back(p.x(), p.y(), th);
        map.vertex_free.push_back(std::move(free));
    }

    const double gamma = params.gamma.value_or(prm_gamma(area));
    if (!(gamma > 0.0)) fail("prm: gamma must be > 0");
    map.connection_radius = prm_radius(gamma, params.n_vertices);

    const auto pairs = neighbor_pairs(map.vertices, map.connection_radius);
    std::vector<RoadmapEdge> candidates(pairs.size());
    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
            const auto [a, b] = pairs[k];
            const auto& va = map.vertices[a];
            const auto& vb = map.vertices[b];
            RoadmapEdge e;
            e.a = a;
            e.b = b;
            e.length = std::hypot(vb.x - va.x, vb.y - va.y);
            e.free = map.vertex_free[a] & map.vertex_free[b];
            const auto pts = densify_segment(va, vb, params.step);
            for (std::size_t j = 1; j + 1 < pts.size() && !e.free.empty_set(); ++j)
                e.free &= index.free_mask(pts[j].x, pts[j].y);
            candidates[k] = std::move(e);
        }
    };
    unsigned threads = params.threads ? params.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, pairs.size() / 256)));
    if (threads <= 1) {
        work(0, pairs.size());
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (pairs.size() + threads - 1) / threads;
        for (unsigned t = 0; t < threads; ++t) {
            const std::size_t b = std::min(pairs.size(), t * chunk);
            const std::size_t e = std::min(pairs.size(), b + chunk);
            pool.emplace_back(work, b, e);
        }
        for (auto& th : pool) th.join();
    }

    map.adjacency.assign(map.vertices.size(), {});
    for (auto& e : candidates) {
        if (e.free.empty_set()) continue;
        const auto id = static_cast<std::uint32_t>(map.edges.size());
        map.adjacency[e.a].emplace_back(e.b, id);
        map.adjacency[e.b].emplace_back(e.a, id);
        map.edges.push_back(std::move(e));
    }
    for (auto& adj : map.adjacency) std::sort(adj.begin(), adj.end());
    return map;
}

void annotate_targets(Roadmap& map, const SampleSetIndex& index, LabelId label, double radius)
{
    if (map.target_radius != radius) {
        map.targets.clear();
        map.target_radius = radius;
    }
    std::vector<SampleMask> masks;
    masks.reserve(map.vertices.size());
    index.prepare_label(label, radius);
    for (const auto& v : map.vertices) masks.push_back(index.target_mask(v.x, v.y, label, radius));
    map.targets[label] = std::move(masks);
}

double path_length(const std::vector<Configuration>& path, double angular_weight)
{
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        const double dx = path[i + 1].x - path[i].x;
        const double dy = path[i + 1].y - path[i].y;
        const double dt = angular_weight * wrap_angle(path[i + 1].theta - path[i].theta);
        total += std::sqrt(dx * dx + dy * dy + dt * dt);
    }
    return total;
}

namespace {

struct Incumbent
{
    std::size_t count = 0;
    double length = std::numeric_limits<double>::infinity();
    std::vector<std::uint32_t> vertices;
    SampleMask mask;
};

struct SearchState
{
    std::uint32_t vertex;
    std::uint32_t parent;
    double length;
    SampleMask mask;
    bool dead = false;
};

constexpr std::uint32_t kNoParent = std::numeric_limits<std::uint32_t>::max();

std::vector<std::uint32_t> trace(const std::vector<SearchState>& states, std::uint32_t id)
{
    std::vector<std::uint32_t> out;
    for (std::uint32_t s = id; s != kNoParent; s = states[s].parent) out.push_back(states[s].vertex);
    std::reverse(out.begin(), out.end());
    return out;
}

bool prunable(std::size_t bound, double length, const Incumbent& best)
{
    return bound == 0 || bound < best.count || (bound == best.count && length >= best.length);
}

void best_first(const Roadmap& map, const std::vector<SampleMask>& targets, const SampleMask& any_target,
                const PlanParams& params, Incumbent& best, PlanResult& out)
{
    std::vector<SearchState> states;
    std::vector<std::vector<std::uint32_t>> labels(map.vertices.size());
    using Key = std::tuple<std::size_t, double, std::uint32_t>;
    auto worse = [](const Key& a, const Key& b) {
        if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) < std::get<0>(b);
        if (std::get<1>(a) != std::get<1>(b)) return std::get<1>(a) > std::get<1>(b);
        return std::get<2>(a) > std::get<2>(b);
    };
    std::priority_queue<Key, std::vector<Key>, decltype(worse)> open(worse);

    auto push = [&](std::uint32_t v, std::uint32_t parent, double len, SampleMask mask, std::size_t bound) {
        auto& at = labels[v];
        for (std::uint32_t id : at)
            if (mask.is_subset_of(states[id].mask) && states[id].length <= len) return;
        std::erase_if(at, [&](std::uint32_t id) {
            if (states[id].mask.is_subset_of(mask) && len <= states[id].length) {
                states[id].dead = true;
                return true;
            }
            return false;
        });
        const auto id = static_cast<std::uint32_t>(states.size());
        states.push_back({v, parent, len, std::move(mask)});
        at.push_back(id);
        open.emplace(bound, len, id);
    };

    const std::size_t start_bound = map.vertex_free[0].count_and(any_target);
    if (start_bound == 0) return;
    push(0, kNoParent, 0.0, map.vertex_free[0], start_bound);

    while (!open.empty()) {
        const auto [bound, len, id] = open.top();
        open.pop();
        if (states[id].dead || prunable(bound, len, best)) continue;
        const std::uint32_t v = states[id].vertex;
        const std::size_t here = states[id].mask.count_and(targets[v]);
        if (here > best.count || (here > 0 && here == best.count && len < best.length)) {
            best.count = here;
            best.length = len;
            best.vertices = trace(states, id);
            best.mask = states[id].mask & targets[v];
        }
        for (const auto& [u, e] : map.adjacency[v]) {
            const auto& edge = map.edges[e];
            SampleMask next = states[id].mask & edge.free;
            const std::size_t b = next.count_and(any_target);
            const double nl = len + edge.length;
            if (prunable(b, nl, best)) continue;
            if (states.size() >= params.frontier_cap) {
                out.cap_hit = true;
                out.states = states.size();
                return;
            }
            push(u, id, nl, std::move(next), b);
        }
    }
    out.states = states.size();
}

void exhaustive(const Roadmap& map, const std::vector<SampleMask>& targets, const PlanParams& params,
                Incumbent& best, PlanResult& out)
{
    std::vector<char> on_path(map.vertices.size(), 0);
    std::vector<std::uint32_t> path{0};
    on_path[0] = 1;
    auto visit = [&](auto&& self, std::uint32_t v, const SampleMask& mask, double len) -> void {
        if (out.cap_hit) return;
        if (++out.states >= params.frontier_cap) {
            out.cap_hit = true;
            return;
        }
        const std::size_t here = mask.count_and(targets[v]);
        if (here > best.count || (here > 0 && here == best.count && len < best.length)) {
            best.count = here;
            best.length = len;
            best.vertices = path;
            best.mask = mask & targets[v];
        }
        for (const auto& [u, e] : map.adjacency[v]) {
            if (on_path[u]) continue;
            on_path[u] = 1;
            path.push_back(u);
            self(self, u, mask & map.edges[e].free, len + map.edges[e].length);
            path.pop_back();
            on_path[u] = 0;
        }
    };
    visit(visit, 0, map.vertex_free[0], 0.0);
}

}  // namespace

PlanResult plan(const Roadmap& map, const SampleSet& set, LabelId label, const RobotFootprint& fp,
                const PlanParams& params)
{
    set.require_label(label);
    if (map.vertices.empty()) fail("plan: empty roadmap");
    if (map.n_samples != set.size()) fail("plan: roadmap was built for a different sample set");

    PlanResult out;
    out.label = label;
    out.p_det = detection_probability(set, label);
    out.success_mask = SampleMask(set.size());

    std::vector<SampleMask> local;
    const std::vector<SampleMask>* targets = nullptr;
    const auto it = map.targets.find(label);
    if (it != map.targets.end() && map.target_radius == params.target_radius) {
        targets = &it->second;
    } else {
        const SampleSetIndex index(set, fp);
        index.prepare_label(label, params.target_radius);
        local.reserve(map.vertices.size());
        for (const auto& v : map.vertices) local.push_back(index.target_mask(v.x, v.y, label, params.target_radius));
        targets = &local;
    }

    SampleMask any_target(set.size());
    for (const auto& m : *targets) any_target |= m;

    Incumbent best;
    if (params.prune) best_first(map, *targets, any_target, params, best, out);
    else exhaustive(map, *targets, params, best, out);

    if (best.count == 0) return out;
    out.vertex_ids = best.vertices;
    for (std::size_t i = 0; i < best.vertices.size(); ++i) {
        const auto& v = map.vertices[best.vertices[i]];
        if (i == 0) {
            out.path.push_back(v);
        } else {
            const auto& prev = out.path.back();
            out.path.emplace_back(v.x, v.y, std::atan2(v.y - prev.y, v.x - prev.x));
        }
    }
    out.success_mask = best.mask;
    out.p_plan = mask_fraction(best.mask);
    out.length = path_length(out.path, params.angular_weight);
    return out;
}

std::string format_roadmap(const Roadmap& map)
{
    std::string out;
    char buf[160];
    auto line = [&](const char* fmt, auto... args) {
        std::snprintf(buf, sizeof buf, fmt, args...);
        out += buf;
    };
    out += "genprior-roadmap 1\n";
    line("samples %zu\n", map.n_samples);
    line("step %.17g\n", map.step);
    line("radius %.17g\n", map.connection_radius);
    line("vertices %zu\n", map.vertices.size());
    for (std::size_t i = 0; i < map.vertices.size(); ++i) {
        const auto& v = map.vertices[i];
        line("v %zu %.17g %.17g %.17g ", i, v.x, v.y, v.theta);
        out += map.vertex_free[i].to_hex() + "\n";
    }
    line("edges %zu\n", map.edges.size());
    for (const auto& e : map.edges) {
        line("e %u %u %.17g ", e.a, e.b, e.length);
        out += e.free.to_hex() + "\n";
    }
    for (const auto& [label, masks] : map.targets) {
        std::size_t nonzero = 0;
        for (const auto& m : masks) nonzero += !m.empty_set();
        line("targets %d %.17g %zu\n", static_cast<int>(label), map.target_radius, nonzero);
        for (std::size_t i = 0; i < masks.size(); ++i)
            if (!masks[i].empty_set()) {
                line("t %zu ", i);
                out += masks[i].to_hex() + "\n";
            }
    }
    return out;
}

}  // namespace genprior
