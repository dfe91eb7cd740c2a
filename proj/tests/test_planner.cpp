#include "graph_oracle.hpp"
#include "support.hpp"

#include "genprior/planner.hpp"
#include "genprior/spatial_index.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

using namespace genprior;
using testing::add_post;
using testing::blank_set;
using testing::enumerate_paths;
using testing::manual_map;
using testing::mask_of;
using testing::ManualEdge;
using testing::random_graph;

namespace {

/// Posts scattered in front of the camera; label-1 targets sit below the obstacle band.
SampleSet cluttered_set(CounterRng& rng, std::size_t n, bool first_sample_empty)
{
    auto set = blank_set(n, {{1, "target"}, {2, "decoy"}});
    set.support.frustum.far = 6.0;
    for (std::size_t i = 0; i < n; ++i) {
        auto& c = set.samples[i].cloud;
        if (first_sample_empty && i == 0) continue;
        for (int k = 0; k < 12; ++k) add_post(c, rng.uniform(0.5, 5.5), rng.uniform(-4, 4));
        if (rng.uniform01() < 0.7) c.push_back(Vec3(rng.uniform(2, 5.5), rng.uniform(-3, 3), 0.1), 1, 1.0);
    }
    for (std::size_t i = 0; i < n; ++i) set.samples[i].cloud.push_back(Vec3(4.0, 1.0, 0.1), 1, 1.0);
    return set;
}

}  // namespace

TEST_SUITE("planner")
{

TEST_CASE("path length")
{
    CHECK(path_length({}) == 0.0);
    CHECK(path_length({{1, 2, 3}}) == 0.0);
    CHECK(path_length({{0, 0, 0}, {3, 4, 0}}) == 5.0);
    CHECK(path_length({{0, 0, 0}, {0, 0, std::numbers::pi / 2}}, 1.0) == doctest::Approx(std::numbers::pi / 2));
    CHECK(path_length({{0, 0, 0}, {0, 0, std::numbers::pi / 2}}) == 0.0);
    // Heading change takes the short way round.
    CHECK(path_length({{0, 0, 3.0}, {0, 0, -3.0}}, 1.0) == doctest::Approx(2 * std::numbers::pi - 6.0));
}

TEST_CASE("connection radius")
{
    CHECK(prm_gamma(std::numbers::pi / 3) == doctest::Approx(2.0));
    CHECK(prm_radius(2.0, 2000) == doctest::Approx(2.0 * std::sqrt(std::log(2000.0) / 2000.0)));
    CHECK_THROWS_AS(prm_radius(1.0, 1), Error);
    CHECK_THROWS_AS(prm_gamma(0.0), Error);
}

TEST_CASE("obstacle-free roadmap: every vertex and edge is free everywhere")
{
    auto set = blank_set(5);
    set.support.frustum.far = 6.0;
    PrmParams p;
    p.n_vertices = 300;
    const Roadmap m = build_prm(set, Configuration(0, 0, 0.4), RobotFootprint{}, p);
    REQUIRE(m.vertices.size() == 300);
    CHECK(m.vertices[0] == Configuration(0, 0, 0.4));
    CHECK(m.draws == 299);
    for (const auto& f : m.vertex_free) CHECK(f.full());
    for (const auto& e : m.edges) CHECK(e.free.full());
    for (const auto& v : m.vertices) CHECK(set.support.contains(v.xy()));

    // Edges are exactly the pairs within the connection radius.
    std::size_t pairs = 0;
    const double r2 = m.connection_radius * m.connection_radius;
    for (std::size_t a = 0; a < m.vertices.size(); ++a)
        for (std::size_t b = a + 1; b < m.vertices.size(); ++b) {
            const double dx = m.vertices[a].x - m.vertices[b].x, dy = m.vertices[a].y - m.vertices[b].y;
            pairs += dx * dx + dy * dy <= r2;
        }
    CHECK(m.edges.size() == pairs);
    CHECK(m.connection_radius == doctest::Approx(prm_radius(prm_gamma(set.support.area()), 300)));
    for (std::size_t v = 0; v < m.adjacency.size(); ++v)
        for (const auto& [u, e] : m.adjacency[v]) {
            CHECK(((m.edges[e].a == v && m.edges[e].b == u) || (m.edges[e].b == v && m.edges[e].a == u)));
            CHECK(m.edges[e].a < m.edges[e].b);
        }
}

TEST_CASE("wall in one sample clears that bit on crossing edges only")
{
    auto set = blank_set(2);
    set.support.frustum.far = 6.0;
    for (double y = -8; y <= 8; y += 0.05) add_post(set.samples[0].cloud, 3.0, y);
    PrmParams p;
    p.n_vertices = 400;
    const RobotFootprint fp;
    const Roadmap m = build_prm(set, Configuration(0, 0), fp, p);
    std::size_t crossing = 0;
    for (const auto& e : m.edges) {
        const auto& a = m.vertices[e.a];
        const auto& b = m.vertices[e.b];
        CHECK(e.free.test(1));
        const bool clear_of_wall = std::min(a.x, b.x) >= 3.0 + fp.radius || std::max(a.x, b.x) <= 3.0 - fp.radius;
        const bool crosses = (a.x - 3.0) * (b.x - 3.0) < 0;
        if (clear_of_wall) CHECK(e.free.test(0));
        if (crosses) {
            CHECK_FALSE(e.free.test(0));
            ++crossing;
        }
    }
    CHECK(crossing > 0);
}

TEST_CASE("edge masks match densified recomputation")
{
    CounterRng rng(11);
    const RobotFootprint fp;
    for (int trial = 0; trial < 4; ++trial) {
        const SampleSet set = cluttered_set(rng, 24, false);
        PrmParams p;
        p.n_vertices = 150;
        p.seed = 100 + trial;
        const Roadmap m = build_prm(set, Configuration(0, 0), fp, p);
        auto recompute = [&](const Configuration& a, const Configuration& b) {
            SampleMask free = SampleMask::ones(set.size());
            for (const auto& q : densify_segment(a, b, p.step)) free &= ~indicator_mask(q, set, SemanticQuery::obstacle(), fp);
            return free;
        };
        for (std::size_t v = 0; v < m.vertices.size(); ++v)
            CHECK(m.vertex_free[v] == ~indicator_mask(m.vertices[v], set, SemanticQuery::obstacle(), fp));
        for (std::size_t v = 1; v < m.vertices.size(); ++v) CHECK_FALSE(m.vertex_free[v].empty_set());
        for (const auto& e : m.edges) CHECK(e.free == recompute(m.vertices[e.a], m.vertices[e.b]));
        // Pairs within reach that were dropped are blocked in every sample.
        const double r2 = m.connection_radius * m.connection_radius;
        std::set<std::pair<std::uint32_t, std::uint32_t>> stored;
        for (const auto& e : m.edges) stored.emplace(e.a, e.b);
        for (std::uint32_t a = 0; a < m.vertices.size(); ++a)
            for (std::uint32_t b = a + 1; b < m.vertices.size(); ++b) {
                const double dx = m.vertices[a].x - m.vertices[b].x, dy = m.vertices[a].y - m.vertices[b].y;
                if (dx * dx + dy * dy <= r2 && !stored.count({a, b}))
                    CHECK(recompute(m.vertices[a], m.vertices[b]).empty_set());
            }
    }
}

TEST_CASE("start inside the target radius")
{
    auto set = blank_set(6);
    for (auto& s : set.samples) s.cloud.push_back(Vec3(0.5, 0.2, 0.1), 1, 1.0);
    const RobotFootprint fp;
    PrmParams p;
    p.n_vertices = 100;
    auto m = build_prm(set, Configuration(0, 0, 0.7), fp, p);
    const SampleSetIndex index(set, fp);
    annotate_targets(m, index, 1, 1.0);
    const auto r = plan(m, set, 1, fp);
    REQUIRE(r.path.size() == 1);
    CHECK(r.path[0] == Configuration(0, 0, 0.7));
    CHECK(r.vertex_ids == std::vector<std::uint32_t>{0});
    CHECK(r.p_plan == 1.0);
    CHECK(r.p_plan == r.p_det);
    CHECK(r.length == 0.0);
}

TEST_CASE("disjoint goals: the larger subset wins")
{
    const std::size_t n = 10;
    const auto a = mask_of(n, {0, 1, 2, 3, 4, 5});
    const auto b = mask_of(n, {6, 7, 8, 9});
    const auto none = SampleMask(n);
    SUBCASE("separate branches")
    {
        const auto m = manual_map(n, {{0, 0}, {3, 0}, {0, 1}}, {{0, 1, SampleMask::ones(n)}, {0, 2, SampleMask::ones(n)}},
                                  {none, a, b});
        const auto r = plan(m, blank_set(n), 1, RobotFootprint{});
        CHECK(r.p_plan == 0.6);
        CHECK(r.vertex_ids == std::vector<std::uint32_t>{0, 1});
        CHECK(r.success_mask == a);
        CHECK(r.length == 3.0);
        CHECK(enumerate_paths(m, {none, a, b}).first == 6);
    }
    SUBCASE("both goals on one chain")
    {
        // Only the terminal vertex counts, so passing the first goal to reach the second loses.
        const auto m = manual_map(n, {{0, 0}, {1, 0}, {2, 0}}, {{0, 1, SampleMask::ones(n)}, {1, 2, SampleMask::ones(n)}},
                                  {none, b, a});
        const auto r = plan(m, blank_set(n), 1, RobotFootprint{});
        CHECK(r.p_plan == 0.6);
        CHECK(r.vertex_ids == std::vector<std::uint32_t>{0, 1, 2});
        CHECK(r.length == 2.0);
    }
    SUBCASE("ties go to the shorter path")
    {
        const auto m = manual_map(n, {{0, 0}, {3, 0}, {0, 2}}, {{0, 1, SampleMask::ones(n)}, {0, 2, SampleMask::ones(n)}},
                                  {none, a, a});
        const auto r = plan(m, blank_set(n), 1, RobotFootprint{});
        CHECK(r.vertex_ids == std::vector<std::uint32_t>{0, 2});
        CHECK(r.length == 2.0);
    }
    SUBCASE("a blocked edge shrinks the surviving samples")
    {
        const auto m = manual_map(n, {{0, 0}, {3, 0}, {0, 1}},
                                  {{0, 1, mask_of(n, {0, 1, 6, 7, 8, 9})}, {0, 2, SampleMask::ones(n)}}, {none, a, b});
        const auto r = plan(m, blank_set(n), 1, RobotFootprint{});
        CHECK(r.p_plan == 0.4);
        CHECK(r.vertex_ids == std::vector<std::uint32_t>{0, 2});
    }
}

TEST_CASE("path headings follow the segments")
{
    const std::size_t n = 2;
    const auto m = manual_map(n, {{0, 0}, {0, 2}, {2, 2}}, {{0, 1, SampleMask::ones(n)}, {1, 2, SampleMask::ones(n)}},
                              {SampleMask(n), SampleMask(n), SampleMask::ones(n)});
    const auto r = plan(m, blank_set(n), 1, RobotFootprint{});
    REQUIRE(r.path.size() == 3);
    CHECK(r.path[1].theta == doctest::Approx(std::numbers::pi / 2));
    CHECK(r.path[2].theta == doctest::Approx(0.0));
    PlanParams turning;
    turning.angular_weight = 1.0;
    CHECK(plan(m, blank_set(n), 1, RobotFootprint{}, turning).length ==
          doctest::Approx(2 * std::hypot(2.0, std::numbers::pi / 2)));
}

TEST_CASE("absent label yields the empty result")
{
    auto set = blank_set(8, {{1, "target"}, {2, "ghost"}});
    for (auto& s : set.samples) s.cloud.push_back(Vec3(3, 0, 0.1), 1, 1.0);
    const RobotFootprint fp;
    PrmParams p;
    p.n_vertices = 80;
    const auto m = build_prm(set, Configuration(0, 0), fp, p);
    const auto r = plan(m, set, 2, fp);
    CHECK(r.path.empty());
    CHECK(r.vertex_ids.empty());
    CHECK(r.p_plan == 0.0);
    CHECK(r.p_det == 0.0);
    CHECK(r.length == 0.0);
    CHECK(r.success_mask.size() == 8);
    CHECK(r.success_mask.empty_set());
    CHECK_THROWS_AS(plan(m, set, 3, fp), Error);
    CHECK_THROWS_AS(plan(m, blank_set(3), 1, fp), Error);
}

TEST_CASE("search is optimal on small graphs")
{
    CounterRng rng(12);
    PlanParams exhaustive;
    exhaustive.prune = false;
    for (int trial = 0; trial < 600; ++trial) {
        const std::size_t n = 1 + rng.uniform_index(8);
        const std::size_t v = 2 + rng.uniform_index(9);
        const auto m = random_graph(rng, n, v);
        const auto& targets = m.targets.at(1);
        const auto [count, len] = enumerate_paths(m, targets);
        const auto set = blank_set(n);
        const auto pruned = plan(m, set, 1, RobotFootprint{});
        const auto full = plan(m, set, 1, RobotFootprint{}, exhaustive);
        CHECK(pruned.success_mask.count() == count);
        CHECK(full.success_mask.count() == count);
        CHECK(pruned.length == doctest::Approx(len).epsilon(1e-12));
        CHECK(full.length == doctest::Approx(len).epsilon(1e-12));
        CHECK_FALSE(pruned.cap_hit);
        // The reported mask is what the reported vertex sequence earns.
        if (!pruned.vertex_ids.empty()) {
            SampleMask mask = m.vertex_free[0];
            for (std::size_t i = 1; i < pruned.vertex_ids.size(); ++i) {
                const auto a = pruned.vertex_ids[i - 1], b = pruned.vertex_ids[i];
                bool found = false;
                for (const auto& [u, e] : m.adjacency[a])
                    if (u == b) {
                        mask &= m.edges[e].free;
                        found = true;
                    }
                CHECK(found);
            }
            CHECK((mask & targets[pruned.vertex_ids.back()]) == pruned.success_mask);
        }
    }
}

TEST_CASE("plans on sampled roadmaps reproduce under recomputation")
{
    CounterRng rng(13);
    const RobotFootprint fp;
    for (int trial = 0; trial < 6; ++trial) {
        const SampleSet set = cluttered_set(rng, 32, false);
        PrmParams p;
        p.n_vertices = 250;
        p.seed = trial;
        auto m = build_prm(set, Configuration(0, 0), fp, p);
        const SampleSetIndex index(set, fp);
        for (LabelId label : {LabelId{1}, LabelId{2}}) {
            annotate_targets(m, index, label, 1.0);
            const auto r = plan(m, set, label, fp);
            CHECK(r.p_plan <= r.p_det);
            CHECK(r.success_mask.is_subset_of(detection_mask(set, label)));
            CHECK(r.p_plan == mask_fraction(r.success_mask));
            if (r.path.empty()) continue;
            CHECK(path_success_mask(r.path, set, label, fp, p.step, 1.0) == r.success_mask);
            CHECK(path_success_probability(r.path, set, label, fp, p.step, 1.0) == r.p_plan);
            CHECK((r.length > 0.0) == (r.path.size() > 1));
            // Annotated and ad-hoc target masks give the same answer.
            Roadmap bare = m;
            bare.targets.clear();
            const auto again = plan(bare, set, label, fp);
            CHECK(again.success_mask == r.success_mask);
            CHECK(again.length == r.length);
        }
    }
}

TEST_CASE("clearing a sample's obstacles never lowers p_plan")
{
    CounterRng rng(14);
    const RobotFootprint fp;
    for (int trial = 0; trial < 6; ++trial) {
        const SampleSet before = cluttered_set(rng, 16, true);
        SampleSet after = before;
        const std::size_t k = 1 + rng.uniform_index(15);
        after.samples[k].cloud = after.samples[k].cloud.filter([&](std::size_t i) {
            return after.samples[k].cloud.labels[i] != kUnlabeled;
        });
        PrmParams p;
        p.n_vertices = 200;
        const auto ma = build_prm(before, Configuration(0, 0), fp, p);
        const auto mb = build_prm(after, Configuration(0, 0), fp, p);
        // Sample 0 is empty, so no vertex is ever rejected and both roadmaps share their vertices.
        REQUIRE(ma.vertices == mb.vertices);
        const auto ra = plan(ma, before, 1, fp);
        const auto rb = plan(mb, after, 1, fp);
        CHECK(rb.p_plan >= ra.p_plan);
        std::map<std::pair<std::uint32_t, std::uint32_t>, SampleMask> wider;
        for (const auto& e : mb.edges) wider.emplace(std::pair(e.a, e.b), e.free);
        for (const auto& e : ma.edges) {
            const auto it = wider.find({e.a, e.b});
            REQUIRE(it != wider.end());
            CHECK(e.free.is_subset_of(it->second));
        }
    }
}

TEST_CASE("roadmaps and plans are deterministic")
{
    CounterRng rng(15);
    const SampleSet set = cluttered_set(rng, 20, false);
    const RobotFootprint fp;
    PrmParams p;
    p.n_vertices = 300;
    p.threads = 1;
    auto a = build_prm(set, Configuration(0, 0), fp, p);
    p.threads = 4;
    auto b = build_prm(set, Configuration(0, 0), fp, p);
    CHECK(format_roadmap(a) == format_roadmap(b));
    p.seed = 99;
    CHECK(format_roadmap(build_prm(set, Configuration(0, 0), fp, p)) != format_roadmap(a));
    const auto ra = plan(a, set, 1, fp);
    const auto rb = plan(b, set, 1, fp);
    CHECK(ra.vertex_ids == rb.vertex_ids);
    CHECK(ra.success_mask == rb.success_mask);
}

TEST_CASE("roadmap dump layout")
{
    const std::size_t n = 5;
    auto m = manual_map(n, {{0, 0}, {1, 0}}, {{0, 1, mask_of(n, {0, 4})}}, {SampleMask(n), mask_of(n, {4})});
    m.step = 0.05;
    m.connection_radius = 2.0;
    const std::string text = format_roadmap(m);
    std::istringstream in(text);
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(in, line)) lines.push_back(line);
    REQUIRE(lines.size() == 11);
    CHECK(lines[0] == "genprior-roadmap 1");
    CHECK(lines[1] == "samples 5");
    CHECK(lines[2] == "step 0.050000000000000003");
    CHECK(lines[3] == "radius 2");
    CHECK(lines[4] == "vertices 2");
    CHECK(lines[5] == "v 0 0 0 0 1f");
    CHECK(lines[7] == "edges 1");
    CHECK(lines[8] == "e 0 1 1 11");
    CHECK(lines[9] == "targets 1 1 1");
    CHECK(lines[10] == "t 1 10");
}

TEST_CASE("roadmap construction errors")
{
    auto set = blank_set(3);
    const RobotFootprint fp;
    CHECK_THROWS_AS(build_prm(set, Configuration(-5, 0), fp), Error);
    PrmParams tiny;
    tiny.n_vertices = 1;
    CHECK_THROWS_AS(build_prm(set, Configuration(0, 0), fp, tiny), Error);
    for (auto& s : set.samples) add_post(s.cloud, 0.1, 0.0);
    try {
        build_prm(set, Configuration(0, 0), fp);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Infeasible);
    }
    // Collision in only some samples is fine.
    set.samples[1].cloud = LabeledPointCloud{};
    PrmParams p;
    p.n_vertices = 50;
    const auto m = build_prm(set, Configuration(0, 0), fp, p);
    CHECK(m.vertex_free[0] == mask_of(3, {1}));
}

TEST_CASE("frontier cap is reported")
{
    const std::size_t n = 4;
    const auto ones = SampleMask::ones(n);
    const auto m = manual_map(n, {{0, 0}, {1, 0}, {2, 0}, {3, 0}}, {{0, 1, ones}, {1, 2, ones}, {2, 3, ones}},
                              {SampleMask(n), SampleMask(n), SampleMask(n), ones});
    PlanParams tight;
    tight.frontier_cap = 2;
    const auto capped = plan(m, blank_set(n), 1, RobotFootprint{}, tight);
    CHECK(capped.cap_hit);
    CHECK(capped.path.empty());
    const auto free_run = plan(m, blank_set(n), 1, RobotFootprint{});
    CHECK_FALSE(free_run.cap_hit);
    CHECK(free_run.p_plan == 1.0);
    CHECK(free_run.states == 4);
}

}  // TEST_SUITE
