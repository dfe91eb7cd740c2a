#include "support.hpp"

#include "genprior/io.hpp"
#include "genprior/kdtree.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numbers>

using namespace genprior;
using testing::TempDir;

TEST_SUITE("geometry")
{

TEST_CASE("on-axis pixel back-projects onto the optical axis")
{
    // 3x3 image: the center pixel's center coincides with the principal point.
    CameraIntrinsics cam{3, 3, 1.2};
    DepthImage d(3, 3);
    d.at(1, 1) = 2.0f;
    const auto c = backproject(d, cam);
    REQUIRE(c.size() == 1);
    CHECK(c.points[0].x() == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(c.points[0].y() == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(c.points[0].z() == 2.0);
}

TEST_CASE("2x2 image with a 90 degree field of view")
{
    // focal = 2 / (2 tan 45deg) = 1, principal point (1, 1); pixel centers at 0.5 and 1.5.
    CameraIntrinsics cam{2, 2, std::numbers::pi / 2};
    CHECK(cam.focal() == doctest::Approx(1.0));
    DepthImage d(2, 2, 1.0f);
    const auto c = backproject(d, cam);
    REQUIRE(c.size() == 4);
    const double expect[4][3] = {{-0.5, 0.5, 1}, {0.5, 0.5, 1}, {-0.5, -0.5, 1}, {0.5, -0.5, 1}};
    for (int i = 0; i < 4; ++i)
        for (int k = 0; k < 3; ++k) CHECK(c.points[i][k] == doctest::Approx(expect[i][k]).epsilon(1e-12));
}

TEST_CASE("invalid pixels produce no points, all-invalid gives an empty cloud")
{
    CameraIntrinsics cam{4, 2, 1.0};
    DepthImage d(4, 2);
    CHECK(backproject(d, cam).empty());
    d.at(2, 1) = 3.0f;
    d.at(0, 0) = std::numeric_limits<float>::infinity();
    CHECK(backproject(d, cam).size() == 1);
}

TEST_CASE("back-projection rejects mismatched grids")
{
    CameraIntrinsics cam{4, 2, 1.0};
    DepthImage d(3, 2, 1.0f);
    CHECK_THROWS_AS(backproject(d, cam), Error);
    DepthImage ok(4, 2, 1.0f);
    PixelLabels labels{4, 1, std::vector<LabelId>(4, 1), {}};
    CHECK_THROWS_AS(backproject(ok, cam, &labels), Error);
}

TEST_CASE("labels and confidences follow their pixels")
{
    CameraIntrinsics cam{2, 1, 1.0};
    DepthImage d(2, 1, 1.0f);
    d.at(0, 0) = DepthImage::kInvalidDepth;
    PixelLabels labels{2, 1, {7, 9}, {0.25, 0.75}};
    const auto c = backproject(d, cam, &labels);
    REQUIRE(c.size() == 1);
    CHECK(c.labels[0] == 9);
    CHECK(c.confidences[0] == 0.75);
}

TEST_CASE("a 25 m pixel is culled at 20 m")
{
    CameraIntrinsics cam{8, 6, 1.3};
    DepthImage d(8, 6, 4.0f);
    d.at(3, 2) = 25.0f;
    const auto full = backproject(d, cam);
    REQUIRE(full.size() == 48);
    const auto culled = cull_depth(full, 20.0);
    CHECK(culled.size() == 47);
    for (const auto& p : culled.points) CHECK(p.z() <= 20.0);
}

TEST_CASE("cull_depth keeps z <= max")
{
    LabeledPointCloud c;
    CHECK(cull_depth(c, 20.0).empty());
    c.push_back({0, 0, 5}, 1, 0.5);
    c.push_back({0, 0, 19.9}, 2, 0.6);
    c.push_back({0, 0, 20.1}, 3, 0.7);
    const auto out = cull_depth(c, 20.0);
    REQUIRE(out.size() == 2);
    CHECK(out.points[1].z() == 19.9);
    CHECK(out.labels == std::vector<LabelId>{1, 2});
    CHECK(out.confidences == std::vector<double>{0.5, 0.6});
    CHECK_THROWS_AS(cull_depth(c, 0.0), Error);
}

namespace {

LabeledPointCloud brute_force_outliers(const LabeledPointCloud& c, double r, std::size_t k)
{
    return c.filter([&](std::size_t i) {
        std::size_t n = 0;
        for (std::size_t j = 0; j < c.size(); ++j)
            if (j != i && (c.points[i] - c.points[j]).squaredNorm() < r * r) ++n;
        return n >= k;
    });
}

}  // namespace

TEST_CASE("radius outlier removal: isolated point and tight cluster")
{
    LabeledPointCloud c;
    c.push_back({5, 5, 5});
    CHECK(radius_outlier_removal(c, 0.1, 10).empty());

    CounterRng rng(3);
    LabeledPointCloud cluster;
    for (int i = 0; i < 11; ++i)
        cluster.push_back(Vec3(rng.uniform(-0.0175, 0.0175), rng.uniform(-0.0175, 0.0175), rng.uniform(-0.0175, 0.0175)));
    // Every pairwise distance is below the 0.05 m diameter bound, hence below the radius.
    const auto kept = radius_outlier_removal(cluster, 0.1, 10);
    CHECK(kept.size() == 11);
    CHECK(kept == brute_force_outliers(cluster, 0.1, 10));
}

TEST_CASE("radius outlier removal matches brute force on random clouds")
{
    CounterRng rng(77);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 1 + rng.uniform_index(500);
        const auto c = testing::random_cloud(rng, n, 0.3 + rng.uniform01());
        const std::size_t k = rng.uniform_index(15);
        const double r = 0.05 + 0.1 * rng.uniform01();
        CHECK(radius_outlier_removal(c, r, k) == brute_force_outliers(c, r, k));
    }
}

TEST_CASE("strict radius: a neighbor exactly at the radius does not count")
{
    LabeledPointCloud c;
    c.push_back({0, 0, 0});
    c.push_back({0.5, 0, 0});
    CHECK(radius_outlier_removal(c, 0.5, 1).empty());
    CHECK(radius_outlier_removal(c, 0.5000001, 1).size() == 2);
}

TEST_CASE("apply_transform")
{
    LabeledPointCloud c;
    c.push_back({1, 2, 3}, 4, 0.5);
    CHECK(apply_transform(c, RigidTransform::identity()) == c);

    RigidTransform up;
    up.translation = Vec3(0, 0, 1);
    CHECK(apply_transform(c, up).points[0] == Vec3(1, 2, 4));
    CHECK(apply_transform(c, up).labels[0] == 4);

    RigidTransform yaw;
    yaw.rotation = Eigen::AngleAxisd(std::numbers::pi / 2, Vec3::UnitZ()).toRotationMatrix();
    LabeledPointCloud x;
    x.push_back({1, 0, 0});
    const Vec3 p = apply_transform(x, yaw).points[0];
    CHECK((p - Vec3(0, 1, 0)).norm() < 1e-12);
}

TEST_CASE("apply_transform preserves pairwise distances")
{
    CounterRng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const auto c = testing::random_cloud(rng, 30, 4.0);
        RigidTransform t;
        const Vec3 axis = Vec3(rng.normal(), rng.normal(), rng.normal()).normalized();
        t.rotation = Eigen::AngleAxisd(rng.uniform(-3, 3), axis).toRotationMatrix();
        t.translation = Vec3(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5));
        const auto m = apply_transform(c, t);
        for (std::size_t i = 0; i < c.size(); ++i)
            for (std::size_t j = i + 1; j < c.size(); ++j)
                CHECK(std::abs((m.points[i] - m.points[j]).norm() - (c.points[i] - c.points[j]).norm()) < 1e-9);
    }
}

TEST_CASE("rigid transform validation and algebra")
{
    RigidTransform t;
    t.rotation = Eigen::AngleAxisd(0.3, Vec3(1, 2, 3).normalized()).toRotationMatrix();
    t.translation = Vec3(1, -2, 0.5);
    CHECK_NOTHROW(t.validate());
    const auto id = t.compose(t.inverse());
    CHECK((id.rotation - Mat3::Identity()).norm() < 1e-12);
    CHECK(id.translation.norm() < 1e-12);
    RigidTransform mirror;
    mirror.rotation(0, 0) = -1;
    CHECK_THROWS_AS(mirror.validate(), Error);
    RigidTransform scaled;
    scaled.rotation *= 1.001;
    CHECK_THROWS_AS(scaled.validate(), Error);
}

TEST_CASE("frustum membership")
{
    Frustum f;
    f.intrinsics = CameraIntrinsics{640, 480, std::numbers::pi / 2};  // focal 320
    f.expansion = 160;                                                // tan_h = 480 / 320 = 1.5
    CHECK(f.tan_half_h() == doctest::Approx(1.5));
    CHECK(f.tan_half_v() == doctest::Approx(0.75));

    LabeledPointCloud c;
    c.push_back({0, 0, 5});
    c.push_back({0, 0, 12});
    // At z = 4.8 the apex (z = -0.2) is 5 m away: lateral bound 7.5 m, vertical 3.75 m.
    c.push_back({7.4999, 0, 4.8});
    c.push_back({7.5001, 0, 4.8});
    c.push_back({0, 3.7499, 4.8});
    c.push_back({0, -3.7501, 4.8});
    c.push_back({0, 0, -0.1});   // behind the camera plane, inside the clearance
    c.push_back({0, 0, -0.25});  // behind the apex
    const auto kept = frustum_filter(c, f);
    REQUIRE(kept.size() == 4);
    CHECK(kept.points[0] == Vec3(0, 0, 5));
    CHECK(kept.points[1] == Vec3(7.4999, 0, 4.8));
    CHECK(kept.points[2] == Vec3(0, 3.7499, 4.8));
    CHECK(kept.points[3] == Vec3(0, 0, -0.1));
}

TEST_CASE("frustum filter is idempotent")
{
    Frustum f;
    f.intrinsics = CameraIntrinsics{320, 240, 1.4};
    f.expansion = 50;
    CounterRng rng(8);
    LabeledPointCloud c;
    for (int i = 0; i < 2000; ++i) c.push_back(Vec3(rng.uniform(-15, 15), rng.uniform(-10, 10), rng.uniform(-1, 13)));
    const auto once = frustum_filter(c, f);
    CHECK(once.size() > 0);
    CHECK(once.size() < c.size());
    CHECK(frustum_filter(once, f) == once);
}

TEST_CASE("frustum validation")
{
    Frustum f;
    f.near = 5;
    f.far = 4;
    CHECK_THROWS_AS(f.validate(), Error);
    Frustum g;
    g.expansion = -1;
    CHECK_THROWS_AS(g.validate(), Error);
}

TEST_CASE("project inverts backproject for every valid pixel")
{
    CounterRng rng(11);
    for (int trial = 0; trial < 25; ++trial) {
        CameraIntrinsics cam{1 + static_cast<int>(rng.uniform_index(64)), 1 + static_cast<int>(rng.uniform_index(48)),
                             rng.uniform(0.2, 3.0)};
        DepthImage d(cam.width, cam.height);
        for (auto& v : d.depths)
            if (rng.uniform01() < 0.8) v = static_cast<float>(rng.uniform(0.05, 30.0));
        const auto cloud = backproject(d, cam);
        std::size_t k = 0;
        for (int v = 0; v < d.height; ++v)
            for (int u = 0; u < d.width; ++u) {
                if (!DepthImage::is_valid(d.at(u, v))) continue;
                const PixelCoord px = project(cloud.points[k++], cam);
                CHECK(std::abs(px.u - (u + 0.5)) < 1e-6);
                CHECK(std::abs(px.v - (v + 0.5)) < 1e-6);
                CHECK(std::abs(px.depth - d.at(u, v)) < 1e-9);
            }
        CHECK(k == cloud.size());
    }
}

TEST_CASE("resized intrinsics keep the focal length")
{
    CameraIntrinsics cam{640, 480, 1.2};
    const auto wide = cam.resized(960, 480);
    CHECK(wide.focal() == doctest::Approx(cam.focal()).epsilon(1e-12));
    CHECK(wide.hfov > cam.hfov);
}

namespace {

LabeledPointCloud grid_cloud(double spacing, int n)
{
    // Irregular lattice so the nearest-neighbor assignment has no symmetric ties.
    LabeledPointCloud c;
    CounterRng rng(19);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < 3; ++k)
                c.push_back(Vec3(i * spacing + rng.uniform(-0.002, 0.002), j * spacing + rng.uniform(-0.002, 0.002),
                                 k * 0.3 * (1 + i % 3)));
    return c;
}

}  // namespace

TEST_CASE("ICP: identical clouds need no translation")
{
    const auto c = grid_cloud(0.1, 12);
    const auto r = translation_icp(c, c, 20, 1e-6);
    CHECK(r.translation.norm() == 0.0);
    CHECK(r.converged);
    CHECK(translation_icp(c, c, 0, 1e-6).translation.norm() == 0.0);
    CHECK(translation_icp(c, c, 0, 1e-6).iterations == 0);
}

TEST_CASE("ICP recovers a 0.3 m shift")
{
    // Well separated features: nearest neighbors are true counterparts once the shift is small.
    CounterRng rng(22);
    LabeledPointCloud target;
    for (int i = 0; i < 300; ++i) target.push_back(Vec3(rng.uniform(0, 10), rng.uniform(0, 10), rng.uniform(0, 10)));
    RigidTransform shift;
    shift.translation = Vec3(0.3, 0, 0);
    const auto source = apply_transform(target, shift);
    const auto r = translation_icp(source, target, 50, 1e-9);
    CHECK(r.converged);
    CHECK((r.translation - Vec3(-0.3, 0, 0)).norm() < 1e-3);
    CHECK(r.rms_trace.back() < 1e-9);
    for (std::size_t i = 1; i < r.rms_trace.size(); ++i) CHECK(r.rms_trace[i] <= r.rms_trace[i - 1] + 1e-12);
}

TEST_CASE("ICP residual is non-increasing on random clouds")
{
    CounterRng rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        const auto target = testing::random_cloud(rng, 300, 2.0);
        const auto source = testing::random_cloud(rng, 200, 2.0);
        const auto r = translation_icp(source, target, 30, 1e-9);
        REQUIRE(r.rms_trace.size() == r.iterations + 1);
        for (std::size_t i = 1; i < r.rms_trace.size(); ++i) CHECK(r.rms_trace[i] <= r.rms_trace[i - 1] + 1e-12);
    }
}

TEST_CASE("ICP rejects empty input")
{
    LabeledPointCloud empty, one;
    one.push_back({0, 0, 0});
    CHECK_THROWS_AS(translation_icp(empty, one, 5, 1e-3), Error);
    CHECK_THROWS_AS(translation_icp(one, empty, 5, 1e-3), Error);
}

TEST_CASE("kd-tree nearest matches a linear scan")
{
    CounterRng rng(29);
    const auto c = testing::random_cloud(rng, 700, 3.0);
    const KdTree3 tree(c.points);
    for (int q = 0; q < 300; ++q) {
        const Vec3 p(rng.uniform(-1, 4), rng.uniform(-1, 4), rng.uniform(-1, 4));
        std::size_t best = 0;
        for (std::size_t i = 1; i < c.size(); ++i)
            if ((c.points[i] - p).squaredNorm() < (c.points[best] - p).squaredNorm()) best = i;
        const auto nn = tree.nearest(p);
        CHECK(nn.dist2 == (c.points[best] - p).squaredNorm());
    }
}

TEST_CASE("point cloud validation")
{
    LabeledPointCloud c;
    c.push_back({0, 0, 0});
    c.labels.push_back(1);
    CHECK_THROWS_AS(c.validate(), Error);
    LabeledPointCloud d;
    d.push_back({0, 0, 0}, 1, 1.5);
    CHECK_THROWS_AS(d.validate(), Error);
    LabeledPointCloud e;
    e.push_back({0, std::nan(""), 0});
    CHECK_THROWS_AS(e.validate(), Error);
}

}  // TEST_SUITE

TEST_SUITE("io")
{

TEST_CASE("PLY round trip preserves every channel exactly")
{
    TempDir dir("ply");
    CounterRng rng(31);
    auto c = testing::random_cloud(rng, 50, 7.0);
    c.colors.emplace();
    for (std::size_t i = 0; i < c.size(); ++i)
        c.colors->push_back(Rgb{static_cast<std::uint8_t>(i), 2, static_cast<std::uint8_t>(255 - i)});
    write_ply(dir / "c.ply", c);
    const auto r = read_ply(dir / "c.ply");
    CHECK(r.has_labels);
    CHECK(r.has_confidence);
    CHECK(r.cloud == c);
}

TEST_CASE("PLY without labels reads as unlabeled")
{
    TempDir dir("ply2");
    std::ofstream(dir / "a.ply") << "ply\nformat ascii 1.0\ncomment hi\nelement vertex 2\n"
                                    "property float x\nproperty float y\nproperty float z\nproperty float nx\n"
                                    "element face 0\nproperty list uchar int vertex_indices\nend_header\n"
                                    "1 2 3 9\n4 5 6 9\n";
    const auto r = read_ply(dir / "a.ply");
    CHECK_FALSE(r.has_labels);
    REQUIRE(r.cloud.size() == 2);
    CHECK(r.cloud.points[1] == Vec3(4, 5, 6));
    CHECK(r.cloud.labels == std::vector<LabelId>{0, 0});
}

TEST_CASE("binary little-endian PLY")
{
    TempDir dir("ply3");
    std::ofstream out(dir / "b.ply", std::ios::binary);
    out << "ply\nformat binary_little_endian 1.0\nelement vertex 2\nproperty float x\nproperty float y\n"
           "property float z\nproperty uchar extra\nproperty int label\nproperty float confidence\nend_header\n";
    auto put = [&](auto v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); };
    put(1.5f), put(-2.0f), put(3.25f), put(std::uint8_t{7}), put(std::int32_t{4}), put(0.5f);
    put(0.0f), put(0.0f), put(1.0f), put(std::uint8_t{0}), put(std::int32_t{0}), put(1.0f);
    out.close();
    const auto r = read_ply(dir / "b.ply");
    REQUIRE(r.cloud.size() == 2);
    CHECK(r.cloud.points[0] == Vec3(1.5, -2.0, 3.25));
    CHECK(r.cloud.labels[0] == 4);
    CHECK(r.cloud.confidences[0] == 0.5);
}

TEST_CASE("malformed and missing PLY files are I/O errors")
{
    TempDir dir("ply4");
    std::ofstream(dir / "bad.ply") << "ply\nformat ascii 1.0\nelement vertex 3\nproperty float x\n"
                                      "property float y\nproperty float z\nend_header\n1 2 3\n";
    try {
        read_ply(dir / "bad.ply");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Io);
    }
    try {
        read_ply(dir / "nope.ply");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Io);
        CHECK(std::string(e.what()).find("nope.ply") != std::string::npos);
    }
}

TEST_CASE("depth grids: binary and text layouts")
{
    TempDir dir("grid");
    FloatGrid g{3, 2, {1.0f, 2.5f, std::numeric_limits<float>::quiet_NaN(), 4.0f, 5.0f, 0.125f}};
    write_grid_binary(dir / "d.bin", g);
    write_grid_text(dir / "d.txt", g);
    for (const auto* name : {"d.bin", "d.txt"}) {
        const auto r = read_grid(dir / name);
        CHECK(r.width == 3);
        CHECK(r.height == 2);
        for (std::size_t i = 0; i < 6; ++i) {
            if (std::isnan(g.values[i])) CHECK(std::isnan(r.values[i]));
            else CHECK(r.values[i] == g.values[i]);
        }
    }
    const auto bytes = testing::slurp(dir / "d.bin");
    CHECK(bytes.size() == 12 + 6 * 4);
    CHECK(bytes.substr(0, 4) == "GPD1");

    std::ofstream(dir / "hand.txt") << "GPD1-TEXT\n# comment\n2 1\n0.5 nan\n";
    const auto depth = read_depth(dir / "hand.txt");
    CHECK(depth.width == 2);
    CHECK(depth.at(0, 0) == 0.5f);
    CHECK_FALSE(DepthImage::is_valid(depth.at(1, 0)));
}

TEST_CASE("label grids must be integral")
{
    TempDir dir("labels");
    write_grid_text(dir / "l.txt", FloatGrid{2, 1, {1.0f, 2.5f}});
    CHECK_THROWS_AS(read_label_grid(dir / "l.txt"), Error);
    write_grid_text(dir / "ok.txt", FloatGrid{2, 1, {1.0f, 3.0f}});
    const auto l = read_label_grid(dir / "ok.txt");
    CHECK(l.labels == std::vector<LabelId>{1, 3});
}

}  // TEST_SUITE
