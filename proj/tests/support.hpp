#pragma once

#include "genprior/error.hpp"
#include "genprior/geometry.hpp"
#include "genprior/priors.hpp"
#include "genprior/rng.hpp"

#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include <unistd.h>

namespace testing {

using namespace genprior;

/// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir
{
public:
    explicit TempDir(const std::string& tag)
    {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("genprior_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

private:
    std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline LabeledPointCloud random_cloud(CounterRng& rng, std::size_t n, double extent)
{
    LabeledPointCloud c;
    for (std::size_t i = 0; i < n; ++i)
        c.push_back(Vec3(rng.uniform(0, extent), rng.uniform(0, extent), rng.uniform(0, extent)),
                    static_cast<LabelId>(rng.uniform_index(3)), rng.uniform01());
    return c;
}

/// Vertical line of obstacle points at (x, y) spanning the default obstacle band.
inline void add_post(LabeledPointCloud& c, double x, double y, LabelId label = kUnlabeled)
{
    for (double z = 0.3; z < 1.45; z += 0.1) c.push_back(Vec3(x, y, z), label, 1.0);
}

/// Empty sample set with a wide support triangle facing +x from the origin.
inline SampleSet blank_set(std::size_t n, std::vector<LabelEntry> vocab = {{1, "target"}})
{
    SampleSet set;
    set.vocabulary = std::move(vocab);
    set.support.frustum.intrinsics = CameraIntrinsics{640, 480, 1.5707963267948966};
    set.support.origin = Vec2::Zero();
    set.support.yaw = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        WorkspaceSample s;
        s.sample_id = static_cast<int>(i);
        set.samples.push_back(std::move(s));
    }
    return set;
}

}  // namespace testing
