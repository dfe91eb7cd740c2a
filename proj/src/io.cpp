#include "genprior/io.hpp"

#include "genprior/error.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace genprior {

namespace fs = std::filesystem;

std::string read_text_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) fail_io("cannot open '" + path.string() + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const fs::path& path, const std::string& contents)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail_io("cannot open '" + path.string() + "' for writing");
    out << contents;
    if (!out) fail_io("write failed for '" + path.string() + "'");
}

namespace {

static_assert(std::endian::native == std::endian::little, "binary readers assume a little-endian host");

enum class PlyType { I8, U8, I16, U16, I32, U32, F32, F64 };

PlyType parse_ply_type(const std::string& t, const fs::path& path)
{
    if (t == "char" || t == "int8") return PlyType::I8;
    if (t == "uchar" || t == "uint8") return PlyType::U8;
    if (t == "short" || t == "int16") return PlyType::I16;
    if (t == "ushort" || t == "uint16") return PlyType::U16;
    if (t == "int" || t == "int32") return PlyType::I32;
    if (t == "uint" || t == "uint32") return PlyType::U32;
    if (t == "float" || t == "float32") return PlyType::F32;
    if (t == "double" || t == "float64") return PlyType::F64;
    fail_io("'" + path.string() + "': unknown PLY property type '" + t + "'");
}

std::size_t ply_type_size(PlyType t)
{
    switch (t) {
    case PlyType::I8:
    case PlyType::U8: return 1;
    case PlyType::I16:
    case PlyType::U16: return 2;
    case PlyType::I32:
    case PlyType::U32:
    case PlyType::F32: return 4;
    case PlyType::F64: return 8;
    }
    return 0;
}

template<typename T>
T load(const char* p)
{
    T v;
    std::memcpy(&v, p, sizeof(T));
    return v;
}

double read_binary_value(PlyType t, const char* p)
{
    switch (t) {
    case PlyType::I8: return load<std::int8_t>(p);
    case PlyType::U8: return load<std::uint8_t>(p);
    case PlyType::I16: return load<std::int16_t>(p);
    case PlyType::U16: return load<std::uint16_t>(p);
    case PlyType::I32: return load<std::int32_t>(p);
    case PlyType::U32: return load<std::uint32_t>(p);
    case PlyType::F32: return load<float>(p);
    case PlyType::F64: return load<double>(p);
    }
    return 0.0;
}

struct PlyProperty
{
    std::string name;
    PlyType type = PlyType::F32;
    bool is_list = false;
    PlyType count_type = PlyType::U8;
};

struct PlyElement
{
    std::string name;
    std::size_t count = 0;
    std::vector<PlyProperty> properties;
};

}  // namespace

PlyReadResult read_ply(const fs::path& path)
{
    const std::string data = read_text_file(path);
    std::size_t pos = 0;
    auto next_line = [&]() -> std::string {
        if (pos >= data.size()) fail_io("'" + path.string() + "': truncated PLY header");
        std::size_t end = data.find('\n', pos);
        if (end == std::string::npos) end = data.size();
        std::string line = data.substr(pos, end - pos);
        pos = end + 1;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
    };

    if (next_line() != "ply") fail_io("'" + path.string() + "': missing 'ply' magic");
    bool binary = false;
    std::vector<PlyElement> elements;
    for (;;) {
        const std::string line = next_line();
        std::istringstream ls(line);
        std::string kw;
        ls >> kw;
        if (kw == "end_header") break;
        if (kw == "comment" || kw == "obj_info" || kw.empty()) continue;
        if (kw == "format") {
            std::string fmt;
            ls >> fmt;
            if (fmt == "ascii") binary = false;
            else if (fmt == "binary_little_endian") binary = true;
            else fail_io("'" + path.string() + "': unsupported PLY format '" + fmt + "'");
        } else if (kw == "element") {
            PlyElement e;
            ls >> e.name >> e.count;
            if (!ls) fail_io("'" + path.string() + "': malformed element line");
            elements.push_back(e);
        } else if (kw == "property") {
            if (elements.empty()) fail_io("'" + path.string() + "': property before element");
            PlyProperty p;
            std::string t;
            ls >> t;
            if (t == "list") {
                std::string ct, it;
                ls >> ct >> it >> p.name;
                p.is_list = true;
                p.count_type = parse_ply_type(ct, path);
                p.type = parse_ply_type(it, path);
            } else {
                p.type = parse_ply_type(t, path);
                ls >> p.name;
            }
            elements.back().properties.push_back(p);
        } else {
            fail_io("'" + path.string() + "': unexpected PLY header line '" + line + "'");
        }
    }

    PlyReadResult result;
    bool seen_vertex = false;
    std::istringstream ascii_body;
    if (!binary) ascii_body.str(data.substr(pos));

    for (const auto& e : elements) {
        const bool is_vertex = e.name == "vertex";
        int ix = -1, iy = -1, iz = -1, il = -1, ic = -1, ir = -1, ig = -1, ib = -1;
        for (int k = 0; k < static_cast<int>(e.properties.size()); ++k) {
            const auto& n = e.properties[k].name;
            if (e.properties[k].is_list) continue;
            if (n == "x") ix = k;
            else if (n == "y") iy = k;
            else if (n == "z") iz = k;
            else if (n == "label") il = k;
            else if (n == "confidence") ic = k;
            else if (n == "red") ir = k;
            else if (n == "green") ig = k;
            else if (n == "blue") ib = k;
        }
        if (is_vertex) {
            if (ix < 0 || iy < 0 || iz < 0)
                fail_io("'" + path.string() + "': vertex element lacks x/y/z");
            seen_vertex = true;
            result.has_labels = il >= 0;
            result.has_confidence = ic >= 0;
            if (ir >= 0 && ig >= 0 && ib >= 0) result.cloud.colors.emplace();
            result.cloud.reserve(e.count);
        }
        std::vector<double> row(e.properties.size(), 0.0);
        for (std::size_t r = 0; r < e.count; ++r) {
            for (std::size_t k = 0; k < e.properties.size(); ++k) {
                const auto& p = e.properties[k];
                if (binary) {
                    if (p.is_list) {
                        if (pos + ply_type_size(p.count_type) > data.size())
                            fail_io("'" + path.string() + "': truncated PLY body");
                        const auto len = static_cast<std::size_t>(
                            read_binary_value(p.count_type, data.data() + pos));
                        pos += ply_type_size(p.count_type) + len * ply_type_size(p.type);
                        continue;
                    }
                    if (pos + ply_type_size(p.type) > data.size())
                        fail_io("'" + path.string() + "': truncated PLY body");
                    row[k] = read_binary_value(p.type, data.data() + pos);
                    pos += ply_type_size(p.type);
                } else {
                    if (p.is_list) {
                        std::size_t len = 0;
                        ascii_body >> len;
                        double skip = 0;
                        for (std::size_t j = 0; j < len; ++j) ascii_body >> skip;
                        continue;
                    }
                    std::string token;
                    ascii_body >> token;
                    if (!ascii_body) fail_io("'" + path.string() + "': truncated PLY body");
                    row[k] = std::strtod(token.c_str(), nullptr);
                }
            }
            if (!is_vertex) continue;
            const Vec3 pt(row[ix], row[iy], row[iz]);
            const LabelId label = il >= 0 ? static_cast<LabelId>(std::lround(row[il])) : kUnlabeled;
            const double conf = ic >= 0 ? row[ic] : 1.0;
            result.cloud.points.push_back(pt);
            result.cloud.labels.push_back(label);
            result.cloud.confidences.push_back(conf);
            if (result.cloud.colors)
                result.cloud.colors->push_back(Rgb{static_cast<std::uint8_t>(row[ir]),
                                                   static_cast<std::uint8_t>(row[ig]),
                                                   static_cast<std::uint8_t>(row[ib])});
        }
    }
    if (!seen_vertex) fail_io("'" + path.string() + "': no vertex element");
    try {
        result.cloud.validate();
    } catch (const Error& e) {
        fail_io("'" + path.string() + "': " + e.what());
    }
    return result;
}

void write_ply(const fs::path& path, const LabeledPointCloud& cloud)
{
    cloud.validate();
    std::string out;
    out.reserve(64 * cloud.size() + 256);
    out += "ply\nformat ascii 1.0\n";
    out += "element vertex " + std::to_string(cloud.size()) + "\n";
    out += "property double x\nproperty double y\nproperty double z\n";
    out += "property int label\nproperty double confidence\n";
    if (cloud.colors) out += "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    out += "end_header\n";
    char buf[160];
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const auto& p = cloud.points[i];
        int n = std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g %d %.17g", p.x(), p.y(), p.z(),
                              cloud.labels[i], cloud.confidences[i]);
        out.append(buf, static_cast<std::size_t>(n));
        if (cloud.colors) {
            const auto& c = (*cloud.colors)[i];
            n = std::snprintf(buf, sizeof(buf), " %u %u %u", c.r, c.g, c.b);
            out.append(buf, static_cast<std::size_t>(n));
        }
        out += '\n';
    }
    write_text_file(path, out);
}

namespace {

constexpr std::array<char, 4> kGridMagic = {'G', 'P', 'D', '1'};
constexpr const char* kGridTextMagic = "GPD1-TEXT";

}  // namespace

FloatGrid read_grid(const fs::path& path)
{
    const std::string data = read_text_file(path);
    FloatGrid grid;
    if (data.size() >= 4 && std::memcmp(data.data(), kGridMagic.data(), 4) == 0 &&
        data.compare(0, std::strlen(kGridTextMagic), kGridTextMagic) != 0) {
        if (data.size() < 12) fail_io("'" + path.string() + "': truncated grid header");
        const auto w = load<std::uint32_t>(data.data() + 4);
        const auto h = load<std::uint32_t>(data.data() + 8);
        const std::size_t n = static_cast<std::size_t>(w) * h;
        if (data.size() != 12 + 4 * n)
            fail_io("'" + path.string() + "': grid payload does not match " + std::to_string(w) +
                    "x" + std::to_string(h));
        grid.width = static_cast<int>(w);
        grid.height = static_cast<int>(h);
        grid.values.resize(n);
        std::memcpy(grid.values.data(), data.data() + 12, 4 * n);
        return grid;
    }

    std::istringstream in(data);
    std::string line;
    auto next_content_line = [&]() -> bool {
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty() || line[0] == '#') continue;
            return true;
        }
        return false;
    };
    if (!next_content_line() || line != kGridTextMagic)
        fail_io("'" + path.string() + "': not a grid file (bad magic)");
    if (!next_content_line()) fail_io("'" + path.string() + "': missing grid dimensions");
    {
        std::istringstream dims(line);
        dims >> grid.width >> grid.height;
        if (!dims || grid.width < 0 || grid.height < 0)
            fail_io("'" + path.string() + "': malformed grid dimensions");
    }
    const std::size_t n = static_cast<std::size_t>(grid.width) * grid.height;
    grid.values.reserve(n);
    std::string token;
    while (next_content_line()) {
        std::istringstream ls(line);
        while (ls >> token) {
            if (token == "nan" || token == "NaN" || token == "-") {
                grid.values.push_back(DepthImage::kInvalidDepth);
            } else {
                char* end = nullptr;
                const float v = std::strtof(token.c_str(), &end);
                if (end == token.c_str() || *end != '\0')
                    fail_io("'" + path.string() + "': bad grid value '" + token + "'");
                grid.values.push_back(v);
            }
        }
    }
    if (grid.values.size() != n)
        fail_io("'" + path.string() + "': expected " + std::to_string(n) + " values, found " +
                std::to_string(grid.values.size()));
    return grid;
}

void write_grid_binary(const fs::path& path, const FloatGrid& grid)
{
    if (grid.values.size() != static_cast<std::size_t>(grid.width) * grid.height)
        fail("grid: value count does not match dimensions");
    std::string out(12 + 4 * grid.values.size(), '\0');
    std::memcpy(out.data(), kGridMagic.data(), 4);
    const auto w = static_cast<std::uint32_t>(grid.width);
    const auto h = static_cast<std::uint32_t>(grid.height);
    std::memcpy(out.data() + 4, &w, 4);
    std::memcpy(out.data() + 8, &h, 4);
    std::memcpy(out.data() + 12, grid.values.data(), 4 * grid.values.size());
    write_text_file(path, out);
}

void write_grid_text(const fs::path& path, const FloatGrid& grid)
{
    if (grid.values.size() != static_cast<std::size_t>(grid.width) * grid.height)
        fail("grid: value count does not match dimensions");
    std::string out = std::string(kGridTextMagic) + "\n" + std::to_string(grid.width) + " " +
                      std::to_string(grid.height) + "\n";
    char buf[32];
    for (int v = 0; v < grid.height; ++v) {
        for (int u = 0; u < grid.width; ++u) {
            const float x = grid.values[static_cast<std::size_t>(v) * grid.width + u];
            if (std::isnan(x)) {
                out += "nan";
            } else {
                const int n = std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(x));
                out.append(buf, static_cast<std::size_t>(n));
            }
            out += (u + 1 == grid.width) ? '\n' : ' ';
        }
    }
    write_text_file(path, out);
}

DepthImage read_depth(const fs::path& path)
{
    FloatGrid g = read_grid(path);
    DepthImage d;
    d.width = g.width;
    d.height = g.height;
    d.depths = std::move(g.values);
    for (auto& v : d.depths)
        if (!std::isfinite(v)) v = DepthImage::kInvalidDepth;
    try {
        d.validate();
    } catch (const Error& e) {
        fail_io("'" + path.string() + "': " + e.what());
    }
    return d;
}

PixelLabels read_label_grid(const fs::path& label_path, const fs::path& confidence_path)
{
    const FloatGrid g = read_grid(label_path);
    PixelLabels out;
    out.width = g.width;
    out.height = g.height;
    out.labels.reserve(g.values.size());
    for (const float v : g.values) {
        if (!std::isfinite(v) || v != std::floor(v) || v < 0.0f)
            fail_io("'" + label_path.string() + "': label grid holds a non-integral value");
        out.labels.push_back(static_cast<LabelId>(v));
    }
    if (!confidence_path.empty()) {
        const FloatGrid c = read_grid(confidence_path);
        if (c.width != g.width || c.height != g.height)
            fail_io("'" + confidence_path.string() + "': confidence grid size differs from labels");
        out.confidences.assign(c.values.begin(), c.values.end());
    }
    return out;
}

}  // namespace genprior
