#include "gaussct/io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>

static_assert(std::endian::native == std::endian::little,
              "file formats are little-endian; big-endian hosts are unsupported");

namespace gaussct {

namespace {

using nlohmann::json;

void write_floats(const std::string& path, const std::vector<float>& buf) {
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot open for writing: " + path);
    f.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (!f)
        throw std::runtime_error("write failed: " + path);
}

std::vector<float> read_floats(const std::string& path, std::size_t expected) {
    std::ifstream f(path, std::ios::binary | std::ios::ate);
    if (!f)
        throw std::runtime_error("cannot open: " + path);
    const std::size_t bytes = static_cast<std::size_t>(f.tellg());
    if (bytes != expected * sizeof(float))
        throw std::runtime_error("size mismatch in " + path + ": expected " +
                                 std::to_string(expected * sizeof(float)) + " bytes, found " +
                                 std::to_string(bytes));
    std::vector<float> buf(expected);
    f.seekg(0);
    f.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(bytes));
    if (!f)
        throw std::runtime_error("read failed: " + path);
    return buf;
}

void write_sidecar(const std::string& path, const json& j) {
    std::ofstream f(path + ".json");
    if (!f)
        throw std::runtime_error("cannot open for writing: " + path + ".json");
    f << j.dump(2) << '\n';
}

json read_sidecar(const std::string& path) {
    std::ifstream f(path + ".json");
    if (!f)
        throw std::runtime_error("missing sidecar: " + path + ".json");
    json j;
    f >> j;
    return j;
}

} // namespace

void save_volume(const VoxelGrid& grid, const std::string& path) {
    std::vector<float> buf(grid.data.size());
    std::transform(grid.data.begin(), grid.data.end(), buf.begin(),
                   [](double v) { return static_cast<float>(v); });
    write_floats(path, buf);
    write_sidecar(path, json{{"dims", grid.dims},
                             {"spacing", {grid.spacing.x, grid.spacing.y, grid.spacing.z}},
                             {"origin", {grid.origin.x, grid.origin.y, grid.origin.z}}});
}

VoxelGrid load_volume(const std::string& path) {
    const json j = read_sidecar(path);
    VoxelGrid g;
    const auto dims = j.at("dims").get<std::vector<int>>();
    const auto spacing = j.at("spacing").get<std::vector<double>>();
    const auto origin = j.at("origin").get<std::vector<double>>();
    if (dims.size() != 3 || spacing.size() != 3 || origin.size() != 3)
        throw std::runtime_error("inconsistent sidecar: " + path + ".json");
    g.dims = {dims[0], dims[1], dims[2]};
    g.spacing = {spacing[0], spacing[1], spacing[2]};
    g.origin = {origin[0], origin[1], origin[2]};
    if (g.dims[0] < 1 || g.dims[1] < 1 || g.dims[2] < 1)
        throw std::runtime_error("invalid dims in sidecar: " + path + ".json");
    const std::vector<float> buf = read_floats(path, g.num_voxels());
    g.data.assign(buf.begin(), buf.end());
    return g;
}

void save_projections(const ProjectionStack& proj, const std::string& path) {
    std::vector<float> buf(proj.data.size());
    std::transform(proj.data.begin(), proj.data.end(), buf.begin(),
                   [](double v) { return static_cast<float>(v); });
    write_floats(path, buf);
    const ConeBeamGeometry& g = proj.geometry;
    write_sidecar(
        path,
        json{{"views", g.num_views()},
             {"rows", g.rows()},
             {"cols", g.cols()},
             {"angles", g.angles},
             {"geometry",
              {{"source_distance", g.source_distance},
               {"detector_distance", g.detector_distance},
               {"detector_pixel_size", {g.detector_pixel_size[0], g.detector_pixel_size[1]}},
               {"rotation_center", {g.rotation_center.x, g.rotation_center.y,
                                    g.rotation_center.z}}}}});
}

ProjectionStack load_projections(const std::string& path) {
    const json j = read_sidecar(path);
    ConeBeamGeometry g;
    g.detector_shape = {j.at("rows").get<int>(), j.at("cols").get<int>()};
    g.angles = j.at("angles").get<std::vector<double>>();
    const json& jg = j.at("geometry");
    g.source_distance = jg.at("source_distance").get<double>();
    g.detector_distance = jg.at("detector_distance").get<double>();
    const auto px = jg.at("detector_pixel_size").get<std::vector<double>>();
    const auto rc = jg.at("rotation_center").get<std::vector<double>>();
    if (px.size() != 2 || rc.size() != 3)
        throw std::runtime_error("inconsistent sidecar: " + path + ".json");
    g.detector_pixel_size = {px[0], px[1]};
    g.rotation_center = {rc[0], rc[1], rc[2]};
    if (j.at("views").get<std::size_t>() != g.angles.size())
        throw std::runtime_error("sidecar views/angles mismatch: " + path + ".json");
    validate_geometry(g);

    ProjectionStack p;
    p.geometry = g;
    const std::vector<float> buf = read_floats(path, g.num_elements());
    p.data.assign(buf.begin(), buf.end());
    return p;
}

void save_cloud(const GaussianCloud& cloud, const std::string& path, int iteration) {
    std::vector<float> buf;
    buf.reserve(cloud.size() * 5);
    for (const Gaussian& g : cloud.gaussians) {
        buf.push_back(static_cast<float>(g.mu.x));
        buf.push_back(static_cast<float>(g.mu.y));
        buf.push_back(static_cast<float>(g.mu.z));
        buf.push_back(static_cast<float>(g.sigma));
        buf.push_back(static_cast<float>(g.intensity));
    }
    write_floats(path, buf);
    write_sidecar(path, json{{"count", cloud.size()},
                             {"extent_d", cloud.extent},
                             {"iteration", iteration}});
}

GaussianCloud load_cloud(const std::string& path, int* iteration) {
    const json j = read_sidecar(path);
    const std::size_t count = j.at("count").get<std::size_t>();
    const double extent = j.at("extent_d").get<double>();
    if (iteration)
        *iteration = j.at("iteration").get<int>();
    const std::vector<float> buf = read_floats(path, count * 5);
    std::vector<Gaussian> gs(count);
    for (std::size_t i = 0; i < count; ++i) {
        gs[i].mu = {buf[5 * i + 0], buf[5 * i + 1], buf[5 * i + 2]};
        gs[i].sigma = buf[5 * i + 3];
        gs[i].intensity = buf[5 * i + 4];
    }
    return make_cloud(std::move(gs), extent);
}

int export_slices(const VoxelGrid& grid, const std::string& dir_path, int axis) {
    if (axis < 0 || axis > 2)
        throw std::invalid_argument("export_slices: axis must be 0, 1, or 2");
    std::filesystem::create_directories(dir_path);

    const int a0 = axis;
    const int a1 = (axis + 1) % 3;
    const int a2 = (axis + 2) % 3;
    const int n_slices = grid.dims[a0];
    const int width = grid.dims[a1];
    const int height = grid.dims[a2];

    for (int s = 0; s < n_slices; ++s) {
        char name[32];
        std::snprintf(name, sizeof(name), "slice_%04d.pgm", s);
        const std::string file = dir_path + "/" + name;
        std::ofstream f(file, std::ios::binary);
        if (!f)
            throw std::runtime_error("cannot open for writing: " + file);
        f << "P5\n" << width << " " << height << "\n255\n";
        std::vector<std::uint8_t> row(width);
        for (int y = 0; y < height; ++y) {
            for (int x = 0; x < width; ++x) {
                int idx[3];
                idx[a0] = s;
                idx[a1] = x;
                idx[a2] = y;
                const double v = std::clamp(grid.at(idx[0], idx[1], idx[2]), 0.0, 1.0);
                row[x] = static_cast<std::uint8_t>(std::lround(v * 255.0));
            }
            f.write(reinterpret_cast<const char*>(row.data()), width);
        }
        if (!f)
            throw std::runtime_error("write failed: " + file);
    }
    return n_slices;
}

} // namespace gaussct
