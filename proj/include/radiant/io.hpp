#pragma once

#include "radiant/field.hpp"
#include "radiant/geometry.hpp"
#include "radiant/scene.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace radiant {

namespace fs = std::filesystem;

// Binary P6, maxval 255. Values are clamped to [0,1] and rounded.
void write_ppm(const fs::path& path, const Image& image);
Image read_ppm(const fs::path& path);

// PFM, little-endian (scale -1.0), rows stored bottom to top as the format
// prescribes. "Pf" for one channel, "PF" for three.
void write_pfm(const fs::path& path, const ScalarMap& map);
void write_pfm(const fs::path& path, const Image& image);
ScalarMap read_pfm_scalar(const fs::path& path);
Image read_pfm_rgb(const fs::path& path);

// Shortest text form that round-trips a double ("%.17g").
std::string format_double(double value);

// One camera per line:
// <id> <fx> <fy> <cx> <cy> <w> <h> <r00..r22> <tx> <ty> <tz>
void write_poses(std::ostream& out, const std::vector<Camera>& cameras);
std::vector<Camera> read_poses(std::istream& in);
void write_poses(const fs::path& path, const std::vector<Camera>& cameras);
std::vector<Camera> read_poses(const fs::path& path);

// Field file: 8-byte magic, u32 version, i32 resolution, six f64 bounds,
// then raw_density and raw_rgb as little-endian f64.
inline constexpr char kFieldMagic[8] = {'R', 'A', 'D', 'F', 'I', 'E', 'L', 'D'};
inline constexpr std::uint32_t kFieldVersion = 1;

void write_field(std::ostream& out, const VoxelField& field);
VoxelField read_field(std::istream& in);
void write_field(const fs::path& path, const VoxelField& field);
VoxelField read_field(const fs::path& path);

// Dataset directory: images/####.ppm, poses.txt, meta.txt.
void write_dataset(const fs::path& dir, const PosedDataset& dataset, const Aabb& bounds);
PosedDataset read_dataset(const fs::path& dir);
Aabb read_dataset_bounds(const fs::path& dir);

void write_text_file(const fs::path& path, const std::string& contents);
std::string read_text_file(const fs::path& path);

}  // namespace radiant
