#include "radiant/io.hpp"

#include "radiant/config.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cctype>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace radiant {
namespace {

template <typename T>
T to_little_endian(T value) {
  if constexpr (std::endian::native == std::endian::little) {
    return value;
  } else {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
}

template <typename T>
void put_le(std::ostream& out, T value) {
  const T le = to_little_endian(value);
  out.write(reinterpret_cast<const char*>(&le), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  T value;
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw std::invalid_argument("unexpected end of binary data");
  return to_little_endian(value);
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot read " + path.string());
  return in;
}

// Next whitespace-delimited header token, skipping '#' comments.
std::string header_token(std::istream& in) {
  std::string token;
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      if (!token.empty()) return token;
    } else {
      token.push_back(static_cast<char>(c));
    }
    c = in.get();
  }
  if (token.empty()) throw std::invalid_argument("truncated image header");
  return token;
}

int header_int(std::istream& in, const char* what) {
  const std::string token = header_token(in);
  try {
    std::size_t used = 0;
    const int value = std::stoi(token, &used);
    if (used == token.size() && value > 0) return value;
  } catch (const std::exception&) {
  }
  throw std::invalid_argument(std::string("bad image ") + what + ": " + token);
}

struct PfmHeader {
  int channels = 0;
  int width = 0;
  int height = 0;
};

PfmHeader read_pfm_header(std::istream& in) {
  PfmHeader h;
  const std::string magic = header_token(in);
  if (magic == "Pf") {
    h.channels = 1;
  } else if (magic == "PF") {
    h.channels = 3;
  } else {
    throw std::invalid_argument("not a PFM file");
  }
  h.width = header_int(in, "width");
  h.height = header_int(in, "height");
  const double scale = std::stod(header_token(in));
  if (!(scale < 0.0)) throw std::invalid_argument("only little-endian PFM is supported");
  return h;
}

void write_pfm_raw(const fs::path& path, int width, int height, int channels,
                   const std::vector<float>& rows_top_down) {
  auto out = open_out(path);
  out << (channels == 1 ? "Pf" : "PF") << '\n' << width << ' ' << height << "\n-1.0\n";
  const std::size_t row = static_cast<std::size_t>(width) * channels;
  for (int y = height - 1; y >= 0; --y) {
    for (std::size_t i = 0; i < row; ++i) put_le(out, rows_top_down[y * row + i]);
  }
  if (!out) throw std::invalid_argument("failed writing " + path.string());
}

std::vector<float> read_pfm_raw(const fs::path& path, int want_channels, int& width,
                                int& height) {
  auto in = open_in(path);
  const PfmHeader h = read_pfm_header(in);
  if (h.channels != want_channels) {
    throw std::invalid_argument(path.string() + ": unexpected PFM channel count");
  }
  width = h.width;
  height = h.height;
  const std::size_t row = static_cast<std::size_t>(width) * h.channels;
  std::vector<float> data(row * height);
  for (int y = height - 1; y >= 0; --y) {
    for (std::size_t i = 0; i < row; ++i) data[y * row + i] = get_le<float>(in);
  }
  return data;
}

}  // namespace

void write_ppm(const fs::path& path, const Image& image) {
  if (image.width <= 0 || image.height <= 0 ||
      image.size() != static_cast<std::size_t>(image.width) * image.height) {
    throw std::invalid_argument("write_ppm: malformed image");
  }
  auto out = open_out(path);
  out << "P6\n" << image.width << ' ' << image.height << "\n255\n";
  std::vector<unsigned char> bytes(image.size() * 3);
  for (std::size_t i = 0; i < image.size(); ++i) {
    for (int c = 0; c < 3; ++c) {
      const double v = std::clamp(image.pixels[i][c], 0.0, 1.0);
      bytes[3 * i + c] = static_cast<unsigned char>(std::lround(v * 255.0));
    }
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::invalid_argument("failed writing " + path.string());
}

Image read_ppm(const fs::path& path) {
  auto in = open_in(path);
  if (header_token(in) != "P6") throw std::invalid_argument(path.string() + ": not a P6 PPM");
  const int w = header_int(in, "width");
  const int h = header_int(in, "height");
  if (header_int(in, "maxval") != 255) {
    throw std::invalid_argument(path.string() + ": only maxval 255 is supported");
  }
  Image image(w, h);
  std::vector<unsigned char> bytes(image.size() * 3);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!in) throw std::invalid_argument(path.string() + ": truncated pixel data");
  for (std::size_t i = 0; i < image.size(); ++i) {
    image.pixels[i] = Vec3(bytes[3 * i], bytes[3 * i + 1], bytes[3 * i + 2]) / 255.0;
  }
  return image;
}

void write_pfm(const fs::path& path, const ScalarMap& map) {
  std::vector<float> data(map.values.begin(), map.values.end());
  write_pfm_raw(path, map.width, map.height, 1, data);
}

void write_pfm(const fs::path& path, const Image& image) {
  std::vector<float> data(image.size() * 3);
  for (std::size_t i = 0; i < image.size(); ++i) {
    for (int c = 0; c < 3; ++c) data[3 * i + c] = static_cast<float>(image.pixels[i][c]);
  }
  write_pfm_raw(path, image.width, image.height, 3, data);
}

ScalarMap read_pfm_scalar(const fs::path& path) {
  int w = 0, h = 0;
  const auto data = read_pfm_raw(path, 1, w, h);
  ScalarMap map(w, h);
  std::copy(data.begin(), data.end(), map.values.begin());
  return map;
}

Image read_pfm_rgb(const fs::path& path) {
  int w = 0, h = 0;
  const auto data = read_pfm_raw(path, 3, w, h);
  Image image(w, h);
  for (std::size_t i = 0; i < image.size(); ++i) {
    image.pixels[i] = Vec3(data[3 * i], data[3 * i + 1], data[3 * i + 2]);
  }
  return image;
}

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_poses(std::ostream& out, const std::vector<Camera>& cameras) {
  for (std::size_t id = 0; id < cameras.size(); ++id) {
    const Camera& c = cameras[id];
    out << id << ' ' << format_double(c.fx) << ' ' << format_double(c.fy) << ' '
        << format_double(c.cx) << ' ' << format_double(c.cy) << ' ' << c.width << ' ' << c.height;
    for (int r = 0; r < 3; ++r) {
      for (int k = 0; k < 3; ++k) out << ' ' << format_double(c.rotation(r, k));
    }
    for (int k = 0; k < 3; ++k) out << ' ' << format_double(c.position[k]);
    out << '\n';
  }
}

std::vector<Camera> read_poses(std::istream& in) {
  std::vector<Camera> cameras;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    std::size_t id = 0;
    Camera c;
    fields >> id >> c.fx >> c.fy >> c.cx >> c.cy >> c.width >> c.height;
    for (int r = 0; r < 3; ++r) {
      for (int k = 0; k < 3; ++k) fields >> c.rotation(r, k);
    }
    for (int k = 0; k < 3; ++k) fields >> c.position[k];
    std::string extra;
    if (!fields || (fields >> extra)) {
      throw std::invalid_argument("poses.txt line " + std::to_string(line_no) +
                                  ": expected 19 fields");
    }
    if (id != cameras.size()) {
      throw std::invalid_argument("poses.txt line " + std::to_string(line_no) +
                                  ": ids must count up from 0");
    }
    validate_camera(c);
    cameras.push_back(c);
  }
  return cameras;
}

void write_poses(const fs::path& path, const std::vector<Camera>& cameras) {
  std::ostringstream text;
  write_poses(text, cameras);
  write_text_file(path, text.str());
}

std::vector<Camera> read_poses(const fs::path& path) {
  auto in = open_in(path);
  return read_poses(in);
}

void write_field(std::ostream& out, const VoxelField& field) {
  const std::size_t n = field.vertex_count();
  if (field.raw_density.size() != n || field.raw_rgb.size() != 3 * n) {
    throw std::invalid_argument("write_field: parameter arrays do not match the resolution");
  }
  out.write(kFieldMagic, sizeof kFieldMagic);
  put_le<std::uint32_t>(out, kFieldVersion);
  put_le<std::int32_t>(out, field.resolution);
  for (int k = 0; k < 3; ++k) put_le<double>(out, field.bounds.min[k]);
  for (int k = 0; k < 3; ++k) put_le<double>(out, field.bounds.max[k]);
  for (double v : field.raw_density) put_le<double>(out, v);
  for (double v : field.raw_rgb) put_le<double>(out, v);
}

VoxelField read_field(std::istream& in) {
  char magic[sizeof kFieldMagic];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kFieldMagic, sizeof magic) != 0) {
    throw std::invalid_argument("not a field file");
  }
  const auto version = get_le<std::uint32_t>(in);
  if (version != kFieldVersion) {
    throw std::invalid_argument("unsupported field file version " + std::to_string(version));
  }
  const auto resolution = get_le<std::int32_t>(in);
  if (resolution < 1 || resolution > 1024) throw std::invalid_argument("bad field resolution");
  Aabb bounds;
  for (int k = 0; k < 3; ++k) bounds.min[k] = get_le<double>(in);
  for (int k = 0; k < 3; ++k) bounds.max[k] = get_le<double>(in);
  VoxelField field(resolution, bounds);
  for (double& v : field.raw_density) v = get_le<double>(in);
  for (double& v : field.raw_rgb) v = get_le<double>(in);
  if (in.peek() != std::char_traits<char>::eof()) {
    throw std::invalid_argument("trailing bytes after field data");
  }
  return field;
}

void write_field(const fs::path& path, const VoxelField& field) {
  auto out = open_out(path);
  write_field(out, field);
  if (!out) throw std::invalid_argument("failed writing " + path.string());
}

VoxelField read_field(const fs::path& path) {
  auto in = open_in(path);
  try {
    return read_field(in);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

void write_dataset(const fs::path& dir, const PosedDataset& dataset, const Aabb& bounds) {
  validate_dataset(dataset);
  fs::create_directories(dir / "images");
  for (std::size_t i = 0; i < dataset.images.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "%04zu.ppm", i);
    write_ppm(dir / "images" / name, dataset.images[i]);
  }
  write_poses(dir / "poses.txt", dataset.cameras);
  const Camera& c0 = dataset.cameras.front();
  std::ostringstream meta;
  meta << "views = " << dataset.images.size() << '\n'
       << "width = " << c0.width << '\n'
       << "height = " << c0.height << '\n'
       << "intrinsics = " << format_double(c0.fx) << ' ' << format_double(c0.fy) << ' '
       << format_double(c0.cx) << ' ' << format_double(c0.cy) << '\n'
       << "t_near = " << format_double(dataset.t_near) << '\n'
       << "t_far = " << format_double(dataset.t_far) << '\n'
       << "bounds =";
  for (int k = 0; k < 3; ++k) meta << ' ' << format_double(bounds.min[k]);
  for (int k = 0; k < 3; ++k) meta << ' ' << format_double(bounds.max[k]);
  meta << '\n';
  write_text_file(dir / "meta.txt", meta.str());
}

namespace {

KeyValues read_meta(const fs::path& dir) {
  const fs::path path = dir / "meta.txt";
  return parse_key_values(read_text_file(path), path.string());
}

}  // namespace

PosedDataset read_dataset(const fs::path& dir) {
  const KeyValues meta = read_meta(dir);
  PosedDataset dataset;
  dataset.cameras = read_poses(dir / "poses.txt");
  dataset.t_near = meta.get_double("t_near");
  dataset.t_far = meta.get_double("t_far");
  const int views = meta.get_int("views");
  if (views != static_cast<int>(dataset.cameras.size())) {
    throw std::invalid_argument(dir.string() + ": meta.txt view count disagrees with poses.txt");
  }
  for (int i = 0; i < views; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "%04d.ppm", i);
    dataset.images.push_back(read_ppm(dir / "images" / name));
  }
  validate_dataset(dataset);
  return dataset;
}

Aabb read_dataset_bounds(const fs::path& dir) {
  const auto b = read_meta(dir).get_doubles("bounds", 6);
  return Aabb{Vec3(b[0], b[1], b[2]), Vec3(b[3], b[4], b[5])};
}

void write_text_file(const fs::path& path, const std::string& contents) {
  auto out = open_out(path);
  out << contents;
  if (!out) throw std::invalid_argument("failed writing " + path.string());
}

std::string read_text_file(const fs::path& path) {
  auto in = open_in(path);
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

}  // namespace radiant
