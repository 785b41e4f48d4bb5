#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstddef>
#include <vector>

namespace radiant {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Pinhole camera. Camera frame: x right, y up, looking down -z. Pixel rows
// grow downward, so pixel y maps to -y in the camera frame.
struct Camera {
  Vec3 position = Vec3::Zero();
  Mat3 rotation = Mat3::Identity();  // world-from-camera
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1;
  int height = 1;

  Vec3 forward() const { return -rotation.col(2); }
};

// Throws std::invalid_argument when the rotation is not orthonormal or the
// intrinsics are out of range.
void validate_camera(const Camera& camera);

struct Ray {
  Vec3 origin = Vec3::Zero();
  Vec3 direction = Vec3(0.0, 0.0, -1.0);
  double t_near = 0.0;
  double t_far = 1.0;

  Vec3 at(double t) const { return origin + t * direction; }
};

struct Aabb {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  bool contains(const Vec3& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
  Vec3 extent() const { return max - min; }
  Vec3 center() const { return 0.5 * (min + max); }
};

struct Image {
  int width = 0;
  int height = 0;
  std::vector<Vec3> pixels;  // row-major, row 0 at the top

  Image() = default;
  Image(int w, int h, const Vec3& fill = Vec3::Zero())
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

  Vec3& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  const Vec3& at(int x, int y) const {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }
  std::size_t size() const { return pixels.size(); }
};

// Single-channel per-pixel map (q maps, variances).
struct ScalarMap {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  ScalarMap() = default;
  ScalarMap(int w, int h, double fill = 0.0)
      : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {}

  double& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
  double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
  std::size_t size() const { return values.size(); }
};

// Ray through the center of pixel (px, py). Throws std::invalid_argument for
// out-of-range pixels or an invalid [t_near, t_far] interval.
Ray generate_ray(const Camera& camera, int px, int py, double t_near, double t_far);

// Continuous pixel coordinates of a world point in front of the camera.
Eigen::Vector2d project(const Camera& camera, const Vec3& point);

Camera look_at_camera(const Vec3& position, const Vec3& target, const Vec3& up, double fx,
                      double fy, double cx, double cy, int width, int height);

// Slab test. Returns the parametric entry/exit distances when the ray's line
// overlaps the box within [ray.t_near, ray.t_far].
bool clip_to_box(const Ray& ray, const Aabb& box, double& t_enter, double& t_exit);

}  // namespace radiant
