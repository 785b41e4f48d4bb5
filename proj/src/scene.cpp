#include "radiant/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace radiant {

namespace {

bool in_unit_cube(const Vec3& rgb) {
  return rgb.allFinite() && (rgb.array() >= 0.0).all() && (rgb.array() <= 1.0).all();
}

std::optional<double> hit_sphere(const Ray& ray, const Sphere& s) {
  const Vec3 oc = ray.origin - s.center;
  const double b = oc.dot(ray.direction);
  const double c = oc.squaredNorm() - s.radius * s.radius;
  const double disc = b * b - c;
  if (disc < 0.0) return std::nullopt;
  const double root = std::sqrt(disc);
  for (double t : {-b - root, -b + root}) {
    if (t > ray.t_near && t < ray.t_far) return t;
  }
  return std::nullopt;
}

std::optional<double> hit_box(const Ray& ray, const Box& box) {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  for (int axis = 0; axis < 3; ++axis) {
    const double o = ray.origin[axis];
    const double d = ray.direction[axis];
    if (d == 0.0) {
      if (o < box.min[axis] || o > box.max[axis]) return std::nullopt;
      continue;
    }
    double t0 = (box.min[axis] - o) / d;
    double t1 = (box.max[axis] - o) / d;
    if (t0 > t1) std::swap(t0, t1);
    lo = std::max(lo, t0);
    hi = std::min(hi, t1);
  }
  if (lo > hi) return std::nullopt;
  for (double t : {lo, hi}) {
    if (t > ray.t_near && t < ray.t_far) return t;
  }
  return std::nullopt;
}

std::optional<double> hit_plane(const Ray& ray, const GroundPlane& plane, const Aabb& bounds) {
  const double dz = ray.direction.z();
  if (dz == 0.0) return std::nullopt;
  const double t = (plane.z0 - ray.origin.z()) / dz;
  if (!(t > ray.t_near && t < ray.t_far)) return std::nullopt;
  const Vec3 p = ray.at(t);
  if (p.x() < bounds.min.x() || p.x() > bounds.max.x() || p.y() < bounds.min.y() ||
      p.y() > bounds.max.y()) {
    return std::nullopt;
  }
  return t;
}

Camera make_looking_at_origin(const Vec3& position, const CameraIntrinsics& in,
                              const Vec3& target) {
  const Vec3 view = (target - position).normalized();
  Vec3 up = Vec3::UnitZ();
  if (view.cross(up).norm() < 1e-6) up = Vec3::UnitY();
  return look_at_camera(position, target, up, in.fx, in.fy, in.cx(), in.cy(), in.width,
                        in.height);
}

// Orthonormal frame with `axis` as its third column.
Mat3 frame_around(const Vec3& axis) {
  const Vec3 w = axis.normalized();
  const Vec3 helper = std::abs(w.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  const Vec3 u = helper.cross(w).normalized();
  const Vec3 v = w.cross(u);
  Mat3 frame;
  frame.col(0) = u;
  frame.col(1) = v;
  frame.col(2) = w;
  return frame;
}

}  // namespace

void validate_scene(const SceneSpec& scene) {
  const Aabb& b = scene.bounds;
  if (!((b.max.array() > b.min.array()).all())) {
    throw std::invalid_argument("scene: bounds must have positive extent");
  }
  if (scene.background && !in_unit_cube(*scene.background)) {
    throw std::invalid_argument("scene: background colour outside [0,1]");
  }
  for (const auto& prim : scene.primitives) {
    std::visit(
        [&](const auto& p) {
          using T = std::decay_t<decltype(p)>;
          if (!in_unit_cube(p.rgb)) throw std::invalid_argument("scene: colour outside [0,1]");
          if constexpr (std::is_same_v<T, Sphere>) {
            if (!(p.radius > 0.0)) throw std::invalid_argument("scene: sphere radius must be > 0");
            const Vec3 r = Vec3::Constant(p.radius);
            if (!b.contains(p.center - r) || !b.contains(p.center + r)) {
              throw std::invalid_argument("scene: sphere leaves the bounds");
            }
          } else if constexpr (std::is_same_v<T, Box>) {
            if (!((p.max.array() >= p.min.array()).all())) {
              throw std::invalid_argument("scene: box min exceeds max");
            }
            if (!b.contains(p.min) || !b.contains(p.max)) {
              throw std::invalid_argument("scene: box leaves the bounds");
            }
          } else {
            if (p.z0 < b.min.z() || p.z0 > b.max.z()) {
              throw std::invalid_argument("scene: ground plane outside the bounds");
            }
          }
        },
        prim);
  }
}

std::optional<SurfaceHit> intersect(const Ray& ray, const SceneSpec& scene) {
  std::optional<SurfaceHit> best;
  for (std::size_t i = 0; i < scene.primitives.size(); ++i) {
    const auto& prim = scene.primitives[i];
    std::optional<double> t;
    Vec3 rgb;
    if (const auto* s = std::get_if<Sphere>(&prim)) {
      t = hit_sphere(ray, *s);
      rgb = s->rgb;
    } else if (const auto* b = std::get_if<Box>(&prim)) {
      t = hit_box(ray, *b);
      rgb = b->rgb;
    } else {
      const auto& plane = std::get<GroundPlane>(prim);
      t = hit_plane(ray, plane, scene.bounds);
      rgb = plane.rgb;
    }
    if (t && (!best || *t < best->t)) {
      best = SurfaceHit{*t, rgb, static_cast<int>(i)};
    }
  }
  return best;
}

namespace {
Vec3 shade(const SceneSpec& scene, const Camera& camera, int x, int y, double t_near,
           double t_far) {
  const Ray ray = generate_ray(camera, x, y, t_near, t_far);
  if (auto hit = intersect(ray, scene)) return hit->rgb;
  return scene.background.value_or(Vec3::Zero());
}
}  // namespace

Image render_ground_truth(const SceneSpec& scene, const Camera& camera, double t_near,
                          double t_far) {
  validate_camera(camera);
  Image image(camera.width, camera.height);
  const int pixels = camera.width * camera.height;
#pragma omp parallel for schedule(static)
  for (int i = 0; i < pixels; ++i) {
    const int x = i % camera.width;
    const int y = i / camera.width;
    image.at(x, y) = shade(scene, camera, x, y, t_near, t_far);
  }
  return image;
}

Image render_ground_truth_serial(const SceneSpec& scene, const Camera& camera, double t_near,
                                 double t_far) {
  validate_camera(camera);
  Image image(camera.width, camera.height);
  for (int y = 0; y < camera.height; ++y) {
    for (int x = 0; x < camera.width; ++x) {
      image.at(x, y) = shade(scene, camera, x, y, t_near, t_far);
    }
  }
  return image;
}

std::vector<Camera> make_hemisphere_cameras(int n, double radius,
                                            const std::optional<CameraCluster>& cluster,
                                            std::uint64_t seed,
                                            const CameraIntrinsics& intrinsics) {
  if (n < 1) throw std::invalid_argument("make_hemisphere_cameras: n must be >= 1");
  if (!(radius > 0.0)) throw std::invalid_argument("make_hemisphere_cameras: radius must be > 0");
  if (cluster && cluster->center_dir.z() < 0.0) {
    throw std::invalid_argument("make_hemisphere_cameras: cluster centre below the equator");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double two_pi = 2.0 * std::numbers::pi;

  std::vector<Camera> cameras;
  cameras.reserve(n);
  while (static_cast<int>(cameras.size()) < n) {
    Vec3 dir;
    if (!cluster) {
      // uniform on the upper hemisphere: z ~ U(0,1)
      const double z = unit(rng);
      const double phi = two_pi * unit(rng);
      const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
      dir = Vec3(s * std::cos(phi), s * std::sin(phi), z);
    } else {
      const double cos_max = std::cos(cluster->max_angle);
      const double cos_theta = 1.0 - unit(rng) * (1.0 - cos_max);
      const double phi = two_pi * unit(rng);
      const double s = std::sqrt(std::max(0.0, 1.0 - cos_theta * cos_theta));
      dir = frame_around(cluster->center_dir) *
            Vec3(s * std::cos(phi), s * std::sin(phi), cos_theta);
      if (dir.z() < 0.0) continue;  // reject below the equator
    }
    cameras.push_back(make_looking_at_origin(radius * dir.normalized(), intrinsics, Vec3::Zero()));
  }
  return cameras;
}

Camera orbit_camera(double radius, double elevation, double azimuth,
                    const CameraIntrinsics& intrinsics, const Vec3& target) {
  const Vec3 dir(std::cos(elevation) * std::cos(azimuth), std::cos(elevation) * std::sin(azimuth),
                 std::sin(elevation));
  return make_looking_at_origin(radius * dir, intrinsics, target);
}

void validate_dataset(const PosedDataset& dataset) {
  if (dataset.images.size() != dataset.cameras.size()) {
    throw std::invalid_argument("dataset: image and camera counts differ");
  }
  if (!(dataset.t_near >= 0.0 && dataset.t_near < dataset.t_far)) {
    throw std::invalid_argument("dataset: need 0 <= t_near < t_far");
  }
  for (std::size_t i = 0; i < dataset.images.size(); ++i) {
    if (dataset.images[i].width != dataset.cameras[i].width ||
        dataset.images[i].height != dataset.cameras[i].height) {
      throw std::invalid_argument("dataset: image size does not match its camera");
    }
  }
}

std::pair<double, double> near_far_from_bounds(const std::vector<Camera>& cameras,
                                               const Aabb& bounds, double margin) {
  double near = std::numeric_limits<double>::infinity();
  double far = 0.0;
  for (const auto& cam : cameras) {
    const Vec3 p = cam.position;
    const Vec3 closest = p.cwiseMax(bounds.min).cwiseMin(bounds.max);
    near = std::min(near, (p - closest).norm());
    for (int corner = 0; corner < 8; ++corner) {
      const Vec3 c((corner & 1) ? bounds.max.x() : bounds.min.x(),
                   (corner & 2) ? bounds.max.y() : bounds.min.y(),
                   (corner & 4) ? bounds.max.z() : bounds.min.z());
      far = std::max(far, (p - c).norm());
    }
  }
  return {near * (1.0 - margin), far * (1.0 + margin)};
}

PosedDataset make_dataset(const SceneSpec& scene, const std::vector<Camera>& cameras,
                          double t_near, double t_far) {
  PosedDataset dataset;
  dataset.cameras = cameras;
  dataset.t_near = t_near;
  dataset.t_far = t_far;
  dataset.images.reserve(cameras.size());
  for (const auto& cam : cameras) {
    dataset.images.push_back(render_ground_truth(scene, cam, t_near, t_far));
  }
  return dataset;
}

SceneSpec single_sphere_scene() {
  SceneSpec scene;
  scene.bounds = {Vec3::Constant(-1.0), Vec3::Constant(1.0)};
  scene.primitives.push_back(Sphere{Vec3::Zero(), 0.6, Vec3(0.85, 0.3, 0.2)});
  return scene;
}

SceneSpec floor_scene() {
  SceneSpec scene;
  scene.bounds = {Vec3(-1.5, -1.5, -1.1), Vec3(1.5, 1.5, 0.6)};
  scene.primitives.push_back(GroundPlane{-1.0, Vec3(0.3, 0.65, 0.35)});
  scene.primitives.push_back(Sphere{Vec3(0.0, 0.0, 0.0), 0.4, Vec3(0.85, 0.2, 0.15)});
  return scene;
}

SceneSpec hemisphere_scene() {
  // Wide floor so views from the upper cap see geometry in (almost) every pixel;
  // the tall pieces hide each other's flanks from any single direction.
  SceneSpec scene;
  scene.bounds = {Vec3(-2.0, -2.0, -1.1), Vec3(2.0, 2.0, 0.8)};
  scene.primitives.push_back(GroundPlane{-1.0, Vec3(0.7, 0.65, 0.5)});
  scene.primitives.push_back(Box{Vec3(-0.25, -0.25, -1.0), Vec3(0.25, 0.25, 0.5),
                                 Vec3(0.55, 0.35, 0.7)});
  scene.primitives.push_back(Sphere{Vec3(0.8, 0.1, -0.65), 0.35, Vec3(0.9, 0.15, 0.1)});
  scene.primitives.push_back(Sphere{Vec3(-0.8, -0.1, -0.65), 0.35, Vec3(0.1, 0.75, 0.2)});
  scene.primitives.push_back(Box{Vec3(-0.3, 0.6, -1.0), Vec3(0.3, 1.0, 0.0),
                                 Vec3(0.15, 0.3, 0.9)});
  scene.primitives.push_back(Box{Vec3(-0.35, -1.05, -1.0), Vec3(0.35, -0.7, -0.3),
                                 Vec3(0.95, 0.85, 0.1)});
  return scene;
}

std::optional<SceneSpec> preset_scene(const std::string& name) {
  if (name == "sphere") return single_sphere_scene();
  if (name == "floor") return floor_scene();
  if (name == "hemisphere") return hemisphere_scene();
  return std::nullopt;
}

bool point_observed(const SceneSpec& scene, const Vec3& point, const std::vector<Camera>& cameras,
                    double tolerance) {
  for (const auto& cam : cameras) {
    const Vec3 to_point = point - cam.position;
    const double dist = to_point.norm();
    if (cam.forward().dot(to_point) <= 0.0) continue;
    const Eigen::Vector2d px = project(cam, point);
    if (px.x() < 0.0 || px.y() < 0.0 || px.x() >= cam.width || px.y() >= cam.height) continue;
    Ray ray;
    ray.origin = cam.position;
    ray.direction = to_point / dist;
    ray.t_near = 0.0;
    ray.t_far = dist * (1.0 + 1e-3) + tolerance;
    const auto hit = intersect(ray, scene);
    if (hit && hit->t >= dist - tolerance - 1e-6 * dist) return true;
  }
  return false;
}

}  // namespace radiant
