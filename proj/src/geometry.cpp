#include "radiant/geometry.hpp"


#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace radiant {

void validate_camera(const Camera& camera) {
  if (camera.width < 1 || camera.height < 1) {
    throw std::invalid_argument("camera: width and height must be >= 1");
  }
  if (!(camera.fx > 0.0) || !(camera.fy > 0.0)) {
    throw std::invalid_argument("camera: focal lengths must be positive");
  }
  const Mat3 gram = camera.rotation.transpose() * camera.rotation;
  if ((gram - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-9) {
    throw std::invalid_argument("camera: rotation is not orthonormal");
  }
  if (!camera.position.allFinite()) {
    throw std::invalid_argument("camera: position is not finite");
  }
}

Ray generate_ray(const Camera& camera, int px, int py, double t_near, double t_far) {
  if (px < 0 || px >= camera.width || py < 0 || py >= camera.height) {
    throw std::invalid_argument("generate_ray: pixel (" + std::to_string(px) + ", " +
                                std::to_string(py) + ") outside image");
  }
  if (!(t_near >= 0.0) || !(t_near < t_far)) {
    throw std::invalid_argument("generate_ray: need 0 <= t_near < t_far");
  }
  const Vec3 local((px + 0.5 - camera.cx) / camera.fx, -(py + 0.5 - camera.cy) / camera.fy,
                   -1.0);
  Ray ray;
  ray.origin = camera.position;
  ray.direction = (camera.rotation * local).normalized();
  ray.t_near = t_near;
  ray.t_far = t_far;
  return ray;
}

Eigen::Vector2d project(const Camera& camera, const Vec3& point) {
  const Vec3 local = camera.rotation.transpose() * (point - camera.position);
  const double depth = -local.z();
  return {camera.cx + camera.fx * local.x() / depth, camera.cy - camera.fy * local.y() / depth};
}

Camera look_at_camera(const Vec3& position, const Vec3& target, const Vec3& up, double fx,
                      double fy, double cx, double cy, int width, int height) {
  const Vec3 view = target - position;
  if (view.norm() < 1e-12) {
    throw std::invalid_argument("look_at_camera: position coincides with target");
  }
  const Vec3 forward = view.normalized();
  const Vec3 side = forward.cross(up);
  if (up.norm() < 1e-12 || side.norm() < 1e-9 * up.norm()) {
    throw std::invalid_argument("look_at_camera: up vector is parallel to the view direction");
  }
  const Vec3 right = side.normalized();
  const Vec3 true_up = right.cross(forward);

  Camera camera;
  camera.position = position;
  camera.rotation.col(0) = right;
  camera.rotation.col(1) = true_up;
  camera.rotation.col(2) = -forward;
  camera.fx = fx;
  camera.fy = fy;
  camera.cx = cx;
  camera.cy = cy;
  camera.width = width;
  camera.height = height;
  validate_camera(camera);
  return camera;
}

bool clip_to_box(const Ray& ray, const Aabb& box, double& t_enter, double& t_exit) {
  double lo = ray.t_near;
  double hi = ray.t_far;
  for (int axis = 0; axis < 3; ++axis) {
    const double o = ray.origin[axis];
    const double d = ray.direction[axis];
    if (std::abs(d) < 1e-300) {
      if (o < box.min[axis] || o > box.max[axis]) return false;
      continue;
    }
    double t0 = (box.min[axis] - o) / d;
    double t1 = (box.max[axis] - o) / d;
    if (t0 > t1) std::swap(t0, t1);
    lo = std::max(lo, t0);
    hi = std::min(hi, t1);
    if (lo > hi) return false;
  }
  t_enter = lo;
  t_exit = hi;
  return true;
}

}  // namespace radiant
