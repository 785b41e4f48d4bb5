#pragma once

#include "radiant/geometry.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace radiant {

struct Sphere {
  Vec3 center = Vec3::Zero();
  double radius = 1.0;
  Vec3 rgb = Vec3::Constant(0.5);
};

struct Box {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Ones();
  Vec3 rgb = Vec3::Constant(0.5);
};

// Horizontal plane z = z0, clipped to the scene bounds in x and y.
struct GroundPlane {
  double z0 = 0.0;
  Vec3 rgb = Vec3::Constant(0.5);
};

using Primitive = std::variant<Sphere, Box, GroundPlane>;

struct SceneSpec {
  std::vector<Primitive> primitives;
  std::optional<Vec3> background;  // nullopt: "empty", misses render black
  Aabb bounds;
};

// Throws std::invalid_argument when a colour leaves [0,1] or a primitive
// leaves the bounds.
void validate_scene(const SceneSpec& scene);

struct SurfaceHit {
  double t = 0.0;
  Vec3 rgb = Vec3::Zero();
  int primitive = -1;  // index into SceneSpec::primitives
};

// Nearest hit with t in (t_near, t_far); surfaces are unshaded.
std::optional<SurfaceHit> intersect(const Ray& ray, const SceneSpec& scene);

// Per-pixel nearest-hit colour. Rays are unbounded unless limits are given.
Image render_ground_truth(const SceneSpec& scene, const Camera& camera, double t_near = 0.0,
                          double t_far = 1e30);
Image render_ground_truth_serial(const SceneSpec& scene, const Camera& camera,
                                 double t_near = 0.0, double t_far = 1e30);

struct CameraIntrinsics {
  int width = 32;
  int height = 32;
  double fx = 40.0;
  double fy = 40.0;

  double cx() const { return 0.5 * width; }
  double cy() const { return 0.5 * height; }
};

struct CameraCluster {
  Vec3 center_dir = Vec3::UnitZ();
  double max_angle = 0.0;  // radians
};

// Cameras on the upper hemisphere of the given radius, all looking at the
// origin. Positions are uniform over the hemisphere (or over the cap of
// half-angle max_angle around center_dir, clipped to z >= 0).
std::vector<Camera> make_hemisphere_cameras(int n, double radius,
                                            const std::optional<CameraCluster>& cluster,
                                            std::uint64_t seed,
                                            const CameraIntrinsics& intrinsics = {});

// Camera at the given elevation/azimuth (radians) on a sphere around the origin.
Camera orbit_camera(double radius, double elevation, double azimuth,
                    const CameraIntrinsics& intrinsics, const Vec3& target = Vec3::Zero());

struct PosedDataset {
  std::vector<Image> images;
  std::vector<Camera> cameras;
  double t_near = 0.0;
  double t_far = 1.0;

  std::size_t size() const { return images.size(); }
};

void validate_dataset(const PosedDataset& dataset);

// Near/far distances bracketing the bounds for every camera, widened by margin.
std::pair<double, double> near_far_from_bounds(const std::vector<Camera>& cameras,
                                               const Aabb& bounds, double margin = 0.1);

PosedDataset make_dataset(const SceneSpec& scene, const std::vector<Camera>& cameras,
                          double t_near, double t_far);

// Preset scenes.
SceneSpec single_sphere_scene();
// Sphere floating above a wide floor. Narrow views from high elevations see
// the sphere and the floor just behind it; most of the floor only shows up
// from low cameras.
SceneSpec floor_scene();
// Coloured objects standing on a floor that fills the view of any camera in
// the upper cap, so nearly every pixel terminates on a surface.
SceneSpec hemisphere_scene();
std::optional<SceneSpec> preset_scene(const std::string& name);

// True when the surface point is seen unoccluded by at least one camera.
bool point_observed(const SceneSpec& scene, const Vec3& point, const std::vector<Camera>& cameras,
                    double tolerance = 1e-6);

}  // namespace radiant
