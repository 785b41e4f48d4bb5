#pragma once

#include "radiant/geometry.hpp"

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace radiant {

// Overflow-safe softplus: raw + log1p(exp(-raw)) for positive inputs.
inline double softplus(double raw) {
  return raw > 0.0 ? raw + std::log1p(std::exp(-raw)) : std::log1p(std::exp(raw));
}

inline double sigmoid(double raw) {
  if (raw >= 0.0) return 1.0 / (1.0 + std::exp(-raw));
  const double e = std::exp(raw);
  return e / (1.0 + e);
}

// One ensemble member: raw density and raw colour on the (R+1)^3 vertices of a
// regular grid spanning `bounds`. Vertex (i, j, k) lives at index
// i + (R+1) * (j + (R+1) * k); colour is stored interleaved, 3 per vertex.
struct VoxelField {
  int resolution = 1;
  Aabb bounds;
  std::vector<double> raw_density;
  std::vector<double> raw_rgb;

  VoxelField() = default;
  VoxelField(int resolution, const Aabb& bounds);

  int vertices_per_axis() const { return resolution + 1; }
  std::size_t vertex_count() const {
    const auto n = static_cast<std::size_t>(vertices_per_axis());
    return n * n * n;
  }
  std::size_t vertex_index(int i, int j, int k) const {
    const auto n = static_cast<std::size_t>(vertices_per_axis());
    return static_cast<std::size_t>(i) + n * (static_cast<std::size_t>(j) + n * k);
  }
  Vec3 vertex_position(int i, int j, int k) const;
};

struct FieldSample {
  double density = 0.0;
  Vec3 rgb = Vec3::Zero();
};

struct VertexGradient {
  std::vector<double> d_raw_density;
  std::vector<double> d_raw_rgb;

  VertexGradient() = default;
  explicit VertexGradient(const VoxelField& field)
      : d_raw_density(field.raw_density.size(), 0.0), d_raw_rgb(field.raw_rgb.size(), 0.0) {}

  void zero();
  void add(const VertexGradient& other);
};

// The eight vertices around a point and their trilinear weights.
struct Stencil {
  std::array<std::size_t, 8> index{};
  std::array<double, 8> weight{};
};

// False when the point lies outside the (closed) bounds.
bool trilinear_stencil(const VoxelField& field, const Vec3& point, Stencil& stencil);

// Interpolates raw parameters, then activates. Outside the bounds the field is
// empty: density 0, colour black. Throws on non-finite points.
FieldSample query(const VoxelField& field, const Vec3& point);

// Adds the parameter gradient of (density, rgb) at `point`, weighted by the
// upstream gradients, into `grads`. No-op outside the bounds.
void query_backward(const VoxelField& field, const Vec3& point, double d_density,
                    const Vec3& d_rgb, VertexGradient& grads);

// Variants reusing a precomputed stencil; the backward pass recovers the
// activation derivatives from the forward sample.
FieldSample query(const VoxelField& field, const Stencil& stencil);
void query_backward(const VoxelField& field, const Stencil& stencil, const FieldSample& sample,
                    double d_density, const Vec3& d_rgb, VertexGradient& grads);

// raw density = -3 + U(-0.1, 0.1), raw colour = U(-0.1, 0.1).
VoxelField init_field(int resolution, const Aabb& bounds, std::uint64_t seed);

}  // namespace radiant
