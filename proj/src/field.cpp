#include "radiant/field.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

namespace radiant {

VoxelField::VoxelField(int resolution_, const Aabb& bounds_)
    : resolution(resolution_), bounds(bounds_) {
  if (resolution < 1) throw std::invalid_argument("VoxelField: resolution must be >= 1");
  if (!((bounds.max.array() > bounds.min.array()).all())) {
    throw std::invalid_argument("VoxelField: bounds must have positive extent");
  }
  raw_density.assign(vertex_count(), 0.0);
  raw_rgb.assign(3 * vertex_count(), 0.0);
}

Vec3 VoxelField::vertex_position(int i, int j, int k) const {
  const Vec3 cell = bounds.extent() / resolution;
  return bounds.min + Vec3(i * cell.x(), j * cell.y(), k * cell.z());
}

void VertexGradient::zero() {
  std::fill(d_raw_density.begin(), d_raw_density.end(), 0.0);
  std::fill(d_raw_rgb.begin(), d_raw_rgb.end(), 0.0);
}

void VertexGradient::add(const VertexGradient& other) {
  for (std::size_t i = 0; i < d_raw_density.size(); ++i) d_raw_density[i] += other.d_raw_density[i];
  for (std::size_t i = 0; i < d_raw_rgb.size(); ++i) d_raw_rgb[i] += other.d_raw_rgb[i];
}

bool trilinear_stencil(const VoxelField& field, const Vec3& point, Stencil& stencil) {
  if (!point.allFinite()) throw std::invalid_argument("query: non-finite point");
  if (!field.bounds.contains(point)) return false;
  const int r = field.resolution;
  const Vec3 u = (point - field.bounds.min).cwiseQuotient(field.bounds.extent()) * r;
  int cell[3];
  double frac[3];
  for (int a = 0; a < 3; ++a) {
    const int c = std::min(static_cast<int>(u[a]), r - 1);
    cell[a] = c;
    frac[a] = u[a] - c;
  }
  int n = 0;
  for (int dk = 0; dk < 2; ++dk) {
    const double wz = dk ? frac[2] : 1.0 - frac[2];
    for (int dj = 0; dj < 2; ++dj) {
      const double wy = dj ? frac[1] : 1.0 - frac[1];
      for (int di = 0; di < 2; ++di) {
        const double wx = di ? frac[0] : 1.0 - frac[0];
        stencil.index[n] = field.vertex_index(cell[0] + di, cell[1] + dj, cell[2] + dk);
        stencil.weight[n] = wx * wy * wz;
        ++n;
      }
    }
  }
  return true;
}

FieldSample query(const VoxelField& field, const Vec3& point) {
  Stencil st;
  if (!trilinear_stencil(field, point, st)) return {};
  return query(field, st);
}

void query_backward(const VoxelField& field, const Vec3& point, double d_density,
                    const Vec3& d_rgb, VertexGradient& grads) {
  Stencil st;
  if (!trilinear_stencil(field, point, st)) return;
  double density = 0.0;
  double raw[3] = {0.0, 0.0, 0.0};
  for (int n = 0; n < 8; ++n) {
    const double w = st.weight[n];
    const std::size_t v = st.index[n];
    density += w * field.raw_density[v];
    for (int c = 0; c < 3; ++c) raw[c] += w * field.raw_rgb[3 * v + c];
  }
  // softplus' = sigmoid, sigmoid' = s (1 - s)
  const double g_density = d_density * sigmoid(density);
  double g_rgb[3];
  for (int c = 0; c < 3; ++c) {
    const double s = sigmoid(raw[c]);
    g_rgb[c] = d_rgb[c] * s * (1.0 - s);
  }
  for (int n = 0; n < 8; ++n) {
    const double w = st.weight[n];
    const std::size_t v = st.index[n];
    grads.d_raw_density[v] += w * g_density;
    for (int c = 0; c < 3; ++c) grads.d_raw_rgb[3 * v + c] += w * g_rgb[c];
  }
}

FieldSample query(const VoxelField& field, const Stencil& st) {
  double density = 0.0;
  double r = 0.0, g = 0.0, b = 0.0;
  for (int n = 0; n < 8; ++n) {
    const double w = st.weight[n];
    const std::size_t v = st.index[n];
    density += w * field.raw_density[v];
    r += w * field.raw_rgb[3 * v];
    g += w * field.raw_rgb[3 * v + 1];
    b += w * field.raw_rgb[3 * v + 2];
  }
  return {softplus(density), Vec3(sigmoid(r), sigmoid(g), sigmoid(b))};
}

void query_backward(const VoxelField& /*field*/, const Stencil& st, const FieldSample& sample,
                    double d_density, const Vec3& d_rgb, VertexGradient& grads) {
  // sigmoid(x) = 1 - exp(-softplus(x))
  const double g_density = d_density * -std::expm1(-sample.density);
  double g_rgb[3];
  for (int c = 0; c < 3; ++c) g_rgb[c] = d_rgb[c] * sample.rgb[c] * (1.0 - sample.rgb[c]);
  for (int n = 0; n < 8; ++n) {
    const double w = st.weight[n];
    const std::size_t v = st.index[n];
    grads.d_raw_density[v] += w * g_density;
    grads.d_raw_rgb[3 * v] += w * g_rgb[0];
    grads.d_raw_rgb[3 * v + 1] += w * g_rgb[1];
    grads.d_raw_rgb[3 * v + 2] += w * g_rgb[2];
  }
}

VoxelField init_field(int resolution, const Aabb& bounds, std::uint64_t seed) {
  VoxelField field(resolution, bounds);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-0.1, 0.1);
  for (auto& d : field.raw_density) d = -3.0 + jitter(rng);
  for (auto& c : field.raw_rgb) c = jitter(rng);
  return field;
}

}  // namespace radiant
