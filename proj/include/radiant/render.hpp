#pragma once

#include "radiant/field.hpp"
#include "radiant/geometry.hpp"

#include <random>
#include <span>
#include <variant>
#include <vector>

namespace radiant {

using Rng = std::mt19937_64;

struct Midpoint {};
struct Stratified {
  Rng* rng = nullptr;
};
using SampleMode = std::variant<Midpoint, Stratified>;

// Optical depth per sample is clamped here before exponentiation.
inline constexpr double kMaxOpticalDepth = 80.0;

struct RaySamples {
  std::vector<double> t;
  std::vector<double> delta;
  std::vector<Vec3> points;

  std::size_t size() const { return t.size(); }
};

// Splits [t_near, t_far] into n equal bins, one sample per bin. delta_i is the
// gap to the next sample; the last sample uses the bin width.
RaySamples sample_ray(const Ray& ray, int n, const SampleMode& mode);
void sample_ray_into(const Ray& ray, int n, const SampleMode& mode, RaySamples& out);
// Stratified placement with caller-supplied offsets in [0,1), one per bin.
void sample_ray_offsets(const Ray& ray, std::span<const double> offsets, RaySamples& out);

struct CompositeResult {
  Vec3 color = Vec3::Zero();
  std::vector<double> occupancy;      // o_i = 1 - exp(-rho_i delta_i)
  std::vector<double> transmittance;  // T_i = prod_{j<i} (1 - o_j)
  std::vector<double> weights;        // w_i = T_i o_i
  double q = 0.0;                     // sum of termination probabilities
};

// Product-form compositing. Throws std::invalid_argument on size mismatch or
// negative density.
CompositeResult composite(const RaySamples& samples, std::span<const FieldSample> fields);
void composite_into(const RaySamples& samples, std::span<const FieldSample> fields,
                    CompositeResult& out);

// Same quantities with T_i = exp(-sum_{j<i} rho_j delta_j). Kept as an
// independent check on the product form.
CompositeResult composite_expsum(const RaySamples& samples, std::span<const FieldSample> fields);

struct CompositeGradient {
  std::vector<double> d_density;
  std::vector<Vec3> d_rgb;
};

// Gradient of <d_color, C> + d_q * q with respect to every rho_i and c_i.
CompositeGradient composite_backward(const RaySamples& samples,
                                     std::span<const FieldSample> fields, const Vec3& d_color,
                                     double d_q);
// Variant reusing a forward result computed on the same inputs.
void composite_backward_into(const RaySamples& samples, std::span<const FieldSample> fields,
                             const CompositeResult& forward, const Vec3& d_color, double d_q,
                             CompositeGradient& out);

struct RenderOutput {
  Image rgb;
  ScalarMap q;
};

// Per-pixel sample, query, composite. OpenMP over pixels; stratified mode
// draws one seed from the caller's generator and derives per-pixel streams.
RenderOutput render_view(const VoxelField& field, const Camera& camera, double t_near,
                         double t_far, int n, const SampleMode& mode = Midpoint{});
// Single-threaded reference with identical output.
RenderOutput render_view_serial(const VoxelField& field, const Camera& camera, double t_near,
                                double t_far, int n, const SampleMode& mode = Midpoint{});

// Composites a single ray through the field (midpoint or stratified).
CompositeResult render_ray(const VoxelField& field, const Ray& ray, int n, const SampleMode& mode);

}  // namespace radiant
