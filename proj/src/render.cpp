#include "radiant/render.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

namespace radiant {

namespace {

void check_inputs(const RaySamples& samples, std::span<const FieldSample> fields) {
  if (samples.size() != fields.size()) {
    throw std::invalid_argument("composite: sample and field counts differ");
  }
  for (const auto& f : fields) {
    if (!(f.density >= 0.0)) throw std::invalid_argument("composite: negative density");
  }
}

double optical_depth(double density, double delta) {
  return std::min(density * delta, kMaxOpticalDepth);
}

}  // namespace

void sample_ray_into(const Ray& ray, int n, const SampleMode& mode, RaySamples& out) {
  if (n < 1) throw std::invalid_argument("sample_ray: need at least one sample");
  const double width = (ray.t_far - ray.t_near) / n;
  out.t.resize(n);
  out.delta.resize(n);
  out.points.resize(n);
  if (const auto* strat = std::get_if<Stratified>(&mode)) {
    if (strat->rng == nullptr) throw std::invalid_argument("sample_ray: stratified mode without rng");
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < n; ++i) out.t[i] = ray.t_near + (i + unit(*strat->rng)) * width;
  } else {
    for (int i = 0; i < n; ++i) out.t[i] = ray.t_near + (i + 0.5) * width;
  }
  for (int i = 0; i + 1 < n; ++i) out.delta[i] = out.t[i + 1] - out.t[i];
  out.delta[n - 1] = width;
  for (int i = 0; i < n; ++i) out.points[i] = ray.at(out.t[i]);
}

void sample_ray_offsets(const Ray& ray, std::span<const double> offsets, RaySamples& out) {
  const int n = static_cast<int>(offsets.size());
  if (n < 1) throw std::invalid_argument("sample_ray: need at least one sample");
  const double width = (ray.t_far - ray.t_near) / n;
  out.t.resize(n);
  out.delta.resize(n);
  out.points.resize(n);
  for (int i = 0; i < n; ++i) out.t[i] = ray.t_near + (i + offsets[i]) * width;
  for (int i = 0; i + 1 < n; ++i) out.delta[i] = out.t[i + 1] - out.t[i];
  out.delta[n - 1] = width;
  for (int i = 0; i < n; ++i) out.points[i] = ray.at(out.t[i]);
}

RaySamples sample_ray(const Ray& ray, int n, const SampleMode& mode) {
  RaySamples out;
  sample_ray_into(ray, n, mode, out);
  return out;
}

void composite_into(const RaySamples& samples, std::span<const FieldSample> fields,
                    CompositeResult& out) {
  check_inputs(samples, fields);
  const std::size_t n = samples.size();
  out.occupancy.resize(n);
  out.transmittance.resize(n);
  out.weights.resize(n);
  out.color.setZero();
  double transmittance = 1.0;
  double q = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double o = -std::expm1(-optical_depth(fields[i].density, samples.delta[i]));
    const double w = transmittance * o;
    out.occupancy[i] = o;
    out.transmittance[i] = transmittance;
    out.weights[i] = w;
    out.color += w * fields[i].rgb;
    q += w;
    transmittance *= 1.0 - o;
  }
  out.q = q;
}

CompositeResult composite(const RaySamples& samples, std::span<const FieldSample> fields) {
  CompositeResult out;
  composite_into(samples, fields, out);
  return out;
}

CompositeResult composite_expsum(const RaySamples& samples, std::span<const FieldSample> fields) {
  check_inputs(samples, fields);
  const std::size_t n = samples.size();
  CompositeResult out;
  out.occupancy.resize(n);
  out.transmittance.resize(n);
  out.weights.resize(n);
  double depth = 0.0;
  double q = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = optical_depth(fields[i].density, samples.delta[i]);
    const double t = std::exp(-depth);
    const double o = -std::expm1(-a);
    out.transmittance[i] = t;
    out.occupancy[i] = o;
    out.weights[i] = t * o;
    out.color += out.weights[i] * fields[i].rgb;
    q += out.weights[i];
    depth += a;
  }
  out.q = q;
  return out;
}

void composite_backward_into(const RaySamples& samples, std::span<const FieldSample> fields,
                             const CompositeResult& forward, const Vec3& d_color, double d_q,
                             CompositeGradient& out) {
  const std::size_t n = samples.size();
  out.d_density.resize(n);
  out.d_rgb.resize(n);
  // dL/da_k = T_{k+1} g_k - sum_{i>k} w_i g_i, with g_i = <d_color, c_i> + d_q
  double suffix = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    const double g = d_color.dot(fields[k].rgb) + d_q;
    const double t_next = forward.transmittance[k] * (1.0 - forward.occupancy[k]);
    const double d_depth = t_next * g - suffix;
    const bool clamped = fields[k].density * samples.delta[k] >= kMaxOpticalDepth;
    out.d_density[k] = clamped ? 0.0 : samples.delta[k] * d_depth;
    out.d_rgb[k] = forward.weights[k] * d_color;
    suffix += forward.weights[k] * g;
  }
}

CompositeGradient composite_backward(const RaySamples& samples,
                                     std::span<const FieldSample> fields, const Vec3& d_color,
                                     double d_q) {
  const CompositeResult forward = composite(samples, fields);
  CompositeGradient out;
  composite_backward_into(samples, fields, forward, d_color, d_q, out);
  return out;
}

CompositeResult render_ray(const VoxelField& field, const Ray& ray, int n, const SampleMode& mode) {
  const RaySamples samples = sample_ray(ray, n, mode);
  std::vector<FieldSample> fields(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) fields[i] = query(field, samples.points[i]);
  return composite(samples, fields);
}

namespace {

struct PixelWorkspace {
  RaySamples samples;
  std::vector<FieldSample> fields;
  CompositeResult result;
};

void shade_pixel(const VoxelField& field, const Camera& camera, double t_near, double t_far,
                 int n, const SampleMode& mode, int x, int y, PixelWorkspace& ws,
                 RenderOutput& out) {
  const Ray ray = generate_ray(camera, x, y, t_near, t_far);
  sample_ray_into(ray, n, mode, ws.samples);
  ws.fields.resize(ws.samples.size());
  for (std::size_t i = 0; i < ws.samples.size(); ++i) {
    ws.fields[i] = query(field, ws.samples.points[i]);
  }
  composite_into(ws.samples, ws.fields, ws.result);
  out.rgb.at(x, y) = ws.result.color;
  out.q.at(x, y) = ws.result.q;
}

// Stratified renders derive one stream per pixel so the result does not
// depend on how pixels are split across threads.
std::optional<std::uint64_t> stratified_seed(const SampleMode& mode) {
  if (const auto* s = std::get_if<Stratified>(&mode)) {
    if (s->rng == nullptr) throw std::invalid_argument("render_view: stratified mode without rng");
    return (*s->rng)();
  }
  return std::nullopt;
}

}  // namespace

RenderOutput render_view(const VoxelField& field, const Camera& camera, double t_near,
                         double t_far, int n, const SampleMode& mode) {
  validate_camera(camera);
  RenderOutput out{Image(camera.width, camera.height), ScalarMap(camera.width, camera.height)};
  const auto seed = stratified_seed(mode);
  const int pixels = camera.width * camera.height;
#pragma omp parallel
  {
    PixelWorkspace ws;
    Rng pixel_rng;
#pragma omp for schedule(static)
    for (int i = 0; i < pixels; ++i) {
      SampleMode pixel_mode = Midpoint{};
      if (seed) {
        pixel_rng.seed(*seed + static_cast<std::uint64_t>(i));
        pixel_mode = Stratified{&pixel_rng};
      }
      shade_pixel(field, camera, t_near, t_far, n, pixel_mode, i % camera.width,
                  i / camera.width, ws, out);
    }
  }
  return out;
}

RenderOutput render_view_serial(const VoxelField& field, const Camera& camera, double t_near,
                                double t_far, int n, const SampleMode& mode) {
  validate_camera(camera);
  RenderOutput out{Image(camera.width, camera.height), ScalarMap(camera.width, camera.height)};
  const auto seed = stratified_seed(mode);
  PixelWorkspace ws;
  Rng pixel_rng;
  for (int y = 0; y < camera.height; ++y) {
    for (int x = 0; x < camera.width; ++x) {
      SampleMode pixel_mode = Midpoint{};
      if (seed) {
        pixel_rng.seed(*seed + static_cast<std::uint64_t>(y * camera.width + x));
        pixel_mode = Stratified{&pixel_rng};
      }
      shade_pixel(field, camera, t_near, t_far, n, pixel_mode, x, y, ws, out);
    }
  }
  return out;
}

}  // namespace radiant
