#include "radiant/train.hpp"

#include "radiant/parallel.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

namespace radiant {

void validate_train_config(const TrainConfig& c) {
  if (c.steps < 1) throw std::invalid_argument("train: steps must be >= 1");
  if (c.rays_per_batch < 1) throw std::invalid_argument("train: rays_per_batch must be >= 1");
  if (c.samples_per_ray < 1) throw std::invalid_argument("train: samples_per_ray must be >= 1");
  if (!(c.learning_rate > 0.0)) throw std::invalid_argument("train: learning_rate must be > 0");
  if (!(c.adam_beta1 >= 0.0 && c.adam_beta1 < 1.0) || !(c.adam_beta2 >= 0.0 && c.adam_beta2 < 1.0)) {
    throw std::invalid_argument("train: Adam betas must lie in [0, 1)");
  }
  if (!(c.adam_eps > 0.0)) throw std::invalid_argument("train: adam_eps must be > 0");
}

double photometric_loss(std::span<const Vec3> predicted, std::span<const Vec3> target) {
  if (predicted.empty()) throw std::invalid_argument("photometric_loss: empty batch");
  if (predicted.size() != target.size()) {
    throw std::invalid_argument("photometric_loss: batch sizes differ");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    sum += (predicted[i] - target[i]).squaredNorm();
  }
  return sum / (3.0 * static_cast<double>(predicted.size()));
}

namespace {

void adam_update(std::vector<double>& params, const std::vector<double>& grads,
                 std::vector<double>& m, std::vector<double>& v, double b1, double b2,
                 double step_size, double correction2, double eps) {
  const std::size_t n = params.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double g = grads[i];
    m[i] = b1 * m[i] + (1.0 - b1) * g;
    v[i] = b2 * v[i] + (1.0 - b2) * g * g;
    params[i] -= step_size * m[i] / (std::sqrt(v[i] / correction2) + eps);
  }
}

}  // namespace

void adam_step(VoxelField& field, const VertexGradient& grads, OptimizerState& state,
               const TrainConfig& config) {
  if (grads.d_raw_density.size() != field.raw_density.size() ||
      grads.d_raw_rgb.size() != field.raw_rgb.size() ||
      state.m_density.size() != field.raw_density.size() ||
      state.m_rgb.size() != field.raw_rgb.size()) {
    throw std::invalid_argument("adam_step: shape mismatch");
  }
  ++state.step;
  const double b1 = config.adam_beta1;
  const double b2 = config.adam_beta2;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(b1, t);
  const double correction2 = 1.0 - std::pow(b2, t);
  const double step_size = config.learning_rate / correction1;
  adam_update(field.raw_density, grads.d_raw_density, state.m_density, state.v_density, b1, b2,
              step_size, correction2, config.adam_eps);
  adam_update(field.raw_rgb, grads.d_raw_rgb, state.m_rgb, state.v_rgb, b1, b2, step_size,
              correction2, config.adam_eps);
}

RayBatch draw_batch(const PosedDataset& dataset, int rays, int samples_per_ray, Rng& rng) {
  if (dataset.size() == 0) throw std::invalid_argument("draw_batch: empty dataset");
  std::vector<std::size_t> offsets(dataset.size() + 1, 0);
  for (std::size_t v = 0; v < dataset.size(); ++v) {
    offsets[v + 1] = offsets[v] + dataset.images[v].size();
  }
  std::uniform_int_distribution<std::size_t> pick(0, offsets.back() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  RayBatch batch;
  batch.samples_per_ray = samples_per_ray;
  batch.pixels.resize(rays);
  batch.offsets.resize(static_cast<std::size_t>(rays) * samples_per_ray);
  for (auto& px : batch.pixels) {
    const std::size_t flat = pick(rng);
    const auto view = static_cast<std::size_t>(
        std::upper_bound(offsets.begin(), offsets.end(), flat) - offsets.begin() - 1);
    const std::size_t local = flat - offsets[view];
    const int width = dataset.images[view].width;
    px = {static_cast<int>(view), static_cast<int>(local % width), static_cast<int>(local / width)};
  }
  for (auto& o : batch.offsets) o = unit(rng);
  return batch;
}

namespace {

struct RayWorkspace {
  RaySamples samples;
  std::vector<Stencil> stencils;
  std::vector<unsigned char> inside;
  std::vector<FieldSample> fields;
  CompositeResult forward;
  CompositeGradient backward;
};

// Forward and backward for one ray; returns the squared error summed over
// channels.
double ray_gradient(const VoxelField& field, const PosedDataset& dataset, const RayBatch& batch,
                    std::size_t r, double scale, RayWorkspace& ws, VertexGradient& grads) {
  const PixelRef& px = batch.pixels[r];
  const Camera& cam = dataset.cameras[px.view];
  const Ray ray = generate_ray(cam, px.x, px.y, dataset.t_near, dataset.t_far);
  const std::size_t n = static_cast<std::size_t>(batch.samples_per_ray);
  sample_ray_offsets(ray, std::span<const double>(batch.offsets).subspan(r * n, n), ws.samples);
  ws.stencils.resize(n);
  ws.inside.resize(n);
  ws.fields.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    ws.inside[i] = trilinear_stencil(field, ws.samples.points[i], ws.stencils[i]);
    ws.fields[i] = ws.inside[i] ? query(field, ws.stencils[i]) : FieldSample{};
  }
  composite_into(ws.samples, ws.fields, ws.forward);
  const Vec3 residual = ws.forward.color - dataset.images[px.view].at(px.x, px.y);
  composite_backward_into(ws.samples, ws.fields, ws.forward, scale * residual, 0.0, ws.backward);
  for (std::size_t i = 0; i < n; ++i) {
    if (!ws.inside[i]) continue;
    query_backward(field, ws.stencils[i], ws.fields[i], ws.backward.d_density[i],
                   ws.backward.d_rgb[i], grads);
  }
  return residual.squaredNorm();
}

void check_batch(const PosedDataset& dataset, const RayBatch& batch) {
  if (batch.pixels.empty()) throw std::invalid_argument("batch gradient: empty batch");
  if (dataset.size() == 0) throw std::invalid_argument("batch gradient: empty dataset");
}

}  // namespace

BatchGradient::BatchGradient(const VoxelField& field) {
  const int threads = omp_in_parallel() ? 1 : std::max(1, thread_count());
  thread_buffers_.reserve(threads > 1 ? threads - 1 : 0);
  for (int t = 1; t < threads; ++t) thread_buffers_.emplace_back(field);
}

double BatchGradient::compute(const VoxelField& field, const PosedDataset& dataset,
                              const RayBatch& batch, VertexGradient& grads) {
  check_batch(dataset, batch);
  const auto rays = static_cast<std::int64_t>(batch.pixels.size());
  // d loss / d C = 2 (C - target) / (3 B)
  const double scale = 2.0 / (3.0 * static_cast<double>(rays));
  const int threads = static_cast<int>(thread_buffers_.size()) + 1;
  std::vector<double> partial(threads, 0.0);
#pragma omp parallel num_threads(threads)
  {
    const int tid = omp_get_thread_num();
    const int team = omp_get_num_threads();
    VertexGradient& mine = tid == 0 ? grads : thread_buffers_[tid - 1];
    mine.zero();
    RayWorkspace ws;
    double sum = 0.0;
    const std::int64_t begin = rays * tid / team;
    const std::int64_t end = rays * (tid + 1) / team;
    for (std::int64_t r = begin; r < end; ++r) {
      sum += ray_gradient(field, dataset, batch, static_cast<std::size_t>(r), scale, ws, mine);
    }
    partial[tid] = sum;
#pragma omp barrier
    if (team > 1) {
      const auto count = static_cast<std::int64_t>(grads.d_raw_density.size());
#pragma omp for schedule(static)
      for (std::int64_t v = 0; v < count; ++v) {
        double d = grads.d_raw_density[v];
        double r = grads.d_raw_rgb[3 * v];
        double g = grads.d_raw_rgb[3 * v + 1];
        double b = grads.d_raw_rgb[3 * v + 2];
        for (int t = 1; t < team; ++t) {
          const VertexGradient& other = thread_buffers_[t - 1];
          d += other.d_raw_density[v];
          r += other.d_raw_rgb[3 * v];
          g += other.d_raw_rgb[3 * v + 1];
          b += other.d_raw_rgb[3 * v + 2];
        }
        grads.d_raw_density[v] = d;
        grads.d_raw_rgb[3 * v] = r;
        grads.d_raw_rgb[3 * v + 1] = g;
        grads.d_raw_rgb[3 * v + 2] = b;
      }
    }
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total / (3.0 * static_cast<double>(rays));
}

double batch_gradient_serial(const VoxelField& field, const PosedDataset& dataset,
                             const RayBatch& batch, VertexGradient& grads) {
  check_batch(dataset, batch);
  const double rays = static_cast<double>(batch.pixels.size());
  const double scale = 2.0 / (3.0 * rays);
  grads.zero();
  RayWorkspace ws;
  double sum = 0.0;
  for (std::size_t r = 0; r < batch.pixels.size(); ++r) {
    sum += ray_gradient(field, dataset, batch, r, scale, ws, grads);
  }
  return sum / (3.0 * rays);
}

namespace {

template <typename GradientFn>
VoxelField train_impl(const PosedDataset& dataset, int resolution, const Aabb& bounds,
                      const TrainConfig& config, const TrainObserver& observer,
                      GradientFn&& gradient) {
  validate_train_config(config);
  if (dataset.size() == 0) throw std::invalid_argument("train_member: empty dataset");
  validate_dataset(dataset);
  VoxelField field = init_field(resolution, bounds, config.seed);
  OptimizerState state(field);
  VertexGradient grads(field);
  // Stream for batches, decorrelated from the initialisation stream.
  Rng rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  for (int step = 1; step <= config.steps; ++step) {
    const RayBatch batch = draw_batch(dataset, config.rays_per_batch, config.samples_per_ray, rng);
    const double loss = gradient(field, batch, grads);
    adam_step(field, grads, state, config);
    if (observer) observer(step, loss, field);
  }
  return field;
}

}  // namespace

VoxelField train_member(const PosedDataset& dataset, int resolution, const Aabb& bounds,
                        const TrainConfig& config, const TrainObserver& observer) {
  std::unique_ptr<BatchGradient> engine;
  return train_impl(dataset, resolution, bounds, config, observer,
                    [&](const VoxelField& field, const RayBatch& batch, VertexGradient& grads) {
                      if (!engine) engine = std::make_unique<BatchGradient>(field);
                      return engine->compute(field, dataset, batch, grads);
                    });
}

VoxelField train_member_serial(const PosedDataset& dataset, int resolution, const Aabb& bounds,
                               const TrainConfig& config, const TrainObserver& observer) {
  return train_impl(dataset, resolution, bounds, config, observer,
                    [&](const VoxelField& field, const RayBatch& batch, VertexGradient& grads) {
                      return batch_gradient_serial(field, dataset, batch, grads);
                    });
}

}  // namespace radiant
