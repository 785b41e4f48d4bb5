#pragma once

#include "radiant/field.hpp"
#include "radiant/render.hpp"
#include "radiant/scene.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace radiant {

struct TrainConfig {
  int steps = 2000;
  int rays_per_batch = 1024;
  int samples_per_ray = 64;
  double learning_rate = 1e-2;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
};

void validate_train_config(const TrainConfig& config);

// Adam moments, one slot per field parameter.
struct OptimizerState {
  std::vector<double> m_density;
  std::vector<double> v_density;
  std::vector<double> m_rgb;
  std::vector<double> v_rgb;
  std::int64_t step = 0;

  OptimizerState() = default;
  explicit OptimizerState(const VoxelField& field)
      : m_density(field.raw_density.size(), 0.0),
        v_density(field.raw_density.size(), 0.0),
        m_rgb(field.raw_rgb.size(), 0.0),
        v_rgb(field.raw_rgb.size(), 0.0) {}
};

// Mean over rays and channels of the squared error.
double photometric_loss(std::span<const Vec3> predicted, std::span<const Vec3> target);

// Bias-corrected Adam update, in place.
void adam_step(VoxelField& field, const VertexGradient& grads, OptimizerState& state,
               const TrainConfig& config);

struct PixelRef {
  int view = 0;
  int x = 0;
  int y = 0;
};

// A training batch: pixels plus the stratified offsets of every sample.
struct RayBatch {
  std::vector<PixelRef> pixels;
  std::vector<double> offsets;  // pixels.size() * samples_per_ray, in [0,1)
  int samples_per_ray = 0;
};

// Uniform draw over all (view, pixel) pairs, with replacement.
RayBatch draw_batch(const PosedDataset& dataset, int rays, int samples_per_ray, Rng& rng);

// Renders the batch, writes the photometric-loss gradient into `grads`
// (overwriting it) and returns the loss. Rays are split across threads, each
// accumulating into its own buffer; buffers are summed in thread order.
class BatchGradient {
 public:
  explicit BatchGradient(const VoxelField& field);
  double compute(const VoxelField& field, const PosedDataset& dataset, const RayBatch& batch,
                 VertexGradient& grads);

 private:
  std::vector<VertexGradient> thread_buffers_;
};

// Single-threaded reference for BatchGradient::compute.
double batch_gradient_serial(const VoxelField& field, const PosedDataset& dataset,
                             const RayBatch& batch, VertexGradient& grads);

// Called after every step with the batch loss of that step.
using TrainObserver = std::function<void(int step, double loss, const VoxelField& field)>;

// init_field(config.seed) followed by `steps` Adam steps on random ray batches.
VoxelField train_member(const PosedDataset& dataset, int resolution, const Aabb& bounds,
                        const TrainConfig& config, const TrainObserver& observer = {});
VoxelField train_member_serial(const PosedDataset& dataset, int resolution, const Aabb& bounds,
                               const TrainConfig& config, const TrainObserver& observer = {});

}  // namespace radiant
