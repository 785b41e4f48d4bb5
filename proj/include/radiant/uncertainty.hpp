#pragma once

#include "radiant/exact_sum.hpp"
#include "radiant/field.hpp"
#include "radiant/render.hpp"
#include "radiant/scene.hpp"
#include "radiant/train.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace radiant {

struct Ensemble {
  std::vector<VoxelField> members;
  std::uint64_t base_seed = 0;

  int size() const { return static_cast<int>(members.size()); }
};

// Throws when empty or when members disagree on resolution or bounds.
void validate_ensemble(const Ensemble& ensemble);

using MemberObserver = std::function<void(int member, int step, double loss)>;

// Member k is trained with seed base_seed + k (base_seed = config.seed).
// Members train concurrently, one thread each; the observer may be called
// from several threads at once.
Ensemble train_ensemble(const PosedDataset& dataset, int members, int resolution,
                        const Aabb& bounds, const TrainConfig& config,
                        const MemberObserver& observer = {});

struct PixelStats {
  Vec3 mu_rgb = Vec3::Zero();
  Vec3 var_rgb = Vec3::Zero();  // population variance, divisor M
  double var_rgb_mean = 0.0;    // channel average of var_rgb
  double q_bar = 0.0;           // mean summed termination probability
  double var_epi = 0.0;         // (1 - q_bar)^2
  double psi_sq = 0.0;          // var_rgb_mean + var_epi
};

struct StatsImage {
  int width = 0;
  int height = 0;
  std::vector<PixelStats> pixels;

  const PixelStats& at(int x, int y) const {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }
  std::size_t size() const { return pixels.size(); }
};

// Fills the derived fields (channel mean, epistemic term, psi^2) from mu,
// var_rgb and q_bar.
void finalize_stats(PixelStats& stats);

// Streaming per-pixel statistics over member renders. Sums are correctly
// rounded, so the result is independent of the order members are added.
class EnsembleAccumulator {
 public:
  EnsembleAccumulator(int width, int height);

  void add(const RenderOutput& render);
  int count() const { return count_; }
  StatsImage finish() const;

 private:
  struct PixelSums {
    ExactSum rgb[3];
    ExactSum rgb_sq[3];
    ExactSum q;
  };
  int width_;
  int height_;
  int count_ = 0;
  std::vector<PixelSums> sums_;
};

// Midpoint-sampled render of one member.
RenderOutput member_render(const VoxelField& member, const Camera& camera, double t_near,
                           double t_far, int samples_per_ray);

StatsImage ensemble_stats(std::span<const RenderOutput> member_renders);
StatsImage ensemble_stats(const Ensemble& ensemble, const Camera& camera, double t_near,
                          double t_far, int samples_per_ray);

// N(mu_rgb, I * psi^2): the three channel variances are the shared psi^2.
struct PredictiveGaussian {
  Vec3 mean = Vec3::Zero();
  Vec3 variance = Vec3::Zero();
};

PredictiveGaussian predictive_distribution(const PixelStats& stats);

}  // namespace radiant
