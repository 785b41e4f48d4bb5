#include "radiant/uncertainty.hpp"

#include <algorithm>
#include <stdexcept>

namespace radiant {

void validate_ensemble(const Ensemble& ensemble) {
  if (ensemble.members.empty()) throw std::invalid_argument("ensemble: no members");
  const VoxelField& first = ensemble.members.front();
  for (const auto& m : ensemble.members) {
    if (m.resolution != first.resolution || m.bounds.min != first.bounds.min ||
        m.bounds.max != first.bounds.max) {
      throw std::invalid_argument("ensemble: members disagree on resolution or bounds");
    }
  }
}

Ensemble train_ensemble(const PosedDataset& dataset, int members, int resolution,
                        const Aabb& bounds, const TrainConfig& config,
                        const MemberObserver& observer) {
  if (members < 1) throw std::invalid_argument("train_ensemble: need at least one member");
  validate_train_config(config);
  if (dataset.size() == 0) throw std::invalid_argument("train_ensemble: empty dataset");
  Ensemble ensemble;
  ensemble.base_seed = config.seed;
  ensemble.members.resize(members);
#pragma omp parallel for schedule(dynamic, 1)
  for (int k = 0; k < members; ++k) {
    TrainConfig member_config = config;
    member_config.seed = config.seed + static_cast<std::uint64_t>(k);
    TrainObserver forward;
    if (observer) {
      forward = [&observer, k](int step, double loss, const VoxelField&) {
        observer(k, step, loss);
      };
    }
    ensemble.members[k] = train_member(dataset, resolution, bounds, member_config, forward);
  }
  return ensemble;
}

void finalize_stats(PixelStats& s) {
  s.var_rgb_mean = (s.var_rgb[0] + s.var_rgb[1] + s.var_rgb[2]) / 3.0;
  const double miss = 1.0 - s.q_bar;
  s.var_epi = miss * miss;
  s.psi_sq = s.var_rgb_mean + s.var_epi;
}

EnsembleAccumulator::EnsembleAccumulator(int width, int height)
    : width_(width), height_(height), sums_(static_cast<std::size_t>(width) * height) {}

void EnsembleAccumulator::add(const RenderOutput& render) {
  if (render.rgb.width != width_ || render.rgb.height != height_ || render.q.width != width_ ||
      render.q.height != height_) {
    throw std::invalid_argument("ensemble stats: member render has the wrong size");
  }
  for (std::size_t i = 0; i < sums_.size(); ++i) {
    const Vec3& c = render.rgb.pixels[i];
    for (int ch = 0; ch < 3; ++ch) {
      sums_[i].rgb[ch].add(c[ch]);
      sums_[i].rgb_sq[ch].add(c[ch] * c[ch]);
    }
    sums_[i].q.add(render.q.values[i]);
  }
  ++count_;
}

StatsImage EnsembleAccumulator::finish() const {
  if (count_ == 0) throw std::invalid_argument("ensemble stats: no members");
  const double m = static_cast<double>(count_);
  StatsImage out{width_, height_, std::vector<PixelStats>(sums_.size())};
  for (std::size_t i = 0; i < sums_.size(); ++i) {
    PixelStats& s = out.pixels[i];
    for (int ch = 0; ch < 3; ++ch) {
      const double mean = sums_[i].rgb[ch].value() / m;
      const double mean_sq = sums_[i].rgb_sq[ch].value() / m;
      s.mu_rgb[ch] = mean;
      // values in [0,1] bound the population variance by 1/4
      s.var_rgb[ch] = std::clamp(mean_sq - mean * mean, 0.0, 0.25);
    }
    s.q_bar = std::clamp(sums_[i].q.value() / m, 0.0, 1.0);
    finalize_stats(s);
  }
  return out;
}

RenderOutput member_render(const VoxelField& member, const Camera& camera, double t_near,
                           double t_far, int samples_per_ray) {
  return render_view(member, camera, t_near, t_far, samples_per_ray, Midpoint{});
}

StatsImage ensemble_stats(std::span<const RenderOutput> member_renders) {
  if (member_renders.empty()) throw std::invalid_argument("ensemble stats: no members");
  EnsembleAccumulator acc(member_renders.front().rgb.width, member_renders.front().rgb.height);
  for (const auto& r : member_renders) acc.add(r);
  return acc.finish();
}

StatsImage ensemble_stats(const Ensemble& ensemble, const Camera& camera, double t_near,
                          double t_far, int samples_per_ray) {
  validate_ensemble(ensemble);
  EnsembleAccumulator acc(camera.width, camera.height);
  for (const auto& member : ensemble.members) {
    acc.add(member_render(member, camera, t_near, t_far, samples_per_ray));
  }
  return acc.finish();
}

PredictiveGaussian predictive_distribution(const PixelStats& stats) {
  return {stats.mu_rgb, Vec3::Constant(stats.psi_sq)};
}

}  // namespace radiant
