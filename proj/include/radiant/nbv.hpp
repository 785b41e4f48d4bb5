#pragma once

#include "radiant/scene.hpp"
#include "radiant/train.hpp"
#include "radiant/uncertainty.hpp"

#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace radiant {

enum class ViewPolicy { kUncertainty, kRandom };

std::string to_string(ViewPolicy policy);
std::optional<ViewPolicy> parse_policy(const std::string& name);

// Indices into one PosedDataset. The three sets must be disjoint.
struct NbvSplit {
  std::vector<int> initial;
  std::vector<int> candidates;
  std::vector<int> test;
};

void validate_split(const NbvSplit& split, std::size_t dataset_size);

struct NbvConfig {
  int iterations = 10;
  int ensemble_size = 5;
  ViewPolicy policy = ViewPolicy::kUncertainty;
  TrainConfig train;       // train.seed is the ensemble base seed
  int resolution = 32;
  int render_samples = 64;
  Aabb bounds;
  std::uint64_t seed = 0;  // drives the random policy
};

struct ScoredView {
  int index = 0;
  double score = 0.0;
};

struct NbvIteration {
  int iteration = 0;
  int chosen = -1;  // -1 on the final evaluation
  std::vector<ScoredView> scores;
  double avg_psnr = 0.0;
  double min_psnr = 0.0;
};

struct NbvRecord {
  ViewPolicy policy = ViewPolicy::kUncertainty;
  std::vector<NbvIteration> iterations;
  std::vector<int> final_training_views;

  std::vector<double> avg_psnr() const;
  std::vector<double> min_psnr() const;
};

// Mean psi^2 over all pixels.
double score_view(const StatsImage& stats);

// Uncertainty: highest score, ties to the lowest index. Random: uniform draw.
int select_next(std::span<const ScoredView> candidates, ViewPolicy policy, Rng& rng);

using NbvObserver = std::function<void(const NbvIteration&)>;

// Trains a fresh ensemble on the current training set every iteration, scores
// the remaining candidates and moves the selected view into the training set.
// Stops early when the candidate pool runs dry.
NbvRecord run_nbv(const PosedDataset& dataset, const NbvSplit& split, const NbvConfig& config,
                  const NbvObserver& observer = {});

// iter,policy,chosen,avg_psnr,min_psnr,avg_rescaled,min_rescaled
// Both rescaled columns use the map fixed by the average-PSNR series.
void write_nbv_csv(std::ostream& out, const NbvRecord& record);

}  // namespace radiant
