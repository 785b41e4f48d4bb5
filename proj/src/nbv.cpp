#include "radiant/nbv.hpp"

#include "radiant/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <set>
#include <stdexcept>

namespace radiant {

std::string to_string(ViewPolicy policy) {
  return policy == ViewPolicy::kRandom ? "random" : "uncertainty";
}

std::optional<ViewPolicy> parse_policy(const std::string& name) {
  if (name == "uncertainty") return ViewPolicy::kUncertainty;
  if (name == "random") return ViewPolicy::kRandom;
  return std::nullopt;
}

void validate_split(const NbvSplit& split, std::size_t dataset_size) {
  std::set<int> seen;
  for (const auto* part : {&split.initial, &split.candidates, &split.test}) {
    for (int v : *part) {
      if (v < 0 || static_cast<std::size_t>(v) >= dataset_size) {
        throw std::invalid_argument("nbv split: view index out of range");
      }
      if (!seen.insert(v).second) throw std::invalid_argument("nbv split: sets overlap");
    }
  }
  if (split.initial.empty()) throw std::invalid_argument("nbv split: no initial views");
  if (split.test.empty()) throw std::invalid_argument("nbv split: no test views");
}

std::vector<double> NbvRecord::avg_psnr() const {
  std::vector<double> out;
  for (const auto& it : iterations) out.push_back(it.avg_psnr);
  return out;
}

std::vector<double> NbvRecord::min_psnr() const {
  std::vector<double> out;
  for (const auto& it : iterations) out.push_back(it.min_psnr);
  return out;
}

double score_view(const StatsImage& stats) {
  if (stats.size() == 0) throw std::invalid_argument("score_view: empty image");
  double sum = 0.0;
  for (const auto& p : stats.pixels) sum += p.psi_sq;
  return sum / static_cast<double>(stats.size());
}

int select_next(std::span<const ScoredView> candidates, ViewPolicy policy, Rng& rng) {
  if (candidates.empty()) throw std::invalid_argument("select_next: empty candidate pool");
  if (policy == ViewPolicy::kRandom) {
    std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
    return candidates[pick(rng)].index;
  }
  const ScoredView* best = &candidates.front();
  for (const auto& c : candidates) {
    if (c.score > best->score || (c.score == best->score && c.index < best->index)) best = &c;
  }
  return best->index;
}

namespace {

PosedDataset subset(const PosedDataset& dataset, const std::vector<int>& views) {
  PosedDataset out;
  out.t_near = dataset.t_near;
  out.t_far = dataset.t_far;
  for (int v : views) {
    out.images.push_back(dataset.images[v]);
    out.cameras.push_back(dataset.cameras[v]);
  }
  return out;
}

StatsImage view_stats(const Ensemble& ensemble, const PosedDataset& dataset, int view,
                      int samples) {
  return ensemble_stats(ensemble, dataset.cameras[view], dataset.t_near, dataset.t_far, samples);
}

}  // namespace

NbvRecord run_nbv(const PosedDataset& dataset, const NbvSplit& split, const NbvConfig& config,
                  const NbvObserver& observer) {
  validate_dataset(dataset);
  validate_split(split, dataset.size());
  if (config.iterations < 0) throw std::invalid_argument("run_nbv: negative iteration count");
  if (config.ensemble_size < 1) throw std::invalid_argument("run_nbv: ensemble size must be >= 1");

  NbvRecord record;
  record.policy = config.policy;
  std::vector<int> training = split.initial;
  std::vector<int> pool = split.candidates;
  Rng rng(config.seed);

  for (int iter = 0;; ++iter) {
    const PosedDataset train_set = subset(dataset, training);
    const Ensemble ensemble = train_ensemble(train_set, config.ensemble_size, config.resolution,
                                             config.bounds, config.train);
    NbvIteration row;
    row.iteration = iter;
    double sum = 0.0;
    double worst = std::numeric_limits<double>::infinity();
    for (int v : split.test) {
      const StatsImage stats = view_stats(ensemble, dataset, v, config.render_samples);
      Image mean(stats.width, stats.height);
      for (std::size_t i = 0; i < stats.size(); ++i) mean.pixels[i] = stats.pixels[i].mu_rgb;
      const double p = psnr(mean, dataset.images[v]);
      sum += p;
      worst = std::min(worst, p);
    }
    row.avg_psnr = sum / static_cast<double>(split.test.size());
    row.min_psnr = worst;

    const bool select = iter < config.iterations && !pool.empty();
    if (select) {
      for (int v : pool) {
        row.scores.push_back(
            {v, score_view(view_stats(ensemble, dataset, v, config.render_samples))});
      }
      row.chosen = select_next(row.scores, config.policy, rng);
      pool.erase(std::find(pool.begin(), pool.end(), row.chosen));
      training.push_back(row.chosen);
    }
    if (observer) observer(row);
    record.iterations.push_back(std::move(row));
    if (!select) break;
  }
  record.final_training_views = training;
  return record;
}

void write_nbv_csv(std::ostream& out, const NbvRecord& record) {
  const std::vector<double> avg = record.avg_psnr();
  const std::vector<double> rescaled = rescale_psnr(avg);
  const double first = avg.front();
  const double best = *std::max_element(avg.begin(), avg.end());
  out << "iter,policy,chosen,avg_psnr,min_psnr,avg_rescaled,min_rescaled\n";
  char line[256];
  for (std::size_t i = 0; i < record.iterations.size(); ++i) {
    const NbvIteration& it = record.iterations[i];
    const double min_rescaled = best > first ? (it.min_psnr - first) / (best - first) : 0.0;
    std::snprintf(line, sizeof(line), "%d,%s,%d,%.6f,%.6f,%.6f,%.6f\n", it.iteration,
                  to_string(record.policy).c_str(), it.chosen, it.avg_psnr, it.min_psnr,
                  rescaled[i], min_rescaled);
    out << line;
  }
}

}  // namespace radiant
