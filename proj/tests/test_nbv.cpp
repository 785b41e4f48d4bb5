#include "radiant/nbv.hpp"

#include <gtest/gtest.h>

#include <numbers>
#include <set>
#include <sstream>

using namespace radiant;

namespace {

StatsImage psi_image(const std::vector<double>& psi) {
  StatsImage s;
  s.width = static_cast<int>(psi.size());
  s.height = 1;
  for (double v : psi) {
    PixelStats p;
    p.psi_sq = v;
    s.pixels.push_back(p);
  }
  return s;
}

struct TinyProblem {
  PosedDataset dataset;
  NbvSplit split;
  NbvConfig config;
};

TinyProblem tiny_problem(int candidates) {
  TinyProblem p;
  const SceneSpec s = single_sphere_scene();
  const CameraIntrinsics in{8, 8, 10, 10};
  auto cams = make_hemisphere_cameras(2 + candidates + 2, 3.5, std::nullopt, 5, in);
  const auto [tn, tf] = near_far_from_bounds(cams, s.bounds);
  p.dataset = make_dataset(s, cams, tn, tf);
  int id = 0;
  for (int i = 0; i < 2; ++i) p.split.initial.push_back(id++);
  for (int i = 0; i < candidates; ++i) p.split.candidates.push_back(id++);
  for (int i = 0; i < 2; ++i) p.split.test.push_back(id++);
  p.config.ensemble_size = 2;
  p.config.resolution = 4;
  p.config.render_samples = 8;
  p.config.bounds = s.bounds;
  p.config.train.steps = 5;
  p.config.train.rays_per_batch = 16;
  p.config.train.samples_per_ray = 8;
  return p;
}

}  // namespace

TEST(Nbv, ScoreIsMeanPsi) {
  EXPECT_NEAR(score_view(psi_image({0.3, 0.3, 0.3})), 0.3, 1e-15);
  EXPECT_NEAR(score_view(psi_image({0, 0, 1, 1})), 0.5, 1e-15);
}

TEST(Nbv, SelectUncertaintyTakesArgmaxLowestIndexOnTies) {
  Rng rng(0);
  const std::vector<ScoredView> a = {{3, 0.1}, {4, 0.9}, {5, 0.4}};
  EXPECT_EQ(select_next(a, ViewPolicy::kUncertainty, rng), 4);
  const std::vector<ScoredView> b = {{8, 0.5}, {2, 0.5}};
  EXPECT_EQ(select_next(b, ViewPolicy::kUncertainty, rng), 2);
  EXPECT_THROW(select_next(std::vector<ScoredView>{}, ViewPolicy::kRandom, rng),
               std::invalid_argument);
}

TEST(Nbv, SelectRandomReplaysAndCoversPool) {
  const std::vector<ScoredView> pool = {{0, 1.0}, {1, 0.0}, {2, 0.0}, {3, 0.0}};
  Rng a(12), b(12);
  std::set<int> seen;
  for (int i = 0; i < 200; ++i) {
    const int x = select_next(pool, ViewPolicy::kRandom, a);
    EXPECT_EQ(x, select_next(pool, ViewPolicy::kRandom, b));
    seen.insert(x);
  }
  EXPECT_EQ(seen.size(), 4u);
}

TEST(Nbv, PolicyNames) {
  EXPECT_EQ(parse_policy("uncertainty"), ViewPolicy::kUncertainty);
  EXPECT_EQ(parse_policy(to_string(ViewPolicy::kRandom)), ViewPolicy::kRandom);
  EXPECT_FALSE(parse_policy("greedy"));
}

TEST(Nbv, SplitValidation) {
  EXPECT_NO_THROW(validate_split(NbvSplit{{0}, {1, 2}, {3}}, 4));
  EXPECT_THROW(validate_split(NbvSplit{{0}, {0, 2}, {3}}, 4), std::invalid_argument);
  EXPECT_THROW(validate_split(NbvSplit{{0}, {1}, {4}}, 4), std::invalid_argument);
  EXPECT_THROW(validate_split(NbvSplit{{}, {1}, {2}}, 4), std::invalid_argument);
  EXPECT_THROW(validate_split(NbvSplit{{0}, {1}, {}}, 4), std::invalid_argument);
}

TEST(Nbv, ZeroIterationsEvaluatesOnce) {
  TinyProblem p = tiny_problem(3);
  p.config.iterations = 0;
  const NbvRecord r = run_nbv(p.dataset, p.split, p.config);
  ASSERT_EQ(r.iterations.size(), 1u);
  EXPECT_EQ(r.iterations[0].chosen, -1);
  EXPECT_EQ(r.final_training_views, p.split.initial);
}

TEST(Nbv, ExhaustsPoolAndKeepsChosenViews) {
  for (ViewPolicy policy : {ViewPolicy::kUncertainty, ViewPolicy::kRandom}) {
    TinyProblem p = tiny_problem(3);
    p.config.iterations = 10;
    p.config.policy = policy;
    std::vector<int> chosen;
    const NbvRecord r = run_nbv(p.dataset, p.split, p.config,
                                [&](const NbvIteration& it) { chosen.push_back(it.chosen); });
    ASSERT_EQ(r.iterations.size(), 4u);  // three picks, then the pool is empty
    EXPECT_EQ(r.iterations.back().chosen, -1);
    std::set<int> training(r.final_training_views.begin(), r.final_training_views.end());
    EXPECT_EQ(training, (std::set<int>{0, 1, 2, 3, 4}));
    // Each pick was scored among the remaining pool only.
    for (std::size_t i = 0; i + 1 < r.iterations.size(); ++i) {
      EXPECT_EQ(r.iterations[i].scores.size(), 3 - i);
      for (std::size_t j = 0; j < i; ++j) EXPECT_NE(r.iterations[i].chosen, chosen[j]);
    }
  }
}

TEST(Nbv, DeterministicReplayAndCsv) {
  TinyProblem p = tiny_problem(2);
  p.config.iterations = 2;
  p.config.policy = ViewPolicy::kRandom;
  p.config.seed = 3;
  std::ostringstream a, b;
  write_nbv_csv(a, run_nbv(p.dataset, p.split, p.config));
  write_nbv_csv(b, run_nbv(p.dataset, p.split, p.config));
  EXPECT_EQ(a.str(), b.str());
  std::istringstream lines(a.str());
  std::string header, first;
  std::getline(lines, header);
  std::getline(lines, first);
  EXPECT_EQ(header, "iter,policy,chosen,avg_psnr,min_psnr,avg_rescaled,min_rescaled");
  EXPECT_EQ(first.rfind("0,random,", 0), 0u);
}

// Ensemble trained on one side of the hemisphere scene: a view from the far
// side sees surfaces nobody observed and scores higher than a training view.
TEST(Nbv, UnobservedViewScoresHigher) {
  const SceneSpec s = hemisphere_scene();
  const CameraIntrinsics in{16, 16, 40, 40};
  const double deg = std::numbers::pi / 180.0;
  std::vector<Camera> train;
  for (double az : {-10.0, 0.0, 10.0}) train.push_back(orbit_camera(3.5, 55 * deg, az * deg, in));
  const Camera far = orbit_camera(3.5, 55 * deg, 180 * deg, in);
  std::vector<Camera> all = train;
  all.push_back(far);
  const auto [tn, tf] = near_far_from_bounds(all, s.bounds);
  const PosedDataset d = make_dataset(s, train, tn, tf);
  TrainConfig cfg;
  cfg.steps = 300;
  cfg.rays_per_batch = 256;
  cfg.samples_per_ray = 32;
  const Ensemble e = train_ensemble(d, 3, 16, s.bounds, cfg);
  const double seen = score_view(ensemble_stats(e, train[1], tn, tf, 32));
  const double unseen = score_view(ensemble_stats(e, far, tn, tf, 32));
  EXPECT_GT(unseen, seen);
}
