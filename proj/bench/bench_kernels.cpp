// Parallel kernels against their serial references.

#include "radiant/render.hpp"
#include "radiant/scene.hpp"
#include "radiant/train.hpp"

#include <benchmark/benchmark.h>

using namespace radiant;

namespace {

struct Fixture {
  SceneSpec scene = floor_scene();
  std::vector<Camera> cameras =
      make_hemisphere_cameras(4, 3.5, std::nullopt, 1, CameraIntrinsics{64, 64, 80, 80});
  double t_near = 0.0;
  double t_far = 0.0;
  PosedDataset dataset;
  VoxelField field = init_field(32, floor_scene().bounds, 1);
  RayBatch batch;

  Fixture() {
    std::tie(t_near, t_far) = near_far_from_bounds(cameras, scene.bounds);
    dataset = make_dataset(scene, cameras, t_near, t_far);
    Rng rng(2);
    batch = draw_batch(dataset, 1024, 64, rng);
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

void BM_RenderView(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(render_view(f.field, f.cameras[0], f.t_near, f.t_far, 64));
  }
}

void BM_RenderViewSerial(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(render_view_serial(f.field, f.cameras[0], f.t_near, f.t_far, 64));
  }
}

void BM_BatchGradient(benchmark::State& state) {
  const Fixture& f = fixture();
  BatchGradient kernel(f.field);
  VertexGradient grads(f.field);
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernel.compute(f.field, f.dataset, f.batch, grads));
  }
}

void BM_BatchGradientSerial(benchmark::State& state) {
  const Fixture& f = fixture();
  VertexGradient grads(f.field);
  for (auto _ : state) {
    benchmark::DoNotOptimize(batch_gradient_serial(f.field, f.dataset, f.batch, grads));
  }
}

void BM_GroundTruth(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(render_ground_truth(f.scene, f.cameras[0], f.t_near, f.t_far));
  }
}

void BM_GroundTruthSerial(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(render_ground_truth_serial(f.scene, f.cameras[0], f.t_near, f.t_far));
  }
}

}  // namespace

BENCHMARK(BM_RenderView)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_RenderViewSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_BatchGradient)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_BatchGradientSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_GroundTruth)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_GroundTruthSerial)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
