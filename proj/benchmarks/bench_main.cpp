#include <benchmark/benchmark.h>

#include <random>

#include "waam/fixtures.hpp"
#include "waam/kdtree.hpp"
#include "waam/metrology.hpp"
#include "waam/monitor.hpp"
#include "waam/slicer.hpp"

using namespace waam;

namespace {

std::vector<Point3> random_cloud(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-50, 50);
  std::vector<Point3> pts(n);
  for (auto& p : pts) p = Point3(u(rng), u(rng), u(rng));
  return pts;
}

void BM_Knn(benchmark::State& state) {
  const auto pts = random_cloud(static_cast<std::size_t>(state.range(0)), 1);
  const KdTree3 tree(pts);
  const auto queries = random_cloud(1024, 2);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(tree.knn(queries[i++ % queries.size()], 20));
}
BENCHMARK(BM_Knn)->Arg(1 << 12)->Arg(1 << 16);

void BM_Projection(benchmark::State& state) {
  const TriMesh cap = fixtures::sphere_cap();
  const SurfaceProjector proj(cap, 20);
  const Point3 q(10, 5, 48);
  for (auto _ : state) benchmark::DoNotOptimize(proj.project(q));
}
BENCHMARK(BM_Projection);

void BM_NextLayer(benchmark::State& state) {
  const TriMesh cap = fixtures::sphere_cap();
  const SurfaceProjector proj(cap, 20);
  const Layer base = sample_base_layer(cap, Plane{Point3(0, 0, 0), Vec3(0, 0, 1)}, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(next_layer(proj, base, 1.0, 0.5));
}
BENCHMARK(BM_NextLayer)->Unit(benchmark::kMillisecond);

void BM_Icp(benchmark::State& state) {
  const PointCloud src = sample_mesh(fixtures::blade(), 0.5, 3);
  RigidTransform t;
  t.rotation = Eigen::AngleAxisd(0.05, Vec3::UnitZ()).toRotationMatrix();
  t.translation = Vec3(1, -1, 0.5);
  const PointCloud dst = transform_cloud(src, t);
  for (auto _ : state) benchmark::DoNotOptimize(icp_register(src, dst));
}
BENCHMARK(BM_Icp)->Unit(benchmark::kMillisecond);

void BM_MatchTemplate(benchmark::State& state) {
  const TorchTemplate tmpl = make_template(default_torch_silhouette());
  SynthSpec spec;
  spec.noise_sigma = 0.05;
  const IRFrame frame = synth_frame(spec);
  for (auto _ : state) benchmark::DoNotOptimize(match_template(frame, tmpl));
}
BENCHMARK(BM_MatchTemplate)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
