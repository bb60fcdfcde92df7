// Parallel kernels against their serial reference twins on the synthetic phantom.

#include "mandikin/contact.hpp"
#include "mandikin/radiograph.hpp"
#include "mandikin/registration.hpp"
#include "mandikin/synth.hpp"

#include <benchmark/benchmark.h>

using namespace mandikin;

namespace {

const synth::Phantom& phantom() {
    static const synth::Phantom ph = [] {
        synth::PhantomSpec spec;
        spec.resolution_mm = 1.0;
        spec.voxel_mm = 1.0;
        return synth::make_phantom(spec);
    }();
    return ph;
}

const SpatialIndex& maxilla_index() {
    static const SpatialIndex idx(phantom().maxilla);
    return idx;
}

ProjectionCamera camera(double pitch, std::size_t size) {
    ProjectionCamera cam;
    cam.u_axis = Vec3::UnitX();
    cam.v_axis = Vec3::UnitZ();  // viewing along -y
    cam.width = cam.height = size;
    cam.pitch = pitch;
    cam.detector_origin = Vec3(-0.5 * pitch * (size - 1), -200, -0.5 * pitch * (size - 1));
    return cam;
}

Parallel jobs(const benchmark::State& state) { return Parallel{static_cast<int>(state.range(0))}; }

void BM_drr_voxel(benchmark::State& state) {
    const ProjectionCamera cam = camera(1.0, 128);
    for (auto _ : state) benchmark::DoNotOptimize(drr_voxel(*phantom().volume, cam, jobs(state)));
}

void BM_drr_voxel_reference(benchmark::State& state) {
    const ProjectionCamera cam = camera(1.0, 128);
    for (auto _ : state) benchmark::DoNotOptimize(drr_voxel_reference(*phantom().volume, cam));
}

std::vector<AttenuatedBody> bodies() { return {{phantom().maxilla, 0.02}, {phantom().mandible, 0.02}}; }

void BM_drr_surface(benchmark::State& state) {
    const ProjectionCamera cam = camera(1.0, 128);
    const auto b = bodies();
    for (auto _ : state) benchmark::DoNotOptimize(drr_surface(b, cam, jobs(state)));
}

void BM_drr_surface_reference(benchmark::State& state) {
    const ProjectionCamera cam = camera(1.0, 128);
    const auto b = bodies();
    for (auto _ : state) benchmark::DoNotOptimize(drr_surface_reference(b, cam));
}

ContactParams contact_params() {
    ContactParams p;
    p.threshold_mm = 0.5;
    return p;
}

void BM_contact_map(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(contact_map(phantom().mandible, maxilla_index(), contact_params(), jobs(state)));
    }
}

void BM_contact_map_reference(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(contact_map_reference(phantom().mandible, maxilla_index(), contact_params()));
}

const RigidTransform kPose = RigidTransform::rotation_about(Vec3(0.3, 1, 0.2).normalized(), 0.05, Vec3(0, 40, 0));

void BM_closest_pairs(benchmark::State& state) {
    const auto& src = phantom().mandible.vertices;
    for (auto _ : state) benchmark::DoNotOptimize(closest_pairs(src, kPose, maxilla_index(), jobs(state)));
}

void BM_closest_pairs_reference(benchmark::State& state) {
    const auto& src = phantom().mandible.vertices;
    for (auto _ : state) benchmark::DoNotOptimize(closest_pairs_reference(src, kPose, maxilla_index()));
}

void thread_counts(benchmark::internal::Benchmark* b) {
    for (int j = 1; j <= max_threads(); j *= 2) b->Arg(j);
    b->UseRealTime()->Unit(benchmark::kMillisecond);
}

}  // namespace

BENCHMARK(BM_drr_voxel)->Apply(thread_counts);
BENCHMARK(BM_drr_voxel_reference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_drr_surface)->Apply(thread_counts);
BENCHMARK(BM_drr_surface_reference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_contact_map)->Apply(thread_counts);
BENCHMARK(BM_contact_map_reference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_closest_pairs)->Apply(thread_counts);
BENCHMARK(BM_closest_pairs_reference)->Unit(benchmark::kMillisecond);

int main(int argc, char** argv) {
    maxilla_index();  // build shared fixtures outside the timed loops
    benchmark::Initialize(&argc, argv);
    if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
    benchmark::RunSpecifiedBenchmarks();
    benchmark::Shutdown();
    return 0;
}
