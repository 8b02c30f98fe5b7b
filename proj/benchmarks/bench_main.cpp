#include <benchmark/benchmark.h>

#include "lhsforge/measurements.hpp"
#include "lhsforge/quantum.hpp"
#include "lhsforge/states.hpp"
#include "lhsforge/trainer.hpp"

namespace lhsforge {
namespace {

struct Setup {
    const char* name;
    MeasurementClass cls;
    VisibilityState state;
    int n_hidden;
    int order;
};

Setup setup(int which) {
    switch (which) {
        case 0:
            return {"qubit-pvm", MeasurementClass::qubit_pvm(), werner(0.5), 100, 5};
        case 1:
            return {"povm4", MeasurementClass::povm(2, 4), werner(0.5), 150, 2};
        default:
            return {"qutrit-pvm", MeasurementClass::qudit_pvm(3), isotropic3(0.4), 50, 2};
    }
}

void BM_Forward(benchmark::State& st) {
    Setup s = setup(static_cast<int>(st.range(0)));
    LhsModel m = init_model(model_config_for(s.cls, s.cls.dim, s.n_hidden, s.order, 1));
    Rng rng(2);
    auto meas = sample_batch(s.cls, static_cast<int>(st.range(1)), rng);
    PreparedBatch b = prepare_batch(m, s.state, meas);
    for (auto _ : st) {
        benchmark::DoNotOptimize(batch_loss(m, b, LossKind::Smoothed));
    }
    st.SetLabel(s.name);
}
BENCHMARK(BM_Forward)->Args({0, 256})->Args({1, 256})->Args({2, 128})->Unit(benchmark::kMillisecond);

void BM_ForwardBackward(benchmark::State& st) {
    Setup s = setup(static_cast<int>(st.range(0)));
    LhsModel m = init_model(model_config_for(s.cls, s.cls.dim, s.n_hidden, s.order, 1));
    Rng rng(2);
    auto meas = sample_batch(s.cls, static_cast<int>(st.range(1)), rng);
    PreparedBatch b = prepare_batch(m, s.state, meas);
    for (auto _ : st) {
        benchmark::DoNotOptimize(compute_gradients(m, b));
    }
    st.SetLabel(s.name);
}
BENCHMARK(BM_ForwardBackward)->Args({0, 256})->Args({1, 256})->Args({2, 128})->Unit(benchmark::kMillisecond);

void BM_PrepareBatch(benchmark::State& st) {
    Setup s = setup(static_cast<int>(st.range(0)));
    LhsModel m = init_model(model_config_for(s.cls, s.cls.dim, s.n_hidden, s.order, 1));
    Rng rng(2);
    auto meas = sample_batch(s.cls, 256, rng);
    for (auto _ : st) {
        benchmark::DoNotOptimize(prepare_batch(m, s.state, meas));
    }
    st.SetLabel(s.name);
}
BENCHMARK(BM_PrepareBatch)->Arg(0)->Arg(1)->Arg(2)->Unit(benchmark::kMicrosecond);

void BM_Sample(benchmark::State& st) {
    MeasurementClass cls = setup(static_cast<int>(st.range(0))).cls;
    Rng rng(3);
    for (auto _ : st) {
        benchmark::DoNotOptimize(sample_measurement(cls, rng));
    }
    st.SetLabel(std::string(to_string(cls.kind)) + " d=" + std::to_string(cls.dim));
}
BENCHMARK(BM_Sample)->Arg(0)->Arg(1)->Arg(2);

void BM_TraceNorm(benchmark::State& st) {
    const int d = static_cast<int>(st.range(0));
    Rng rng(4);
    std::normal_distribution<double> n(0.0, 1.0);
    CMatrix a(d, d);
    for (int r = 0; r < d; ++r) {
        for (int c = 0; c < d; ++c) {
            a(r, c) = Complex(n(rng), n(rng));
        }
    }
    CMatrix h = 0.5 * (a + a.adjoint());
    for (auto _ : st) {
        benchmark::DoNotOptimize(trace_norm(h));
    }
}
BENCHMARK(BM_TraceNorm)->Arg(2)->Arg(3)->Arg(4);

void BM_SmoothTraceNorm2x2(benchmark::State& st) {
    Eigen::Matrix2cd x;
    x << 0.3, Complex(0.1, -0.2), Complex(0.1, 0.2), -0.05;
    Eigen::Matrix2cd g;
    for (auto _ : st) {
        benchmark::DoNotOptimize(smooth_trace_norm_2x2(x, 1e-6, &g));
    }
}
BENCHMARK(BM_SmoothTraceNorm2x2);

}  // namespace
}  // namespace lhsforge

BENCHMARK_MAIN();
