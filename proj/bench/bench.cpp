// Serial reference vs OpenMP kernels: lateral interaction on several grid
// sizes, and a small batch of closed-loop runs.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>

#include <omp.h>

#include "dnsarsa/config.hpp"
#include "dnsarsa/convolution.hpp"
#include "dnsarsa/experiment.hpp"
#include "dnsarsa/perception.hpp"

using namespace dnsarsa;

namespace {

template <class F>
double seconds_per_call(F&& f, int reps) {
    f();  // warm-up
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) f();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / reps;
}

void lateral(std::size_t rows, std::size_t cols, int reps) {
    FieldParams p = PerceptionParams::defaults().percept;
    p.rows = rows;
    p.cols = cols;
    Matrix out(rows, cols);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (double& x : out.values()) x = u(rng);

    const Matrix a = lateral_serial(out, p), b = lateral_parallel(out, p);
    double diff = 0.0;
    for (std::size_t n = 0; n < a.size(); ++n) diff = std::max(diff, std::abs(a.values()[n] - b.values()[n]));

    const double ts = seconds_per_call([&] { (void)lateral_serial(out, p); }, reps);
    const double tp = seconds_per_call([&] { (void)lateral_parallel(out, p); }, reps);
    std::printf("lateral %4zux%-4zu  serial %10.1f us  parallel %10.1f us  speed-up %6.1fx  max diff %.1e\n", rows,
                cols, ts * 1e6, tp * 1e6, ts / tp, diff);
}

}  // namespace

int main() {
    std::printf("OpenMP threads: %d\n", omp_get_max_threads());
    lateral(8, 60, 200);
    lateral(32, 240, 10);
    lateral(64, 480, 2);

    ExperimentConfig cfg;
    cfg.total_steps = 4000;
    cfg.exploration_steps = 4000;
    const std::size_t seeds = 4;
    const double ts = seconds_per_call([&] { (void)run_batch(cfg, seeds, Execution::Serial); }, 1);
    const double tp = seconds_per_call([&] { (void)run_batch(cfg, seeds, Execution::Parallel); }, 1);
    std::printf("batch %zu seeds x %ld steps  serial %.2f s  parallel %.2f s  speed-up %.2fx\n", seeds,
                cfg.total_steps, ts, tp, ts / tp);
}
