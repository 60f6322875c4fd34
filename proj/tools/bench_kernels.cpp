// Times the OpenMP kernels against their naive single-threaded twins in
// serial_ref.hpp and checks the results are bit-identical. Median of --reps
// timings after one warm-up per side.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <numeric>
#include <vector>

#include <CLI11.hpp>

#include "gbboost/dataset.hpp"
#include "gbboost/kernels.hpp"
#include "gbboost/metrics.hpp"
#include "gbboost/serial_ref.hpp"
#include "gbboost/tree.hpp"

namespace {

double median_ms(int reps, const std::function<void()>& fn) {
    fn();  // warm-up
    std::vector<double> ms(reps);
    for (int i = 0; i < reps; ++i) {
        auto [unused, t] = gbb::timed([&] {
            fn();
            return 0;
        });
        (void)unused;
        ms[i] = t;
    }
    std::nth_element(ms.begin(), ms.begin() + ms.size() / 2, ms.end());
    return ms[ms.size() / 2];
}

void report(const char* name, double serial, double parallel, bool identical) {
    std::printf("%-16s %11.2f %11.2f %9.2fx  %s\n", name, serial, parallel,
                parallel > 0.0 ? serial / parallel : 0.0,
                identical ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
    std::size_t n = 20000, q = 16, knn_n = 4000, k = 5;
    int classes = 4, reps = 5;
    std::uint64_t seed = 17;

    CLI::App app{"serial reference vs parallel kernels"};
    app.add_option("--n", n, "rows for the row-parallel kernels");
    app.add_option("--q", q, "feature count");
    app.add_option("--knn-n", knn_n, "rows for the quadratic knn kernel");
    app.add_option("--k", k, "knn neighbourhood size");
    app.add_option("--classes", classes, "blob count");
    app.add_option("--reps", reps, "timing repetitions (median reported)");
    app.add_option("--seed", seed, "blob seed");
    CLI11_PARSE(app, argc, argv);

    const gbb::Dataset d = gbb::synth_blobs(n, q, classes, 1.0, seed);
    std::vector<std::size_t> rows(d.n);
    std::iota(rows.begin(), rows.end(), std::size_t{0});

    std::vector<std::vector<double>> centers;
    for (int c = 0; c < classes; ++c) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < d.n; ++i)
            if (d.labels[i] == c) members.push_back(i);
        centers.push_back(gbb::centroid(d, members));
    }

    std::printf("n=%zu q=%zu classes=%d knn_n=%zu k=%zu reps=%d\n", n, q, classes, knn_n, k,
                reps);
    std::printf("%-16s %11s %11s %10s\n", "kernel", "serial ms", "parallel ms", "speedup");

    {
        auto a = gbb::serial_ref::centroid(d, rows);
        auto b = gbb::centroid(d, rows);
        report("centroid", median_ms(reps, [&] { gbb::serial_ref::centroid(d, rows); }),
               median_ms(reps, [&] { gbb::centroid(d, rows); }), a == b);
    }
    {
        auto a = gbb::serial_ref::assign_nearest(d, rows, centers);
        auto b = gbb::assign_nearest(d, rows, centers);
        report("assign_nearest",
               median_ms(reps, [&] { gbb::serial_ref::assign_nearest(d, rows, centers); }),
               median_ms(reps, [&] { gbb::assign_nearest(d, rows, centers); }), a == b);
    }
    {
        auto a = gbb::serial_ref::radial_distances(d, rows, centers[0]);
        auto b = gbb::radial_distances(d, rows, centers[0]);
        report("radial_distances",
               median_ms(reps, [&] { gbb::serial_ref::radial_distances(d, rows, centers[0]); }),
               median_ms(reps, [&] { gbb::radial_distances(d, rows, centers[0]); }), a == b);
    }
    {
        const gbb::Dataset dk = gbb::synth_blobs(knn_n, q, classes, 1.0, seed + 1);
        auto a = gbb::serial_ref::knn_table(dk, k);
        auto b = gbb::knn_table(dk, k);
        report("knn_table", median_ms(reps, [&] { gbb::serial_ref::knn_table(dk, k); }),
               median_ms(reps, [&] { gbb::knn_table(dk, k); }), a == b);
    }
    {
        gbb::LearnerSpec spec;
        spec.max_depth = 8;
        const gbb::Tree t = gbb::fit_tree(spec, d, rows);
        auto a = gbb::serial_ref::predict(t, d);
        auto b = gbb::predict(t, d);
        report("tree_predict", median_ms(reps, [&] { gbb::serial_ref::predict(t, d); }),
               median_ms(reps, [&] { gbb::predict(t, d); }), a == b);
    }
    return 0;
}
