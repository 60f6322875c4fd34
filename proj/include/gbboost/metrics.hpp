#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace gbb {

struct ClassScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;
};

struct Scores {
    int n_classes = 0;
    double accuracy = 0.0;
    double macro_f1 = 0.0;                // unweighted mean; zero-support F1 = 0
    std::vector<ClassScore> per_class;
    std::vector<std::size_t> confusion;   // K*K row-major, [truth*K + pred]
};

// Confusion matrix, accuracy and macro-averaged F1.
Scores score(const std::vector<int>& preds, const std::vector<int>& truth, int n_classes);

// One aggregated benchmark line; the comparison groups rows by
// (dataset, noise, seed) and matches algorithms within each group.
struct RunRow {
    std::string dataset;
    std::string algorithm;
    double noise = 0.0;
    std::uint64_t seed = 0;
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    double fit_ms = 0.0;
    std::size_t t_prime = 0;
    std::size_t subset_final = 0;
};

// Win/loss/tie counts of the reference algorithm against one rival at one
// noise level on one metric ("accuracy" or "macro_f1").
struct CompareRow {
    double noise = 0.0;
    std::string rival;
    std::string metric;
    int win = 0, loss = 0, tie = 0;
};

// Ties resolve at 1e-4; every (dataset, noise, seed) group must contain the
// reference and at least one rival.
std::vector<CompareRow> compare(const std::vector<RunRow>& rows,
                                const std::string& reference);

// Wall-clock milliseconds around a computation.
template <typename F>
auto timed(F&& f) -> std::pair<decltype(f()), double> {
    const auto t0 = std::chrono::steady_clock::now();
    auto result = f();
    const auto t1 = std::chrono::steady_clock::now();
    return {std::move(result), std::chrono::duration<double, std::milli>(t1 - t0).count()};
}

}  // namespace gbb
