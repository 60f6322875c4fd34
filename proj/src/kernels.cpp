#include "gbboost/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gbb {

namespace {
// Below these sizes the fork/join overhead outweighs the loop body.
constexpr std::size_t kParRows = 512;
constexpr std::size_t kParDims = 64;
}  // namespace

double sq_dist(const double* a, const double* b, std::size_t q) {
    double s = 0.0;
    for (std::size_t j = 0; j < q; ++j) {
        const double diff = a[j] - b[j];
        s += diff * diff;
    }
    return s;
}

std::vector<int> assign_nearest(const Dataset& d, const std::vector<std::size_t>& rows,
                                const std::vector<std::vector<double>>& centers) {
    if (centers.empty()) throw std::invalid_argument("assign_nearest: no centers");
    std::vector<int> out(rows.size());
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(rows.size());
#pragma omp parallel for if (rows.size() > kParRows)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const double* x = d.row(rows[i]);
        int best = 0;
        double best_d = sq_dist(x, centers[0].data(), d.q);
        for (std::size_t c = 1; c < centers.size(); ++c) {
            const double dist = sq_dist(x, centers[c].data(), d.q);
            if (dist < best_d) {
                best_d = dist;
                best = static_cast<int>(c);
            }
        }
        out[i] = best;
    }
    return out;
}

std::vector<double> centroid(const Dataset& d, const std::vector<std::size_t>& rows) {
    if (rows.empty()) throw std::invalid_argument("centroid: empty row set");
    std::vector<double> c(d.q, 0.0);
    const std::ptrdiff_t q = static_cast<std::ptrdiff_t>(d.q);
    // Parallel over dimensions; per dimension the members are accumulated in
    // index order, matching the serial reference exactly.
#pragma omp parallel for if (d.q > kParDims)
    for (std::ptrdiff_t j = 0; j < q; ++j) {
        double s = 0.0;
        for (std::size_t r : rows) s += d.at(r, static_cast<std::size_t>(j));
        c[j] = s / static_cast<double>(rows.size());
    }
    return c;
}

std::vector<double> radial_distances(const Dataset& d, const std::vector<std::size_t>& rows,
                                     const std::vector<double>& center) {
    std::vector<double> out(rows.size());
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(rows.size());
#pragma omp parallel for if (rows.size() > kParRows)
    for (std::ptrdiff_t i = 0; i < n; ++i)
        out[i] = std::sqrt(sq_dist(d.row(rows[i]), center.data(), d.q));
    return out;
}

std::vector<std::size_t> knn_table(const Dataset& d, std::size_t k) {
    if (k == 0 || k >= d.n)
        throw std::invalid_argument("knn_table: need 0 < k < n");
    std::vector<std::size_t> table(d.n * k);
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(d.n);
#pragma omp parallel for if (d.n > kParRows)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        std::vector<std::pair<double, std::size_t>> cand;
        cand.reserve(d.n - 1);
        for (std::size_t j = 0; j < d.n; ++j) {
            if (j == static_cast<std::size_t>(i)) continue;
            cand.emplace_back(sq_dist(d.row(i), d.row(j), d.q), j);
        }
        std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
        for (std::size_t m = 0; m < k; ++m) table[i * k + m] = cand[m].second;
    }
    return table;
}

}  // namespace gbb
