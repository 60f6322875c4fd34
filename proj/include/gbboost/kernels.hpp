#pragma once

#include <cstddef>
#include <vector>

#include "gbboost/dataset.hpp"

// Data-parallel kernels shared by granulation, the tree learner and the
// boosters. Every loop writes independent slots and accumulates in a fixed
// order, so results are bit-identical to the serial reference twins in
// serial_ref.hpp regardless of thread count.

namespace gbb {

// Squared Euclidean distance between two q-vectors.
double sq_dist(const double* a, const double* b, std::size_t q);

// Index of the nearest center for each listed row; ties resolve to the
// lowest center index.
std::vector<int> assign_nearest(const Dataset& d, const std::vector<std::size_t>& rows,
                                const std::vector<std::vector<double>>& centers);

// Mean point of the listed rows.
std::vector<double> centroid(const Dataset& d, const std::vector<std::size_t>& rows);

// Euclidean distance of each listed row to center.
std::vector<double> radial_distances(const Dataset& d, const std::vector<std::size_t>& rows,
                                     const std::vector<double>& center);

// k nearest neighbours of every row (self excluded), row-major n*k entries,
// each row's neighbours ordered by (distance, index) ascending. Requires
// k < n.
std::vector<std::size_t> knn_table(const Dataset& d, std::size_t k);

}  // namespace gbb
