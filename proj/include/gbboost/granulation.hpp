#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "gbboost/dataset.hpp"

namespace gbb {

// Working granule: a set of training-sample indices with its centroid,
// purity and majority label.
struct InfoGranule {
    std::vector<std::size_t> indices;   // ascending
    std::vector<double> centroid;
    double purity = 0.0;
    int majority_label = -1;
};

// Finalized pure granule of bounded size.
struct GranularBall {
    std::vector<std::size_t> indices;   // ascending
    std::vector<double> center;
    std::vector<double> radial;         // distance to center, aligned with indices
    int majority_label = -1;
    double radius = 0.0;                // max(radial); drives boundary ordering
    double mean_radius = 0.0;           // report statistic only
};

struct Granulation {
    std::vector<GranularBall> balls;
    std::vector<int> ball_of;           // per sample, -1 when not retained
    std::vector<std::size_t> discarded; // ascending: singletons + purged members
    std::size_t capacity = 0;
    bool capacity_clamped = false;      // raw formula gave < 2
    std::size_t fallback_splits = 0;    // coincident-center even splits taken
};

// max(2, floor(sqrt(N) / (K-1))). The clamp keeps tiny or many-class inputs
// from discarding every sample as a singleton.
std::size_t ball_capacity(std::size_t n, int n_classes);

InfoGranule make_granule(const Dataset& d, std::vector<std::size_t> indices);

// Majority class (ties toward the smallest id) and its member fraction.
std::pair<double, int> purity_and_label(const Dataset& d,
                                        const std::vector<std::size_t>& indices);

// Split an impure granule: one centroid per present class (ascending class
// order), members to the nearest centroid, nonempty children returned. When
// everything lands on a single centroid the minority members are purged
// instead (appended to *purged) and the now-pure remainder is returned alone.
std::vector<InfoGranule> class_split(const Dataset& d, const InfoGranule& g,
                                     std::vector<std::size_t>* purged = nullptr);

// Split a pure oversized granule around its closest/farthest members. When
// the two chosen centers coincide the members are split evenly by index
// order instead and *fallback is set.
std::pair<InfoGranule, InfoGranule> binary_split(const Dataset& d, const InfoGranule& g,
                                                 bool* fallback = nullptr);

// Full granulation: FIFO worklist, singletons discarded, impure granules
// class-split, oversized pure granules binary-split, the rest finalized.
Granulation granulate(const Dataset& d);

// Member indices by radial distance descending, ties toward the lower index.
std::vector<std::size_t> ball_boundary_order(const GranularBall& gb);

}  // namespace gbb
