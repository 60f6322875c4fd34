#include "gbboost/granulation.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

#include "gbboost/kernels.hpp"

namespace gbb {

std::size_t ball_capacity(std::size_t n, int n_classes) {
    if (n < 1 || n_classes < 2)
        throw std::invalid_argument("ball_capacity: need n >= 1 and K >= 2");
    const double raw =
        std::sqrt(static_cast<double>(n)) / static_cast<double>(n_classes - 1);
    const auto floored = static_cast<std::size_t>(std::floor(raw + 1e-9));
    return std::max<std::size_t>(2, floored);
}

std::pair<double, int> purity_and_label(const Dataset& d,
                                        const std::vector<std::size_t>& indices) {
    if (indices.empty()) throw std::invalid_argument("purity_and_label: empty index set");
    std::vector<std::size_t> counts(d.n_classes, 0);
    for (std::size_t i : indices) ++counts[d.labels[i]];
    int best = 0;
    for (int k = 1; k < d.n_classes; ++k)
        if (counts[k] > counts[best]) best = k;  // strict: ties keep the smaller id
    return {static_cast<double>(counts[best]) / static_cast<double>(indices.size()), best};
}

InfoGranule make_granule(const Dataset& d, std::vector<std::size_t> indices) {
    InfoGranule g;
    g.indices = std::move(indices);
    g.centroid = centroid(d, g.indices);
    auto [p, l] = purity_and_label(d, g.indices);
    g.purity = p;
    g.majority_label = l;
    return g;
}

std::vector<InfoGranule> class_split(const Dataset& d, const InfoGranule& g,
                                     std::vector<std::size_t>* purged) {
    // One centroid per class present, in ascending class order.
    std::vector<std::vector<std::size_t>> by_class(d.n_classes);
    for (std::size_t i : g.indices) by_class[d.labels[i]].push_back(i);
    std::vector<std::vector<double>> centers;
    for (int k = 0; k < d.n_classes; ++k)
        if (!by_class[k].empty()) centers.push_back(centroid(d, by_class[k]));

    const std::vector<int> nearest = assign_nearest(d, g.indices, centers);
    std::vector<std::vector<std::size_t>> groups(centers.size());
    for (std::size_t m = 0; m < g.indices.size(); ++m)
        groups[nearest[m]].push_back(g.indices[m]);

    std::vector<std::vector<std::size_t>> nonempty;
    for (auto& grp : groups)
        if (!grp.empty()) nonempty.push_back(std::move(grp));

    if (nonempty.size() == 1) {
        // Everything collapsed onto one centroid: purge the minority members
        // and keep the (now pure) remainder.
        auto [p, l] = purity_and_label(d, nonempty[0]);
        (void)p;
        std::vector<std::size_t> kept;
        for (std::size_t i : nonempty[0]) {
            if (d.labels[i] == l)
                kept.push_back(i);
            else if (purged)
                purged->push_back(i);
        }
        return {make_granule(d, std::move(kept))};
    }

    std::vector<InfoGranule> out;
    out.reserve(nonempty.size());
    for (auto& grp : nonempty) out.push_back(make_granule(d, std::move(grp)));
    return out;
}

std::pair<InfoGranule, InfoGranule> binary_split(const Dataset& d, const InfoGranule& g,
                                                 bool* fallback) {
    const std::size_t n = g.indices.size();
    if (n < 2) throw std::invalid_argument("binary_split: need at least 2 members");
    const std::vector<double> dist = radial_distances(d, g.indices, g.centroid);

    std::size_t lo = 0, hi = 0;
    for (std::size_t m = 1; m < n; ++m) {
        if (dist[m] < dist[lo]) lo = m;  // strict: ties keep the lower index
        if (dist[m] > dist[hi]) hi = m;
    }
    const double* c_near = d.row(g.indices[lo]);
    const double* c_far = d.row(g.indices[hi]);

    std::vector<std::size_t> a, b;
    if (std::equal(c_near, c_near + d.q, c_far)) {
        // Coincident centers: even split by index order.
        if (fallback) *fallback = true;
        const std::size_t half = n / 2;
        a.assign(g.indices.begin(), g.indices.begin() + half);
        b.assign(g.indices.begin() + half, g.indices.end());
    } else {
        for (std::size_t m = 0; m < n; ++m) {
            const double* x = d.row(g.indices[m]);
            // ties go to the "closest" center
            if (sq_dist(x, c_far, d.q) < sq_dist(x, c_near, d.q))
                b.push_back(g.indices[m]);
            else
                a.push_back(g.indices[m]);
        }
    }
    return {make_granule(d, std::move(a)), make_granule(d, std::move(b))};
}

Granulation granulate(const Dataset& d) {
    if (d.n < 2 || d.n_classes < 2)
        throw std::invalid_argument("granulate: need N >= 2 and K >= 2");

    Granulation out;
    {
        const double raw =
            std::sqrt(static_cast<double>(d.n)) / static_cast<double>(d.n_classes - 1);
        out.capacity_clamped = std::floor(raw + 1e-9) < 2.0;
    }
    out.capacity = ball_capacity(d.n, d.n_classes);
    out.ball_of.assign(d.n, -1);

    std::vector<std::size_t> all(d.n);
    for (std::size_t i = 0; i < d.n; ++i) all[i] = i;

    std::deque<InfoGranule> work;
    work.push_back(make_granule(d, std::move(all)));

    while (!work.empty()) {
        InfoGranule g = std::move(work.front());
        work.pop_front();

        if (g.indices.size() <= 1) {
            for (std::size_t i : g.indices) out.discarded.push_back(i);
            continue;
        }
        if (g.purity < 1.0) {
            const std::size_t parent = g.indices.size();
            auto children = class_split(d, g, &out.discarded);
            for (auto& c : children) {
                if (c.indices.size() >= parent)
                    throw std::logic_error("granulate: class_split made no progress");
                work.push_back(std::move(c));
            }
            continue;
        }
        if (g.indices.size() > out.capacity) {
            bool fb = false;
            auto [a, b] = binary_split(d, g, &fb);
            if (fb) ++out.fallback_splits;
            if (a.indices.size() >= g.indices.size() || b.indices.size() >= g.indices.size())
                throw std::logic_error("granulate: binary_split made no progress");
            work.push_back(std::move(a));
            work.push_back(std::move(b));
            continue;
        }

        GranularBall gb;
        gb.indices = std::move(g.indices);
        gb.center = std::move(g.centroid);
        gb.majority_label = g.majority_label;
        gb.radial = radial_distances(d, gb.indices, gb.center);
        gb.radius = *std::max_element(gb.radial.begin(), gb.radial.end());
        double sum = 0.0;
        for (double r : gb.radial) sum += r;
        gb.mean_radius = sum / static_cast<double>(gb.radial.size());
        for (std::size_t i : gb.indices) out.ball_of[i] = static_cast<int>(out.balls.size());
        out.balls.push_back(std::move(gb));
    }

    if (out.balls.empty()) throw std::runtime_error("granulate: empty granulation");
    std::sort(out.discarded.begin(), out.discarded.end());
    return out;
}

std::vector<std::size_t> ball_boundary_order(const GranularBall& gb) {
    std::vector<std::size_t> pos(gb.indices.size());
    for (std::size_t m = 0; m < pos.size(); ++m) pos[m] = m;
    std::sort(pos.begin(), pos.end(), [&](std::size_t a, std::size_t b) {
        if (gb.radial[a] != gb.radial[b]) return gb.radial[a] > gb.radial[b];
        return gb.indices[a] < gb.indices[b];
    });
    std::vector<std::size_t> out(pos.size());
    for (std::size_t m = 0; m < pos.size(); ++m) out[m] = gb.indices[pos[m]];
    return out;
}

}  // namespace gbb
