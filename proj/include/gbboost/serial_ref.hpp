#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "gbboost/dataset.hpp"
#include "gbboost/tree.hpp"

// Naive single-threaded twins of the kernels in kernels.hpp and of the tree
// fitter in tree.cpp. They exist so tests can assert the production versions
// return bit-identical results and so the kernel benchmark has a baseline;
// nothing else should call them.

namespace gbb::serial_ref {

inline double sq_dist(const double* a, const double* b, std::size_t q) {
    double s = 0.0;
    for (std::size_t j = 0; j < q; ++j) {
        const double diff = a[j] - b[j];
        s += diff * diff;
    }
    return s;
}

inline std::vector<int> assign_nearest(const Dataset& d, const std::vector<std::size_t>& rows,
                                       const std::vector<std::vector<double>>& centers) {
    if (centers.empty()) throw std::invalid_argument("assign_nearest: no centers");
    std::vector<int> out(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
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

inline std::vector<double> centroid(const Dataset& d, const std::vector<std::size_t>& rows) {
    if (rows.empty()) throw std::invalid_argument("centroid: empty row set");
    std::vector<double> c(d.q, 0.0);
    for (std::size_t j = 0; j < d.q; ++j) {
        double s = 0.0;
        for (std::size_t r : rows) s += d.at(r, j);
        c[j] = s / static_cast<double>(rows.size());
    }
    return c;
}

inline std::vector<double> radial_distances(const Dataset& d,
                                            const std::vector<std::size_t>& rows,
                                            const std::vector<double>& center) {
    std::vector<double> out(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        out[i] = std::sqrt(sq_dist(d.row(rows[i]), center.data(), d.q));
    return out;
}

inline std::vector<std::size_t> knn_table(const Dataset& d, std::size_t k) {
    if (k == 0 || k >= d.n)
        throw std::invalid_argument("knn_table: need 0 < k < n");
    std::vector<std::size_t> table(d.n * k);
    for (std::size_t i = 0; i < d.n; ++i) {
        std::vector<std::pair<double, std::size_t>> cand;
        cand.reserve(d.n - 1);
        for (std::size_t j = 0; j < d.n; ++j) {
            if (j == i) continue;
            cand.emplace_back(sq_dist(d.row(i), d.row(j), d.q), j);
        }
        std::sort(cand.begin(), cand.end());
        for (std::size_t m = 0; m < k; ++m) table[i * k + m] = cand[m].second;
    }
    return table;
}

// Everything below re-derives the sorted order at every node instead of
// partitioning presorted arrays; the arithmetic (accumulation order, score
// formula, tie rules) matches fit_tree exactly so trees compare equal
// node for node.
namespace detail {

inline double gini_term(const std::vector<double>& hist, double w) {
    if (w <= 0.0) return 0.0;
    double ss = 0.0;
    for (double c : hist) ss += c * c;
    return w - ss / w;
}

inline int ref_build(const Dataset& d, const std::vector<std::size_t>& idx,
                     const std::vector<double>& w, const std::vector<std::size_t>& rows,
                     int depth, int max_depth, int min_leaf, Tree& tree) {
    std::vector<double> hist(d.n_classes, 0.0);
    double total_w = 0.0;
    for (std::size_t m : rows) {
        hist[d.labels[idx[m]]] += w[m];
        total_w += w[m];
    }
    int present = 0;
    for (double c : hist)
        if (c > 0.0) ++present;

    auto leaf = [&]() {
        TreeNode node;
        node.hist = hist;
        int best = 0;
        for (int k = 1; k < d.n_classes; ++k)
            if (hist[k] > hist[best]) best = k;
        node.label = best;
        tree.nodes.push_back(std::move(node));
        return static_cast<int>(tree.nodes.size()) - 1;
    };

    const std::size_t n = rows.size();
    if (depth >= max_depth || present <= 1 || n < 2 * static_cast<std::size_t>(min_leaf))
        return leaf();

    const double parent_score = gini_term(hist, total_w);
    double best_score = parent_score;
    int best_f = -1;
    double best_thr = 0.0;

    std::vector<double> left(d.n_classes);
    std::vector<std::pair<double, std::size_t>> pairs(n);
    for (std::size_t f = 0; f < d.q; ++f) {
        for (std::size_t p = 0; p < n; ++p)
            pairs[p] = {d.at(idx[rows[p]], f), rows[p]};
        std::sort(pairs.begin(), pairs.end());
        std::fill(left.begin(), left.end(), 0.0);
        double left_w = 0.0;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            const std::size_t m = pairs[p].second;
            left[d.labels[idx[m]]] += w[m];
            left_w += w[m];
            if (pairs[p].first == pairs[p + 1].first) continue;
            const std::size_t n_left = p + 1;
            if (n_left < static_cast<std::size_t>(min_leaf) ||
                n - n_left < static_cast<std::size_t>(min_leaf))
                continue;
            double score = gini_term(left, left_w);
            {
                double ss = 0.0;
                const double rw = total_w - left_w;
                if (rw > 0.0) {
                    for (int k = 0; k < d.n_classes; ++k) {
                        const double c = hist[k] - left[k];
                        ss += c * c;
                    }
                    score += rw - ss / rw;
                }
            }
            if (score < best_score) {
                best_score = score;
                best_f = static_cast<int>(f);
                best_thr = (pairs[p].first + pairs[p + 1].first) * 0.5;
            }
        }
    }

    if (best_f < 0) return leaf();

    std::vector<std::size_t> lrows, rrows;
    for (std::size_t m : rows) {
        if (d.at(idx[m], best_f) <= best_thr)
            lrows.push_back(m);
        else
            rrows.push_back(m);
    }

    TreeNode node;
    node.feature = best_f;
    node.threshold = best_thr;
    node.hist = hist;
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(std::move(node));
    const int l = ref_build(d, idx, w, lrows, depth + 1, max_depth, min_leaf, tree);
    const int r = ref_build(d, idx, w, rrows, depth + 1, max_depth, min_leaf, tree);
    tree.nodes[id].left = l;
    tree.nodes[id].right = r;
    return id;
}

}  // namespace detail

inline Tree fit_tree(const LearnerSpec& spec, const Dataset& d,
                     const std::vector<std::size_t>& indices,
                     const std::vector<double>& weights = {}) {
    if (indices.empty()) throw std::invalid_argument("ref fit_tree: empty index set");
    std::vector<double> w = weights;
    if (w.empty()) w.assign(indices.size(), 1.0 / static_cast<double>(indices.size()));

    Tree tree;
    tree.n_features = d.q;
    tree.n_classes = d.n_classes;
    std::vector<std::size_t> rows(indices.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    detail::ref_build(d, indices, w, rows, 0, spec.effective_depth(), spec.min_leaf, tree);
    return tree;
}

inline std::vector<int> predict(const Tree& t, const Dataset& d) {
    if (t.n_features != d.q) throw std::invalid_argument("ref predict: arity mismatch");
    std::vector<int> out(d.n);
    for (std::size_t i = 0; i < d.n; ++i) out[i] = t.predict_row(d.row(i));
    return out;
}

}  // namespace gbb::serial_ref
