#include "gbboost/tree.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace gbb {

namespace {

// Weighted Gini contribution of one child, written as W - SS/W so left and
// right share the same arithmetic; 0-weight children contribute 0.
double gini_term(const std::vector<double>& hist, double w) {
    if (w <= 0.0) return 0.0;
    double ss = 0.0;
    for (double c : hist) ss += c * c;
    return w - ss / w;
}

struct Fitter {
    const Dataset& d;
    const std::vector<std::size_t>& idx;   // global rows, local row m = idx[m]
    const std::vector<double>& w;          // per local row
    int max_depth;
    int min_leaf;
    Tree tree;

    // Per-feature orderings of local rows by (value, local row), partitioned
    // in place as the tree grows; `rows` keeps local-row order for histogram
    // accumulation.
    std::vector<std::vector<std::size_t>> orders;
    std::vector<std::size_t> rows;
    std::vector<char> mark;                 // scratch: goes-left flags
    std::vector<std::size_t> scratch;

    double value(std::size_t m, std::size_t f) const { return d.at(idx[m], f); }

    int make_leaf(const std::vector<double>& hist) {
        TreeNode node;
        node.hist = hist;
        int best = 0;
        for (int k = 1; k < d.n_classes; ++k)
            if (hist[k] > hist[best]) best = k;  // strict: ties keep the smaller id
        node.label = best;
        tree.nodes.push_back(std::move(node));
        return static_cast<int>(tree.nodes.size()) - 1;
    }

    int build(std::size_t lo, std::size_t hi, int depth) {
        std::vector<double> hist(d.n_classes, 0.0);
        double total_w = 0.0;
        for (std::size_t p = lo; p < hi; ++p) {
            const std::size_t m = rows[p];
            hist[d.labels[idx[m]]] += w[m];
            total_w += w[m];
        }
        int present = 0;
        for (double c : hist)
            if (c > 0.0) ++present;

        const std::size_t n = hi - lo;
        if (depth >= max_depth || present <= 1 || n < 2 * static_cast<std::size_t>(min_leaf))
            return make_leaf(hist);

        const double parent_score = gini_term(hist, total_w);
        double best_score = parent_score;
        int best_f = -1;
        double best_thr = 0.0;

        std::vector<double> left(d.n_classes);
        for (std::size_t f = 0; f < d.q; ++f) {
            std::fill(left.begin(), left.end(), 0.0);
            double left_w = 0.0;
            const auto& ord = orders[f];
            for (std::size_t p = lo; p + 1 < hi; ++p) {
                const std::size_t m = ord[p];
                left[d.labels[idx[m]]] += w[m];
                left_w += w[m];
                const double v = value(m, f);
                const double v_next = value(ord[p + 1], f);
                if (v == v_next) continue;
                const std::size_t n_left = p - lo + 1;
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
                    best_thr = (v + v_next) * 0.5;
                }
            }
        }

        if (best_f < 0) return make_leaf(hist);  // no candidate strictly improves

        // Stable partition of every ordering by the chosen split.
        for (std::size_t p = lo; p < hi; ++p)
            mark[rows[p]] = value(rows[p], best_f) <= best_thr ? 1 : 0;
        std::size_t n_left = 0;
        auto partition = [&](std::vector<std::size_t>& arr) {
            scratch.clear();
            std::size_t out = lo;
            for (std::size_t p = lo; p < hi; ++p) {
                if (mark[arr[p]])
                    arr[out++] = arr[p];
                else
                    scratch.push_back(arr[p]);
            }
            n_left = out - lo;
            std::copy(scratch.begin(), scratch.end(), arr.begin() + out);
        };
        partition(rows);
        for (auto& ord : orders) partition(ord);

        TreeNode node;
        node.feature = best_f;
        node.threshold = best_thr;
        node.hist = hist;
        const int id = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back(std::move(node));
        const int l = build(lo, lo + n_left, depth + 1);
        const int r = build(lo + n_left, hi, depth + 1);
        tree.nodes[id].left = l;
        tree.nodes[id].right = r;
        return id;
    }
};

}  // namespace

Tree fit_tree(const LearnerSpec& spec, const Dataset& d,
              const std::vector<std::size_t>& indices, const std::vector<double>& weights) {
    if (indices.empty()) throw std::invalid_argument("fit_tree: empty index set");
    if (spec.max_depth < 1 || spec.min_leaf < 1)
        throw std::invalid_argument("fit_tree: max_depth and min_leaf must be >= 1");

    std::vector<double> w;
    if (weights.empty()) {
        w.assign(indices.size(), 1.0 / static_cast<double>(indices.size()));
    } else {
        if (weights.size() != indices.size())
            throw std::invalid_argument("fit_tree: weights arity mismatch");
        double sum = 0.0;
        for (double x : weights) {
            if (x < 0.0) throw std::invalid_argument("fit_tree: negative weight");
            sum += x;
        }
        if (sum <= 0.0) throw std::invalid_argument("fit_tree: weights sum to zero");
        w = weights;
    }

    Fitter f{d, indices, w, spec.effective_depth(), spec.min_leaf, {}, {}, {}, {}, {}};
    f.tree.n_features = d.q;
    f.tree.n_classes = d.n_classes;

    const std::size_t m = indices.size();
    f.rows.resize(m);
    for (std::size_t i = 0; i < m; ++i) f.rows[i] = i;
    f.orders.assign(d.q, f.rows);
    for (std::size_t j = 0; j < d.q; ++j) {
        auto& ord = f.orders[j];
        std::sort(ord.begin(), ord.end(), [&](std::size_t a, std::size_t b) {
            const double va = f.value(a, j), vb = f.value(b, j);
            return va != vb ? va < vb : a < b;
        });
    }
    f.mark.assign(m, 0);
    f.scratch.reserve(m);

    f.build(0, m, 0);
    return f.tree;
}

std::vector<int> predict(const Tree& t, const Dataset& d,
                         const std::vector<std::size_t>& rows) {
    if (t.n_features != d.q) throw std::invalid_argument("predict: feature arity mismatch");
    std::vector<int> out(rows.size());
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(rows.size());
#pragma omp parallel for if (rows.size() > 1024)
    for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = t.predict_row(d.row(rows[i]));
    return out;
}

std::vector<int> predict(const Tree& t, const Dataset& d) {
    if (t.n_features != d.q) throw std::invalid_argument("predict: feature arity mismatch");
    std::vector<int> out(d.n);
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(d.n);
#pragma omp parallel for if (d.n > 1024)
    for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = t.predict_row(d.row(i));
    return out;
}

std::string dump_tree(const Tree& t) {
    std::ostringstream os;
    // preorder walk mirrors the node layout
    struct Item {
        int id;
        int depth;
    };
    std::vector<Item> stack{{0, 0}};
    while (!stack.empty()) {
        auto [id, depth] = stack.back();
        stack.pop_back();
        const TreeNode& n = t.nodes[id];
        for (int i = 0; i < depth; ++i) os << "  ";
        if (n.is_leaf()) {
            os << "leaf " << n.label << " [";
        } else {
            os << "x" << n.feature << " <= " << n.threshold << " [";
            stack.push_back({n.right, depth + 1});
            stack.push_back({n.left, depth + 1});
        }
        for (std::size_t k = 0; k < n.hist.size(); ++k)
            os << (k ? " " : "") << n.hist[k];
        os << "]\n";
    }
    return os.str();
}

}  // namespace gbb
