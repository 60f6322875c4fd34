#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "gbboost/dataset.hpp"

namespace gbb {

enum class LearnerKind { tree, stump };

struct LearnerSpec {
    LearnerKind kind = LearnerKind::tree;
    int max_depth = 5;   // a stump is forced to depth 1 regardless
    int min_leaf = 1;

    int effective_depth() const { return kind == LearnerKind::stump ? 1 : max_depth; }
};

struct TreeNode {
    int feature = -1;            // -1 marks a leaf
    double threshold = 0.0;
    int left = -1, right = -1;   // indices into Tree::nodes
    int label = -1;              // leaf prediction
    std::vector<double> hist;    // weighted class counts seen at this node

    bool is_leaf() const { return feature < 0; }
};

// CART-style classification tree. Node 0 is the root; children follow their
// parent in preorder. Traversal sends `value <= threshold` left.
struct Tree {
    std::size_t n_features = 0;
    int n_classes = 0;
    std::vector<TreeNode> nodes;

    int predict_row(const double* x) const {
        int cur = 0;
        while (!nodes[cur].is_leaf())
            cur = x[nodes[cur].feature] <= nodes[cur].threshold ? nodes[cur].left
                                                                : nodes[cur].right;
        return nodes[cur].label;
    }
};

// Greedy weighted-Gini fit over the listed rows. Empty weights mean uniform;
// otherwise weights align with indices, must be nonnegative and sum > 0.
// Split ties resolve to the lowest feature index, then lowest threshold;
// leaf ties to the lowest class id.
Tree fit_tree(const LearnerSpec& spec, const Dataset& d,
              const std::vector<std::size_t>& indices,
              const std::vector<double>& weights = {});

// Batch prediction (parallel over rows); throws on feature-arity mismatch.
std::vector<int> predict(const Tree& t, const Dataset& d);
std::vector<int> predict(const Tree& t, const Dataset& d,
                         const std::vector<std::size_t>& rows);

// Indented one-node-per-line text dump for debugging; format not stable.
std::string dump_tree(const Tree& t);

}  // namespace gbb
