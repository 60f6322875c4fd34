#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gbboost/rng.hpp"

namespace gbb {

// Dense row-major dataset with integer class labels in [0, n_classes).
struct Dataset {
    std::size_t n = 0;          // rows
    std::size_t q = 0;          // feature columns
    int n_classes = 0;
    std::vector<double> features;     // n * q, row-major
    std::vector<int> labels;          // n
    std::vector<std::string> feature_names;   // q (empty strings when no header)
    std::vector<std::string> class_names;     // n_classes, index == class id

    double at(std::size_t row, std::size_t col) const { return features[row * q + col]; }
    const double* row(std::size_t r) const { return features.data() + r * q; }
};

// Bookkeeping for injected label noise; indices are sorted ascending and
// original_labels is aligned with them.
struct NoiseRecord {
    std::vector<std::size_t> flipped;
    std::vector<int> original_labels;
    double rate = 0.0;
    std::uint64_t seed = 0;
};

// Per-feature min/max scaling fitted on one dataset, applied to another.
struct NormParams {
    std::vector<double> mins;    // per feature
    std::vector<double> scales;  // max - min; 0 means the column was constant
};

struct SplitResult {
    Dataset train;
    Dataset test;
    std::vector<std::size_t> train_index;  // row in source for each train row
    std::vector<std::size_t> test_index;
};

// Parse a delimited text file (comma or whitespace separated; KEEL
// @-directive lines skipped; optional header row). label_col selects the
// class column: "" means the last column, an integer string is a 0-based
// index (-1 also means last), anything else is matched against the header.
// Labels are re-encoded to contiguous ids ordered by their original
// representation (numeric order when every label parses as a number,
// lexicographic otherwise); class_names retains the originals.
Dataset load_dataset(const std::string& path, const std::string& label_col = "");

// Same parser over an in-memory buffer; origin only decorates error messages.
Dataset parse_dataset(const std::string& text, const std::string& label_col,
                      const std::string& origin);

// Raw-file layout for tools that rewrite label cells in place: the 0-based
// physical line of each parsed data row (in row order) and the field index
// of the label within a split line. Same line classification as the parser.
struct RawLayout {
    std::vector<std::size_t> data_lines;
    std::size_t label_field = 0;
};
RawLayout scan_layout(const std::string& text, const std::string& label_col = "",
                      const std::string& origin = "layout");

// Gaussian blobs: n_classes centers placed in [0,10]^q with pairwise
// distance >= 4*spread, n points split as evenly as possible (class c gets
// one extra point while c < n % K). Throws after bounded retries if the
// placement constraint cannot be met.
Dataset synth_blobs(std::size_t n, std::size_t q, int n_classes, double spread,
                    std::uint64_t seed);

// Uniform shuffle split; floor(test_fraction * n) rows go to test. Throws if
// the fraction is not in (0,1) or the train side ends up single-class.
SplitResult train_test_split(const Dataset& d, double test_fraction, std::uint64_t seed);

// Flip floor(rate * n) labels chosen uniformly without replacement; each
// flipped label becomes a uniform draw over the other K-1 classes. Features
// are untouched. rate 0 is a no-op.
NoiseRecord inject_label_noise(Dataset& d, double rate, std::uint64_t seed);

NormParams fit_normalization(const Dataset& d);
void apply_normalization(Dataset& d, const NormParams& p);

}  // namespace gbb
