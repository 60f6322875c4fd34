#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "gbboost/dataset.hpp"

using namespace gbb;

TEST_CASE("parse: labels re-encoded to contiguous ids") {
    Dataset d = parse_dataset("1.0,2.0,a\n3.0,4.0,b\n5.0,6.0,a\n", "", "mem");
    CHECK(d.n == 3);
    CHECK(d.q == 2);
    CHECK(d.n_classes == 2);
    CHECK(d.labels == std::vector<int>{0, 1, 0});
    CHECK(d.class_names == std::vector<std::string>{"a", "b"});
}

TEST_CASE("parse: numeric labels sort numerically, not lexically") {
    Dataset d = parse_dataset("0,10\n0,2\n0,1\n", "", "mem");
    CHECK(d.class_names == std::vector<std::string>{"1", "2", "10"});
    CHECK(d.labels == std::vector<int>{2, 1, 0});
}

TEST_CASE("parse: ragged row rejected") {
    CHECK_THROWS_AS(parse_dataset("1,2,a\n1,b\n", "", "mem"), std::runtime_error);
}

TEST_CASE("parse: non-numeric feature cell rejected") {
    CHECK_THROWS_AS(parse_dataset("1,x,a\n2,3,b\n", "", "mem"), std::runtime_error);
}

TEST_CASE("parse: single-class file rejected") {
    CHECK_THROWS_AS(parse_dataset("1,2,a\n3,4,a\n", "", "mem"), std::runtime_error);
}

TEST_CASE("parse: KEEL directives and comments skipped, header optional") {
    const char* text =
        "@relation toy\n"
        "@attribute f1 real\n"
        "@data\n"
        "% a comment\n"
        "x1, x2, cls\n"
        "1, 2, yes\n"
        "3, 4, no\n";
    Dataset d = parse_dataset(text, "", "mem");
    CHECK(d.n == 2);
    CHECK(d.feature_names == std::vector<std::string>{"x1", "x2"});
    CHECK(d.class_names == std::vector<std::string>{"no", "yes"});
}

TEST_CASE("parse: label column by name and by index") {
    const char* text = "cls,x1,x2\nb,1,2\na,3,4\n";
    Dataset by_name = parse_dataset(text, "cls", "mem");
    Dataset by_idx = parse_dataset(text, "0", "mem");
    CHECK(by_name.labels == by_idx.labels);
    CHECK(by_name.labels == std::vector<int>{1, 0});
    CHECK_THROWS_AS(parse_dataset(text, "nope", "mem"), std::runtime_error);
    CHECK_THROWS_AS(parse_dataset(text, "7", "mem"), std::runtime_error);
}

TEST_CASE("parse: whitespace-delimited rows") {
    Dataset d = parse_dataset("1.5 2.5 a\n3.5 4.5 b\n", "", "mem");
    CHECK(d.q == 2);
    CHECK(d.at(1, 0) == 3.5);
}

TEST_CASE("noise: rate 0 is the identity") {
    Dataset d = parse_dataset("1,a\n2,b\n3,a\n", "", "mem");
    Dataset before = d;
    NoiseRecord rec = inject_label_noise(d, 0.0, 7);
    CHECK(rec.flipped.empty());
    CHECK(d.labels == before.labels);
    CHECK(d.features == before.features);
}

TEST_CASE("noise: exact count, labels actually change, features untouched") {
    Dataset d = synth_blobs(100, 3, 4, 0.5, 11);
    const std::vector<double> feat_before = d.features;
    const std::vector<int> lab_before = d.labels;
    NoiseRecord rec = inject_label_noise(d, 0.3, 42);
    CHECK(rec.flipped.size() == 30);
    CHECK(d.features == feat_before);
    std::set<std::size_t> seen;
    for (std::size_t i = 0; i < rec.flipped.size(); ++i) {
        const std::size_t idx = rec.flipped[i];
        seen.insert(idx);
        CHECK(rec.original_labels[i] == lab_before[idx]);
        CHECK(d.labels[idx] != lab_before[idx]);
        CHECK(d.labels[idx] >= 0);
        CHECK(d.labels[idx] < d.n_classes);
    }
    CHECK(seen.size() == 30);  // distinct indices
    // unflipped rows untouched
    for (std::size_t i = 0; i < d.n; ++i)
        if (!seen.count(i)) CHECK(d.labels[i] == lab_before[i]);
}

TEST_CASE("noise: deterministic per seed, record restores the clean labels") {
    Dataset a = synth_blobs(60, 2, 3, 0.5, 5);
    Dataset b = a;
    NoiseRecord ra = inject_label_noise(a, 0.25, 99);
    NoiseRecord rb = inject_label_noise(b, 0.25, 99);
    CHECK(a.labels == b.labels);
    CHECK(ra.flipped == rb.flipped);

    for (std::size_t i = 0; i < ra.flipped.size(); ++i)
        a.labels[ra.flipped[i]] = ra.original_labels[i];
    Dataset clean = synth_blobs(60, 2, 3, 0.5, 5);
    CHECK(a.labels == clean.labels);
}

TEST_CASE("noise: rate outside [0,1] rejected") {
    Dataset d = synth_blobs(10, 2, 2, 0.5, 1);
    CHECK_THROWS_AS(inject_label_noise(d, 1.5, 1), std::invalid_argument);
    CHECK_THROWS_AS(inject_label_noise(d, -0.1, 1), std::invalid_argument);
}

TEST_CASE("split: cardinality and disjointness") {
    Dataset d = synth_blobs(10, 2, 2, 0.5, 3);
    SplitResult s = train_test_split(d, 0.2, 17);
    CHECK(s.test.n == 2);
    CHECK(s.train.n == 8);
    CHECK(s.train.n_classes == d.n_classes);
    std::set<std::size_t> all(s.train_index.begin(), s.train_index.end());
    all.insert(s.test_index.begin(), s.test_index.end());
    CHECK(all.size() == 10);  // disjoint and complete
    // rows really come from the source
    for (std::size_t r = 0; r < s.test.n; ++r) {
        CHECK(s.test.labels[r] == d.labels[s.test_index[r]]);
        CHECK(s.test.at(r, 0) == d.at(s.test_index[r], 0));
    }
}

TEST_CASE("split: deterministic per seed") {
    Dataset d = synth_blobs(50, 2, 3, 0.5, 4);
    SplitResult a = train_test_split(d, 0.2, 8);
    SplitResult b = train_test_split(d, 0.2, 8);
    SplitResult c = train_test_split(d, 0.2, 9);
    CHECK(a.test_index == b.test_index);
    CHECK(a.test_index != c.test_index);
}

TEST_CASE("split: degenerate outcomes rejected") {
    Dataset d = parse_dataset("1,a\n2,b\n", "", "mem");
    CHECK_THROWS_AS(train_test_split(d, 0.5, 1), std::runtime_error);  // train single-class
    CHECK_THROWS_AS(train_test_split(d, 0.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(train_test_split(d, 1.0, 1), std::invalid_argument);
}

TEST_CASE("normalize: affine map to [0,1], constants to 0") {
    Dataset d = parse_dataset("2,5,a\n4,5,b\n6,5,a\n", "", "mem");
    NormParams p = fit_normalization(d);
    apply_normalization(d, p);
    CHECK(d.at(0, 0) == 0.0);
    CHECK(d.at(1, 0) == 0.5);
    CHECK(d.at(2, 0) == 1.0);
    CHECK(d.at(0, 1) == 0.0);
    CHECK(d.at(2, 1) == 0.0);
}

TEST_CASE("normalize: train params extend past [0,1] on unseen data") {
    Dataset train = parse_dataset("2,a\n6,b\n", "", "mem");
    Dataset test = parse_dataset("8,a\n0,b\n", "", "mem");
    NormParams p = fit_normalization(train);
    apply_normalization(test, p);
    CHECK(test.at(0, 0) == 1.5);
    CHECK(test.at(1, 0) == -0.5);
}

TEST_CASE("blobs: balanced counts and determinism") {
    Dataset d = synth_blobs(9, 2, 3, 0.3, 21);
    std::vector<int> counts(3, 0);
    for (int y : d.labels) ++counts[y];
    CHECK(counts == std::vector<int>{3, 3, 3});

    Dataset e = synth_blobs(9, 2, 3, 0.3, 21);
    CHECK(d.features == e.features);

    Dataset f = synth_blobs(10, 2, 3, 0.3, 21);
    std::vector<int> counts10(3, 0);
    for (int y : f.labels) ++counts10[y];
    CHECK(counts10 == std::vector<int>{4, 3, 3});
}

TEST_CASE("blobs: argument validation") {
    CHECK_THROWS_AS(synth_blobs(2, 2, 3, 0.5, 1), std::invalid_argument);  // n < K
    CHECK_THROWS_AS(synth_blobs(9, 0, 3, 0.5, 1), std::invalid_argument);
    CHECK_THROWS_AS(synth_blobs(9, 2, 3, 0.0, 1), std::invalid_argument);
    // centers need pairwise distance 4*spread inside a 10-box; huge spread
    // cannot fit 3 of them
    CHECK_THROWS_AS(synth_blobs(9, 2, 3, 100.0, 1), std::runtime_error);
}
