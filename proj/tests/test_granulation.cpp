#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "gbboost/granulation.hpp"
#include "gbboost/kernels.hpp"

using namespace gbb;

namespace {

// Hand-built dataset: 1 feature column per value, labels as given, K fixed.
Dataset make_1d(const std::vector<double>& xs, const std::vector<int>& ys, int k) {
    Dataset d;
    d.n = xs.size();
    d.q = 1;
    d.n_classes = k;
    d.features = xs;
    d.labels = ys;
    for (int c = 0; c < k; ++c) d.class_names.push_back(std::to_string(c));
    return d;
}

Dataset make_2d(const std::vector<std::pair<double, double>>& xs, const std::vector<int>& ys,
                int k) {
    Dataset d;
    d.n = xs.size();
    d.q = 2;
    d.n_classes = k;
    for (auto [a, b] : xs) {
        d.features.push_back(a);
        d.features.push_back(b);
    }
    d.labels = ys;
    for (int c = 0; c < k; ++c) d.class_names.push_back(std::to_string(c));
    return d;
}

}  // namespace

TEST_CASE("capacity: floor of sqrt(N)/(K-1), clamped at 2") {
    CHECK(ball_capacity(625, 3) == 12);
    CHECK(ball_capacity(4, 2) == 2);
    CHECK(ball_capacity(100, 11) == 2);  // raw value 1, clamped
    CHECK(ball_capacity(10000, 2) == 100);
    CHECK_THROWS_AS(ball_capacity(0, 2), std::invalid_argument);
    CHECK_THROWS_AS(ball_capacity(10, 1), std::invalid_argument);
}

TEST_CASE("purity_and_label: majority fraction, ties to the smallest id") {
    Dataset d = make_1d({0, 1, 2}, {2, 2, 2}, 3);
    auto [p1, l1] = purity_and_label(d, {0, 1, 2});
    CHECK(p1 == 1.0);
    CHECK(l1 == 2);

    Dataset e = make_1d({0, 1, 2}, {0, 0, 1}, 2);
    auto [p2, l2] = purity_and_label(e, {0, 1, 2});
    CHECK(p2 == doctest::Approx(2.0 / 3.0));
    CHECK(l2 == 0);

    Dataset f = make_1d({0, 1}, {1, 0}, 2);
    auto [p3, l3] = purity_and_label(f, {0, 1});
    CHECK(p3 == 0.5);
    CHECK(l3 == 0);
}

TEST_CASE("class_split: well-separated classes split on class lines") {
    Dataset d = make_2d({{0, 0}, {0.1, 0}, {5, 5}, {5.1, 5}}, {0, 0, 1, 1}, 2);
    InfoGranule g = make_granule(d, {0, 1, 2, 3});
    CHECK(g.purity == 0.5);
    auto kids = class_split(d, g);
    REQUIRE(kids.size() == 2);
    CHECK(kids[0].indices == std::vector<std::size_t>{0, 1});
    CHECK(kids[1].indices == std::vector<std::size_t>{2, 3});
    CHECK(kids[0].purity == 1.0);
    CHECK(kids[1].purity == 1.0);
}

TEST_CASE("class_split: collapse onto one centroid purges the minority") {
    // both class centroids sit at 0.05, so everything lands on centroid 0
    Dataset d = make_1d({0.0, 0.1, 0.05}, {0, 0, 1}, 2);
    InfoGranule g = make_granule(d, {0, 1, 2});
    std::vector<std::size_t> purged;
    auto kids = class_split(d, g, &purged);
    REQUIRE(kids.size() == 1);
    CHECK(kids[0].indices == std::vector<std::size_t>{0, 1});
    CHECK(kids[0].purity == 1.0);
    CHECK(purged == std::vector<std::size_t>{2});
}

TEST_CASE("class_split: two coincident points with different labels") {
    Dataset d = make_1d({0.0, 0.0}, {0, 1}, 2);
    InfoGranule g = make_granule(d, {0, 1});
    std::vector<std::size_t> purged;
    auto kids = class_split(d, g, &purged);
    REQUIRE(kids.size() == 1);
    // majority tie -> class 0 kept
    CHECK(kids[0].indices == std::vector<std::size_t>{0});
    CHECK(purged == std::vector<std::size_t>{1});
}

TEST_CASE("binary_split: closest/farthest centers, hand-traced partition") {
    Dataset d = make_1d({0, 1, 2, 3, 10}, {0, 0, 0, 0, 0}, 2);
    InfoGranule g = make_granule(d, {0, 1, 2, 3, 4});
    CHECK(g.centroid[0] == doctest::Approx(3.2));
    auto [a, b] = binary_split(d, g);
    CHECK(a.indices == std::vector<std::size_t>{0, 1, 2, 3});
    CHECK(b.indices == std::vector<std::size_t>{4});
}

TEST_CASE("binary_split: two members force one per side") {
    Dataset d = make_1d({0, 1}, {0, 0}, 2);
    InfoGranule g = make_granule(d, {0, 1});
    auto [a, b] = binary_split(d, g);
    CHECK(a.indices.size() == 1);
    CHECK(b.indices.size() == 1);
}

TEST_CASE("binary_split: coincident members fall back to an even index split") {
    Dataset d = make_1d({2, 2, 2, 2}, {0, 0, 0, 0}, 2);
    InfoGranule g = make_granule(d, {0, 1, 2, 3});
    bool fb = false;
    auto [a, b] = binary_split(d, g, &fb);
    CHECK(fb);
    CHECK(a.indices == std::vector<std::size_t>{0, 1});
    CHECK(b.indices == std::vector<std::size_t>{2, 3});
}

TEST_CASE("granulate: two separated pairs give two balls, nothing discarded") {
    Dataset d = make_2d({{0, 0}, {0.1, 0}, {5, 5}, {5.1, 5}}, {0, 0, 1, 1}, 2);
    Granulation g = granulate(d);
    REQUIRE(g.balls.size() == 2);
    CHECK(g.balls[0].indices == std::vector<std::size_t>{0, 1});
    CHECK(g.balls[1].indices == std::vector<std::size_t>{2, 3});
    CHECK(g.discarded.empty());
    CHECK(g.capacity == 2);
    CHECK(g.ball_of == std::vector<int>{0, 0, 1, 1});
    CHECK(g.balls[0].majority_label == 0);
    CHECK(g.balls[1].majority_label == 1);
}

TEST_CASE("granulate: four coincident same-label points need fallback splits") {
    Dataset d = make_1d({3, 3, 3, 3}, {0, 0, 0, 0}, 2);
    Granulation g = granulate(d);
    REQUIRE(g.balls.size() == 2);
    CHECK(g.balls[0].indices.size() == 2);
    CHECK(g.balls[1].indices.size() == 2);
    CHECK(g.fallback_splits == 1);
    CHECK(g.balls[0].radius == 0.0);
}

TEST_CASE("granulate: purge path records discards and flags the capacity clamp") {
    Dataset d = make_1d({0.0, 0.1, 0.05}, {0, 0, 1}, 2);
    Granulation g = granulate(d);
    REQUIRE(g.balls.size() == 1);
    CHECK(g.balls[0].indices == std::vector<std::size_t>{0, 1});
    CHECK(g.discarded == std::vector<std::size_t>{2});
    CHECK(g.capacity == 2);
    CHECK(g.capacity_clamped);  // raw floor(sqrt(3)/1) = 1
    CHECK(g.ball_of == std::vector<int>{0, 0, -1});
}

TEST_CASE("granulate: argument validation") {
    Dataset d = make_1d({0.0}, {0}, 2);
    CHECK_THROWS_AS(granulate(d), std::invalid_argument);
}

TEST_CASE("granulate: structural invariants on noisy blobs") {
    Dataset d = synth_blobs(1000, 4, 3, 0.5, 77);
    NoiseRecord rec = inject_label_noise(d, 0.10, 101);
    Granulation g = granulate(d);

    // disjointness and exact coverage
    std::set<std::size_t> seen;
    std::size_t total = 0;
    for (const auto& b : g.balls) {
        total += b.indices.size();
        seen.insert(b.indices.begin(), b.indices.end());
    }
    for (std::size_t i : g.discarded) {
        ++total;
        seen.insert(i);
    }
    CHECK(total == d.n);
    CHECK(seen.size() == d.n);

    const std::size_t cap = ball_capacity(d.n, d.n_classes);
    for (std::size_t bi = 0; bi < g.balls.size(); ++bi) {
        const auto& b = g.balls[bi];
        // purity exactly 1
        for (std::size_t i : b.indices) CHECK(d.labels[i] == b.majority_label);
        // size bounds
        CHECK(b.indices.size() >= 2);
        CHECK(b.indices.size() <= cap);
        // center is the member mean, radial set is consistent
        auto c = centroid(d, b.indices);
        for (std::size_t j = 0; j < d.q; ++j)
            CHECK(std::abs(c[j] - b.center[j]) < 1e-9);
        CHECK(b.radial.size() == b.indices.size());
        double mx = 0.0;
        for (double r : b.radial) {
            CHECK(r >= 0.0);
            mx = std::max(mx, r);
        }
        CHECK(b.radius == mx);
        // ball_of agrees
        for (std::size_t i : b.indices) CHECK(g.ball_of[i] == static_cast<int>(bi));
    }

    // flipped samples are retained less often than clean ones
    std::set<std::size_t> flipped(rec.flipped.begin(), rec.flipped.end());
    std::size_t kept_flipped = 0, kept_clean = 0;
    for (const auto& b : g.balls)
        for (std::size_t i : b.indices)
            flipped.count(i) ? ++kept_flipped : ++kept_clean;
    const double flip_rate =
        static_cast<double>(kept_flipped) / static_cast<double>(rec.flipped.size());
    const double clean_rate =
        static_cast<double>(kept_clean) / static_cast<double>(d.n - rec.flipped.size());
    CHECK(flip_rate < clean_rate);
}

TEST_CASE("granulate: deterministic, no RNG anywhere") {
    Dataset d = synth_blobs(300, 3, 3, 0.6, 5);
    inject_label_noise(d, 0.15, 9);
    Granulation a = granulate(d);
    Granulation b = granulate(d);
    REQUIRE(a.balls.size() == b.balls.size());
    for (std::size_t i = 0; i < a.balls.size(); ++i) {
        CHECK(a.balls[i].indices == b.balls[i].indices);
        CHECK(a.balls[i].center == b.balls[i].center);
        CHECK(a.balls[i].radial == b.balls[i].radial);
    }
    CHECK(a.discarded == b.discarded);
}

TEST_CASE("ball_boundary_order: radial descending, ties to the lower index") {
    GranularBall gb;
    gb.indices = {7, 3, 9};
    gb.radial = {0.5, 0.9, 0.1};
    CHECK(ball_boundary_order(gb) == std::vector<std::size_t>{3, 7, 9});

    GranularBall tie;
    tie.indices = {4, 2, 8};
    tie.radial = {0.3, 0.3, 0.3};
    CHECK(ball_boundary_order(tie) == std::vector<std::size_t>{2, 4, 8});

    GranularBall two;
    two.indices = {1, 5};
    two.radial = {0.1, 0.7};
    CHECK(ball_boundary_order(two) == std::vector<std::size_t>{5, 1});
}
