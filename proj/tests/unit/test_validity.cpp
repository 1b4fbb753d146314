#include "helpers.hpp"
#include "oracles.hpp"
#include "morphprof/error.hpp"
#include "morphprof/validity.hpp"

#include <doctest.h>

using namespace morphprof;
using testutil::from_rows;
using testutil::silhouette_oracle;
using testutil::db_oracle;
using testutil::ch_oracle;

namespace {

const DataMatrix kLine = from_rows({{0}, {2}, {10}, {12}});
const std::vector<int> kLineLabels{0, 0, 1, 1};

}  // namespace

TEST_CASE("indices on the four-point line") {
    CHECK(std::abs(silhouette_score(kLine, kLineLabels) - 0.7980) < 1e-3);
    CHECK(std::abs(silhouette_score(kLine, kLineLabels) - (9.0 / 11.0 + 7.0 / 9.0) / 2.0) < 1e-12);
    CHECK(std::abs(davies_bouldin(kLine, kLineLabels) - 0.2) < 1e-9);
    CHECK(std::abs(calinski_harabasz(kLine, kLineLabels) - 50.0) < 1e-9);
}

TEST_CASE("indices match definition-level oracles on random partitions") {
    Rng rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        const auto n = static_cast<Eigen::Index>(8 + rng.below(25));
        const auto d = static_cast<Eigen::Index>(1 + rng.below(4));
        const int k = 2 + static_cast<int>(rng.below(4));
        DataMatrix x(n, d);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < d; ++j) x(i, j) = rng.uniform(-3, 3);
        }
        std::vector<int> labels(static_cast<std::size_t>(n));
        for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i < static_cast<std::size_t>(k) ? i : rng.below(static_cast<std::uint64_t>(k)));
        // sparse, non-contiguous label values
        for (auto& l : labels) l = 3 * l + 1;
        CHECK(std::abs(silhouette_score(x, labels) - silhouette_oracle(x, labels)) < 1e-9);
        CHECK(std::abs(davies_bouldin(x, labels) - db_oracle(x, labels)) < 1e-9);
        CHECK(std::abs(calinski_harabasz(x, labels) - ch_oracle(x, labels)) < 1e-9 * ch_oracle(x, labels));
    }
}

TEST_CASE("silhouette conventions") {
    const DataMatrix same = DataMatrix::Zero(6, 2);
    CHECK(silhouette_score(same, {0, 0, 0, 1, 1, 1}) == 0.0);

    const DataMatrix x = from_rows({{0}, {1}, {2}, {50}});
    const std::vector<int> l{0, 0, 0, 1};
    CHECK(std::abs(silhouette_score(x, l) - silhouette_oracle(x, l)) < 1e-12);

    const auto [blobs, truth] = testutil::blobs({{0, 0}, {20, 0}, {0, 20}}, 40, 0.2, 3);
    CHECK(silhouette_score(blobs, truth) > 0.95);
    CHECK_THROWS_AS(silhouette_score(kLine, {0, 0, 0, 0}), ConfigError);
    CHECK_THROWS_AS(silhouette_score(kLine, {0, 1}), ConfigError);

    const PairwiseDistances pd(blobs);
    CHECK(silhouette_score(pd, truth) == silhouette_score(blobs, truth));
}

TEST_CASE("singleton clusters have zero Davies-Bouldin") {
    CHECK(davies_bouldin(from_rows({{0, 0}, {3, 1}, {7, 2}}), {0, 1, 2}) == 0.0);
}

TEST_CASE("index invariances") {
    const auto [x, truth] = testutil::blobs({{0, 0}, {4, 1}, {1, 5}}, 30, 1.0, 8);
    const double s = silhouette_score(x, truth), db = davies_bouldin(x, truth), ch = calinski_harabasz(x, truth);

    std::vector<int> perm(truth.size());
    for (std::size_t i = 0; i < truth.size(); ++i) perm[i] = (truth[i] + 2) % 3;
    CHECK(std::abs(silhouette_score(x, perm) - s) < 1e-12);
    CHECK(std::abs(davies_bouldin(x, perm) - db) < 1e-12);
    CHECK(std::abs(calinski_harabasz(x, perm) - ch) < 1e-9 * ch);

    DataMatrix moved = x;
    moved.col(0).array() += 100.0;
    moved.col(1).array() -= 40.0;
    CHECK(std::abs(silhouette_score(moved, truth) - s) < 1e-9);
    CHECK(std::abs(davies_bouldin(moved, truth) - db) < 1e-9);

    const DataMatrix scaled = 7.5 * x;
    CHECK(std::abs(silhouette_score(scaled, truth) - s) < 1e-9);
    CHECK(std::abs(davies_bouldin(scaled, truth) - db) < 1e-9);
    CHECK(std::abs(calinski_harabasz(scaled, truth) - ch) < 1e-9 * ch);
}

TEST_CASE("Davies-Bouldin falls as clusters separate") {
    double prev = 1e300;
    for (double gap = 3.0; gap <= 30.0; gap += 3.0) {
        const DataMatrix x = from_rows({{0}, {1}, {2}, {gap}, {gap + 1}, {gap + 2}});
        const double db = davies_bouldin(x, {0, 0, 0, 1, 1, 1});
        CHECK(db < prev);
        prev = db;
    }
}

TEST_CASE("adjusted Rand index") {
    const std::vector<int> a{0, 0, 1, 1, 2, 2, 2};
    CHECK(adjusted_rand(a, a) == 1.0);
    CHECK(adjusted_rand(a, {5, 5, 0, 0, 9, 9, 9}) == 1.0);
    // hand-computed: contingency [[1,1],[1,1]] on 4 points
    CHECK(adjusted_rand({0, 0, 1, 1}, {0, 1, 0, 1}) == doctest::Approx(-0.5).epsilon(1e-12));

    Rng rng(99);
    std::vector<int> x(10000), y(10000);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = static_cast<int>(i % 4);
        y[i] = static_cast<int>(rng.below(4));
    }
    CHECK(std::abs(adjusted_rand(x, y)) < 0.02);
    CHECK_THROWS_AS(adjusted_rand({0, 1}, {0}), ConfigError);
}

TEST_CASE("subsampled silhouette") {
    const auto [x, truth] = testutil::blobs({{0, 0}, {3, 0}}, 100, 1.0, 2);
    const auto exact = silhouette_sampled(x, truth, 1, 500);
    CHECK_FALSE(exact.subsampled);
    CHECK(exact.value == silhouette_score(x, truth));

    const auto idx = silhouette_sample_indices(200, 5, 60);
    REQUIRE(idx.size() == 60);
    CHECK(std::is_sorted(idx.begin(), idx.end()));
    CHECK(std::adjacent_find(idx.begin(), idx.end()) == idx.end());
    CHECK(idx == silhouette_sample_indices(200, 5, 60));

    DataMatrix sub(60, 2);
    std::vector<int> sub_labels;
    for (std::size_t r = 0; r < idx.size(); ++r) {
        sub.row(static_cast<Eigen::Index>(r)) = x.row(static_cast<Eigen::Index>(idx[r]));
        sub_labels.push_back(truth[idx[r]]);
    }
    const auto sampled = silhouette_sampled(x, truth, 5, 60);
    CHECK(sampled.subsampled);
    CHECK(sampled.value == silhouette_score(sub, sub_labels));

    Partition p;
    p.labels = truth;
    p.k = 2;
    const auto rep = validity_report(x, p, 5);
    CHECK(rep.k == 2);
    CHECK(rep.silhouette == silhouette_score(x, truth));
    CHECK(rep.davies_bouldin == davies_bouldin(x, truth));
    CHECK(rep.calinski_harabasz == calinski_harabasz(x, truth));
    CHECK_FALSE(rep.bic.has_value());
}
