#include "helpers.hpp"
#include "oracles.hpp"
#include "morphprof/clustering.hpp"
#include "morphprof/error.hpp"
#include "morphprof/model_io.hpp"
#include "morphprof/validity.hpp"

#include <doctest.h>

#include <numbers>

using namespace morphprof;
using testutil::blobs;
using testutil::from_rows;
using testutil::best_two_partition;

namespace {

DataMatrix gaussian(std::size_t n, std::size_t d, std::uint64_t seed) {
    Rng rng(seed);
    DataMatrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = rng.normal();
    }
    return x;
}

double log_normal_pdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mu, const Eigen::MatrixXd& cov) {
    const auto d = static_cast<double>(x.size());
    const Eigen::VectorXd diff = x - mu;
    const double quad = diff.dot(cov.inverse() * diff);
    return -0.5 * (d * std::log(2.0 * std::numbers::pi) + std::log(cov.determinant()) + quad);
}

}  // namespace

TEST_CASE("PCA") {
    SUBCASE("planar data in five dimensions") {
        const DataMatrix basis = from_rows({{1, 2, 0, -1, 0.5}, {0, 1, 3, 1, -2}});
        const DataMatrix coef = gaussian(300, 2, 4);
        const DataMatrix x = coef * basis;
        const auto m = pca_fit(x, 2);
        CHECK(std::abs(m.explained_variance_ratio.sum() - 1.0) < 1e-9);
        CHECK((m.components * m.components.transpose() - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-9);
        // distances are preserved at full rank
        const DataMatrix z = pca_transform(m, x);
        for (int i = 0; i < 20; ++i) {
            for (int j = i + 1; j < 20; ++j) {
                CHECK(std::abs((z.row(i) - z.row(j)).norm() - (x.row(i) - x.row(j)).norm()) < 1e-9);
            }
        }
    }
    SUBCASE("isotropic sample has balanced ratios") {
        const auto m = pca_fit(gaussian(10000, 3, 8), 3);
        CHECK(m.explained_variance_ratio.maxCoeff() / m.explained_variance_ratio.minCoeff() < 1.5);
        for (int i = 1; i < 3; ++i) CHECK(m.explained_variance_ratio(i) <= m.explained_variance_ratio(i - 1));
    }
    SUBCASE("full reconstruction, mean and variances") {
        DataMatrix x = gaussian(200, 4, 9);
        x.col(1) *= 3.0;
        x.col(2) += 0.5 * x.col(0);
        const auto m = pca_fit(x, 4);
        const DataMatrix z = pca_transform(m, x);
        const DataMatrix back = (z * m.components).rowwise() + m.mean.transpose();
        CHECK((back - x).norm() / std::sqrt(static_cast<double>(x.size())) < 1e-9);

        DataMatrix mean_row = m.mean.transpose();
        CHECK(pca_transform(m, mean_row).cwiseAbs().maxCoeff() < 1e-12);

        for (int c = 0; c < 4; ++c) {
            const double var = z.col(c).squaredNorm() / static_cast<double>(x.rows() - 1);
            CHECK(std::abs(var - m.explained_variance(c)) < 1e-9);
        }
        DataMatrix fresh = gaussian(1, 4, 77);
        const auto zf = pca_transform(m, fresh);
        for (int c = 0; c < 4; ++c) {
            double dot = 0.0;
            for (int j = 0; j < 4; ++j) dot += (fresh(0, j) - m.mean(j)) * m.components(c, j);
            CHECK(std::abs(zf(0, c) - dot) < 1e-12);
        }
    }
    CHECK_THROWS_AS(pca_fit(gaussian(10, 3, 1), 4), ConfigError);
}

TEST_CASE("k-means basics") {
    const DataMatrix x = from_rows({{0}, {0}, {10}, {10}});
    const auto r = kmeans_fit(x, 2, 1);
    std::vector<double> c{r.model.centroids(0, 0), r.model.centroids(1, 0)};
    std::sort(c.begin(), c.end());
    CHECK(c == std::vector<double>{0.0, 10.0});
    CHECK(r.model.inertia == 0.0);
    CHECK_THROWS_AS(kmeans_fit(x, 1, 1), ConfigError);
    CHECK_THROWS_AS(kmeans_fit(x, 5, 1), ConfigError);
}

TEST_CASE("k-means reaches the exhaustive optimum on small instances") {
    Rng rng(2024);
    int matched = 0;
    for (int inst = 0; inst < 20; ++inst) {
        const auto n = 6 + rng.below(5);
        DataMatrix x(static_cast<Eigen::Index>(n), 2);
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            x(i, 0) = rng.uniform(-5, 5);
            x(i, 1) = rng.uniform(-5, 5);
        }
        const auto r = kmeans_fit(x, 2, static_cast<std::uint64_t>(inst));
        if (std::abs(r.model.inertia - best_two_partition(x)) < 1e-9) ++matched;
    }
    CHECK(matched >= 19);
}

TEST_CASE("k-means Lloyd properties") {
    const auto [x, truth] = blobs({{0, 0}, {6, 0}, {3, 5}}, 60, 1.2, 5);
    const auto r = kmeans_fit(x, 3, 7);
    for (std::size_t i = 1; i < r.inertia_trace.size(); ++i) CHECK(r.inertia_trace[i] <= r.inertia_trace[i - 1] + 1e-9);
    CHECK(kmeans_assign(r.model, x).labels == r.partition.labels);
    for (auto s : cluster_sizes(r.partition)) CHECK(s > 0);

    // each point twice: same centroids
    DataMatrix dup(2 * x.rows(), x.cols());
    dup << x, x;
    const auto rd = kmeans_fit(dup, 3, 7);
    auto sorted_rows = [](const DataMatrix& c) {
        std::vector<std::vector<double>> rows;
        for (Eigen::Index i = 0; i < c.rows(); ++i) rows.push_back({c(i, 0), c(i, 1)});
        std::sort(rows.begin(), rows.end());
        return rows;
    };
    const auto a = sorted_rows(r.model.centroids), b = sorted_rows(rd.model.centroids);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(std::abs(a[i][0] - b[i][0]) < 1e-9);
        CHECK(std::abs(a[i][1] - b[i][1]) < 1e-9);
    }

    const auto [y, ytruth] = blobs({{0, 0}, {10, 0}, {0, 10}}, 50, 0.1, 6);
    const auto p1 = kmeans_fit(y, 3, 1).partition.labels;
    const auto p2 = kmeans_fit(y, 3, 99).partition.labels;
    CHECK(adjusted_rand(p1, p2) == 1.0);
    CHECK(adjusted_rand(p1, ytruth) == 1.0);
}

TEST_CASE("silhouette model selection") {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const auto [x3, t3] = blobs({{0, 0}, {10, 0}, {5, 8.66}}, 50, 0.1, seed);
        const auto s3 = select_k_silhouette(x3, 2, 9, seed);
        CHECK(s3.k == 3);
        CHECK(s3.scores.size() == 8);
        CHECK(s3.candidates.front() == 2);
        CHECK(s3.candidates.back() == 9);
        const auto [x2, t2] = blobs({{0, 0}, {10, 0}}, 50, 0.1, seed + 10);
        CHECK(select_k_silhouette(x2, 2, 9, seed).k == 2);
    }
}

TEST_CASE("GMM fitting") {
    SUBCASE("one component equals the sample moments") {
        DataMatrix x = gaussian(500, 3, 12);
        x.col(0) = x.col(0) * 2.0 + x.col(1);
        const auto fit = gmm_fit(x, 1, 3);
        const Eigen::VectorXd mean = x.colwise().mean().transpose();
        const DataMatrix centered = x.rowwise() - mean.transpose();
        const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(x.rows());
        CHECK((fit.model.means[0] - mean).cwiseAbs().maxCoeff() < 1e-9);
        CHECK((fit.model.covariances[0] - cov).cwiseAbs().maxCoeff() <= 1e-6 + 1e-12);
        CHECK(fit.model.weights(0) == doctest::Approx(1.0));
    }
    SUBCASE("two separated components") {
        Rng rng(1);
        DataMatrix x(4000, 1);
        double group_sum[2] = {0.0, 0.0};
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            x(i, 0) = rng.normal(i % 2 ? 100.0 : 0.0, 1.0);
            group_sum[i % 2] += x(i, 0);
        }
        const auto fit = gmm_fit(x, 2, 5);
        std::vector<double> mu{fit.model.means[0](0), fit.model.means[1](0)};
        std::sort(mu.begin(), mu.end());
        CHECK(std::abs(mu[0]) < 0.1);
        CHECK(std::abs(mu[1] - 100.0) < 0.1);
        CHECK(std::abs(mu[0] - group_sum[0] / 2000.0) < 1e-6);
        CHECK(std::abs(mu[1] - group_sum[1] / 2000.0) < 1e-6);
        CHECK(std::abs(fit.model.weights.sum() - 1.0) < 1e-9);
    }
    SUBCASE("log-likelihood never decreases and reruns are bitwise equal") {
        const auto [x, t] = blobs({{0, 0}, {3, 1}, {1, 4}}, 100, 1.0, 21);
        const auto a = gmm_fit(x, 3, 8);
        for (std::size_t i = 1; i < a.loglik_trace.size(); ++i) CHECK(a.loglik_trace[i] >= a.loglik_trace[i - 1] - 1e-10);
        const auto b = gmm_fit(x, 3, 8);
        CHECK(a.model.log_likelihood == b.model.log_likelihood);
        for (int c = 0; c < 3; ++c) {
            CHECK(a.model.means[static_cast<std::size_t>(c)] == b.model.means[static_cast<std::size_t>(c)]);
            CHECK(a.model.covariances[static_cast<std::size_t>(c)] == b.model.covariances[static_cast<std::size_t>(c)]);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a.model.covariances[static_cast<std::size_t>(c)]);
            CHECK(eig.eigenvalues().minCoeff() >= 1e-6);
        }
    }
    SUBCASE("duplicated rows are rejected for too many components") {
        DataMatrix x = DataMatrix::Zero(10, 2);
        x.bottomRows(5).setOnes();
        CHECK_THROWS_WITH_AS(gmm_fit(x, 3, 1), "degenerate component", NumericError);
    }
}

TEST_CASE("GMM assignment") {
    GmmModel m;
    m.weights = Eigen::Vector2d(0.5, 0.5);
    m.means = {Eigen::Vector2d(-3, 0), Eigen::Vector2d(3, 0)};
    m.covariances = {Eigen::Matrix2d::Identity(), Eigen::Matrix2d::Identity()};
    const DataMatrix pts = from_rows({{-3, 0}, {3, 0}, {0, 1.5}});
    CHECK(gmm_assign(m, pts).labels == std::vector<int>{0, 1, 0});

    const auto [x, t] = blobs({{0, 0}, {2, 1}, {1, 3}}, 80, 1.0, 33);
    const auto fit = gmm_fit(x, 3, 2).model;
    const auto labels = gmm_assign(fit, x).labels;
    const auto logd = gmm_log_density(fit, x);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        int best = 0;
        double best_v = -1e300, total = 0.0;
        for (int c = 0; c < 3; ++c) {
            const auto cu = static_cast<std::size_t>(c);
            const double v = std::log(fit.weights(c)) + log_normal_pdf(x.row(i).transpose(), fit.means[cu], fit.covariances[cu]);
            total += std::exp(v);
            if (v > best_v) {
                best_v = v;
                best = c;
            }
        }
        CHECK(labels[static_cast<std::size_t>(i)] == best);
        CHECK(std::abs(logd(i) - std::log(total)) < 1e-9);
    }
}

TEST_CASE("BIC model selection") {
    CHECK(gmm_parameter_count(2, 3) == 19.0);
    CHECK(gmm_parameter_count(1, 1) == 2.0);
    Rng rng(4);
    DataMatrix two(2000, 1), one(2000, 1);
    for (Eigen::Index i = 0; i < 2000; ++i) {
        two(i, 0) = rng.normal(i % 2 ? 10.0 : 0.0, 1.0);
        one(i, 0) = rng.normal(2.0, 1.5);
    }
    GmmOptions fast;
    fast.n_init = 2;
    const auto s2 = select_k_bic(two, 1, 5, 1, fast);
    CHECK(s2.k == 2);
    CHECK(s2.bic.size() == 5);
    CHECK(select_k_bic(one, 1, 5, 1, fast).k == 1);
    const auto fit = gmm_fit(two, 2, derive_seed(1, 2), fast);
    CHECK(gmm_bic(fit.model, 2000) == doctest::Approx(-2.0 * fit.model.log_likelihood + 5.0 * std::log(2000.0)));
}

TEST_CASE("model documents round-trip exactly") {
    const auto [x, t] = blobs({{0, 0, 1}, {4, 1, 0}}, 40, 0.7, 3);
    const auto pca = pca_fit(x, 2);
    const auto km = kmeans_fit(x, 2, 1).model;
    const auto gm = gmm_fit(x, 2, 1).model;
    const auto dir = testutil::temp_dir("models");

    save_json(model_to_json(pca), (dir / "pca.json").string());
    const auto pca2 = pca_model_from_json(load_json((dir / "pca.json").string()));
    CHECK(pca2.components == pca.components);
    CHECK(pca2.mean == pca.mean);
    CHECK(pca2.explained_variance_ratio == pca.explained_variance_ratio);

    save_json(model_to_json(km), (dir / "km.json").string());
    const auto km2 = kmeans_model_from_json(load_json((dir / "km.json").string()));
    CHECK(km2.centroids == km.centroids);
    CHECK(km2.inertia == km.inertia);

    save_json(model_to_json(gm), (dir / "gm.json").string());
    const auto gm2 = gmm_model_from_json(load_json((dir / "gm.json").string()));
    CHECK(gm2.weights == gm.weights);
    CHECK(gm2.covariances == gm.covariances);
    CHECK(gm2.log_likelihood == gm.log_likelihood);

    CHECK_THROWS_AS(kmeans_model_from_json(model_to_json(pca)), InputError);
    auto bad = model_to_json(km);
    bad["schema_version"] = 99;
    CHECK_THROWS_AS(kmeans_model_from_json(bad), InputError);
}
