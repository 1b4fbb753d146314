#include "morphprof/validity.hpp"

#include "morphprof/error.hpp"
#include "morphprof/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace morphprof {

namespace {

// Dense relabeling 0..K-1 in order of first appearance of each sorted label value.
std::vector<int> dense_labels(const std::vector<int>& labels, int& k) {
    std::vector<int> values(labels);
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    k = static_cast<int>(values.size());
    std::vector<int> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        out[i] = static_cast<int>(std::lower_bound(values.begin(), values.end(), labels[i]) - values.begin());
    }
    return out;
}

double euclidean(const DataMatrix& x, Eigen::Index i, Eigen::Index j) {
    const double* a = x.row(i).data();
    const double* b = x.row(j).data();
    double s = 0.0;
    for (Eigen::Index t = 0; t < x.cols(); ++t) {
        const double d = a[t] - b[t];
        s += d * d;
    }
    return std::sqrt(s);
}

template <typename DistanceFn>
double silhouette_impl(std::size_t n, const std::vector<int>& raw_labels, DistanceFn dist) {
    if (raw_labels.size() != n) throw ConfigError("label count does not match sample count");
    int k = 0;
    const auto labels = dense_labels(raw_labels, k);
    if (k < 2) throw ConfigError("silhouette needs at least 2 clusters");
    const auto kk = static_cast<std::size_t>(k);
    std::vector<std::size_t> counts(kk, 0);
    for (int l : labels) ++counts[static_cast<std::size_t>(l)];

    std::vector<double> sums(n * kk, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto li = static_cast<std::size_t>(labels[i]);
        double* si = &sums[i * kk];
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = dist(i, j);
            si[static_cast<std::size_t>(labels[j])] += d;
            sums[j * kk + li] += d;
        }
    }
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto li = static_cast<std::size_t>(labels[i]);
        if (counts[li] <= 1) continue;
        const double a = sums[i * kk + li] / static_cast<double>(counts[li] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < kk; ++c) {
            if (c != li) b = std::min(b, sums[i * kk + c] / static_cast<double>(counts[c]));
        }
        const double m = std::max(a, b);
        if (m > 0.0) total += (b - a) / m;
    }
    return total / static_cast<double>(n);
}

}  // namespace

PairwiseDistances::PairwiseDistances(const DataMatrix& x) : n_(static_cast<std::size_t>(x.rows())) {
    d_.resize(n_ * (n_ - (n_ > 0 ? 1 : 0)) / 2);
    std::size_t idx = 0;
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t j = i + 1; j < n_; ++j) {
            d_[idx++] = euclidean(x, static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        }
    }
}

double PairwiseDistances::operator()(std::size_t i, std::size_t j) const {
    if (i == j) return 0.0;
    if (i > j) std::swap(i, j);
    return d_[i * n_ - i * (i + 1) / 2 + (j - i - 1)];
}

double silhouette_score(const DataMatrix& x, const std::vector<int>& labels) {
    return silhouette_impl(static_cast<std::size_t>(x.rows()), labels, [&](std::size_t i, std::size_t j) {
        return euclidean(x, static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    });
}

double silhouette_score(const PairwiseDistances& dist, const std::vector<int>& labels) {
    return silhouette_impl(dist.size(), labels, [&](std::size_t i, std::size_t j) { return dist(i, j); });
}

std::vector<std::size_t> silhouette_sample_indices(std::size_t n, std::uint64_t seed, std::size_t max_samples) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    if (n <= max_samples) return idx;
    Rng rng(derive_seed(seed, 0x5111));
    for (std::size_t i = 0; i < max_samples; ++i) {
        std::swap(idx[i], idx[i + rng.below(n - i)]);
    }
    idx.resize(max_samples);
    std::sort(idx.begin(), idx.end());
    return idx;
}

SampledScore silhouette_sampled(const DataMatrix& x, const std::vector<int>& labels, std::uint64_t seed,
                                std::size_t max_samples) {
    const auto n = static_cast<std::size_t>(x.rows());
    if (n <= max_samples) return {silhouette_score(x, labels), false};
    const auto idx = silhouette_sample_indices(n, seed, max_samples);
    DataMatrix xs(static_cast<Eigen::Index>(idx.size()), x.cols());
    std::vector<int> ls(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        xs.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(idx[i]));
        ls[i] = labels[idx[i]];
    }
    return {silhouette_score(xs, ls), true};
}

double davies_bouldin(const DataMatrix& x, const std::vector<int>& raw_labels) {
    if (raw_labels.size() != static_cast<std::size_t>(x.rows())) throw ConfigError("label count does not match sample count");
    int k = 0;
    const auto labels = dense_labels(raw_labels, k);
    if (k < 2) throw ConfigError("Davies-Bouldin needs at least 2 clusters");
    DataMatrix centroids = DataMatrix::Zero(k, x.cols());
    std::vector<double> counts(static_cast<std::size_t>(k), 0.0);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        centroids.row(labels[i]) += x.row(i);
        counts[static_cast<std::size_t>(labels[i])] += 1.0;
    }
    for (int c = 0; c < k; ++c) centroids.row(c) /= counts[c];
    std::vector<double> scatter(static_cast<std::size_t>(k), 0.0);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        scatter[static_cast<std::size_t>(labels[i])] += (x.row(i) - centroids.row(labels[i])).norm();
    }
    for (int c = 0; c < k; ++c) scatter[c] /= counts[c];

    double total = 0.0;
    for (int i = 0; i < k; ++i) {
        double worst = 0.0;
        for (int j = 0; j < k; ++j) {
            if (j == i) continue;
            const double m = (centroids.row(i) - centroids.row(j)).norm();
            if (m == 0.0) throw NumericError("zero centroid separation");
            worst = std::max(worst, (scatter[i] + scatter[j]) / m);
        }
        total += worst;
    }
    return total / k;
}

double calinski_harabasz(const DataMatrix& x, const std::vector<int>& raw_labels) {
    const auto n = static_cast<std::size_t>(x.rows());
    if (raw_labels.size() != n) throw ConfigError("label count does not match sample count");
    int k = 0;
    const auto labels = dense_labels(raw_labels, k);
    if (k < 2) throw ConfigError("Calinski-Harabasz needs at least 2 clusters");
    if (n <= static_cast<std::size_t>(k)) throw ConfigError("Calinski-Harabasz needs more samples than clusters");
    const Eigen::RowVectorXd mean = x.colwise().mean();
    DataMatrix centroids = DataMatrix::Zero(k, x.cols());
    std::vector<double> counts(static_cast<std::size_t>(k), 0.0);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        centroids.row(labels[i]) += x.row(i);
        counts[static_cast<std::size_t>(labels[i])] += 1.0;
    }
    for (int c = 0; c < k; ++c) centroids.row(c) /= counts[c];
    double between = 0.0;
    for (int c = 0; c < k; ++c) between += counts[c] * (centroids.row(c) - mean).squaredNorm();
    double within = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) within += (x.row(i) - centroids.row(labels[i])).squaredNorm();
    if (within == 0.0) throw NumericError("zero within-cluster dispersion");
    return (between / (k - 1)) / (within / static_cast<double>(n - static_cast<std::size_t>(k)));
}

double adjusted_rand(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) throw ConfigError("label vectors differ in length");
    const double n = static_cast<double>(a.size());
    std::map<std::pair<int, int>, double> cells;
    std::map<int, double> rows, cols;
    for (std::size_t i = 0; i < a.size(); ++i) {
        cells[{a[i], b[i]}] += 1.0;
        rows[a[i]] += 1.0;
        cols[b[i]] += 1.0;
    }
    auto comb2 = [](double v) { return v * (v - 1.0) / 2.0; };
    double index = 0.0, sum_a = 0.0, sum_b = 0.0;
    for (const auto& [key, v] : cells) index += comb2(v);
    for (const auto& [key, v] : rows) sum_a += comb2(v);
    for (const auto& [key, v] : cols) sum_b += comb2(v);
    const double expected = sum_a * sum_b / comb2(n);
    const double max_index = 0.5 * (sum_a + sum_b);
    if (max_index == expected) return 1.0;
    return (index - expected) / (max_index - expected);
}

ValidityReport validity_report(const DataMatrix& x, const Partition& p, std::uint64_t seed) {
    ValidityReport r;
    int k = 0;
    dense_labels(p.labels, k);
    r.k = k;
    const auto sil = silhouette_sampled(x, p.labels, seed);
    r.silhouette = sil.value;
    r.subsampled = sil.subsampled;
    r.davies_bouldin = davies_bouldin(x, p.labels);
    r.calinski_harabasz = calinski_harabasz(x, p.labels);
    return r;
}

}  // namespace morphprof
