#include "morphprof/clustering.hpp"
#include "morphprof/error.hpp"
#include "morphprof/rng.hpp"
#include "morphprof/validity.hpp"

#include <limits>
#include <memory>

namespace morphprof {

namespace {

double squared_distance(const DataMatrix& a, Eigen::Index i, const DataMatrix& b, Eigen::Index j) {
    const double* pa = a.row(i).data();
    const double* pb = b.row(j).data();
    double s = 0.0;
    for (Eigen::Index t = 0; t < a.cols(); ++t) {
        const double diff = pa[t] - pb[t];
        s += diff * diff;
    }
    return s;
}

DataMatrix kmeanspp_init(const DataMatrix& x, int k, Rng& rng) {
    const auto n = x.rows();
    DataMatrix centers(k, x.cols());
    centers.row(0) = x.row(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n))));
    std::vector<double> d2(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) d2[i] = squared_distance(x, i, centers, 0);
    for (int c = 1; c < k; ++c) {
        double total = 0.0;
        for (double v : d2) total += v;
        Eigen::Index pick = n - 1;
        if (total > 0.0) {
            const double target = rng.uniform() * total;
            double acc = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                acc += d2[i];
                if (acc > target) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
        }
        centers.row(c) = x.row(pick);
        for (Eigen::Index i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_distance(x, i, centers, c));
    }
    return centers;
}

// Returns whether any label changed; fills per-point squared distance to its centroid.
bool assign(const DataMatrix& x, const DataMatrix& centers, std::vector<int>& labels, std::vector<double>& d2) {
    bool changed = false;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        int best = 0;
        double best_d = squared_distance(x, i, centers, 0);
        for (Eigen::Index c = 1; c < centers.rows(); ++c) {
            const double d = squared_distance(x, i, centers, c);
            if (d < best_d) {
                best_d = d;
                best = static_cast<int>(c);
            }
        }
        if (labels[i] != best) changed = true;
        labels[i] = best;
        d2[i] = best_d;
    }
    return changed;
}

DataMatrix cluster_means(const DataMatrix& x, const std::vector<int>& labels, int k, const DataMatrix& previous) {
    DataMatrix sums = DataMatrix::Zero(k, x.cols());
    std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        sums.row(labels[i]) += x.row(i);
        ++counts[static_cast<std::size_t>(labels[i])];
    }
    for (int c = 0; c < k; ++c) {
        if (counts[c] > 0) {
            sums.row(c) /= static_cast<double>(counts[c]);
        } else {
            sums.row(c) = previous.row(c);
        }
    }
    return sums;
}

// Moves the point farthest from its centroid into each empty cluster.
void repair_empty(std::vector<int>& labels, std::vector<double>& d2, int k) {
    std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
    for (int l : labels) ++counts[static_cast<std::size_t>(l)];
    for (int c = 0; c < k; ++c) {
        if (counts[c] > 0) continue;
        std::size_t far = labels.size();
        double far_d = -1.0;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (counts[static_cast<std::size_t>(labels[i])] > 1 && d2[i] > far_d) {
                far_d = d2[i];
                far = i;
            }
        }
        if (far == labels.size()) break;
        --counts[static_cast<std::size_t>(labels[far])];
        labels[far] = c;
        d2[far] = 0.0;
        ++counts[c];
    }
}

KMeansResult lloyd(const DataMatrix& x, int k, Rng& rng, const KMeansOptions& opt) {
    const auto n = static_cast<std::size_t>(x.rows());
    DataMatrix centers = kmeanspp_init(x, k, rng);
    std::vector<int> labels(n, -1);
    std::vector<double> d2(n, 0.0);
    KMeansResult out;
    for (int it = 0; it < opt.max_iter; ++it) {
        const bool changed = assign(x, centers, labels, d2);
        repair_empty(labels, d2, k);
        DataMatrix next = cluster_means(x, labels, k, centers);
        double inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i) inertia += squared_distance(x, static_cast<Eigen::Index>(i), next, labels[i]);
        out.inertia_trace.push_back(inertia);
        const double shift = (next - centers).rowwise().norm().maxCoeff();
        centers = std::move(next);
        out.n_iter = it + 1;
        if ((!changed && it > 0) || shift < opt.tol) break;
    }
    assign(x, centers, labels, d2);
    double inertia = 0.0;
    for (double v : d2) inertia += v;
    out.model.centroids = std::move(centers);
    out.model.inertia = inertia;
    out.partition.labels = std::move(labels);
    out.partition.k = k;
    return out;
}

}  // namespace

KMeansResult kmeans_fit(const DataMatrix& x, int k, std::uint64_t seed, const KMeansOptions& options) {
    if (k < 2) throw ConfigError("k-means needs K >= 2");
    if (k > x.rows()) throw ConfigError("K exceeds the number of samples");
    if (options.n_init < 1) throw ConfigError("n_init must be positive");
    std::unique_ptr<KMeansResult> best;
    for (int r = 0; r < options.n_init; ++r) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
        auto run = lloyd(x, k, rng, options);
        if (!best || run.model.inertia < best->model.inertia) best = std::make_unique<KMeansResult>(std::move(run));
    }
    return std::move(*best);
}

Partition kmeans_assign(const KMeansModel& model, const DataMatrix& x) {
    if (x.cols() != model.centroids.cols()) throw ConfigError("feature count does not match the k-means model");
    Partition p;
    p.k = static_cast<int>(model.centroids.rows());
    p.labels.assign(static_cast<std::size_t>(x.rows()), -1);
    std::vector<double> d2(static_cast<std::size_t>(x.rows()));
    assign(x, model.centroids, p.labels, d2);
    return p;
}

KSelection select_k_silhouette(const DataMatrix& x, int k_min, int k_max, std::uint64_t seed,
                               const KMeansOptions& options) {
    if (k_min < 2 || k_max < k_min) throw ConfigError("candidate range must satisfy 2 <= k_min <= k_max");
    if (x.rows() <= k_max) throw ConfigError("need more samples than k_max");

    const auto sample = silhouette_sample_indices(static_cast<std::size_t>(x.rows()), seed, kSilhouetteMaxSamples);
    const bool subsampled = sample.size() < static_cast<std::size_t>(x.rows());
    DataMatrix xs(static_cast<Eigen::Index>(sample.size()), x.cols());
    for (std::size_t i = 0; i < sample.size(); ++i) xs.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(sample[i]));
    // A cached distance matrix pays off across candidates while it stays moderate in size.
    std::unique_ptr<PairwiseDistances> cache;
    if (sample.size() <= 6000) cache = std::make_unique<PairwiseDistances>(xs);

    KSelection sel;
    sel.subsampled = subsampled;
    double best = -std::numeric_limits<double>::infinity();
    for (int k = k_min; k <= k_max; ++k) {
        const auto fit = kmeans_fit(x, k, derive_seed(seed, static_cast<std::uint64_t>(k)), options);
        std::vector<int> labels(sample.size());
        for (std::size_t i = 0; i < sample.size(); ++i) labels[i] = fit.partition.labels[sample[i]];
        const double s = cache ? silhouette_score(*cache, labels) : silhouette_score(xs, labels);
        sel.candidates.push_back(k);
        sel.scores.push_back(s);
        if (s > best) {
            best = s;
            sel.k = k;
        }
    }
    return sel;
}

}  // namespace morphprof
