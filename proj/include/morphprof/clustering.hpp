#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace morphprof {

/// n_samples x n_features, one sample per row.
using DataMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Partition {
    std::vector<int> labels;
    int k = 0;
};

/// Per-cluster member counts.
std::vector<std::size_t> cluster_sizes(const Partition& p);

// ---------------------------------------------------------------------------
// PCA
// ---------------------------------------------------------------------------

struct PcaModel {
    Eigen::VectorXd mean;
    Eigen::MatrixXd components;  // n_components x n_features, orthonormal rows
    Eigen::VectorXd explained_variance;
    Eigen::VectorXd explained_variance_ratio;
};

/// Top principal axes of the centered data. Each component's largest-magnitude
/// entry is made positive.
PcaModel pca_fit(const DataMatrix& x, int n_components);

/// (x - mean) * components^T
DataMatrix pca_transform(const PcaModel& model, const DataMatrix& x);

// ---------------------------------------------------------------------------
// k-means
// ---------------------------------------------------------------------------

struct KMeansOptions {
    int n_init = 10;
    int max_iter = 300;
    double tol = 1e-6;  // centroid shift
};

struct KMeansModel {
    DataMatrix centroids;  // K x n_features
    double inertia = 0.0;
};

struct KMeansResult {
    KMeansModel model;
    Partition partition;
    std::vector<double> inertia_trace;  // per Lloyd iteration of the kept restart
    int n_iter = 0;
};

/// Lloyd iterations from k-means++ seeds; the restart with lowest inertia wins.
KMeansResult kmeans_fit(const DataMatrix& x, int k, std::uint64_t seed, const KMeansOptions& options = {});

/// Nearest-centroid labels; ties go to the lower index.
Partition kmeans_assign(const KMeansModel& model, const DataMatrix& x);

struct KSelection {
    int k = 0;
    std::vector<int> candidates;
    std::vector<double> scores;
    bool subsampled = false;
};

/// k-means for every K in [k_min, k_max]; picks the largest silhouette (ties to smaller K).
KSelection select_k_silhouette(const DataMatrix& x, int k_min, int k_max, std::uint64_t seed,
                               const KMeansOptions& options = {});

// ---------------------------------------------------------------------------
// Gaussian mixtures
// ---------------------------------------------------------------------------

struct GmmOptions {
    int n_init = 5;
    int max_iter = 200;
    double tol = 1e-6;    // log-likelihood gain per sample
    double ridge = 1e-6;  // added to covariance diagonals
};

struct GmmModel {
    Eigen::VectorXd weights;
    std::vector<Eigen::VectorXd> means;
    std::vector<Eigen::MatrixXd> covariances;
    double log_likelihood = 0.0;

    int k() const { return static_cast<int>(weights.size()); }
    int dim() const { return means.empty() ? 0 : static_cast<int>(means.front().size()); }
};

struct GmmFit {
    GmmModel model;
    std::vector<double> loglik_trace;  // per EM iteration of the kept restart
    int n_iter = 0;
};

/// EM with k-means initialization and full covariances.
GmmFit gmm_fit(const DataMatrix& x, int k, std::uint64_t seed, const GmmOptions& options = {});

/// Per-sample log p(x) under the mixture.
Eigen::VectorXd gmm_log_density(const GmmModel& model, const DataMatrix& x);

/// Argmax posterior; ties to the lower index.
Partition gmm_assign(const GmmModel& model, const DataMatrix& x);

/// Free parameters of a K-component full-covariance mixture in d dimensions.
double gmm_parameter_count(int k, int d);

/// -2 log L + p ln n
double gmm_bic(const GmmModel& model, std::size_t n_samples);

struct BicSelection {
    int k = 0;
    std::vector<int> candidates;
    std::vector<double> bic;
};

BicSelection select_k_bic(const DataMatrix& x, int k_min, int k_max, std::uint64_t seed,
                          const GmmOptions& options = {});

}  // namespace morphprof
