#include "morphprof/clustering.hpp"
#include "morphprof/error.hpp"

#include <Eigen/Eigenvalues>

namespace morphprof {

std::vector<std::size_t> cluster_sizes(const Partition& p) {
    std::vector<std::size_t> sizes(static_cast<std::size_t>(std::max(p.k, 0)), 0);
    for (int l : p.labels) {
        if (l >= 0 && l < p.k) ++sizes[static_cast<std::size_t>(l)];
    }
    return sizes;
}

PcaModel pca_fit(const DataMatrix& x, int n_components) {
    const auto n = x.rows();
    const auto d = x.cols();
    if (n_components < 1 || n_components > std::min<Eigen::Index>(n - 1, d)) {
        throw ConfigError("n_components must lie in [1, min(n_samples - 1, n_features)]");
    }
    PcaModel model;
    model.mean = x.colwise().mean().transpose();
    const Eigen::MatrixXd centered = x.rowwise() - model.mean.transpose();
    const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n - 1);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success) throw NumericError("eigendecomposition failed");
    // ascending order from Eigen; walk from the back
    const Eigen::VectorXd values = eig.eigenvalues();
    const double total = values.sum();
    const double top = values(d - 1);
    int rank = 0;
    for (Eigen::Index i = 0; i < d; ++i) {
        if (values(i) > 1e-12 * std::max(top, 0.0) * static_cast<double>(d)) ++rank;
    }
    if (n_components > rank) throw NumericError("n_components exceeds the rank of the data");

    model.components.resize(n_components, d);
    model.explained_variance.resize(n_components);
    model.explained_variance_ratio.resize(n_components);
    for (int c = 0; c < n_components; ++c) {
        const Eigen::Index src = d - 1 - c;
        Eigen::VectorXd v = eig.eigenvectors().col(src);
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v(arg) < 0) v = -v;
        model.components.row(c) = v.transpose();
        model.explained_variance(c) = std::max(values(src), 0.0);
        model.explained_variance_ratio(c) = total > 0.0 ? model.explained_variance(c) / total : 0.0;
    }
    return model;
}

DataMatrix pca_transform(const PcaModel& model, const DataMatrix& x) {
    if (x.cols() != model.mean.size()) throw ConfigError("feature count does not match the PCA model");
    return (x.rowwise() - model.mean.transpose()) * model.components.transpose();
}

}  // namespace morphprof
