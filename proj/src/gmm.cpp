#include "morphprof/clustering.hpp"
#include "morphprof/error.hpp"
#include "morphprof/log.hpp"
#include "morphprof/rng.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace morphprof {

namespace {

std::size_t distinct_rows(const DataMatrix& x, std::size_t stop_at) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(x.rows()));
    std::iota(order.begin(), order.end(), 0);
    auto less = [&](Eigen::Index a, Eigen::Index b) {
        for (Eigen::Index t = 0; t < x.cols(); ++t) {
            if (x(a, t) != x(b, t)) return x(a, t) < x(b, t);
        }
        return false;
    };
    std::sort(order.begin(), order.end(), less);
    std::size_t count = order.empty() ? 0 : 1;
    for (std::size_t i = 1; i < order.size() && count < stop_at; ++i) {
        if (less(order[i - 1], order[i])) ++count;
    }
    return count;
}

// log w_k + log N(x_i | mu_k, Sigma_k), n x K
Eigen::MatrixXd log_joint(const GmmModel& m, const DataMatrix& x) {
    const auto n = x.rows();
    const int k = m.k();
    const double d = static_cast<double>(x.cols());
    Eigen::MatrixXd out(n, k);
    for (int c = 0; c < k; ++c) {
        Eigen::LLT<Eigen::MatrixXd> llt(m.covariances[c]);
        if (llt.info() != Eigen::Success) throw NumericError("degenerate component");
        const Eigen::MatrixXd diff = (x.rowwise() - m.means[c].transpose()).transpose();
        const Eigen::MatrixXd z = llt.matrixL().solve(diff);
        const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
        const double base = std::log(m.weights(c)) - 0.5 * (d * std::log(2.0 * std::numbers::pi) + logdet);
        out.col(c) = (base - 0.5 * z.colwise().squaredNorm().array()).transpose();
    }
    return out;
}

// Normalizes rows of `lj` in place to log responsibilities; returns total log-likelihood.
double normalize_rows(Eigen::MatrixXd& lj) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < lj.rows(); ++i) {
        const double mx = lj.row(i).maxCoeff();
        const double lse = mx + std::log((lj.row(i).array() - mx).exp().sum());
        lj.row(i).array() -= lse;
        total += lse;
    }
    return total;
}

GmmModel m_step(const DataMatrix& x, const Eigen::MatrixXd& resp, double ridge) {
    const auto k = resp.cols();
    GmmModel m;
    const Eigen::VectorXd nk = resp.colwise().sum().transpose().array() + 10.0 * std::numeric_limits<double>::epsilon();
    m.weights = nk / nk.sum();
    m.means.resize(static_cast<std::size_t>(k));
    m.covariances.resize(static_cast<std::size_t>(k));
    for (Eigen::Index c = 0; c < k; ++c) {
        m.means[c] = (x.transpose() * resp.col(c)) / nk(c);
        const Eigen::MatrixXd diff = x.rowwise() - m.means[c].transpose();
        const Eigen::MatrixXd weighted = diff.array().colwise() * resp.col(c).array();
        Eigen::MatrixXd cov = (weighted.transpose() * diff) / nk(c);
        cov = 0.5 * (cov + cov.transpose());
        cov.diagonal().array() += ridge;
        m.covariances[c] = std::move(cov);
    }
    return m;
}

GmmFit em_run(const DataMatrix& x, int k, std::uint64_t seed, const GmmOptions& opt) {
    const auto n = x.rows();
    Eigen::MatrixXd resp = Eigen::MatrixXd::Zero(n, k);
    if (k == 1) {
        resp.setOnes();
    } else {
        KMeansOptions ko;
        ko.n_init = 1;
        const auto km = kmeans_fit(x, k, seed, ko);
        for (Eigen::Index i = 0; i < n; ++i) resp(i, km.partition.labels[i]) = 1.0;
    }
    GmmFit fit;
    fit.model = m_step(x, resp, opt.ridge);
    double prev = -std::numeric_limits<double>::infinity();
    for (int it = 0; it < opt.max_iter; ++it) {
        Eigen::MatrixXd lj = log_joint(fit.model, x);
        const double ll = normalize_rows(lj);
        fit.loglik_trace.push_back(ll);
        fit.model.log_likelihood = ll;
        fit.n_iter = it + 1;
        if (it > 0 && (ll - prev) / static_cast<double>(n) < opt.tol) break;
        prev = ll;
        if (it + 1 == opt.max_iter) break;
        fit.model = m_step(x, lj.array().exp().matrix(), opt.ridge);
    }
    // loglik_trace.back() belongs to the returned parameters
    return fit;
}

}  // namespace

GmmFit gmm_fit(const DataMatrix& x, int k, std::uint64_t seed, const GmmOptions& options) {
    if (k < 1) throw ConfigError("GMM needs K >= 1");
    if (options.n_init < 1) throw ConfigError("n_init must be positive");
    if (options.ridge <= 0.0) throw ConfigError("ridge must be positive");
    if (x.rows() < k) throw ConfigError("K exceeds the number of samples");
    if (x.rows() <= static_cast<Eigen::Index>(k) * x.cols()) {
        warn("GMM with K=" + std::to_string(k) + " in " + std::to_string(x.cols()) +
             " dimensions has few samples per parameter");
    }
    if (distinct_rows(x, static_cast<std::size_t>(k)) < static_cast<std::size_t>(k)) {
        throw NumericError("degenerate component");
    }
    GmmFit best;
    bool have = false;
    for (int r = 0; r < options.n_init; ++r) {
        auto run = em_run(x, k, derive_seed(seed, static_cast<std::uint64_t>(r)), options);
        if (!have || run.model.log_likelihood > best.model.log_likelihood) {
            best = std::move(run);
            have = true;
        }
        if (k == 1) break;  // deterministic initialization, restarts are identical
    }
    return best;
}

Eigen::VectorXd gmm_log_density(const GmmModel& model, const DataMatrix& x) {
    if (x.cols() != model.dim()) throw ConfigError("feature count does not match the GMM");
    Eigen::MatrixXd lj = log_joint(model, x);
    Eigen::VectorXd out(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double mx = lj.row(i).maxCoeff();
        out(i) = mx + std::log((lj.row(i).array() - mx).exp().sum());
    }
    return out;
}

Partition gmm_assign(const GmmModel& model, const DataMatrix& x) {
    if (x.cols() != model.dim()) throw ConfigError("feature count does not match the GMM");
    const Eigen::MatrixXd lj = log_joint(model, x);
    Partition p;
    p.k = model.k();
    p.labels.resize(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        int best = 0;
        for (int c = 1; c < p.k; ++c) {
            if (lj(i, c) > lj(i, best)) best = c;
        }
        p.labels[static_cast<std::size_t>(i)] = best;
    }
    return p;
}

double gmm_parameter_count(int k, int d) {
    return (k - 1) + static_cast<double>(k) * d + static_cast<double>(k) * d * (d + 1) / 2.0;
}

double gmm_bic(const GmmModel& model, std::size_t n_samples) {
    return -2.0 * model.log_likelihood +
           gmm_parameter_count(model.k(), model.dim()) * std::log(static_cast<double>(n_samples));
}

BicSelection select_k_bic(const DataMatrix& x, int k_min, int k_max, std::uint64_t seed,
                          const GmmOptions& options) {
    if (k_min < 1 || k_max < k_min) throw ConfigError("candidate range must satisfy 1 <= k_min <= k_max");
    BicSelection sel;
    double best = std::numeric_limits<double>::infinity();
    for (int k = k_min; k <= k_max; ++k) {
        const auto fit = gmm_fit(x, k, derive_seed(seed, static_cast<std::uint64_t>(k)), options);
        const double b = gmm_bic(fit.model, static_cast<std::size_t>(x.rows()));
        sel.candidates.push_back(k);
        sel.bic.push_back(b);
        if (b < best) {
            best = b;
            sel.k = k;
        }
    }
    return sel;
}

}  // namespace morphprof
