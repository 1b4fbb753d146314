#include "morphprof/error.hpp"
#include "morphprof/funclust.hpp"
#include "morphprof/log.hpp"
#include "morphprof/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace morphprof {

namespace {

std::size_t condensed_index(std::size_t n, std::size_t i, std::size_t j) {
    if (i > j) std::swap(i, j);
    return i * n - i * (i + 1) / 2 + (j - i - 1);
}

struct Merge {
    std::size_t a;
    std::size_t b;
    float height;
};

// Nearest-neighbor chain for average linkage on a condensed dissimilarity matrix
// (overwritten). Merges come back in discovery order, not sorted by height.
std::vector<Merge> average_linkage(std::vector<float>& d, std::size_t n) {
    std::vector<char> active(n, 1);
    std::vector<std::size_t> size(n, 1);
    std::vector<std::size_t> chain;
    std::vector<Merge> merges;
    merges.reserve(n > 0 ? n - 1 : 0);
    std::size_t remaining = n;
    while (remaining > 1) {
        if (chain.empty()) {
            std::size_t first = 0;
            while (!active[first]) ++first;
            chain.push_back(first);
        }
        std::size_t x = 0, y = 0;
        for (;;) {
            x = chain.back();
            const std::size_t prev = chain.size() > 1 ? chain[chain.size() - 2] : n;
            float best = std::numeric_limits<float>::infinity();
            std::size_t arg = n;
            if (prev < n) {
                best = d[condensed_index(n, x, prev)];
                arg = prev;
            }
            for (std::size_t z = 0; z < n; ++z) {
                if (!active[z] || z == x) continue;
                const float v = d[condensed_index(n, x, z)];
                if (v < best) {
                    best = v;
                    arg = z;
                }
            }
            if (arg == prev) {
                y = prev;
                break;
            }
            chain.push_back(arg);
        }
        chain.pop_back();
        chain.pop_back();
        const float h = d[condensed_index(n, x, y)];
        const std::size_t keep = std::min(x, y);
        const std::size_t drop = std::max(x, y);
        merges.push_back({x, y, h});
        const double sk = static_cast<double>(size[keep]);
        const double sd = static_cast<double>(size[drop]);
        for (std::size_t z = 0; z < n; ++z) {
            if (!active[z] || z == keep || z == drop) continue;
            const double merged =
                (sk * d[condensed_index(n, keep, z)] + sd * d[condensed_index(n, drop, z)]) / (sk + sd);
            d[condensed_index(n, keep, z)] = static_cast<float>(merged);
        }
        active[drop] = 0;
        size[keep] += size[drop];
        --remaining;
    }
    return merges;
}

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t i) {
    while (parent[i] != i) {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    return i;
}

DataMatrix column(const DataMatrix& m, Eigen::Index j) {
    DataMatrix c(m.rows(), 1);
    c.col(0) = m.col(j);
    return c;
}

bool is_constant(const DataMatrix& m, Eigen::Index j) {
    return m.col(j).maxCoeff() == m.col(j).minCoeff();
}

std::vector<double> values_on_grid(const FunctionalCurve& c, const std::vector<double>& grid) {
    return c.evaluate(grid);
}

}  // namespace

ProjectionBasis ou_basis(std::size_t m, const std::vector<double>& grid, double theta, double sigma,
                         std::uint64_t seed) {
    if (!(theta > 0.0) || !(sigma > 0.0)) throw ConfigError("OU theta and sigma must be positive");
    if (m < 1) throw ConfigError("need at least one projection function");
    if (grid.size() < 2) throw ConfigError("projection grid needs at least 2 points");
    for (std::size_t k = 1; k < grid.size(); ++k) {
        if (!(grid[k] > grid[k - 1])) throw ConfigError("projection grid must be increasing");
    }
    ProjectionBasis b;
    b.grid = grid;
    b.seed = seed;
    b.ou_theta = theta;
    b.ou_sigma = sigma;
    b.values.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(grid.size()));
    const double stationary_sd = sigma / std::sqrt(2.0 * theta);
    for (std::size_t j = 0; j < m; ++j) {
        Rng rng(derive_seed(seed, j));
        const auto row = static_cast<Eigen::Index>(j);
        double x = stationary_sd * rng.normal();
        b.values(row, 0) = x;
        for (std::size_t k = 1; k < grid.size(); ++k) {
            const double decay = std::exp(-theta * (grid[k] - grid[k - 1]));
            x = x * decay + stationary_sd * std::sqrt(1.0 - decay * decay) * rng.normal();
            b.values(row, static_cast<Eigen::Index>(k)) = x;
        }
    }
    return b;
}

std::vector<double> project_values(const std::vector<double>& values, const ProjectionBasis& b) {
    if (values.size() != b.grid.size()) throw ConfigError("grid mismatch");
    std::vector<double> out(b.m());
    std::vector<double> prod(values.size());
    for (std::size_t j = 0; j < b.m(); ++j) {
        for (std::size_t k = 0; k < values.size(); ++k) {
            prod[k] = values[k] * b.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k));
        }
        out[j] = trapezoid(b.grid, prod);
    }
    return out;
}

std::vector<double> project(const FunctionalCurve& c, const ProjectionBasis& b) {
    if (!c.grid.empty()) {
        if (c.grid != b.grid) throw ConfigError("grid mismatch");
        return project_values(c.grid_values, b);
    }
    return project_values(c.evaluate(b.grid), b);
}

BaseClusterings base_clusterings(const DataMatrix& coeffs, int k, std::uint64_t seed, const GmmOptions& options) {
    if (k < 2) throw ConfigError("base clusterings need k >= 2");
    BaseClusterings out;
    for (Eigen::Index j = 0; j < coeffs.cols(); ++j) {
        const auto col = column(coeffs, j);
        try {
            const auto fit = gmm_fit(col, k, derive_seed(seed, static_cast<std::uint64_t>(j)), options);
            out.labels.push_back(gmm_assign(fit.model, col).labels);
            out.columns.push_back(static_cast<std::size_t>(j));
        } catch (const NumericError& e) {
            warn("projection column " + std::to_string(j) + " skipped: " + e.what());
            out.skipped.push_back(static_cast<std::size_t>(j));
        }
    }
    return out;
}

ConsensusResult consensus(const std::vector<std::vector<int>>& base, int k, bool keep_matrix) {
    if (base.empty()) throw ConfigError("consensus needs at least one base clustering");
    const std::size_t n = base.front().size();
    for (const auto& b : base) {
        if (b.size() != n) throw ConfigError("base clusterings differ in length");
    }
    if (n > kConsensusMaxItems) throw ConfigError("exemplar set too large");
    if (base.size() > 65535) throw ConfigError("too many base clusterings");
    if (k < 1 || static_cast<std::size_t>(k) > n) throw ConfigError("k must lie in [1, n]");

    ConsensusResult res;
    res.base = base;
    res.matrix_items = n;
    const std::size_t pairs = n * (n - (n > 0 ? 1 : 0)) / 2;
    std::vector<float> dist(pairs);
    const double m = static_cast<double>(base.size());
    {
        std::vector<std::uint16_t> agree(pairs, 0);
        for (const auto& b : base) {
            std::size_t idx = 0;
            for (std::size_t i = 0; i < n; ++i) {
                const int li = b[i];
                for (std::size_t j = i + 1; j < n; ++j, ++idx) agree[idx] += static_cast<std::uint16_t>(b[j] == li);
            }
        }
        if (keep_matrix) res.coassociation.resize(pairs);
        for (std::size_t p = 0; p < pairs; ++p) {
            const double frac = agree[p] / m;
            dist[p] = static_cast<float>(1.0 - frac);
            if (keep_matrix) res.coassociation[p] = static_cast<float>(frac);
        }
    }

    auto merges = average_linkage(dist, n);
    std::stable_sort(merges.begin(), merges.end(), [](const Merge& a, const Merge& b) { return a.height < b.height; });
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    const std::size_t apply = n - static_cast<std::size_t>(k);
    for (std::size_t t = 0; t < apply; ++t) {
        const std::size_t ra = find_root(parent, merges[t].a);
        const std::size_t rb = find_root(parent, merges[t].b);
        parent[std::max(ra, rb)] = std::min(ra, rb);
    }
    std::vector<int> root_label(n, -1);
    res.final_partition.labels.resize(n);
    int next = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t r = find_root(parent, i);
        if (root_label[r] < 0) root_label[r] = next++;
        res.final_partition.labels[i] = root_label[r];
    }
    res.final_partition.k = next;
    return res;
}

FunctionalKSelection select_k_functional(const DataMatrix& coeffs, int k_min, int k_max, std::uint64_t seed,
                                         const GmmOptions& options) {
    if (k_min < 1 || k_max < k_min) throw ConfigError("candidate range must satisfy 1 <= k_min <= k_max");
    std::vector<Eigen::Index> usable;
    for (Eigen::Index j = 0; j < coeffs.cols(); ++j) {
        if (!is_constant(coeffs, j)) usable.push_back(j);
    }
    if (usable.empty()) throw NumericError("all projection columns are constant");
    const auto n = static_cast<std::size_t>(coeffs.rows());

    FunctionalKSelection sel;
    double best = std::numeric_limits<double>::infinity();
    for (int k = k_min; k <= k_max; ++k) {
        double total = 0.0;
        for (Eigen::Index j : usable) {
            try {
                const auto fit = gmm_fit(column(coeffs, j), k,
                                         derive_seed(derive_seed(seed, static_cast<std::uint64_t>(k)),
                                                     static_cast<std::uint64_t>(j)),
                                         options);
                total += gmm_bic(fit.model, n);
            } catch (const NumericError&) {
                total = std::numeric_limits<double>::infinity();
                break;
            }
        }
        sel.candidates.push_back(k);
        sel.bic.push_back(total);
        if (total < best) {
            best = total;
            sel.k = k;
        }
    }
    if (sel.k == 0) throw NumericError("no candidate k could be fitted");
    return sel;
}

HybridSample hybrid_sample(const std::vector<FunctionalCurve>& curves, double r_frac, double k_frac,
                           std::uint64_t seed, int n_basis) {
    const std::size_t n = curves.size();
    if (n < 20) throw ConfigError("hybrid sampling needs at least 20 curves");
    if (!(r_frac > 0.0 && r_frac <= 1.0) || !(k_frac > 0.0 && k_frac <= 1.0)) throw ConfigError("invalid fractions");
    const auto n_r = static_cast<std::size_t>(std::llround(r_frac * static_cast<double>(n)));
    const auto n_k = static_cast<std::size_t>(std::llround(k_frac * static_cast<double>(n)));
    if (n_k < 2 || n_k > n_r) throw ConfigError("invalid fractions");

    HybridSample out;
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(derive_seed(seed, 0));
    for (std::size_t i = 0; i < n_r; ++i) std::swap(idx[i], idx[i + rng.below(n - i)]);
    idx.resize(n_r);
    std::sort(idx.begin(), idx.end());
    out.drawn = idx;

    const auto grid = angle_grid(kFunctionalGridSize);
    DataMatrix x(static_cast<Eigen::Index>(n_r), static_cast<Eigen::Index>(grid.size()));
    for (std::size_t i = 0; i < n_r; ++i) {
        const auto v = values_on_grid(curves[idx[i]], grid);
        for (std::size_t g = 0; g < grid.size(); ++g) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(g)) = v[g];
    }
    KMeansOptions ko;
    ko.n_init = 3;
    const auto km = kmeans_fit(x, static_cast<int>(n_k), derive_seed(seed, 1), ko);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double r = (x.row(i) - km.model.centroids.row(km.partition.labels[static_cast<std::size_t>(i)])).norm();
        out.max_cluster_radius = std::max(out.max_cluster_radius, r);
    }
    out.exemplars.reserve(n_k);
    for (Eigen::Index c = 0; c < km.model.centroids.rows(); ++c) {
        const auto row = km.model.centroids.row(c);
        out.exemplars.push_back(smooth_bspline(std::vector<double>(row.data(), row.data() + row.size()), n_basis));
    }
    return out;
}

NearestCentroidClassifier::NearestCentroidClassifier(const ExemplarSet& exemplars) {
    if (exemplars.curves.empty()) throw ConfigError("empty exemplar set");
    if (exemplars.labels.labels.size() != exemplars.curves.size()) throw ConfigError("exemplars are not labeled");
    grid_ = exemplars.curves.front().grid.empty() ? angle_grid() : exemplars.curves.front().grid;
    const auto k = static_cast<std::size_t>(exemplars.labels.k);
    means_.assign(k, std::vector<double>(grid_.size(), 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < exemplars.curves.size(); ++i) {
        const auto l = static_cast<std::size_t>(exemplars.labels.labels[i]);
        const auto v = values_on_grid(exemplars.curves[i], grid_);
        for (std::size_t g = 0; g < grid_.size(); ++g) means_[l][g] += v[g];
        ++counts[l];
    }
    for (std::size_t l = 0; l < k; ++l) {
        if (counts[l] == 0) {
            means_[l].clear();
            continue;
        }
        for (double& v : means_[l]) v /= static_cast<double>(counts[l]);
    }
}

int NearestCentroidClassifier::classify(const std::vector<double>& values) const {
    if (values.size() != grid_.size()) throw ConfigError("grid mismatch");
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    std::vector<double> sq(values.size());
    for (std::size_t l = 0; l < means_.size(); ++l) {
        if (means_[l].empty()) continue;
        for (std::size_t g = 0; g < values.size(); ++g) {
            const double diff = values[g] - means_[l][g];
            sq[g] = diff * diff;
        }
        const double d = trapezoid(grid_, sq);
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(l);
        }
    }
    return best;
}

int NearestCentroidClassifier::classify(const FunctionalCurve& c) const {
    return classify(values_on_grid(c, grid_));
}

int nearest_centroid_classify(const ExemplarSet& exemplars, const FunctionalCurve& c) {
    return NearestCentroidClassifier(exemplars).classify(c);
}

void validate(const GpmixConfig& c) {
    if (c.m_projections < 1) throw ConfigError("m_projections must be positive");
    if (!(c.ou_theta > 0.0) || !(c.ou_sigma > 0.0)) throw ConfigError("ou_theta and ou_sigma must be positive");
    if (!(c.r_frac > 0.0 && c.r_frac <= 1.0) || !(c.k_frac > 0.0 && c.k_frac <= 1.0)) throw ConfigError("invalid fractions");
    if (c.k_min < 2 || c.k_max < c.k_min) throw ConfigError("k range must satisfy 2 <= k_min <= k_max");
    if (c.k && *c.k < 2) throw ConfigError("fixed k must be at least 2");
    if (c.n_basis < kSplineDegree + 1 || static_cast<std::size_t>(c.n_basis) > kFunctionalGridSize) {
        throw ConfigError("n_basis must lie in [4, 200]");
    }
    if (c.gmm_n_init < 1) throw ConfigError("gmm_n_init must be positive");
}

GpmixResult gpmix_pipeline(const std::vector<FunctionalCurve>& curves, const GpmixConfig& cfg) {
    validate(cfg);
    const std::size_t n = curves.size();
    const int k_needed = cfg.k ? *cfg.k : cfg.k_max;
    if (n <= static_cast<std::size_t>(k_needed)) throw ConfigError("too few curves for the requested cluster count");
    const auto grid = angle_grid(kFunctionalGridSize);

    GpmixResult res;
    res.sampled = cfg.force_sampling || n > cfg.direct_threshold;
    if (res.sampled) {
        auto hs = hybrid_sample(curves, cfg.r_frac, cfg.k_frac, derive_seed(cfg.seed, 1), cfg.n_basis);
        res.exemplars.curves = std::move(hs.exemplars);
        res.exemplars.provenance.assign(res.exemplars.curves.size(), ExemplarSource::Prototype);
    } else {
        res.exemplars.curves = curves;
        res.exemplars.provenance.assign(n, ExemplarSource::Random);
    }
    const std::size_t n_e = res.exemplars.curves.size();
    if (n_e <= static_cast<std::size_t>(k_needed)) throw ConfigError("too few exemplars for the requested cluster count");

    const auto basis = ou_basis(cfg.m_projections, grid, cfg.ou_theta, cfg.ou_sigma, derive_seed(cfg.seed, 2));
    DataMatrix coeffs(static_cast<Eigen::Index>(n_e), static_cast<Eigen::Index>(cfg.m_projections));
    for (std::size_t i = 0; i < n_e; ++i) {
        const auto p = project_values(values_on_grid(res.exemplars.curves[i], grid), basis);
        for (std::size_t j = 0; j < p.size(); ++j) coeffs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = p[j];
    }

    GmmOptions go;
    go.n_init = cfg.gmm_n_init;
    int k = 0;
    if (cfg.k) {
        k = *cfg.k;
    } else {
        res.selection = select_k_functional(coeffs, cfg.k_min, cfg.k_max, derive_seed(cfg.seed, 3), go);
        k = res.selection.k;
    }
    const auto base = base_clusterings(coeffs, k, derive_seed(cfg.seed, 4), go);
    if (base.labels.empty()) throw NumericError("all projection columns are degenerate");
    res.base_count = base.labels.size();
    res.skipped_columns = base.skipped.size();
    const auto cons = consensus(base.labels, k);
    res.consensus_items = cons.matrix_items;
    res.exemplars.labels = cons.final_partition;

    DataMatrix values(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(grid.size()));
    for (std::size_t i = 0; i < n; ++i) {
        const auto v = values_on_grid(curves[i], grid);
        for (std::size_t g = 0; g < grid.size(); ++g) values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(g)) = v[g];
    }
    if (res.sampled) {
        const NearestCentroidClassifier clf(res.exemplars);
        res.partition.k = k;
        res.partition.labels.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto row = values.row(static_cast<Eigen::Index>(i));
            res.partition.labels[i] = clf.classify(std::vector<double>(row.data(), row.data() + row.size()));
        }
    } else {
        res.partition = cons.final_partition;
    }

    std::vector<int> present(res.partition.labels);
    std::sort(present.begin(), present.end());
    present.erase(std::unique(present.begin(), present.end()), present.end());
    if (present.size() >= 2) {
        res.validity = validity_report(values, res.partition, derive_seed(cfg.seed, 5));
    } else {
        warn("functional clustering produced a single cluster; validity indices not computed");
        res.validity.k = static_cast<int>(present.size());
    }
    return res;
}

GpmixResult gpmix_pipeline(const std::vector<RadialProfile>& profiles, const GpmixConfig& cfg) {
    validate(cfg);
    std::vector<FunctionalCurve> curves;
    curves.reserve(profiles.size());
    for (const auto& p : profiles) {
        if (p.size() != kFunctionalGridSize || !p.normalized || !p.aligned) {
            throw ConfigError("profiles must be 200-sample, normalized and aligned");
        }
        curves.push_back(smooth_bspline(p, cfg.n_basis));
    }
    return gpmix_pipeline(curves, cfg);
}

}  // namespace morphprof
