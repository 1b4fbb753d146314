#pragma once

#include "morphprof/clustering.hpp"
#include "morphprof/descriptors.hpp"
#include "morphprof/validity.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace morphprof {

inline constexpr std::size_t kFunctionalGridSize = 200;
inline constexpr int kSplineDegree = 3;
inline constexpr int kDefaultBasisCount = 20;
/// Largest item count consensus will build a co-association matrix for.
inline constexpr std::size_t kConsensusMaxItems = 10000;

/// Angles 2*pi*k/n, k = 0..n-1.
std::vector<double> angle_grid(std::size_t n = kFunctionalGridSize);

/// Trapezoid rule over an increasing grid.
double trapezoid(const std::vector<double>& grid, const std::vector<double>& f);

// ---------------------------------------------------------------------------
// B-spline curves
// ---------------------------------------------------------------------------

/// Open knot vector on [lo, hi]: degree+1 repeated end knots, uniform interior.
std::vector<double> clamped_uniform_knots(int n_basis, int degree, double lo, double hi);

/// All basis function values at t (Cox-de Boor); t outside the knot span is clamped.
std::vector<double> bspline_basis_values(const std::vector<double>& knots, int degree, double t);

struct FunctionalCurve {
    std::vector<double> knots;
    std::vector<double> coefficients;
    int degree = kSplineDegree;
    // samples on `grid`, filled by smooth_bspline
    std::vector<double> grid;
    std::vector<double> grid_values;

    double evaluate(double t) const;
    std::vector<double> evaluate(const std::vector<double>& at) const;
};

/// Least-squares cubic spline through values sampled on angle_grid(values.size()).
FunctionalCurve smooth_bspline(const std::vector<double>& values, int n_basis = kDefaultBasisCount);

/// Profile must carry 200 samples.
FunctionalCurve smooth_bspline(const RadialProfile& p, int n_basis = kDefaultBasisCount);

// ---------------------------------------------------------------------------
// Random projections
// ---------------------------------------------------------------------------

struct ProjectionBasis {
    std::vector<double> grid;
    Eigen::MatrixXd values;  // m x grid
    std::uint64_t seed = 0;
    double ou_theta = 1.0;
    double ou_sigma = 1.0;

    std::size_t m() const { return static_cast<std::size_t>(values.rows()); }
};

/// m Ornstein-Uhlenbeck paths on the grid, exact transition, stationary start.
ProjectionBasis ou_basis(std::size_t m, const std::vector<double>& grid, double theta, double sigma,
                         std::uint64_t seed);

/// Trapezoid inner products with each basis function. A curve carrying samples on
/// a different grid is rejected; one without samples is evaluated on the basis grid.
std::vector<double> project(const FunctionalCurve& c, const ProjectionBasis& b);
std::vector<double> project_values(const std::vector<double>& values, const ProjectionBasis& b);

// ---------------------------------------------------------------------------
// Ensemble clustering
// ---------------------------------------------------------------------------

struct BaseClusterings {
    std::vector<std::vector<int>> labels;  // one per usable column
    std::vector<std::size_t> columns;      // column index of each entry in `labels`
    std::vector<std::size_t> skipped;
};

/// One univariate k-component mixture per coefficient column. Degenerate columns
/// are skipped with a warning.
BaseClusterings base_clusterings(const DataMatrix& coeffs, int k, std::uint64_t seed, const GmmOptions& options = {});

struct ConsensusResult {
    Partition final_partition;
    std::vector<std::vector<int>> base;
    std::vector<float> coassociation;  // condensed upper triangle, only when requested
    std::size_t matrix_items = 0;      // side length of the co-association matrix built
};

/// Average-linkage clustering of 1 - co-association, cut at k clusters.
ConsensusResult consensus(const std::vector<std::vector<int>>& base, int k, bool keep_matrix = false);

struct FunctionalKSelection {
    int k = 0;
    std::vector<int> candidates;
    std::vector<double> bic;  // summed over columns; +inf when a column cannot support k
};

FunctionalKSelection select_k_functional(const DataMatrix& coeffs, int k_min, int k_max, std::uint64_t seed,
                                         const GmmOptions& options = {});

enum class ExemplarSource { Random, Prototype };

struct ExemplarSet {
    std::vector<FunctionalCurve> curves;
    std::vector<ExemplarSource> provenance;
    Partition labels;
};

struct HybridSample {
    std::vector<FunctionalCurve> exemplars;
    std::vector<std::size_t> drawn;  // indices of the random draw, sorted
    double max_cluster_radius = 0.0;  // largest member-to-centroid distance of the k-means run
};

/// Random draw of round(r_frac*n) curves, then k-means prototypes with K = round(k_frac*n).
HybridSample hybrid_sample(const std::vector<FunctionalCurve>& curves, double r_frac, double k_frac,
                           std::uint64_t seed, int n_basis = kDefaultBasisCount);

class NearestCentroidClassifier {
public:
    explicit NearestCentroidClassifier(const ExemplarSet& exemplars);

    /// Label of the nearest cluster mean under trapezoid L2 distance; ties to the lower label.
    int classify(const std::vector<double>& grid_values) const;
    int classify(const FunctionalCurve& c) const;

    const std::vector<double>& grid() const { return grid_; }
    const std::vector<std::vector<double>>& means() const { return means_; }

private:
    std::vector<double> grid_;
    std::vector<std::vector<double>> means_;
};

int nearest_centroid_classify(const ExemplarSet& exemplars, const FunctionalCurve& c);

// ---------------------------------------------------------------------------
// End-to-end
// ---------------------------------------------------------------------------

struct GpmixConfig {
    std::size_t m_projections = 12;
    double ou_theta = 1.0;
    double ou_sigma = 1.0;
    double r_frac = 0.30;
    double k_frac = 0.05;
    int k_min = 2;
    int k_max = 9;
    std::uint64_t seed = 0;
    int n_basis = kDefaultBasisCount;
    std::optional<int> k;                   // fixed cluster count, skips selection
    std::size_t direct_threshold = 2000;    // at or below: consensus on every curve
    bool force_sampling = false;
    int gmm_n_init = 2;
};

struct GpmixResult {
    Partition partition;
    ValidityReport validity;
    FunctionalKSelection selection;  // empty when k was fixed
    ExemplarSet exemplars;
    bool sampled = false;
    std::size_t base_count = 0;
    std::size_t skipped_columns = 0;
    std::size_t consensus_items = 0;
};

void validate(const GpmixConfig& config);

GpmixResult gpmix_pipeline(const std::vector<RadialProfile>& profiles, const GpmixConfig& config);
GpmixResult gpmix_pipeline(const std::vector<FunctionalCurve>& curves, const GpmixConfig& config);

}  // namespace morphprof
