#pragma once

#include "morphprof/clustering.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace morphprof {

/// Silhouette is evaluated on a seeded subsample above this many points.
inline constexpr std::size_t kSilhouetteMaxSamples = 20000;

struct ValidityReport {
    double silhouette = 0.0;
    double davies_bouldin = 0.0;
    double calinski_harabasz = 0.0;
    std::optional<double> bic;
    int k = 0;
    bool subsampled = false;
};

/// Condensed upper-triangle Euclidean distances, reused across candidate K.
class PairwiseDistances {
public:
    explicit PairwiseDistances(const DataMatrix& x);

    std::size_t size() const { return n_; }
    double operator()(std::size_t i, std::size_t j) const;

private:
    std::size_t n_;
    std::vector<double> d_;
};

/// Mean of (b - a) / max(a, b). Singleton clusters contribute 0, as do points with a = b = 0.
double silhouette_score(const DataMatrix& x, const std::vector<int>& labels);
double silhouette_score(const PairwiseDistances& dist, const std::vector<int>& labels);

struct SampledScore {
    double value = 0.0;
    bool subsampled = false;
};

/// Exact silhouette up to `max_samples` points, otherwise on a seeded uniform subsample of that size.
SampledScore silhouette_sampled(const DataMatrix& x, const std::vector<int>& labels, std::uint64_t seed,
                                std::size_t max_samples = kSilhouetteMaxSamples);

/// Seeded subsample indices (sorted) used by silhouette_sampled; all indices when n <= max_samples.
std::vector<std::size_t> silhouette_sample_indices(std::size_t n, std::uint64_t seed, std::size_t max_samples);

double davies_bouldin(const DataMatrix& x, const std::vector<int>& labels);
double calinski_harabasz(const DataMatrix& x, const std::vector<int>& labels);
double adjusted_rand(const std::vector<int>& a, const std::vector<int>& b);

/// Silhouette (possibly subsampled), Davies-Bouldin and Calinski-Harabasz for a partition.
ValidityReport validity_report(const DataMatrix& x, const Partition& p, std::uint64_t seed);

}  // namespace morphprof
