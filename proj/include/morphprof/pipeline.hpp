#pragma once

#include "morphprof/clustering.hpp"
#include "morphprof/descriptors.hpp"
#include "morphprof/funclust.hpp"
#include "morphprof/synth.hpp"
#include "morphprof/validity.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace morphprof {

inline constexpr const char* kToolName = "morphprof";
inline constexpr const char* kToolVersion = "0.1.0";

enum class FeatureKind { CDF100, FD10, ZM12, Functional };
enum class ClustererKind { KMeans, Gmm, Gpmix };

std::string_view feature_name(FeatureKind f);
FeatureKind parse_feature(std::string_view name);  // cdf100 | fd10 | zm12 | functional
std::string_view clusterer_name(ClustererKind c);
ClustererKind parse_clusterer(std::string_view name);  // kmeans | gmm | gpmix

/// Radial profile samples used as the functional representation.
inline constexpr std::size_t kFunctionalSamples = kFunctionalGridSize;

struct PipelineConfig {
    std::optional<std::filesystem::path> input_dir;
    std::optional<DatasetConfig> synthetic;
    FeatureKind descriptor = FeatureKind::FD10;
    ClustererKind clusterer = ClustererKind::KMeans;
    std::optional<int> k;  // empty = automatic selection
    std::optional<int> pca_components;
    std::uint64_t seed = 0;
    std::filesystem::path output_dir = "out";
    unsigned threads = 0;  // 0 = logical cores
    int k_min = 2;         // k-means / gpmix; GMM selection starts at 1
    int k_max = 9;
    KMeansOptions kmeans;
    GmmOptions gmm;
    GpmixConfig gpmix;  // its seed, k and range are taken from the fields above
    bool figures = true;
};

void validate(const PipelineConfig& config);

DatasetConfig dataset_config_from_json(const nlohmann::json& j);
nlohmann::json dataset_config_to_json(const DatasetConfig& c);

/// Keys mirror the command-line flags; absent keys keep their defaults.
PipelineConfig pipeline_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
nlohmann::json pipeline_config_to_json(const PipelineConfig& c);

struct ParticleRecord {
    std::size_t id = 0;
    std::string file;
    ShapeMetrics metrics;
    std::vector<double> descriptor;
    int label = -1;
    std::optional<int> truth;  // synthetic class
};

struct Timings {
    double extraction_s = 0.0;
    double clustering_s = 0.0;
    double ms_per_particle = 0.0;
};

struct Representative {
    int label = 0;
    std::size_t particle = 0;  // index into RunReport::particles
    BinaryMask mask;
};

struct RunReport {
    nlohmann::json config;
    std::vector<std::string> descriptor_headers;
    std::vector<ParticleRecord> particles;
    std::vector<std::string> skipped_files;
    int k = 0;
    nlohmann::json selection;  // candidate K and their criterion values; null when K was fixed
    ValidityReport validity;
    std::vector<double> shares;
    std::optional<double> ari;
    Timings timings;
    std::vector<Representative> representatives;  // up to 25 per cluster, nearest to centroid first
};

RunReport run_pipeline(const PipelineConfig& config);

/// Timings live under "timings" only, so dropping that key leaves a deterministic document.
nlohmann::json report_to_json(const RunReport& report, bool include_timings = true);

/// report.json, particles.csv and, when enabled, the figures.
void write_report(const RunReport& report, const std::filesystem::path& dir, bool figures);

/// scatter.svg, boxplots.svg and montage.svg. Needs at least two clusters.
std::vector<std::filesystem::path> emit_figures(const RunReport& report, const std::filesystem::path& dir);

inline constexpr std::size_t kScatterMaxPoints = 5000;
inline constexpr std::size_t kMontagePerCluster = 25;

struct BenchmarkRow {
    std::string descriptor;
    std::string clusterer;
    std::size_t n_particles = 0;
    int repeats = 0;
    double extraction_mean_s = 0.0;
    double extraction_sd_s = 0.0;
    double clustering_mean_s = 0.0;
    double clustering_sd_s = 0.0;
    double ms_per_particle = 0.0;  // (extraction + clustering) mean per particle
};

/// Times extraction and clustering with K fixed (default 4) for each descriptor
/// on one shared particle set. Sample standard deviation; 0 for a single repeat.
std::vector<BenchmarkRow> benchmark(const PipelineConfig& config, const std::vector<FeatureKind>& descriptors,
                                    int repeats = 5);

nlohmann::json benchmark_to_json(const std::vector<BenchmarkRow>& rows);
std::string format_benchmark(const std::vector<BenchmarkRow>& rows);

}  // namespace morphprof
