#include "morphprof/pipeline.hpp"

#include "morphprof/error.hpp"
#include "morphprof/log.hpp"
#include "morphprof/model_io.hpp"
#include "morphprof/parallel.hpp"
#include "morphprof/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

namespace morphprof {

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view feature_name(FeatureKind f) {
    switch (f) {
        case FeatureKind::CDF100: return "cdf100";
        case FeatureKind::FD10: return "fd10";
        case FeatureKind::ZM12: return "zm12";
        case FeatureKind::Functional: return "functional";
    }
    return "?";
}

FeatureKind parse_feature(std::string_view name) {
    if (name == "functional") return FeatureKind::Functional;
    switch (parse_descriptor(name)) {
        case DescriptorKind::CDF100: return FeatureKind::CDF100;
        case DescriptorKind::FD10: return FeatureKind::FD10;
        case DescriptorKind::ZM12: return FeatureKind::ZM12;
    }
    throw ConfigError("unknown descriptor: " + std::string(name));
}

std::string_view clusterer_name(ClustererKind c) {
    switch (c) {
        case ClustererKind::KMeans: return "kmeans";
        case ClustererKind::Gmm: return "gmm";
        case ClustererKind::Gpmix: return "gpmix";
    }
    return "?";
}

ClustererKind parse_clusterer(std::string_view name) {
    if (name == "kmeans") return ClustererKind::KMeans;
    if (name == "gmm") return ClustererKind::Gmm;
    if (name == "gpmix") return ClustererKind::Gpmix;
    throw ConfigError("unknown clusterer: " + std::string(name));
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::size_t feature_length(FeatureKind f) {
    switch (f) {
        case FeatureKind::CDF100: return descriptor_length(DescriptorKind::CDF100);
        case FeatureKind::FD10: return descriptor_length(DescriptorKind::FD10);
        case FeatureKind::ZM12: return descriptor_length(DescriptorKind::ZM12);
        case FeatureKind::Functional: return kFunctionalSamples;
    }
    return 0;
}

std::vector<std::string> feature_headers(FeatureKind f) {
    switch (f) {
        case FeatureKind::CDF100: return descriptor_headers(DescriptorKind::CDF100);
        case FeatureKind::FD10: return descriptor_headers(DescriptorKind::FD10);
        case FeatureKind::ZM12: return descriptor_headers(DescriptorKind::ZM12);
        case FeatureKind::Functional: break;
    }
    std::vector<std::string> out;
    char buf[32];
    for (std::size_t i = 0; i < kFunctionalSamples; ++i) {
        std::snprintf(buf, sizeof buf, "profile_%03zu", i);
        out.emplace_back(buf);
    }
    return out;
}

// Masks come either from a synthetic batch or from segmented image files.
struct Source {
    std::vector<SyntheticSpec> specs;
    std::vector<fs::path> files;
    std::vector<int> truth;

    std::size_t size() const { return specs.empty() ? files.size() : specs.size(); }
    bool synthetic() const { return !specs.empty(); }

    std::string name(std::size_t i) const {
        if (synthetic()) {
            char buf[48];
            std::snprintf(buf, sizeof buf, "synthetic/particle_%06zu", i);
            return buf;
        }
        return files[i].generic_string();
    }

    BinaryMask mask(std::size_t i) const {
        return synthetic() ? generate_particle(specs[i]) : segment_particle(load_gray_image(files[i]));
    }
};

Source make_source(const PipelineConfig& config) {
    Source src;
    if (config.synthetic) {
        const auto data = generate_dataset(*config.synthetic);
        src.specs = data.specs;
        src.truth = data.labels;
    } else {
        src.files = list_images(*config.input_dir);
        if (src.files.empty()) throw InputError("no input images");
    }
    return src;
}

struct Features {
    ShapeMetrics metrics;
    std::vector<double> values;
};

Features extract_features(FeatureKind kind, const BinaryMask& mask) {
    Features f;
    const Contour contour = trace_contour(mask);
    f.metrics = shape_metrics(mask, contour);
    switch (kind) {
        case FeatureKind::FD10: f.values = fd_descriptor(contour).values; break;
        case FeatureKind::CDF100: f.values = cdf_descriptor(mask, centroid_of(mask)).values; break;
        case FeatureKind::ZM12: f.values = zm_descriptor(mask).values; break;
        case FeatureKind::Functional:
            f.values = align_profile(normalize_profile(radial_profile(mask, centroid_of(mask), kFunctionalSamples))).samples;
            break;
    }
    return f;
}

int needed_k(const PipelineConfig& c) {
    return c.k ? *c.k : c.k_max;
}

std::size_t min_particles(const PipelineConfig& c) {
    return std::max<std::size_t>(50, static_cast<std::size_t>(needed_k(c)) * 10);
}

DataMatrix to_matrix(const std::vector<std::vector<double>>& rows, std::size_t dim) {
    DataMatrix x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < dim; ++j) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
    return x;
}

struct ClusterOutcome {
    Partition partition;
    json selection;
    std::optional<double> bic;
    std::optional<ValidityReport> validity;  // filled by gpmix
};

ClustererKind effective_clusterer(FeatureKind f, ClustererKind c) {
    if (f == FeatureKind::Functional) return ClustererKind::Gpmix;
    return c == ClustererKind::Gpmix ? ClustererKind::KMeans : c;
}

ClusterOutcome cluster(const PipelineConfig& config, FeatureKind feature, ClustererKind clusterer,
                       const DataMatrix& x, std::optional<int> k_fixed) {
    ClusterOutcome out;
    DataMatrix z;
    const DataMatrix* data = &x;
    if (config.pca_components && feature != FeatureKind::Functional) {
        const auto pca = pca_fit(x, *config.pca_components);
        z = pca_transform(pca, x);
        data = &z;
    }
    switch (clusterer) {
        case ClustererKind::KMeans: {
            int k = 0;
            if (k_fixed) {
                k = *k_fixed;
            } else {
                const auto sel = select_k_silhouette(*data, config.k_min, config.k_max, config.seed, config.kmeans);
                k = sel.k;
                out.selection = {{"criterion", "silhouette"}, {"candidates", sel.candidates},
                                 {"scores", sel.scores}, {"subsampled", sel.subsampled}};
            }
            out.partition = kmeans_fit(*data, k, derive_seed(config.seed, static_cast<std::uint64_t>(k)), config.kmeans).partition;
            break;
        }
        case ClustererKind::Gmm: {
            int k = 0;
            if (k_fixed) {
                k = *k_fixed;
            } else {
                const auto sel = select_k_bic(*data, 1, config.k_max, config.seed, config.gmm);
                k = sel.k;
                out.selection = {{"criterion", "bic"}, {"candidates", sel.candidates}, {"bic", sel.bic}};
            }
            const auto fit = gmm_fit(*data, k, derive_seed(config.seed, static_cast<std::uint64_t>(k)), config.gmm);
            out.partition = gmm_assign(fit.model, *data);
            out.bic = gmm_bic(fit.model, static_cast<std::size_t>(data->rows()));
            break;
        }
        case ClustererKind::Gpmix: {
            GpmixConfig g = config.gpmix;
            g.seed = config.seed;
            g.k_min = config.k_min;
            g.k_max = config.k_max;
            g.k = k_fixed;
            std::vector<RadialProfile> profiles(static_cast<std::size_t>(x.rows()));
            for (Eigen::Index i = 0; i < x.rows(); ++i) {
                auto& p = profiles[static_cast<std::size_t>(i)];
                p.samples.assign(x.row(i).data(), x.row(i).data() + x.cols());
                p.normalized = true;
                p.aligned = true;
            }
            auto r = gpmix_pipeline(profiles, g);
            out.partition = std::move(r.partition);
            out.validity = r.validity;
            if (!k_fixed) {
                out.selection = {{"criterion", "functional_bic"}, {"candidates", r.selection.candidates},
                                 {"bic", r.selection.bic}};
            }
            out.selection["sampled"] = r.sampled;
            out.selection["exemplars"] = r.consensus_items;
            out.selection["base_clusterings"] = r.base_count;
            out.selection["skipped_projections"] = r.skipped_columns;
            break;
        }
    }
    return out;
}

}  // namespace

void validate(const PipelineConfig& c) {
    if (c.input_dir.has_value() == c.synthetic.has_value()) {
        throw ConfigError("exactly one of an input directory or a synthetic spec is required");
    }
    const bool functional = c.descriptor == FeatureKind::Functional;
    if (functional != (c.clusterer == ClustererKind::Gpmix)) {
        throw ConfigError("the functional descriptor pairs only with the gpmix clusterer");
    }
    if (c.pca_components) {
        if (functional) throw ConfigError("PCA does not apply to functional profiles");
        if (*c.pca_components < 1 || static_cast<std::size_t>(*c.pca_components) >= feature_length(c.descriptor)) {
            throw ConfigError("pca must be positive and smaller than the descriptor dimension");
        }
    }
    if (c.k_min < 2 || c.k_max < c.k_min) throw ConfigError("k range must satisfy 2 <= k_min <= k_max");
    if (c.k) {
        const int lo = c.clusterer == ClustererKind::Gmm ? 1 : 2;
        if (*c.k < lo) throw ConfigError("k is below the minimum for this clusterer");
    }
    if (c.synthetic) {
        for (std::size_t n : c.synthetic->counts) {
            if (n < 1) throw ConfigError("synthetic counts must be at least 1 per class");
        }
        if (!(c.synthetic->radius_min > 0.0) || c.synthetic->radius_max < c.synthetic->radius_min) {
            throw ConfigError("invalid synthetic radius range");
        }
    }
    if (c.clusterer == ClustererKind::Gpmix) validate(c.gpmix);
}

DatasetConfig dataset_config_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("synthetic spec must be a JSON object");
    DatasetConfig c;
    try {
        if (j.contains("counts")) {
            const auto& counts = j.at("counts");
            if (counts.is_array()) {
                if (counts.size() != kParticleClassCount) throw ConfigError("counts needs one entry per class");
                for (std::size_t i = 0; i < kParticleClassCount; ++i) c.counts[i] = counts[i].get<std::size_t>();
            } else if (counts.is_object()) {
                c.counts.fill(0);
                for (const auto& [name, v] : counts.items()) {
                    c.counts[static_cast<std::size_t>(parse_class(name))] = v.get<std::size_t>();
                }
            } else if (counts.is_number_unsigned()) {
                c.counts.fill(counts.get<std::size_t>());
            } else {
                throw ConfigError("counts must be an array, an object or a number");
            }
        }
        c.seed = j.value("seed", c.seed);
        c.image_size = j.value("image_size", c.image_size);
        c.radius_min = j.value("radius_min", c.radius_min);
        c.radius_max = j.value("radius_max", c.radius_max);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad synthetic spec: ") + e.what());
    }
    return c;
}

json dataset_config_to_json(const DatasetConfig& c) {
    json counts = json::object();
    for (std::size_t i = 0; i < kParticleClassCount; ++i) {
        counts[std::string(class_name(static_cast<ParticleClass>(i)))] = c.counts[i];
    }
    return {{"counts", counts}, {"seed", c.seed}, {"image_size", c.image_size},
            {"radius_min", c.radius_min}, {"radius_max", c.radius_max}};
}

PipelineConfig pipeline_config_from_json(const json& j, const fs::path& base_dir) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    PipelineConfig c;
    auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() || base_dir.empty() ? fs::path(p) : base_dir / p; };
    try {
        if (j.contains("input") && !j.at("input").is_null()) c.input_dir = resolve(j.at("input").get<std::string>());
        if (j.contains("synthetic") && !j.at("synthetic").is_null()) {
            const auto& s = j.at("synthetic");
            c.synthetic = s.is_string() ? dataset_config_from_json(load_json(resolve(s.get<std::string>()).string()))
                                        : dataset_config_from_json(s);
        }
        if (j.contains("descriptor")) c.descriptor = parse_feature(j.at("descriptor").get<std::string>());
        if (j.contains("clusterer")) c.clusterer = parse_clusterer(j.at("clusterer").get<std::string>());
        if (j.contains("k")) {
            const auto& k = j.at("k");
            if (k.is_string()) {
                if (k.get<std::string>() != "auto") throw ConfigError("k must be \"auto\" or an integer");
            } else if (!k.is_null()) {
                c.k = k.get<int>();
            }
        }
        if (j.contains("pca") && !j.at("pca").is_null()) c.pca_components = j.at("pca").get<int>();
        if (j.contains("out")) c.output_dir = resolve(j.at("out").get<std::string>());
        c.threads = j.value("threads", c.threads);
        c.figures = j.value("figures", c.figures);
        if (j.contains("kmeans")) {
            const auto& o = j.at("kmeans");
            c.kmeans.n_init = o.value("n_init", c.kmeans.n_init);
            c.kmeans.max_iter = o.value("max_iter", c.kmeans.max_iter);
            c.kmeans.tol = o.value("tol", c.kmeans.tol);
        }
        if (j.contains("gmm")) {
            const auto& o = j.at("gmm");
            c.gmm.n_init = o.value("n_init", c.gmm.n_init);
            c.gmm.max_iter = o.value("max_iter", c.gmm.max_iter);
            c.gmm.tol = o.value("tol", c.gmm.tol);
            c.gmm.ridge = o.value("ridge", c.gmm.ridge);
        }
        if (j.contains("gpmix")) {
            const auto& o = j.at("gpmix");
            auto& g = c.gpmix;
            g.m_projections = o.value("m_projections", g.m_projections);
            g.ou_theta = o.value("ou_theta", g.ou_theta);
            g.ou_sigma = o.value("ou_sigma", g.ou_sigma);
            g.r_frac = o.value("r_frac", g.r_frac);
            g.k_frac = o.value("k_frac", g.k_frac);
            g.n_basis = o.value("n_basis", g.n_basis);
            g.direct_threshold = o.value("direct_threshold", g.direct_threshold);
            g.force_sampling = o.value("force_sampling", g.force_sampling);
            g.gmm_n_init = o.value("gmm_n_init", g.gmm_n_init);
            // the range and seed are shared with the other clusterers; top-level keys win
            if (!j.contains("k_min")) c.k_min = o.value("k_min", c.k_min);
            if (!j.contains("k_max")) c.k_max = o.value("k_max", c.k_max);
            if (!j.contains("seed")) c.seed = o.value("seed", c.seed);
        }
        c.k_min = j.value("k_min", c.k_min);
        c.k_max = j.value("k_max", c.k_max);
        c.seed = j.value("seed", c.seed);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad config: ") + e.what());
    }
    return c;
}

json pipeline_config_to_json(const PipelineConfig& c) {
    json j;
    j["input"] = c.input_dir ? json(c.input_dir->generic_string()) : json(nullptr);
    j["synthetic"] = c.synthetic ? dataset_config_to_json(*c.synthetic) : json(nullptr);
    j["descriptor"] = feature_name(c.descriptor);
    j["clusterer"] = clusterer_name(c.clusterer);
    j["k"] = c.k ? json(*c.k) : json("auto");
    j["pca"] = c.pca_components ? json(*c.pca_components) : json(nullptr);
    j["seed"] = c.seed;
    j["k_min"] = c.k_min;
    j["k_max"] = c.k_max;
    j["kmeans"] = {{"n_init", c.kmeans.n_init}, {"max_iter", c.kmeans.max_iter}, {"tol", c.kmeans.tol}};
    j["gmm"] = {{"n_init", c.gmm.n_init}, {"max_iter", c.gmm.max_iter}, {"tol", c.gmm.tol}, {"ridge", c.gmm.ridge}};
    const auto& g = c.gpmix;
    j["gpmix"] = {{"m_projections", g.m_projections}, {"ou_theta", g.ou_theta}, {"ou_sigma", g.ou_sigma},
                  {"r_frac", g.r_frac},                {"k_frac", g.k_frac},     {"n_basis", g.n_basis},
                  {"direct_threshold", g.direct_threshold}, {"force_sampling", g.force_sampling},
                  {"gmm_n_init", g.gmm_n_init}};
    return j;
}

RunReport run_pipeline(const PipelineConfig& config) {
    validate(config);
    const Source src = make_source(config);
    if (src.size() < min_particles(config)) throw ConfigError("too few particles for the requested clustering");

    RunReport report;
    report.config = pipeline_config_to_json(config);
    report.descriptor_headers = feature_headers(config.descriptor);

    // Ingest (render or load + segment) and extract in bounded chunks so only one
    // chunk of masks is alive at a time. Only extraction is timed.
    const std::size_t n_total = src.size();
    std::vector<std::optional<Features>> features(n_total);
    std::vector<std::string> failures(n_total);
    constexpr std::size_t kChunk = 1024;
    double extraction_s = 0.0;
    for (std::size_t start = 0; start < n_total; start += kChunk) {
        const std::size_t len = std::min(kChunk, n_total - start);
        std::vector<std::optional<BinaryMask>> masks(len);
        parallel_for(len, config.threads, [&](std::size_t i) {
            try {
                masks[i] = src.mask(start + i);
            } catch (const InputError& e) {
                if (src.synthetic()) throw;
                failures[start + i] = e.what();
            }
        });
        const auto t0 = Clock::now();
        parallel_for(len, config.threads, [&](std::size_t i) {
            if (!masks[i]) return;
            try {
                features[start + i] = extract_features(config.descriptor, *masks[i]);
            } catch (const Error& e) {
                if (src.synthetic()) throw;
                failures[start + i] = e.what();
            }
        });
        extraction_s += seconds_since(t0);
    }

    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < n_total; ++i) {
        if (!features[i]) {
            warn("skipping " + src.name(i) + ": " + failures[i]);
            report.skipped_files.push_back(src.name(i));
            continue;
        }
        ParticleRecord rec;
        rec.id = i;
        rec.file = src.name(i);
        rec.metrics = features[i]->metrics;
        rec.descriptor = std::move(features[i]->values);
        if (!src.truth.empty()) rec.truth = src.truth[i];
        rows.push_back(rec.descriptor);
        report.particles.push_back(std::move(rec));
    }
    const std::size_t n = report.particles.size();
    if (n < min_particles(config)) throw ConfigError("too few particles for the requested clustering");

    const DataMatrix x = to_matrix(rows, feature_length(config.descriptor));
    rows.clear();
    const auto t1 = Clock::now();
    auto outcome = cluster(config, config.descriptor, config.clusterer, x, config.k);
    report.timings.clustering_s = seconds_since(t1);
    report.timings.extraction_s = extraction_s;
    report.timings.ms_per_particle = 1000.0 * (report.timings.extraction_s + report.timings.clustering_s) / static_cast<double>(n);

    const Partition& p = outcome.partition;
    report.k = p.k;
    report.selection = outcome.selection;
    for (std::size_t i = 0; i < n; ++i) report.particles[i].label = p.labels[i];
    const auto sizes = cluster_sizes(p);
    report.shares.resize(sizes.size());
    for (std::size_t c = 0; c < sizes.size(); ++c) report.shares[c] = static_cast<double>(sizes[c]) / static_cast<double>(n);

    if (outcome.validity) {
        report.validity = *outcome.validity;
    } else {
        const auto present = std::count_if(sizes.begin(), sizes.end(), [](std::size_t s) { return s > 0; });
        if (present >= 2) {
            DataMatrix z = x;
            if (config.pca_components) z = pca_transform(pca_fit(x, *config.pca_components), x);
            report.validity = validity_report(z, p, config.seed);
        } else {
            report.validity.k = static_cast<int>(present);
        }
    }
    report.validity.bic = outcome.bic;

    if (!src.truth.empty()) {
        std::vector<int> truth(n), labels(n);
        for (std::size_t i = 0; i < n; ++i) {
            truth[i] = *report.particles[i].truth;
            labels[i] = report.particles[i].label;
        }
        report.ari = adjusted_rand(labels, truth);
    }

    // representatives: members nearest to their cluster's descriptor centroid
    for (int c = 0; c < p.k; ++c) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < n; ++i) {
            if (p.labels[i] == c) members.push_back(i);
        }
        if (members.empty()) continue;
        Eigen::RowVectorXd centroid = Eigen::RowVectorXd::Zero(x.cols());
        for (std::size_t i : members) centroid += x.row(static_cast<Eigen::Index>(i));
        centroid /= static_cast<double>(members.size());
        std::vector<std::pair<double, std::size_t>> order;
        for (std::size_t i : members) order.emplace_back((x.row(static_cast<Eigen::Index>(i)) - centroid).squaredNorm(), i);
        std::sort(order.begin(), order.end());
        const std::size_t take = std::min(kMontagePerCluster, order.size());
        for (std::size_t t = 0; t < take; ++t) {
            Representative r;
            r.label = c;
            r.particle = order[t].second;
            report.representatives.push_back(std::move(r));
        }
    }
    parallel_for(report.representatives.size(), config.threads, [&](std::size_t i) {
        auto& r = report.representatives[i];
        r.mask = src.mask(report.particles[r.particle].id);
    });
    return report;
}

json report_to_json(const RunReport& r, bool include_timings) {
    json j;
    j["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
    j["config"] = r.config;
    j["n_particles"] = r.particles.size();
    j["skipped_files"] = r.skipped_files;
    j["k"] = r.k;
    j["selection"] = r.selection;
    json v = {{"silhouette", r.validity.silhouette},
              {"davies_bouldin", r.validity.davies_bouldin},
              {"calinski_harabasz", r.validity.calinski_harabasz},
              {"k", r.validity.k},
              {"subsampled", r.validity.subsampled}};
    v["bic"] = r.validity.bic ? json(*r.validity.bic) : json(nullptr);
    j["validity"] = v;
    j["shares"] = r.shares;
    j["ari"] = r.ari ? json(*r.ari) : json(nullptr);
    j["descriptor_headers"] = r.descriptor_headers;
    json parts = json::array();
    for (const auto& p : r.particles) {
        json e = {{"id", p.id},
                  {"file", p.file},
                  {"label", p.label},
                  {"metrics",
                   {{"area", p.metrics.area},
                    {"perimeter", p.metrics.perimeter},
                    {"circularity", p.metrics.circularity},
                    {"aspect_ratio", p.metrics.aspect_ratio},
                    {"feret_min", p.metrics.feret_min},
                    {"feret_max", p.metrics.feret_max}}},
                  {"descriptor", p.descriptor}};
        e["truth"] = p.truth ? json(std::string(class_name(static_cast<ParticleClass>(*p.truth)))) : json(nullptr);
        parts.push_back(std::move(e));
    }
    j["particles"] = std::move(parts);
    json reps = json::array();
    for (const auto& rep : r.representatives) reps.push_back({{"label", rep.label}, {"particle", r.particles[rep.particle].id}});
    j["representatives"] = std::move(reps);
    if (include_timings) {
        j["timings"] = {{"extraction_s", r.timings.extraction_s},
                        {"clustering_s", r.timings.clustering_s},
                        {"ms_per_particle", r.timings.ms_per_particle}};
    }
    return j;
}

void write_report(const RunReport& report, const fs::path& dir, bool figures) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw InputError("cannot create " + dir.string() + ": " + ec.message());
    {
        std::ofstream out(dir / "report.json", std::ios::binary);
        if (!out) throw InputError("cannot write " + (dir / "report.json").string());
        out << report_to_json(report).dump(2) << '\n';
    }
    {
        std::ofstream out(dir / "particles.csv", std::ios::binary);
        if (!out) throw InputError("cannot write " + (dir / "particles.csv").string());
        out << "id,file,truth,label,area,perimeter,circularity,aspect_ratio,feret_min,feret_max";
        for (const auto& h : report.descriptor_headers) out << ',' << h;
        out << '\n';
        char buf[64];
        auto num = [&](double v) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            return std::string(buf);
        };
        for (const auto& p : report.particles) {
            out << p.id << ',' << p.file << ','
                << (p.truth ? std::string(class_name(static_cast<ParticleClass>(*p.truth))) : std::string()) << ','
                << p.label << ',' << num(p.metrics.area) << ',' << num(p.metrics.perimeter) << ','
                << num(p.metrics.circularity) << ',' << num(p.metrics.aspect_ratio) << ',' << num(p.metrics.feret_min)
                << ',' << num(p.metrics.feret_max);
            for (double v : p.descriptor) out << ',' << num(v);
            out << '\n';
        }
    }
    if (figures) {
        const auto present = std::count_if(report.shares.begin(), report.shares.end(), [](double s) { return s > 0.0; });
        if (present >= 2) {
            emit_figures(report, dir);
        } else {
            warn("fewer than two clusters; figures skipped");
        }
    }
}

std::vector<BenchmarkRow> benchmark(const PipelineConfig& base, const std::vector<FeatureKind>& descriptors, int repeats) {
    if (repeats < 1) throw ConfigError("repeats must be positive");
    if (descriptors.empty()) throw ConfigError("benchmark needs at least one descriptor");
    PipelineConfig config = base;
    if (!config.k) config.k = 4;
    for (FeatureKind f : descriptors) {
        PipelineConfig check = config;
        check.descriptor = f;
        check.clusterer = effective_clusterer(f, config.clusterer);
        if (check.pca_components && (f == FeatureKind::Functional ||
                                     static_cast<std::size_t>(*check.pca_components) >= feature_length(f))) {
            check.pca_components.reset();
        }
        validate(check);
    }
    const Source src = make_source(config);
    if (src.size() < min_particles(config)) throw ConfigError("too few particles for the requested clustering");
    std::vector<BinaryMask> masks(src.size());
    parallel_for(masks.size(), config.threads, [&](std::size_t i) { masks[i] = src.mask(i); });

    auto mean_sd = [](const std::vector<double>& v) {
        const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
        double ss = 0.0;
        for (double t : v) ss += (t - m) * (t - m);
        const double sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
        return std::pair{m, sd};
    };

    std::vector<BenchmarkRow> rows;
    for (FeatureKind f : descriptors) {
        PipelineConfig run = config;
        run.descriptor = f;
        run.clusterer = effective_clusterer(f, config.clusterer);
        if (run.pca_components && (f == FeatureKind::Functional ||
                                   static_cast<std::size_t>(*run.pca_components) >= feature_length(f))) {
            run.pca_components.reset();
        }
        std::vector<double> ext, clu;
        for (int r = 0; r < repeats; ++r) {
            std::vector<std::vector<double>> values(masks.size());
            const auto t0 = Clock::now();
            parallel_for(masks.size(), run.threads, [&](std::size_t i) { values[i] = extract_features(f, masks[i]).values; });
            ext.push_back(seconds_since(t0));
            const DataMatrix x = to_matrix(values, feature_length(f));
            const auto t1 = Clock::now();
            cluster(run, f, run.clusterer, x, run.k);
            clu.push_back(seconds_since(t1));
        }
        BenchmarkRow row;
        row.descriptor = std::string(feature_name(f));
        row.clusterer = std::string(clusterer_name(run.clusterer));
        row.n_particles = masks.size();
        row.repeats = repeats;
        std::tie(row.extraction_mean_s, row.extraction_sd_s) = mean_sd(ext);
        std::tie(row.clustering_mean_s, row.clustering_sd_s) = mean_sd(clu);
        row.ms_per_particle = 1000.0 * (row.extraction_mean_s + row.clustering_mean_s) / static_cast<double>(masks.size());
        rows.push_back(row);
    }
    return rows;
}

json benchmark_to_json(const std::vector<BenchmarkRow>& rows) {
    json out = json::array();
    for (const auto& r : rows) {
        out.push_back({{"descriptor", r.descriptor},
                       {"clusterer", r.clusterer},
                       {"n_particles", r.n_particles},
                       {"repeats", r.repeats},
                       {"extraction_mean_s", r.extraction_mean_s},
                       {"extraction_sd_s", r.extraction_sd_s},
                       {"clustering_mean_s", r.clustering_mean_s},
                       {"clustering_sd_s", r.clustering_sd_s},
                       {"ms_per_particle", r.ms_per_particle}});
    }
    return out;
}

std::string format_benchmark(const std::vector<BenchmarkRow>& rows) {
    std::string out = "descriptor  clusterer        n  extraction s (sd)    clustering s (sd)    ms/particle\n";
    char buf[160];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%-10s  %-9s  %7zu  %8.3f (%7.3f)  %8.3f (%7.3f)  %11.4f\n", r.descriptor.c_str(),
                      r.clusterer.c_str(), r.n_particles, r.extraction_mean_s, r.extraction_sd_s, r.clustering_mean_s,
                      r.clustering_sd_s, r.ms_per_particle);
        out += buf;
    }
    return out;
}

}  // namespace morphprof
