// One PASS/FAIL line per acceptance criterion; exit status is the failure count.

#include "helpers.hpp"
#include "oracles.hpp"

#include "morphprof/clustering.hpp"
#include "morphprof/descriptors.hpp"
#include "morphprof/funclust.hpp"
#include "morphprof/pipeline.hpp"
#include "morphprof/synth.hpp"
#include "morphprof/validity.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

using namespace morphprof;
using testutil::linf;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// 1. Invariance suite
Outcome invariance() {
    Outcome o;
    DatasetConfig d;
    d.counts = {200, 200, 200, 200};
    d.seed = 101;
    const auto data = generate_dataset(d);
    Rng rng(202);
    double worst_quarter = 0.0, worst_pose_fd = 0.0, worst_pose_zm = 0.0, worst_cdf = 0.0, cdf_pose = 0.0;
    for (const auto& spec : data.specs) {
        const auto m = generate_particle(spec);
        const auto fd = fd_descriptor(trace_contour(m)).values;
        const auto zm = zm_descriptor(m).values;
        const auto cdf = cdf_descriptor(m, centroid_of(m)).values;

        const auto q = rotate90(m, 1 + static_cast<int>(rng.below(3)));
        worst_quarter = std::max({worst_quarter, linf(fd_descriptor(trace_contour(q)).values, fd),
                                  linf(zm_descriptor(q).values, zm)});
        worst_cdf = std::max(worst_cdf, linf(cdf_descriptor(q, centroid_of(q)).values, cdf));

        auto rotated = spec;
        rotated.rotation += rng.uniform(0.0, 2.0 * kPi);
        auto scaled = spec;
        scaled.scale = 2.0;
        for (const auto& moved : {generate_particle(rotated), generate_particle(scaled)}) {
            worst_pose_fd = std::max(worst_pose_fd, linf(fd_descriptor(trace_contour(moved)).values, fd));
            worst_pose_zm = std::max(worst_pose_zm, linf(zm_descriptor(moved).values, zm));
            cdf_pose = std::max(cdf_pose, linf(cdf_descriptor(moved, centroid_of(moved)).values, cdf));
        }
    }
    o.require(worst_quarter <= 1e-6, "quarter turn " + fmt("%.3g", worst_quarter));
    o.require(worst_pose_fd <= 0.05, "fd pose " + fmt("%.3g", worst_pose_fd));
    o.require(worst_pose_zm <= 0.05, "zm pose " + fmt("%.3g", worst_pose_zm));
    o.require(worst_cdf <= 0.05, "cdf quarter turn " + fmt("%.3g", worst_cdf));
    o.require(cdf_pose <= 0.05, "cdf pose " + fmt("%.3f", cdf_pose));
    const std::string summary = "800 particles, quarter turn fd/zm " + fmt("%.2g", worst_quarter) + " cdf " +
                                fmt("%.3g", worst_cdf) + ", rotation/scale fd " + fmt("%.3f", worst_pose_fd) +
                                " zm " + fmt("%.3f", worst_pose_zm) + ", cdf under rotation/scale " +
                                fmt("%.3f", cdf_pose);
    o.detail = o.pass ? summary : o.detail + " | " + summary;
    return o;
}

// 2. Analytic descriptor oracles
Outcome analytic() {
    Outcome o;
    std::vector<Point2> circle(256), ellipse(256);
    for (std::size_t k = 0; k < 256; ++k) {
        const double t = 2.0 * kPi * static_cast<double>(k) / 256.0;
        circle[k] = {30.0 * std::cos(t) + 3.0, 30.0 * std::sin(t) - 2.0};
        ellipse[k] = {40.0 * std::cos(t), 20.0 * std::sin(t)};
    }
    // layout F_{-5..-1}, F_1..F_5
    const auto fc = fourier_descriptor(fourier_spectrum(circle), 5);
    o.require(std::abs(fc[5] - 1.0) < 1e-9, "circle F_1");
    for (std::size_t i = 0; i < fc.size(); ++i) {
        if (i != 5) o.require(fc[i] < 1e-3, "circle F index " + std::to_string(i));
    }
    const auto fe = fourier_descriptor(fourier_spectrum(ellipse), 5);
    o.require(std::abs(fe[4] - 1.0 / 3.0) < 1e-3, "ellipse F_-1 " + fmt("%.6f", fe[4]));

    const auto disk = testutil::disk_mask(128, 63.5, 63.5, 60.0);
    const auto zm = zernike_moments(disk, 5);
    o.require(std::abs(zm[0] - 1.0) < 0.02, "disk A00 " + fmt("%.4f", zm[0]));
    double worst_zm = 0.0;
    for (std::size_t i = 1; i < zm.size(); ++i) worst_zm = std::max(worst_zm, zm[i]);
    o.require(worst_zm < 0.05, "disk ZM others " + fmt("%.4f", worst_zm));

    // Gram matrix of the conjugate-paired basis up to order 5, midpoint rule on 256^2
    std::vector<std::pair<int, int>> funcs;
    for (const auto& [n, m] : zernike_indices(5)) {
        funcs.push_back({n, m});
        if (m > 0) funcs.push_back({n, -m});
    }
    const int size = 256;
    const double da = std::pow(2.0 / size, 2);
    const std::size_t f = funcs.size();
    std::vector<std::complex<double>> gram(f * f, 0.0), v(f);
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const double px = (x + 0.5) * 2.0 / size - 1.0, py = (y + 0.5) * 2.0 / size - 1.0;
            if (px * px + py * py > 1.0) continue;
            for (std::size_t i = 0; i < f; ++i) v[i] = zernike_basis(funcs[i].first, funcs[i].second, px, py);
            for (std::size_t i = 0; i < f; ++i) {
                for (std::size_t j = i; j < f; ++j) gram[i * f + j] += v[i] * std::conj(v[j]) * da;
            }
        }
    }
    double worst_off = 0.0;
    for (std::size_t i = 0; i < f; ++i) {
        for (std::size_t j = i + 1; j < f; ++j) {
            worst_off = std::max(worst_off, std::abs(gram[i * f + j]) / std::sqrt(gram[i * f + i].real() * gram[j * f + j].real()));
        }
    }
    o.require(worst_off < 0.02, "orthogonality " + fmt("%.4f", worst_off));
    if (o.pass) {
        o.detail = "ellipse F_-1 " + fmt("%.6f", fe[4]) + ", disk A00 " + fmt("%.4f", zm[0]) + ", max off-diagonal " +
                   fmt("%.2e", worst_off);
    }
    return o;
}

// 3. Index oracles
Outcome indices() {
    Outcome o;
    const auto line = testutil::from_rows({{0}, {2}, {10}, {12}});
    const std::vector<int> ll{0, 0, 1, 1};
    o.require(std::abs(silhouette_score(line, ll) - 0.7980) < 1e-3, "line silhouette");
    o.require(std::abs(davies_bouldin(line, ll) - 0.2) < 1e-9, "line DB");
    o.require(std::abs(calinski_harabasz(line, ll) - 50.0) < 1e-9, "line CH");

    Rng rng(33);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto n = static_cast<Eigen::Index>(6 + rng.below(30));
        const auto d = static_cast<Eigen::Index>(1 + rng.below(4));
        const int k = 2 + static_cast<int>(rng.below(4));
        DataMatrix x(n, d);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < d; ++j) x(i, j) = rng.normal();
        }
        std::vector<int> labels(static_cast<std::size_t>(n));
        for (std::size_t i = 0; i < labels.size(); ++i) {
            labels[i] = i < static_cast<std::size_t>(k) ? static_cast<int>(i) : static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
        }
        const double ch = testutil::ch_oracle(x, labels);
        worst = std::max({worst, std::abs(silhouette_score(x, labels) - testutil::silhouette_oracle(x, labels)),
                          std::abs(davies_bouldin(x, labels) - testutil::db_oracle(x, labels)),
                          std::abs(calinski_harabasz(x, labels) - ch) / std::max(1.0, ch)});
    }
    o.require(worst < 1e-9, "random partitions " + fmt("%.3g", worst));
    if (o.pass) o.detail = "line 0.7980/0.2/50, 100 random partitions max deviation " + fmt("%.2g", worst);
    return o;
}

// 4. Model selection
Outcome selection() {
    Outcome o;
    int three = 0, two = 0, bic = 0;
    GmmOptions gopt;
    gopt.n_init = 2;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto [x3, t3] = testutil::blobs({{0, 0}, {6, 0}, {3, 5.2}}, 100, 0.8, seed);
        if (select_k_silhouette(x3, 2, 9, seed).k == 3) ++three;
        const auto [x2, t2] = testutil::blobs({{0, 0}, {6, 0}}, 100, 0.8, seed + 100);
        if (select_k_silhouette(x2, 2, 9, seed).k == 2) ++two;

        Rng rng(seed + 200);
        DataMatrix mix(1000, 2);
        for (Eigen::Index i = 0; i < mix.rows(); ++i) {
            const bool b = i % 2;
            mix(i, 0) = rng.normal(b ? 5.0 : 0.0, 1.0);
            mix(i, 1) = rng.normal(b ? 1.0 : 0.0, b ? 0.5 : 1.0);
        }
        if (select_k_bic(mix, 1, 6, seed, gopt).k == 2) ++bic;
    }
    o.require(three == 10, "3 blobs " + std::to_string(three) + "/10");
    o.require(two == 10, "2 blobs " + std::to_string(two) + "/10");
    o.require(bic == 10, "BIC " + std::to_string(bic) + "/10");
    if (o.pass) o.detail = "silhouette 3-blob 10/10, 2-blob 10/10, BIC 10/10";
    return o;
}

PipelineConfig four_by_thousand() {
    PipelineConfig c;
    DatasetConfig d;
    d.counts = {1000, 1000, 1000, 1000};
    d.seed = 42;
    c.synthetic = d;
    c.seed = 42;
    c.figures = false;
    return c;
}

// 5. End-to-end clustering
Outcome end_to_end() {
    Outcome o;
    auto fd = four_by_thousand();
    const auto rf = run_pipeline(fd);
    o.require(rf.k == 4, "fd10 selected K=" + std::to_string(rf.k));
    o.require(*rf.ari >= 0.9, "fd10 ARI " + fmt("%.3f", *rf.ari));

    auto cdf = four_by_thousand();
    cdf.descriptor = FeatureKind::CDF100;
    cdf.clusterer = ClustererKind::Gmm;
    cdf.pca_components = 20;
    cdf.k = 4;
    const auto rc = run_pipeline(cdf);
    o.require(*rc.ari >= 0.8, "cdf100 ARI " + fmt("%.3f", *rc.ari));

    auto zm = four_by_thousand();
    zm.descriptor = FeatureKind::ZM12;
    zm.k = 4;
    const auto rz = run_pipeline(zm);
    o.require(*rz.ari >= 0.8, "zm12 ARI " + fmt("%.3f", *rz.ari));
    if (o.pass) {
        o.detail = "fd10+kmeans auto K=4 ARI " + fmt("%.3f", *rf.ari) + ", cdf100+pca20+gmm ARI " + fmt("%.3f", *rc.ari) +
                   ", zm12+kmeans ARI " + fmt("%.3f", *rz.ari);
    }
    return o;
}

// 6. Functional pipeline
Outcome functional() {
    Outcome o;
    const auto [profiles, truth] = testutil::two_families(2000, 7);
    GpmixConfig cfg;
    cfg.seed = 3;
    const auto direct = gpmix_pipeline(profiles, cfg);
    const double ari = adjusted_rand(direct.partition.labels, truth);
    o.require(!direct.sampled, "direct run sampled");
    o.require(direct.partition.k == 2, "direct K=" + std::to_string(direct.partition.k));
    o.require(ari >= 0.9, "direct ARI " + fmt("%.3f", ari));

    cfg.force_sampling = true;
    const auto hybrid = gpmix_pipeline(profiles, cfg);
    const double agree = adjusted_rand(hybrid.partition.labels, direct.partition.labels);
    o.require(hybrid.sampled, "hybrid not sampled");
    o.require(agree >= 0.85, "hybrid agreement " + fmt("%.3f", agree));
    // the consensus matrix is sized by the exemplar count, 5% of 2000
    o.require(hybrid.consensus_items == 100 && hybrid.exemplars.curves.size() == 100,
              "consensus items " + std::to_string(hybrid.consensus_items));
    if (o.pass) {
        o.detail = "direct K=2 ARI " + fmt("%.3f", ari) + ", hybrid agreement " + fmt("%.3f", agree) +
                   ", consensus on " + std::to_string(hybrid.consensus_items) + " exemplars";
    }
    return o;
}

// 7. Throughput
Outcome throughput() {
    Outcome o;
    PipelineConfig c;
    DatasetConfig d;
    d.counts = {2500, 2500, 2500, 2500};
    d.seed = 7;
    c.synthetic = d;
    c.seed = 7;
    const auto rows = benchmark(c, {FeatureKind::FD10}, 5);
    const auto& r = rows.front();
    o.require(r.n_particles == 10000 && r.repeats == 5, "benchmark shape");
    o.require(r.ms_per_particle <= 1.0, fmt("%.3f ms/particle", r.ms_per_particle));
    if (o.pass) {
        o.detail = fmt("%.3f ms/particle; ", r.ms_per_particle) + "extraction " + fmt("%.3f", r.extraction_mean_s) +
                   " +/- " + fmt("%.3f s", r.extraction_sd_s) + ", clustering " + fmt("%.3f", r.clustering_mean_s) +
                   " +/- " + fmt("%.3f s", r.clustering_sd_s) + " over 5 repeats";
    }
    return o;
}

// 8. k-means small-instance optimality
Outcome kmeans_optimality() {
    Outcome o;
    Rng rng(808);
    int matched = 0;
    for (int inst = 0; inst < 50; ++inst) {
        const auto n = 4 + rng.below(7);
        DataMatrix x(static_cast<Eigen::Index>(n), 2);
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            x(i, 0) = rng.uniform(-5, 5);
            x(i, 1) = rng.uniform(-5, 5);
        }
        const auto r = kmeans_fit(x, 2, static_cast<std::uint64_t>(inst));
        if (std::abs(r.model.inertia - testutil::best_two_partition(x)) < 1e-9) ++matched;
    }
    o.require(matched >= 48, std::to_string(matched) + "/50");
    if (o.pass) o.detail = std::to_string(matched) + "/50 instances at the exhaustive optimum";
    return o;
}

// 9. Determinism
Outcome determinism() {
    Outcome o;
    PipelineConfig c;
    DatasetConfig d;
    d.counts = {60, 60, 60, 60};
    d.seed = 9;
    c.synthetic = d;
    c.seed = 9;
    auto runs = [](const PipelineConfig& cfg) {
        return std::pair{report_to_json(run_pipeline(cfg), false).dump(2), report_to_json(run_pipeline(cfg), false).dump(2)};
    };
    const auto [a, b] = runs(c);
    o.require(a == b, "fd10+kmeans reports differ");

    c.descriptor = FeatureKind::Functional;
    c.clusterer = ClustererKind::Gpmix;
    const auto [g1, g2] = runs(c);
    o.require(g1 == g2, "functional+gpmix reports differ");
    if (o.pass) o.detail = "kmeans and gpmix reports byte-identical (" + std::to_string(g1.size()) + " bytes)";
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"invariance", invariance},          {"analytic oracles", analytic},
        {"index oracles", indices},          {"model selection", selection},
        {"end-to-end clustering", end_to_end}, {"functional pipeline", functional},
        {"throughput", throughput},          {"k-means optimality", kmeans_optimality},
        {"determinism", determinism},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s %zu %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str(), secs);
        std::fflush(stdout);
        if (!o.pass) ++failures;
    }
    return failures;
}
