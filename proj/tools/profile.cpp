// profile: particle morphology profiling from masks or synthetic batches.

#include "morphprof/error.hpp"
#include "morphprof/model_io.hpp"
#include "morphprof/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

namespace mp = morphprof;
namespace fs = std::filesystem;

namespace {

struct Flags {
    std::string config;
    std::string input;
    std::string synthetic;
    std::vector<std::string> descriptors;
    std::string clusterer;
    std::string k;
    int pca = 0;
    std::uint64_t seed = 0;
    std::string out;
    unsigned threads = 0;
    bool no_figures = false;
    int repeats = 5;
    std::string json_out;
};

struct Options {
    CLI::Option* input = nullptr;
    CLI::Option* synthetic = nullptr;
    CLI::Option* descriptor = nullptr;
    CLI::Option* clusterer = nullptr;
    CLI::Option* k = nullptr;
    CLI::Option* pca = nullptr;
    CLI::Option* seed = nullptr;
    CLI::Option* out = nullptr;
    CLI::Option* threads = nullptr;
};

Options add_common(CLI::App* app, Flags& f, bool many_descriptors) {
    Options o;
    app->add_option("--config", f.config, "JSON config mirroring the flags; flags override it");
    o.input = app->add_option("--input", f.input, "directory of particle images");
    o.synthetic = app->add_option("--synthetic", f.synthetic, "synthetic dataset spec (JSON)");
    o.input->excludes(o.synthetic);
    o.descriptor = many_descriptors
                       ? app->add_option("--descriptor", f.descriptors, "cdf100, fd10, zm12 or functional; repeatable")
                       : app->add_option("--descriptor", f.descriptors, "cdf100, fd10, zm12 or functional")->expected(1);
    o.clusterer = app->add_option("--clusterer", f.clusterer, "kmeans, gmm or gpmix");
    o.k = app->add_option("--k", f.k, "auto or a cluster count");
    o.pca = app->add_option("--pca", f.pca, "reduce descriptors to N principal components");
    o.seed = app->add_option("--seed", f.seed, "master seed");
    o.out = app->add_option("--out", f.out, "output directory");
    o.threads = app->add_option("--threads", f.threads, "extraction workers (0 = logical cores)");
    return o;
}

mp::PipelineConfig build_config(const Flags& f, const Options& o) {
    mp::PipelineConfig c;
    if (!f.config.empty()) {
        const fs::path path(f.config);
        c = mp::pipeline_config_from_json(mp::load_json(f.config), path.parent_path());
    }
    if (o.input->count()) {
        c.input_dir = f.input;
        c.synthetic.reset();
    }
    if (o.synthetic->count()) {
        c.synthetic = mp::dataset_config_from_json(mp::load_json(f.synthetic));
        c.input_dir.reset();
    }
    if (o.descriptor->count()) c.descriptor = mp::parse_feature(f.descriptors.front());
    if (o.clusterer->count()) c.clusterer = mp::parse_clusterer(f.clusterer);
    if (o.k->count()) {
        if (f.k == "auto") {
            c.k.reset();
        } else {
            try {
                std::size_t used = 0;
                c.k = std::stoi(f.k, &used);
                if (used != f.k.size()) throw std::invalid_argument(f.k);
            } catch (const std::exception&) {
                throw mp::ConfigError("--k expects auto or an integer");
            }
        }
    }
    if (o.pca->count()) c.pca_components = f.pca;
    if (o.seed->count()) c.seed = f.seed;
    if (o.out->count()) c.output_dir = f.out;
    if (o.threads->count()) c.threads = f.threads;
    return c;
}

void print_summary(const mp::RunReport& r, const fs::path& out) {
    std::printf("particles: %zu (skipped %zu)\n", r.particles.size(), r.skipped_files.size());
    std::printf("clusters: %d\n", r.k);
    std::printf("silhouette %.4f  davies-bouldin %.4f  calinski-harabasz %.2f\n", r.validity.silhouette,
                r.validity.davies_bouldin, r.validity.calinski_harabasz);
    if (r.validity.bic) std::printf("bic %.2f\n", *r.validity.bic);
    for (std::size_t c = 0; c < r.shares.size(); ++c) std::printf("  cluster %zu: %.1f%%\n", c, 100.0 * r.shares[c]);
    if (r.ari) std::printf("ARI vs ground truth: %.4f\n", *r.ari);
    std::printf("extraction %.3f s, clustering %.3f s, %.4f ms/particle\n", r.timings.extraction_s,
                r.timings.clustering_s, r.timings.ms_per_particle);
    std::printf("report: %s\n", (out / "report.json").string().c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Particle morphology profiling"};
    app.require_subcommand(1);

    Flags run_flags;
    auto* run = app.add_subcommand("run", "extract descriptors, cluster and write a report");
    const Options run_opts = add_common(run, run_flags, false);
    run->add_flag("--no-figures", run_flags.no_figures, "skip the SVG figures");

    Flags bench_flags;
    auto* bench = app.add_subcommand("bench", "time extraction and clustering over repeats");
    const Options bench_opts = add_common(bench, bench_flags, true);
    bench->add_option("--repeats", bench_flags.repeats, "repeats per descriptor")->check(CLI::PositiveNumber);
    bench->add_option("--json", bench_flags.json_out, "also write the table as JSON");

    std::string spec_path, synth_out;
    auto* synth = app.add_subcommand("synth", "render a labeled synthetic dataset to PGM files");
    synth->add_option("--spec", spec_path, "synthetic dataset spec (JSON)")->required();
    synth->add_option("--out", synth_out, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*run) {
            auto config = build_config(run_flags, run_opts);
            config.figures = config.figures && !run_flags.no_figures;
            const auto report = mp::run_pipeline(config);
            mp::write_report(report, config.output_dir, config.figures);
            print_summary(report, config.output_dir);
        } else if (*bench) {
            auto config = build_config(bench_flags, bench_opts);
            std::vector<mp::FeatureKind> kinds;
            for (const auto& d : bench_flags.descriptors) kinds.push_back(mp::parse_feature(d));
            if (kinds.empty()) kinds.push_back(config.descriptor);
            const auto rows = mp::benchmark(config, kinds, bench_flags.repeats);
            std::cout << mp::format_benchmark(rows);
            if (!bench_flags.json_out.empty()) mp::save_json(mp::benchmark_to_json(rows), bench_flags.json_out);
        } else if (*synth) {
            const auto data = mp::generate_dataset(mp::dataset_config_from_json(mp::load_json(spec_path)));
            mp::export_dataset(data, synth_out);
            std::printf("wrote %zu particles to %s\n", data.specs.size(), synth_out.c_str());
        }
    } catch (const mp::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return mp::exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
