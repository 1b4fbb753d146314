#include "helpers.hpp"
#include "morphprof/error.hpp"
#include "morphprof/pipeline.hpp"

#include <doctest.h>

#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

using namespace morphprof;

namespace {

PipelineConfig small_synthetic(std::size_t per_class, std::uint64_t seed = 11) {
    PipelineConfig c;
    DatasetConfig d;
    d.counts = {per_class, per_class, per_class, per_class};
    d.seed = seed;
    c.synthetic = d;
    c.seed = seed;
    c.threads = 1;
    return c;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::size_t occurrences(const std::string& text, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
    return n;
}

}  // namespace

TEST_CASE("names parse back") {
    for (auto f : {FeatureKind::CDF100, FeatureKind::FD10, FeatureKind::ZM12, FeatureKind::Functional}) {
        CHECK(parse_feature(feature_name(f)) == f);
    }
    for (auto c : {ClustererKind::KMeans, ClustererKind::Gmm, ClustererKind::Gpmix}) {
        CHECK(parse_clusterer(clusterer_name(c)) == c);
    }
    CHECK_THROWS_AS(parse_feature("hog"), ConfigError);
    CHECK_THROWS_AS(parse_clusterer("dbscan"), ConfigError);
}

TEST_CASE("configuration checks") {
    auto c = small_synthetic(20);
    CHECK_NOTHROW(validate(c));

    auto both = c;
    both.input_dir = "somewhere";
    CHECK_THROWS_AS(validate(both), ConfigError);
    auto neither = c;
    neither.synthetic.reset();
    CHECK_THROWS_AS(validate(neither), ConfigError);

    auto pairing = c;
    pairing.descriptor = FeatureKind::Functional;
    CHECK_THROWS_AS(validate(pairing), ConfigError);
    pairing.clusterer = ClustererKind::Gpmix;
    CHECK_NOTHROW(validate(pairing));
    pairing.pca_components = 3;
    CHECK_THROWS_AS(validate(pairing), ConfigError);

    auto pca = c;
    pca.pca_components = 10;  // fd10 has dimension 10
    CHECK_THROWS_AS(validate(pca), ConfigError);
    pca.pca_components = 0;
    CHECK_THROWS_AS(validate(pca), ConfigError);

    auto range = c;
    range.k_min = 1;
    CHECK_THROWS_AS(validate(range), ConfigError);
    range.k_min = 5;
    range.k_max = 4;
    CHECK_THROWS_AS(validate(range), ConfigError);

    auto k = c;
    k.k = 1;
    CHECK_THROWS_AS(validate(k), ConfigError);
    k.clusterer = ClustererKind::Gmm;
    CHECK_NOTHROW(validate(k));
}

TEST_CASE("fixed K is honored") {
    auto c = small_synthetic(20);
    c.k = 2;
    const auto r = run_pipeline(c);
    CHECK(r.k == 2);
    CHECK(r.selection.is_null());
    REQUIRE(r.particles.size() == 80);
    REQUIRE(r.shares.size() == 2);
    CHECK(std::abs(std::accumulate(r.shares.begin(), r.shares.end(), 0.0) - 1.0) < 1e-12);
    for (const auto& p : r.particles) {
        CHECK((p.label == 0 || p.label == 1));
        CHECK(p.descriptor.size() == 10);
        CHECK(p.truth.has_value());
    }
    CHECK(r.ari.has_value());
    CHECK(r.validity.k == 2);
    CHECK(r.descriptor_headers.size() == 10);
    CHECK(r.config["descriptor"] == "fd10");
    for (const auto& rep : r.representatives) {
        CHECK(r.particles[rep.particle].label == rep.label);
        CHECK(rep.mask.count() > 0);
    }
}

TEST_CASE("automatic K on well separated classes") {
    auto c = small_synthetic(40, 3);
    const auto r = run_pipeline(c);
    CHECK(r.k >= 2);
    CHECK(r.selection["criterion"] == "silhouette");
    CHECK(r.selection["candidates"].size() == r.selection["scores"].size());
    CHECK(*r.ari > 0.5);
}

TEST_CASE("too few particles") {
    auto c = small_synthetic(5);
    c.k = 4;  // needs 50
    CHECK_THROWS_AS(run_pipeline(c), ConfigError);
}

TEST_CASE("empty directory has no input images") {
    PipelineConfig c;
    c.input_dir = testutil::temp_dir("pipeline_empty");
    try {
        run_pipeline(c);
        FAIL("expected an input error");
    } catch (const InputError& e) {
        CHECK(std::string(e.what()) == "no input images");
        CHECK(exit_code_for(e.kind()) == 3);
    }
}

TEST_CASE("directory mode reads exported masks and skips unreadable files") {
    DatasetConfig d;
    d.counts = {15, 15, 15, 15};
    d.seed = 4;
    const auto data = generate_dataset(d);
    const auto dir = testutil::temp_dir("pipeline_dir");
    export_dataset(data, dir);
    testutil::write_bytes(dir / "zz_broken.pgm", "P5\n9 9\n255\n");

    PipelineConfig c;
    c.input_dir = dir;
    c.k = 2;
    c.threads = 1;
    const auto r = run_pipeline(c);
    CHECK(r.particles.size() == 60);
    REQUIRE(r.skipped_files.size() == 1);
    CHECK(r.skipped_files[0].find("zz_broken.pgm") != std::string::npos);
    CHECK_FALSE(r.ari.has_value());
    CHECK_FALSE(r.particles[0].truth.has_value());

    // same masks as the synthetic run, so the same descriptors
    auto syn = small_synthetic(15, 4);
    syn.k = 2;
    const auto s = run_pipeline(syn);
    for (std::size_t i = 0; i < r.particles.size(); ++i) {
        CHECK(testutil::linf(r.particles[i].descriptor, s.particles[i].descriptor) < 1e-12);
    }
}

TEST_CASE("report files and figures") {
    auto c = small_synthetic(20);
    c.k = 3;
    const auto r = run_pipeline(c);
    const auto dir = testutil::temp_dir("pipeline_report");
    write_report(r, dir, true);

    const auto j = nlohmann::json::parse(slurp(dir / "report.json"));
    CHECK(j["tool"]["name"] == kToolName);
    CHECK(j["k"] == 3);
    CHECK(j["particles"].size() == 80);
    CHECK(j.contains("timings"));
    CHECK_FALSE(report_to_json(r, false).contains("timings"));

    std::istringstream csv(slurp(dir / "particles.csv"));
    std::string header;
    std::getline(csv, header);
    CHECK(header.rfind("id,file,truth,label,area,perimeter,circularity,aspect_ratio,feret_min,feret_max,", 0) == 0);
    std::size_t rows = 0;
    for (std::string line; std::getline(csv, line);) ++rows;
    CHECK(rows == 80);

    const auto scatter = slurp(dir / "scatter.svg");
    CHECK(occurrences(scatter, "<circle") == 80);
    CHECK(occurrences(slurp(dir / "boxplots.svg"), "<g class=\"box\"") == 2 * 3);
    CHECK(std::filesystem::exists(dir / "montage.svg"));

    const auto again = testutil::temp_dir("pipeline_report_again");
    emit_figures(run_pipeline(c), again);
    CHECK(slurp(again / "scatter.svg") == scatter);
    CHECK(slurp(again / "montage.svg") == slurp(dir / "montage.svg"));
}

TEST_CASE("figures need two clusters") {
    auto c = small_synthetic(20);
    c.clusterer = ClustererKind::Gmm;
    c.k = 1;
    const auto r = run_pipeline(c);
    CHECK(r.k == 1);
    CHECK_THROWS_AS(emit_figures(r, testutil::temp_dir("pipeline_one")), ConfigError);
    // write_report warns instead of failing
    CHECK_NOTHROW(write_report(r, testutil::temp_dir("pipeline_one_report"), true));
}

TEST_CASE("reports are reproducible") {
    auto c = small_synthetic(25, 21);
    const auto a = report_to_json(run_pipeline(c), false).dump();
    const auto b = report_to_json(run_pipeline(c), false).dump();
    CHECK(a == b);
}

TEST_CASE("config JSON round-trip") {
    const auto j = nlohmann::json::parse(R"({
        "synthetic": {"counts": {"sphere": 3, "satellited": 4, "lobed": 5, "rod": 6}, "seed": 8},
        "descriptor": "zm12", "clusterer": "gmm", "k": 3, "pca": 4, "seed": 99,
        "k_min": 2, "k_max": 6, "figures": false, "out": "results"
    })");
    const auto c = pipeline_config_from_json(j, "/base");
    REQUIRE(c.synthetic.has_value());
    CHECK(c.synthetic->counts == std::array<std::size_t, 4>{3, 4, 5, 6});
    CHECK(c.synthetic->seed == 8);
    CHECK(c.descriptor == FeatureKind::ZM12);
    CHECK(c.clusterer == ClustererKind::Gmm);
    CHECK(c.k == 3);
    CHECK(c.pca_components == 4);
    CHECK(c.seed == 99);
    CHECK(c.k_max == 6);
    CHECK_FALSE(c.figures);
    CHECK(c.output_dir == std::filesystem::path("/base/results"));

    const auto echo = pipeline_config_to_json(c);
    const auto back = pipeline_config_from_json(echo);
    CHECK(pipeline_config_to_json(back) == echo);
    CHECK(back.synthetic->counts == c.synthetic->counts);

    CHECK(pipeline_config_from_json(nlohmann::json::parse(R"({"k": "auto"})")).k == std::nullopt);
    CHECK_THROWS_AS(pipeline_config_from_json(nlohmann::json::parse(R"({"k": "many"})")), ConfigError);
    CHECK_THROWS_AS(pipeline_config_from_json(nlohmann::json::parse("[1]")), ConfigError);
}

TEST_CASE("benchmark rows") {
    auto c = small_synthetic(15);
    const auto one = benchmark(c, {FeatureKind::FD10}, 1);
    REQUIRE(one.size() == 1);
    CHECK(one[0].repeats == 1);
    CHECK(one[0].extraction_sd_s == 0.0);
    CHECK(one[0].clustering_sd_s == 0.0);
    CHECK(one[0].n_particles == 60);
    CHECK(one[0].ms_per_particle > 0.0);

    const auto two = benchmark(c, {FeatureKind::FD10, FeatureKind::ZM12}, 2);
    REQUIRE(two.size() == 2);
    CHECK(two[1].descriptor == "zm12");
    CHECK(benchmark_to_json(two).size() == 2);
    CHECK(format_benchmark(two).find("zm12") != std::string::npos);
    CHECK_THROWS_AS(benchmark(c, {FeatureKind::FD10}, 0), ConfigError);
}
