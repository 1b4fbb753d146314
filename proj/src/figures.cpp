#include "morphprof/error.hpp"
#include "morphprof/pipeline.hpp"
#include "morphprof/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace morphprof {

namespace fs = std::filesystem;

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

const char* color(int label) {
    return kPalette[static_cast<std::size_t>(label) % (sizeof kPalette / sizeof kPalette[0])];
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out << text;
}

std::string svg_open(int w, int h) {
    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" viewBox=\"0 0 "
      << w << ' ' << h << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
    return s.str();
}

std::uint64_t report_seed(const RunReport& r) {
    if (r.config.is_object() && r.config.contains("seed")) return r.config.at("seed").get<std::uint64_t>();
    return 0;
}

std::string scatter_svg(const RunReport& r) {
    const std::size_t n = r.particles.size();
    const std::size_t dim = r.particles.front().descriptor.size();
    DataMatrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < dim; ++j) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = r.particles[i].descriptor[j];
    }
    const int comps = static_cast<int>(std::min<std::size_t>(2, dim));
    const DataMatrix z = pca_transform(pca_fit(x, comps), x);

    std::vector<std::size_t> shown(n);
    for (std::size_t i = 0; i < n; ++i) shown[i] = i;
    if (n > kScatterMaxPoints) {
        Rng rng(derive_seed(report_seed(r), 0x5CA7));
        for (std::size_t i = 0; i < kScatterMaxPoints; ++i) {
            std::swap(shown[i], shown[i + rng.below(n - i)]);
        }
        shown.resize(kScatterMaxPoints);
        std::sort(shown.begin(), shown.end());
    }

    auto coord = [&](std::size_t i, int c) { return c < comps ? z(static_cast<Eigen::Index>(i), c) : 0.0; };
    double lo[2] = {0, 0}, hi[2] = {0, 0};
    for (int c = 0; c < 2; ++c) {
        lo[c] = hi[c] = coord(shown.front(), c);
        for (std::size_t i : shown) {
            lo[c] = std::min(lo[c], coord(i, c));
            hi[c] = std::max(hi[c], coord(i, c));
        }
        if (hi[c] - lo[c] < 1e-12) {
            lo[c] -= 1.0;
            hi[c] += 1.0;
        }
    }
    const int w = 640, h = 560, m = 50, plot = 460;
    std::ostringstream s;
    s << svg_open(w, h);
    s << "<rect x=\"" << m << "\" y=\"" << m << "\" width=\"" << plot << "\" height=\"" << plot
      << "\" fill=\"none\" stroke=\"#444\"/>\n";
    s << "<text x=\"" << m + plot / 2 << "\" y=\"" << h - 12 << "\" text-anchor=\"middle\">PC1</text>\n";
    s << "<text x=\"14\" y=\"" << m + plot / 2 << "\" transform=\"rotate(-90 14 " << m + plot / 2
      << ")\" text-anchor=\"middle\">PC2</text>\n";
    s << "<g stroke=\"none\" fill-opacity=\"0.6\">\n";
    for (std::size_t i : shown) {
        const double px = m + plot * (coord(i, 0) - lo[0]) / (hi[0] - lo[0]);
        const double py = m + plot - plot * (coord(i, 1) - lo[1]) / (hi[1] - lo[1]);
        s << "<circle cx=\"" << fmt(px) << "\" cy=\"" << fmt(py) << "\" r=\"2\" fill=\"" << color(r.particles[i].label)
          << "\"/>\n";
    }
    s << "</g>\n";
    for (int c = 0; c < r.k; ++c) {
        const int y = m + 10 + 20 * c;
        s << "<rect x=\"" << m + plot + 20 << "\" y=\"" << y << "\" width=\"10\" height=\"10\" fill=\"" << color(c)
          << "\"/><text x=\"" << m + plot + 36 << "\" y=\"" << y + 10 << "\">cluster " << c << "</text>\n";
    }
    s << "</svg>\n";
    return s.str();
}

// Linear-interpolated quantile of sorted data.
double quantile(const std::vector<double>& sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::string boxplot_svg(const RunReport& r) {
    struct Metric {
        const char* name;
        double ShapeMetrics::*field;
    };
    const Metric metrics[] = {{"circularity", &ShapeMetrics::circularity}, {"aspect ratio", &ShapeMetrics::aspect_ratio}};
    const int panel_w = 60 + 50 * r.k, panel_h = 320, m = 40;
    const int w = 2 * panel_w + 3 * m, h = panel_h + 2 * m + 20;
    std::ostringstream s;
    s << svg_open(w, h);
    for (int p = 0; p < 2; ++p) {
        std::vector<std::vector<double>> groups(static_cast<std::size_t>(r.k));
        for (const auto& rec : r.particles) groups[static_cast<std::size_t>(rec.label)].push_back(rec.metrics.*metrics[p].field);
        double lo = 0.0, hi = 0.0;
        bool first = true;
        for (auto& g : groups) {
            std::sort(g.begin(), g.end());
            if (g.empty()) continue;
            lo = first ? g.front() : std::min(lo, g.front());
            hi = first ? g.back() : std::max(hi, g.back());
            first = false;
        }
        if (hi - lo < 1e-12) {
            lo -= 0.5;
            hi += 0.5;
        }
        const int x0 = m + p * (panel_w + m), y0 = m;
        auto ypos = [&](double v) { return y0 + panel_h - panel_h * (v - lo) / (hi - lo); };
        s << "<g class=\"panel\">\n<text x=\"" << x0 + panel_w / 2 << "\" y=\"" << y0 - 12
          << "\" text-anchor=\"middle\">" << metrics[p].name << "</text>\n";
        s << "<rect x=\"" << x0 << "\" y=\"" << y0 << "\" width=\"" << panel_w << "\" height=\"" << panel_h
          << "\" fill=\"none\" stroke=\"#444\"/>\n";
        s << "<text x=\"" << x0 - 4 << "\" y=\"" << y0 + 4 << "\" text-anchor=\"end\" font-size=\"9\">" << fmt(hi)
          << "</text><text x=\"" << x0 - 4 << "\" y=\"" << y0 + panel_h << "\" text-anchor=\"end\" font-size=\"9\">"
          << fmt(lo) << "</text>\n";
        for (int c = 0; c < r.k; ++c) {
            const auto& g = groups[static_cast<std::size_t>(c)];
            const double cx = x0 + 40 + 50 * c;
            s << "<g class=\"box\" data-cluster=\"" << c << "\">\n";
            if (!g.empty()) {
                const double q1 = quantile(g, 0.25), med = quantile(g, 0.5), q3 = quantile(g, 0.75);
                const double iqr = q3 - q1;
                const double wlo = *std::lower_bound(g.begin(), g.end(), q1 - 1.5 * iqr);
                const double whi = *(std::upper_bound(g.begin(), g.end(), q3 + 1.5 * iqr) - 1);
                s << "<line x1=\"" << fmt(cx) << "\" x2=\"" << fmt(cx) << "\" y1=\"" << fmt(ypos(whi)) << "\" y2=\""
                  << fmt(ypos(wlo)) << "\" stroke=\"#333\"/>\n";
                s << "<rect x=\"" << fmt(cx - 15) << "\" y=\"" << fmt(ypos(q3)) << "\" width=\"30\" height=\""
                  << fmt(ypos(q1) - ypos(q3)) << "\" fill=\"" << color(c) << "\" stroke=\"#333\"/>\n";
                s << "<line x1=\"" << fmt(cx - 15) << "\" x2=\"" << fmt(cx + 15) << "\" y1=\"" << fmt(ypos(med))
                  << "\" y2=\"" << fmt(ypos(med)) << "\" stroke=\"#000\" stroke-width=\"2\"/>\n";
            }
            s << "<text x=\"" << fmt(cx) << "\" y=\"" << y0 + panel_h + 16 << "\" text-anchor=\"middle\">" << c
              << "</text>\n</g>\n";
        }
        s << "</g>\n";
    }
    s << "</svg>\n";
    return s.str();
}

std::string montage_svg(const RunReport& r) {
    constexpr int cell = 48, per_row = static_cast<int>(kMontagePerCluster), m = 20, label_w = 80;
    const int w = label_w + per_row * cell + m, h = m + r.k * (cell + 8) + m;
    std::ostringstream s;
    s << svg_open(w, h);
    std::vector<int> slot(static_cast<std::size_t>(r.k), 0);
    for (int c = 0; c < r.k; ++c) {
        s << "<text x=\"8\" y=\"" << m + c * (cell + 8) + cell / 2 + 4 << "\">cluster " << c << "</text>\n";
    }
    for (const auto& rep : r.representatives) {
        const auto& mask = rep.mask;
        if (mask.width == 0 || mask.height == 0) continue;
        const int col = slot[static_cast<std::size_t>(rep.label)]++;
        const double scale = static_cast<double>(cell - 2) / std::max(mask.width, mask.height);
        s << "<g transform=\"translate(" << label_w + col * cell << ' ' << m + rep.label * (cell + 8) << ") scale("
          << fmt(scale) << ")\" fill=\"" << color(rep.label) << "\">\n";
        for (int y = 0; y < mask.height; ++y) {
            int x = 0;
            while (x < mask.width) {
                if (!mask.at(x, y)) {
                    ++x;
                    continue;
                }
                const int start = x;
                while (x < mask.width && mask.at(x, y)) ++x;
                s << "<rect x=\"" << start << "\" y=\"" << y << "\" width=\"" << x - start << "\" height=\"1\"/>";
            }
        }
        s << "\n</g>\n";
    }
    s << "</svg>\n";
    return s.str();
}

}  // namespace

std::vector<fs::path> emit_figures(const RunReport& report, const fs::path& dir) {
    const auto present = std::count_if(report.shares.begin(), report.shares.end(), [](double v) { return v > 0.0; });
    if (present < 2 || report.particles.empty()) throw ConfigError("figures need at least two clusters");
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw InputError("cannot create " + dir.string() + ": " + ec.message());
    const std::vector<fs::path> paths = {dir / "scatter.svg", dir / "boxplots.svg", dir / "montage.svg"};
    write_text(paths[0], scatter_svg(report));
    write_text(paths[1], boxplot_svg(report));
    write_text(paths[2], montage_svg(report));
    return paths;
}

}  // namespace morphprof
