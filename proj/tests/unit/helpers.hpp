#pragma once

#include "morphprof/clustering.hpp"
#include "morphprof/descriptors.hpp"
#include "morphprof/mask.hpp"
#include "morphprof/rng.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace testutil {

using morphprof::BinaryMask;

// Pixel centers inside the ellipse ((x-cx)/a)^2 + ((y-cy)/b)^2 <= 1.
inline BinaryMask ellipse_mask(int size, double cx, double cy, double a, double b) {
    BinaryMask m(size, size);
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const double u = (x - cx) / a, v = (y - cy) / b;
            if (u * u + v * v <= 1.0) m.set(x, y);
        }
    }
    return m;
}

inline BinaryMask disk_mask(int size, double cx, double cy, double r) {
    return ellipse_mask(size, cx, cy, r, r);
}

inline BinaryMask rect_mask(int size, int x0, int y0, int w, int h) {
    BinaryMask m(size, size);
    for (int y = y0; y < y0 + h; ++y) {
        for (int x = x0; x < x0 + w; ++x) m.set(x, y);
    }
    return m;
}

// Star-shaped blob r(t) = r0 (1 + sum a_j cos(j t + p_j)) with seeded harmonics.
inline BinaryMask lobed_blob(int size, double r0, std::uint64_t seed) {
    morphprof::Rng rng(seed);
    double amp[3], phase[3];
    for (int j = 0; j < 3; ++j) {
        amp[j] = rng.uniform(0.03, 0.12);
        phase[j] = rng.uniform(0.0, 6.283185307179586);
    }
    const double c = size / 2.0 + 0.3;
    BinaryMask m(size, size);
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const double dx = x - c, dy = y - c;
            const double t = std::atan2(dy, dx);
            double r = r0;
            for (int j = 0; j < 3; ++j) r += r0 * amp[j] * std::cos((j + 2) * t + phase[j]);
            if (std::hypot(dx, dy) <= r) m.set(x, y);
        }
    }
    return m;
}

inline std::filesystem::path temp_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("morphprof_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline void write_bytes(const std::filesystem::path& p, const std::string& bytes) {
    std::ofstream out(p, std::ios::binary);
    out << bytes;
}

inline double linf(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

inline morphprof::DataMatrix from_rows(const std::vector<std::vector<double>>& rows) {
    morphprof::DataMatrix x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
    return x;
}

// Seeded isotropic Gaussian blobs; returns data and generating labels.
inline std::pair<morphprof::DataMatrix, std::vector<int>> blobs(const std::vector<std::vector<double>>& centers,
                                                                 std::size_t per_blob, double sd, std::uint64_t seed) {
    morphprof::Rng rng(seed);
    const auto d = centers.front().size();
    morphprof::DataMatrix x(static_cast<Eigen::Index>(centers.size() * per_blob), static_cast<Eigen::Index>(d));
    std::vector<int> labels;
    Eigen::Index row = 0;
    for (std::size_t c = 0; c < centers.size(); ++c) {
        for (std::size_t i = 0; i < per_blob; ++i, ++row) {
            for (std::size_t j = 0; j < d; ++j) x(row, static_cast<Eigen::Index>(j)) = rng.normal(centers[c][j], sd);
            labels.push_back(static_cast<int>(c));
        }
    }
    return {x, labels};
}

// Two radial-profile families on the 200-point angle grid: near-flat versus a
// two-lobe cos(2t) shape, each with random low harmonics and sample noise.
// Labels alternate 0, 1, 0, ... Profiles come back normalized and aligned.
inline std::pair<std::vector<morphprof::RadialProfile>, std::vector<int>> two_families(std::size_t n,
                                                                                      std::uint64_t seed) {
    morphprof::Rng rng(seed);
    std::vector<morphprof::RadialProfile> out;
    std::vector<int> labels;
    constexpr std::size_t g = 200;
    for (std::size_t i = 0; i < n; ++i) {
        const int label = static_cast<int>(i % 2);
        const double amp = label ? 0.3 + 0.02 * rng.normal() : 0.0;
        double a[3], b[3];
        for (int h = 0; h < 3; ++h) {
            a[h] = 0.015 * rng.normal();
            b[h] = 0.015 * rng.normal();
        }
        morphprof::RadialProfile p;
        p.samples.resize(g);
        for (std::size_t k = 0; k < g; ++k) {
            const double t = 2.0 * 3.141592653589793 * static_cast<double>(k) / g;
            double v = 1.0 + amp * std::cos(2.0 * t);
            for (int h = 0; h < 3; ++h) v += a[h] * std::cos((h + 3) * t) + b[h] * std::sin((h + 3) * t);
            p.samples[k] = v + 0.005 * rng.normal();
        }
        out.push_back(morphprof::align_profile(morphprof::normalize_profile(p)));
        labels.push_back(label);
    }
    return {out, labels};
}

}  // namespace testutil
