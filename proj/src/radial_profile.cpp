#include "morphprof/descriptors.hpp"
#include "morphprof/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace morphprof {

namespace {

bool inside(const BinaryMask& mask, double x, double y) {
    return mask.at(static_cast<int>(std::floor(x + 0.5)), static_cast<int>(std::floor(y + 0.5)));
}

constexpr double kMarchStep = 0.25;
constexpr double kRefineTolerance = 0.01;

}  // namespace

RadialProfile radial_profile(const BinaryMask& mask, const Centroid& c, std::size_t n) {
    if (n < 8) throw ConfigError("radial profile needs at least 8 samples");
    if (!inside(mask, c.x, c.y)) throw InputError("centroid exterior");

    // Rays never need to travel past the farthest bounding-box corner.
    int x0 = mask.width, y0 = mask.height, x1 = -1, y1 = -1;
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            if (!mask.foreground[static_cast<std::size_t>(y) * mask.width + x]) continue;
            x0 = std::min(x0, x);
            x1 = std::max(x1, x);
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
        }
    }
    double reach = 0.0;
    for (double cx : {x0 - 0.5, x1 + 0.5}) {
        for (double cy : {y0 - 0.5, y1 + 0.5}) reach = std::max(reach, std::hypot(cx - c.x, cy - c.y));
    }
    const auto steps = static_cast<std::size_t>(std::ceil(reach / kMarchStep)) + 1;

    RadialProfile out;
    out.samples.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double theta = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
        const double dx = std::cos(theta);
        const double dy = std::sin(theta);
        double last_in = 0.0;
        for (std::size_t j = 1; j <= steps; ++j) {
            const double r = kMarchStep * static_cast<double>(j);
            if (inside(mask, c.x + r * dx, c.y + r * dy)) last_in = r;
        }
        double lo = last_in;
        double hi = last_in + kMarchStep;
        while (hi - lo > kRefineTolerance) {
            const double mid = 0.5 * (lo + hi);
            if (inside(mask, c.x + mid * dx, c.y + mid * dy)) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        out.samples[k] = lo;
    }
    return out;
}

RadialProfile normalize_profile(const RadialProfile& p) {
    const double mean = std::accumulate(p.samples.begin(), p.samples.end(), 0.0) / static_cast<double>(p.size());
    if (!(mean > 0.0)) throw NumericError("radial profile has zero mean");
    RadialProfile out = p;
    for (auto& v : out.samples) v /= mean;
    out.normalized = true;
    return out;
}

RadialProfile align_profile(const RadialProfile& p) {
    const auto& s = p.samples;
    const std::size_t n = s.size();
    if (n == 0) return p;
    const double peak = *std::max_element(s.begin(), s.end());

    auto continuation_greater = [&](std::size_t a, std::size_t b) {
        for (std::size_t j = 0; j < n; ++j) {
            const double va = s[(a + j) % n];
            const double vb = s[(b + j) % n];
            if (va != vb) return va > vb;
        }
        return false;
    };
    std::size_t start = n;
    for (std::size_t i = 0; i < n; ++i) {
        if (s[i] != peak) continue;
        if (start == n || continuation_greater(i, start)) start = i;
    }

    RadialProfile out = p;
    std::rotate_copy(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(start), s.end(), out.samples.begin());
    out.aligned = true;
    return out;
}

std::vector<double> cdf_fourier_magnitudes(const RadialProfile& p, std::size_t k) {
    const std::size_t n = p.size();
    if (k == 0 || 2 * k >= n) throw ConfigError("harmonic out of range");
    std::vector<double> out(k);
    for (std::size_t h = 1; h <= k; ++h) {
        double re = 0.0, im = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            const double angle = 2.0 * std::numbers::pi * static_cast<double>((h * t) % n) / static_cast<double>(n);
            re += p.samples[t] * std::cos(angle);
            im -= p.samples[t] * std::sin(angle);
        }
        out[h - 1] = std::hypot(re, im) / static_cast<double>(n);
    }
    return out;
}

DescriptorVector cdf_descriptor(const BinaryMask& mask, const Centroid& c) {
    auto profile = align_profile(normalize_profile(radial_profile(mask, c, kCdfSamples)));
    return {DescriptorKind::CDF100, std::move(profile.samples)};
}

}  // namespace morphprof
