#include "fft.hpp"
#include "morphprof/descriptors.hpp"
#include "morphprof/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace morphprof {

Contour canonical_start(const Contour& contour) {
    const auto& pts = contour.points;
    const std::size_t n = pts.size();
    if (n < 2) return contour;

    long long sx = 0, sy = 0;
    for (const auto& p : pts) {
        sx += std::llround(p.x);
        sy += std::llround(p.y);
    }
    const auto nn = static_cast<long long>(n);
    std::vector<__int128> key(n);
    for (std::size_t i = 0; i < n; ++i) {
        const __int128 dx = static_cast<__int128>(nn) * std::llround(pts[i].x) - sx;
        const __int128 dy = static_cast<__int128>(nn) * std::llround(pts[i].y) - sy;
        key[i] = dx * dx + dy * dy;
    }

    // Two-candidate scan for the lexicographically largest rotation.
    std::size_t i = 0, j = 1, k = 0;
    while (i < n && j < n && k < n) {
        const auto a = key[(i + k) % n];
        const auto b = key[(j + k) % n];
        if (a == b) {
            ++k;
            continue;
        }
        if (a < b) {
            i += k + 1;
        } else {
            j += k + 1;
        }
        if (i == j) ++j;
        k = 0;
    }
    const std::size_t start = std::min(i, j);

    Contour out;
    out.points.reserve(n);
    for (std::size_t t = 0; t < n; ++t) out.points.push_back(pts[(start + t) % n]);
    return out;
}

std::vector<Point2> contour_resample(const Contour& contour, std::size_t n) {
    const auto& pts = contour.points;
    const std::size_t m = pts.size();
    if (n < 4) throw ConfigError("contour resampling needs at least 4 points");
    if (m < 2) throw InputError("contour degenerate");

    std::vector<double> cumulative(m + 1, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        const auto& a = pts[i];
        const auto& b = pts[(i + 1) % m];
        cumulative[i + 1] = cumulative[i] + std::hypot(b.x - a.x, b.y - a.y);
    }
    const double total = cumulative[m];
    if (!(total > 0.0)) throw InputError("contour degenerate");

    std::vector<Point2> out;
    out.reserve(n);
    std::size_t seg = 0;
    for (std::size_t j = 0; j < n; ++j) {
        const double s = total * static_cast<double>(j) / static_cast<double>(n);
        while (seg + 1 < m && cumulative[seg + 1] <= s) ++seg;
        const double len = cumulative[seg + 1] - cumulative[seg];
        const auto& a = pts[seg];
        const auto& b = pts[(seg + 1) % m];
        const double t = len > 0.0 ? (s - cumulative[seg]) / len : 0.0;
        out.push_back({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
    }
    return out;
}

ComplexSpectrum fourier_spectrum(const std::vector<Point2>& points) {
    if (points.empty()) throw InputError("empty point sequence");
    std::vector<std::complex<double>> z;
    z.reserve(points.size());
    for (const auto& p : points) z.emplace_back(p.x, p.y);
    ComplexSpectrum spec{detail::dft(z)};
    const double inv_n = 1.0 / static_cast<double>(points.size());
    for (auto& c : spec.coeffs) c *= inv_n;
    return spec;
}

std::vector<double> fourier_descriptor(const ComplexSpectrum& spectrum, std::size_t k) {
    const std::size_t n = spectrum.size();
    if (k == 0 || k + 1 > n / 2) throw ConfigError("harmonic out of range");
    double energy = 0.0;
    for (std::size_t i = 1; i < n; ++i) energy += std::norm(spectrum.coeffs[i]);
    const double first = std::abs(spectrum.coefficient(1));
    if (!(first > 1e-9 * std::sqrt(energy)) || first == 0.0) throw NumericError("degenerate first harmonic");

    std::vector<double> out;
    out.reserve(2 * k);
    const auto kk = static_cast<long>(k);
    for (long h = -kk; h <= kk; ++h) {
        if (h == 0) continue;
        out.push_back(std::abs(spectrum.coefficient(h)) / first);
    }
    return out;
}

std::vector<Point2> reconstruct_contour(const ComplexSpectrum& spectrum, std::size_t k) {
    const std::size_t n = spectrum.size();
    if (n < 2 || k + 1 > n / 2) throw ConfigError("harmonic out of range");
    const auto kk = static_cast<long>(k);
    // At k = N/2 - 1 the lone n = -N/2 term is added so the full inverse is exact.
    const bool nyquist = n % 2 == 0 && 2 * (k + 1) == n;
    std::vector<Point2> out(n);
    for (std::size_t t = 0; t < n; ++t) {
        std::complex<double> z = spectrum.coefficient(0);
        for (long h = 1; h <= kk; ++h) {
            const double angle = 2.0 * std::numbers::pi * static_cast<double>((static_cast<std::size_t>(h) * t) % n) /
                                 static_cast<double>(n);
            const auto w = std::polar(1.0, angle);
            z += spectrum.coefficient(h) * w + spectrum.coefficient(-h) * std::conj(w);
        }
        if (nyquist) z += spectrum.coefficient(-kk - 1) * ((t % 2 == 0) ? 1.0 : -1.0);
        out[t] = {z.real(), z.imag()};
    }
    return out;
}

DescriptorVector fd_descriptor(const Contour& contour) {
    const auto resampled = contour_resample(canonical_start(contour), kContourSamples);
    return {DescriptorKind::FD10, fourier_descriptor(fourier_spectrum(resampled), kFdHarmonics)};
}

}  // namespace morphprof
